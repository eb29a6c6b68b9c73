"""Analytic vector fields on surfaces from group data, their flows and
equilibrium indices, connected-sum surgery bookkeeping, and
handlebody-gluing (splitting feasibility, twist words, first homology).
"""

__version__ = "0.1.0"

from . import autovec, errors, flowlab, heegaard, moebius, surgery  # noqa: F401
