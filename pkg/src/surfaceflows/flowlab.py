"""Numerical flow analysis: integration, zero finding, winding indices,
index-sum audits, flow-box rectification, and trajectory covariance checks.

Fields are callables taking a complex point and returning a complex value
(u + iv).  Evaluation may raise NearPole / PoleHit / DenominatorVanishes;
every routine here treats those as "the point is not evaluable" and either
terminates, skips, or retries at a safer location, as documented per
function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DenominatorVanishes,
    EquilibriumInBox,
    NearPole,
    NewtonDiverged,
    NonIntegerWinding,
    PoleHit,
    ZeroOnContour,
)
from .moebius import MoebiusMap, apply

_POLE_ERRORS = (NearPole, PoleHit, DenominatorVanishes)

ZERO_TOL = 1e-8
DEFAULT_MAX_DISP = 0.1
DEFAULT_H0 = 0.01
WINDING_SAMPLES = 1024
WINDING_AGREE_TOL = 0.01
WINDING_INTEGER_TOL = 0.05

CLASS_HYPERBOLIC = "hyperbolic-like"
CLASS_ELLIPTIC = "elliptic/center-like"
CLASS_HIGHER = "higher"
CLASS_UNCLASSIFIED = "unclassified"


def classify_index(index: int) -> str:
    if index == -1:
        return CLASS_HYPERBOLIC
    if index == 1:
        return CLASS_ELLIPTIC
    if abs(index) >= 2:
        return CLASS_HIGHER
    return CLASS_UNCLASSIFIED


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit with its termination reason.

    Times are strictly monotone in the integration direction (increasing
    for forward runs, decreasing for reverse ones).
    """

    times: tuple[float, ...]
    points: tuple[complex, ...]
    termination: str  # "time-limit" | "pole-proximity" | "region-exit"

    def __post_init__(self):
        if len(self.times) != len(self.points) or not self.times:
            raise ValueError("times and points must be equal-length and nonempty")
        if len(self.times) > 1:
            forward = self.times[1] > self.times[0]
            for t0, t1 in zip(self.times, self.times[1:]):
                if (t1 <= t0) if forward else (t1 >= t0):
                    raise ValueError("times must be strictly monotone")

    @property
    def samples(self) -> tuple[tuple[float, complex], ...]:
        return tuple(zip(self.times, self.points))

    @property
    def end_point(self) -> complex:
        return self.points[-1]

    @property
    def end_time(self) -> float:
        return self.times[-1]


def _rk4_step(field, z: complex, step: float) -> complex:
    k1 = field(z)
    k2 = field(z + 0.5 * step * k1)
    k3 = field(z + 0.5 * step * k2)
    k4 = field(z + step * k3)
    return (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _inside(region, z: complex) -> bool:
    x0, x1, y0, y1 = region
    return x0 <= z.real <= x1 and y0 <= z.imag <= y1


def integrate(
    field,
    z0: complex,
    t_end: float,
    h0: float = DEFAULT_H0,
    region=None,
    max_disp: float = DEFAULT_MAX_DISP,
    max_steps: int = 200_000,
) -> Trajectory:
    """Classical fourth-order single-step integration with step halving.

    A step whose displacement exceeds ``max_disp`` is retried at half the
    step size; steps shrink without bound near poles, which terminates the
    run with reason "pole-proximity".  Negative ``t_end`` integrates in
    reverse time.  Exhausting ``max_steps`` reports "time-limit" (the
    budget, like the horizon, caps the time actually reached).

    Raises NearPole (or kin) only if the starting point itself is not
    evaluable.
    """
    z0 = complex(z0)
    if t_end == 0:
        raise ValueError("t_end must be nonzero")
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    field(z0)  # not evaluable at the seed -> propagate

    direction = 1.0 if t_end > 0 else -1.0
    horizon = abs(t_end)
    times = [0.0]
    points = [z0]
    termination = "time-limit"
    t = 0.0
    z = z0
    h = min(h0, horizon)

    for _ in range(max_steps):
        remaining = horizon - abs(t)
        if remaining <= 1e-15 * horizon:
            break
        step = min(h, remaining)
        dz = None
        while True:
            try:
                dz = _rk4_step(field, z, direction * step)
            except _POLE_ERRORS:
                dz = None
            if dz is not None and abs(dz) <= max_disp:
                break
            step *= 0.5
            if step < 1e-14 * horizon:
                termination = "pole-proximity"
                dz = None
                break
        if dz is None:
            break
        z = z + dz
        t = t + direction * step
        times.append(t)
        points.append(z)
        h = min(step * 2.0, h0) if abs(dz) < 0.25 * max_disp else step
        if region is not None and not _inside(region, z):
            termination = "region-exit"
            break

    return Trajectory(tuple(times), tuple(points), termination)


def _flow_to_times(field, z0, targets, h0=DEFAULT_H0, max_disp=DEFAULT_MAX_DISP,
                   max_steps=200_000):
    """Integrate, landing exactly on each target time; truncates at poles.

    Targets must be strictly monotone, all nonzero and of one sign.
    Returns (points, truncated_flag).
    """
    z = complex(z0)
    t = 0.0
    direction = 1.0 if targets[-1] > 0 else -1.0
    h = h0
    out = []
    steps = 0
    for target in targets:
        while (target - t) * direction > 1e-15 * max(1.0, abs(target)):
            step = min(h, abs(target - t))
            try:
                dz = _rk4_step(field, z, direction * step)
            except _POLE_ERRORS:
                dz = None
            if dz is None or abs(dz) > max_disp:
                h = step * 0.5
                if h < 1e-14 * max(1.0, abs(target)):
                    return out, True
                continue
            z = z + dz
            t = t + direction * step
            if abs(dz) < 0.25 * max_disp:
                h = min(step * 2.0, h0)
            steps += 1
            if steps > max_steps:
                return out, True
        out.append(z)
    return out, False


# ---------------------------------------------------------------------------
# winding numbers


def winding_on_path(field, points, zero_tol: float = ZERO_TOL) -> float:
    """Accumulated change of arg(field)/2pi along a closed polyline.

    ``points`` is traversed in order and closed back to the first point.
    Raises ZeroOnContour when the field magnitude drops below ``zero_tol``
    anywhere on the path.  Evaluation failures propagate.
    """
    values = [field(p) for p in points]
    if min(abs(v) for v in values) < zero_tol:
        raise ZeroOnContour("field magnitude below tolerance on the contour")
    total = 0.0
    n = len(values)
    for k in range(n):
        total += cmath.phase(values[(k + 1) % n] / values[k])
    return total / (2.0 * math.pi)


def _circle(center: complex, radius: float, n: int):
    return [
        center + radius * complex(math.cos(2.0 * math.pi * k / n),
                                  math.sin(2.0 * math.pi * k / n))
        for k in range(n)
    ]


def winding_estimate_circle(field, center, radius, samples, zero_tol=ZERO_TOL) -> float:
    """Un-rounded winding estimate on a circle (counterclockwise)."""
    return winding_on_path(field, _circle(complex(center), radius, samples), zero_tol)


def winding_index(
    field,
    center: complex,
    radius: float,
    samples: int = WINDING_SAMPLES,
    zero_tol: float = ZERO_TOL,
    agree_tol: float = WINDING_AGREE_TOL,
    max_samples: int = 1 << 17,
) -> int:
    """Degree of the field around a circle, computed by argument counting.

    Sampling doubles until two successive estimates agree within
    ``agree_tol``; the settled value must lie within 0.05 of an integer,
    else NonIntegerWinding is raised.
    """
    if samples < 64:
        raise ValueError("need at least 64 samples")
    if radius <= 0:
        raise ValueError("radius must be positive")
    center = complex(center)
    previous = None
    n = samples
    while True:
        estimate = winding_estimate_circle(field, center, radius, n, zero_tol)
        if previous is not None and abs(estimate - previous) <= agree_tol:
            break
        if n * 2 > max_samples:
            raise NonIntegerWinding(
                f"winding estimates did not settle by {max_samples} samples"
            )
        previous = estimate
        n *= 2
    nearest = round(estimate)
    if abs(estimate - nearest) > WINDING_INTEGER_TOL:
        raise NonIntegerWinding(f"estimate {estimate:.4f} is not near an integer")
    return int(nearest)


def sector_index(n_e: int, n_h: int) -> Fraction:
    """1 + (elliptic - hyperbolic)/2 as an exact rational.

    A half-integer result (odd sector imbalance) is representable and left
    to the caller to flag; it is not an error.
    """
    if n_e < 0 or n_h < 0:
        raise ValueError("sector counts must be nonnegative")
    return Fraction(2 + n_e - n_h, 2)


# ---------------------------------------------------------------------------
# zero finding


@dataclass(frozen=True)
class ZeroRecord:
    location: complex
    winding_index: int
    residual: float
    classification: str

    def to_dict(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "winding_index": self.winding_index,
            "residual": self.residual,
            "classification": self.classification,
        }


@dataclass
class ZeroScan:
    """Sequence of located zeros plus diagnostics for dropped candidates."""

    zeros: list[ZeroRecord]
    dropped: list[dict]

    def __iter__(self):
        return iter(self.zeros)

    def __len__(self):
        return len(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]


def _eval_or_none(field, z):
    try:
        return field(z)
    except _POLE_ERRORS:
        return None


def _newton_refine(field, z0, zero_tol, max_iter, step_cap):
    z = complex(z0)
    fz = _eval_or_none(field, z)
    if fz is None:
        raise NewtonDiverged("start not evaluable")
    below_tol = False
    for _ in range(max_iter):
        below_tol = abs(fz) <= zero_tol
        h = 1e-7 * max(1.0, abs(z))
        probes = [_eval_or_none(field, z + dz) for dz in (h, -h, 1j * h, -1j * h)]
        if any(p is None for p in probes):
            if below_tol:
                return z
            raise NewtonDiverged("jacobian probe hit a pole")
        fxp, fxm, fyp, fym = probes
        j11 = (fxp.real - fxm.real) / (2 * h)
        j12 = (fyp.real - fym.real) / (2 * h)
        j21 = (fxp.imag - fxm.imag) / (2 * h)
        j22 = (fyp.imag - fym.imag) / (2 * h)
        det = j11 * j22 - j12 * j21
        if not math.isfinite(det) or abs(det) < 1e-300:
            if below_tol:
                return z
            raise NewtonDiverged("singular jacobian")
        dx = -(j22 * fz.real - j12 * fz.imag) / det
        dy = -(-j21 * fz.real + j11 * fz.imag) / det
        delta = complex(dx, dy)
        # once below tolerance, keep polishing until the step itself is
        # negligible: stopping at |f| <= tol alone leaves a sqrt(tol)-sized
        # ring of pseudo-locations around a multiple zero
        if below_tol and abs(delta) <= 1e-10 * max(1.0, abs(z)):
            return z
        if abs(delta) > step_cap:
            delta *= step_cap / abs(delta)
        lam = 1.0
        accepted = False
        while lam >= 1.0 / 1024.0:
            trial = z + lam * delta
            ftrial = _eval_or_none(field, trial)
            if ftrial is not None and (abs(ftrial) < abs(fz) or abs(ftrial) <= zero_tol):
                z, fz = trial, ftrial
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if below_tol:
                return z
            raise NewtonDiverged("damped step stalled")
    if abs(fz) <= zero_tol:
        return z
    raise NewtonDiverged("iteration budget exhausted")


def _component_brackets(values, comp) -> bool:
    lo = min(comp(v) for v in values)
    hi = max(comp(v) for v in values)
    return lo <= 0.0 <= hi


def _locate_zero_points(
    field, region, n, zero_tol, newton_max_iter=50, dedup_dist=None
) -> tuple[list[complex], list[dict]]:
    """Grid-bracketed, Newton-refined, deduplicated zero locations."""
    x0, x1, y0, y1 = (float(v) for v in region)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate region")
    if n < 8:
        raise ValueError("grid resolution must be at least 8")
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    values = [[_eval_or_none(field, complex(x, y)) for x in xs] for y in ys]

    diag = math.hypot(x1 - x0, y1 - y0)
    cell = math.hypot(xs[1] - xs[0], ys[1] - ys[0])
    if dedup_dist is None:
        dedup_dist = max(1e-12, 1e-5 * diag)

    candidates = []
    for j in range(n):
        for i in range(n):
            corners = (values[j][i], values[j][i + 1], values[j + 1][i + 1], values[j + 1][i])
            if any(v is None for v in corners):
                continue
            if _component_brackets(corners, lambda v: v.real) and _component_brackets(
                corners, lambda v: v.imag
            ):
                candidates.append(complex(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])))

    dropped: list[dict] = []
    converged: list[complex] = []
    pad = 0.05 * diag
    for start in candidates:
        try:
            z = _newton_refine(field, start, zero_tol, newton_max_iter, step_cap=2.0 * cell)
        except NewtonDiverged as exc:
            dropped.append({"start": [start.real, start.imag], "reason": str(exc)})
            continue
        if not (x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad):
            dropped.append({"start": [start.real, start.imag], "reason": "left the region"})
            continue
        converged.append(z)

    converged.sort(key=lambda z: (z.real, z.imag))
    zeros: list[complex] = []
    for z in converged:
        if all(abs(z - w) > dedup_dist for w in zeros):
            zeros.append(z)
    return zeros, dropped


def find_zeros(
    field,
    region,
    n: int,
    zero_tol: float = ZERO_TOL,
    newton_max_iter: int = 50,
    dedup_dist: float | None = None,
    samples: int = WINDING_SAMPLES,
) -> ZeroScan:
    """Grid scan for zeros on an axis-aligned rectangle (x0, x1, y0, y1).

    Cells where both field components bracket zero seed a damped Newton
    refinement; converged locations are deduplicated, and each zero gets a
    winding index (with radius backoff when a contour is unusable).
    Candidates that diverge, leave the region, or defeat the winding
    computation are reported in ``dropped`` rather than silently ignored.
    """
    x0, x1, y0, y1 = (float(v) for v in region)
    zeros, dropped = _locate_zero_points(
        field, region, n, zero_tol, newton_max_iter, dedup_dist
    )

    records: list[ZeroRecord] = []
    width, height = x1 - x0, y1 - y0
    for z in zeros:
        radius = min(width, height) / 8.0
        others = [w for w in zeros if w != z]
        if others:
            radius = min(radius, 0.45 * min(abs(z - w) for w in others))
        edge = min(z.real - x0, x1 - z.real, z.imag - y0, y1 - z.imag)
        if edge > 0:
            radius = min(radius, 0.9 * edge)
        radius = max(radius, 64.0 * zero_tol)
        index = None
        for _ in range(6):
            try:
                index = winding_index(field, z, radius, samples, zero_tol=zero_tol)
                break
            except (ZeroOnContour, NonIntegerWinding, *_POLE_ERRORS):
                radius *= 0.5
        if index is None:
            dropped.append({"start": [z.real, z.imag], "reason": "winding failed"})
            continue
        residual = abs(field(z))
        records.append(
            ZeroRecord(
                location=z,
                winding_index=index,
                residual=residual,
                classification=classify_index(index),
            )
        )

    records.sort(key=lambda r: (r.location.real, r.location.imag))
    return ZeroScan(zeros=records, dropped=dropped)


# ---------------------------------------------------------------------------
# index-sum audit


@dataclass(frozen=True)
class PoincareHopfReport:
    total: int
    chi: int
    ok: bool
    table: tuple[tuple[complex, int], ...]

    def to_dict(self) -> dict:
        return {
            "total_index": self.total,
            "chi": self.chi,
            "ok": self.ok,
            "equilibria": [
                {"location": [z.real, z.imag], "index": k} for z, k in self.table
            ],
        }


def poincare_hopf_check(zeros, chi: int) -> PoincareHopfReport:
    """Compare the sum of winding indices against a target characteristic."""
    records = list(zeros)
    for i, r in enumerate(records):
        for other in records[i + 1:]:
            if abs(r.location - other.location) < 1e-12:
                raise ValueError("zeros must be pairwise distinct")
    total = sum(r.winding_index for r in records)
    table = tuple((r.location, r.winding_index) for r in records)
    return PoincareHopfReport(total=total, chi=int(chi), ok=(total == int(chi)), table=table)


# ---------------------------------------------------------------------------
# flow boxes


@dataclass(frozen=True)
class FlowBoxChart:
    """Local chart in which the flow is numerically straightened.

    The grid point at (s_i, t_j) is the time-t_j flow image of the
    transversal point at arc parameter s_i.  ``speed`` is the constant of
    the straightened system (1: chart time is flow time), and ``residual``
    the worst interior deviation of the pushed-forward field from (1, 0).
    """

    base: complex
    transversal: tuple[complex, complex]
    s_values: tuple[float, ...]
    t_values: tuple[float, ...]
    points: tuple[tuple[complex, ...], ...]  # rows by s, columns by t
    residual: float
    speed: float = 1.0


def rectify(
    field,
    p: complex,
    box: float,
    grid: int = 9,
    zero_tol: float = ZERO_TOL,
    h0: float = 0.005,
    max_disp: float = 0.05,
) -> FlowBoxChart:
    """Build a flow-box chart of half-width ``box`` around a regular point.

    Raises EquilibriumInBox when the field is below tolerance at the base
    point or anywhere on the constructed grid.
    """
    p = complex(p)
    if box <= 0:
        raise ValueError("box must be positive")
    if grid < 5 or grid % 2 == 0:
        raise ValueError("grid must be an odd integer >= 5")
    fp = field(p)
    if abs(fp) <= max(zero_tol, 1e-12):
        raise EquilibriumInBox(f"|field| = {abs(fp):.3g} at the base point")
    probe = 1.2 * box
    zeros_nearby, _ = _locate_zero_points(
        field,
        (p.real - probe, p.real + probe, p.imag - probe, p.imag + probe),
        16,
        zero_tol,
    )
    if zeros_nearby:
        z = zeros_nearby[0]
        raise EquilibriumInBox(
            f"equilibrium at ({z.real:.6g}, {z.imag:.6g}) inside the box scale"
        )
    speed0 = abs(fp)
    normal = 1j * fp / speed0
    t_span = box / speed0
    s_values = tuple(np.linspace(-box, box, grid).tolist())
    t_values = tuple(np.linspace(-t_span, t_span, grid).tolist())
    t_pos = [t for t in t_values if t > 0]
    t_neg = [t for t in t_values if t < 0][::-1]  # toward more negative

    rows: list[tuple[complex, ...]] = []
    for s in s_values:
        zs = p + s * normal
        row = {0.0: zs}
        for targets in (t_pos, t_neg):
            if not targets:
                continue
            pts, truncated = _flow_to_times(field, zs, targets, h0=h0, max_disp=max_disp)
            if truncated:
                raise NearPole("chart integration hit a pole inside the box")
            for t, z in zip(targets, pts):
                row[t] = z
        rows.append(tuple(row[t] for t in t_values))
    points = tuple(rows)

    for row in points:
        for z in row:
            fz = field(z)
            if abs(fz) <= zero_tol:
                raise EquilibriumInBox(f"|field| = {abs(fz):.3g} inside the requested box")

    dt = t_values[1] - t_values[0]
    ds = s_values[1] - s_values[0]
    residual = 0.0
    for i in range(1, grid - 1):
        for j in range(1, grid - 1):
            pt = (points[i][j + 1] - points[i][j - 1]) / (2.0 * dt)
            ps = (points[i + 1][j] - points[i - 1][j]) / (2.0 * ds)
            fz = field(points[i][j])
            det = pt.real * ps.imag - pt.imag * ps.real
            if abs(det) < 1e-300:
                raise EquilibriumInBox("degenerate chart jacobian")
            alpha = (ps.imag * fz.real - ps.real * fz.imag) / det
            beta = (-pt.imag * fz.real + pt.real * fz.imag) / det
            residual = max(residual, math.hypot(alpha - 1.0, beta))

    return FlowBoxChart(
        base=p,
        transversal=(p - box * normal, p + box * normal),
        s_values=s_values,
        t_values=t_values,
        points=points,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# covariance of trajectories under a Moebius map


def covariance_check(
    field,
    m: MoebiusMap,
    z0: complex,
    t_end: float,
    n_samples: int = 32,
    h0: float = DEFAULT_H0,
    max_disp: float = DEFAULT_MAX_DISP,
) -> float:
    """Max over sample times of |m(flow_t(z0)) - flow_t(m(z0))|.

    If either trajectory leaves the evaluable region early the comparison
    truncates to the common time range; with no common samples at all,
    NearPole is raised.
    """
    z0 = complex(z0)
    if t_end == 0:
        raise ValueError("t_end must be nonzero")
    targets = [t_end * (k + 1) / n_samples for k in range(n_samples)]
    pts_a, _ = _flow_to_times(field, z0, targets, h0=h0, max_disp=max_disp)
    pts_b, _ = _flow_to_times(field, apply(m, z0), targets, h0=h0, max_disp=max_disp)
    common = min(len(pts_a), len(pts_b))
    if common == 0:
        raise NearPole("no common integrable range for the covariance check")
    worst = 0.0
    for a, b in zip(pts_a[:common], pts_b[:common]):
        try:
            worst = max(worst, abs(apply(m, a) - b))
        except PoleHit:
            break
    return worst
