"""Stationary points, parameter regions, stability and limit cycles of
the interaction-loss Bloch flow (tunneling scaled to v = 1).

Setting the three Bloch derivatives to zero yields two families:

* the trivial pair (+-1/2, 0, 0), present for all (g, k);
* points with sz != 0, where sx = (g/2)(1 - 4 sz^2),
  sy = k sz (1 - 4 sz^2), and y = sz^2 solves the biquadratic

      -g^2 + 1 + 4 g^2 y - 4 k^2 y + 16 k^2 y^2 = 0,

  i.e. y = (k^2 - g^2 +- sqrt(P)) / (8 k^2) with the discriminant
  P(g, k) = g^4 + k^4 + 2 g^2 k^2 - 4 k^2.

P vanishes on the two unit circles g^2 + (k -+ 1)^2 = 1.  The parameter
plane splits into region 1 (P < 0: two fixed points), region 2 (P > 0,
|g| < 1: six) and region 3 (P > 0, |g| > 1: four).  The flow restricted
to the sphere is two-dimensional; stability is typed from the tangent
projection of the linearisation, which on the sphere reads

    J = [[ 8 k sz^2, -4 g sz,   -4 g sy + 16 k sx sz ],
         [ 4 g sz,    8 k sz^2,  4 g sx - 2 v + 16 k sy sz ],
         [-16 k sx sz, 2 v - 16 k sy sz, -8 k (sx^2 + sy^2) ]].

For small |g| and P < 0 there is additionally an isolated periodic
orbit; at g = 0 it is exactly the great circle sx = 0 (provided
|k| < 2 v), unstable for k > 0 and stable for k < 0.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import BlochState, ModelParams, SPHERE_RADIUS_SQ, mf_rhs_complex_interaction
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate,
    rk4_step,
    VECTOR_FIELDS,
)

__all__ = [
    "Region",
    "Stability",
    "Family",
    "DiscriminantReport",
    "FixedPointRecord",
    "FixedPointCatalog",
    "StabilityResult",
    "LimitCycle",
    "discriminant",
    "classify_region",
    "fixed_point_catalog",
    "stability_matrix",
    "classify_stability",
    "tangent_basis",
    "find_limit_cycle",
    "rhs_residual",
    "BOUNDARY_TOL",
]

BOUNDARY_TOL = 1e-12
_RESIDUAL_TOL = 1e-10
_SPHERE_PRE_TOL = 1e-8

log = logging.getLogger(__name__)


class Region(enum.Enum):
    REGION_1 = "Region1"
    REGION_2 = "Region2"
    REGION_3 = "Region3"
    BOUNDARY = "Boundary"


class Stability(enum.Enum):
    SINK = "Sink"
    SOURCE = "Source"
    SADDLE = "Saddle"
    CENTER = "Center"
    DEGENERATE = "Degenerate"


class Family(enum.Enum):
    TRIVIAL_PLUS = "TrivialPlus"
    TRIVIAL_MINUS = "TrivialMinus"
    S1_PLUS = "S1Plus"
    S1_MINUS = "S1Minus"
    S2_PLUS = "S2Plus"
    S2_MINUS = "S2Minus"


@dataclass(frozen=True)
class DiscriminantReport:
    """Value of P(g, k) and the real roots y = sz^2, when present.

    For k = 0 the biquadratic degenerates to a linear equation in y;
    the single root (g^2 - 1) / (4 g^2), valid for |g| > 1, is reported
    in the y_plus slot.
    """

    P: float
    y_plus: Optional[float]
    y_minus: Optional[float]


@dataclass(frozen=True)
class StabilityResult:
    stability: Stability
    tangent_eigenvalues: tuple
    normal_eigenvalue: complex


@dataclass(frozen=True)
class FixedPointRecord:
    position: BlochState
    family: Family
    y_root: Optional[float]
    residual: float
    tangent_eigenvalues: Optional[tuple] = None
    normal_eigenvalue: Optional[complex] = None
    stability: Optional[Stability] = None


@dataclass(frozen=True)
class FixedPointCatalog:
    """All stationary points at (g, k), with a degeneracy warning when
    the parameters sit on a bifurcation boundary."""

    records: tuple
    region: Region
    degenerate: bool

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def by_family(self, family: Family) -> FixedPointRecord:
        for rec in self.records:
            if rec.family is family:
                return rec
        raise KeyError(family)


def _require_unit_v(p: ModelParams):
    if p.v != 1.0:
        raise ValueError(f"analysis assumes v = 1, got v={p.v}")


def discriminant(g: float, k: float) -> DiscriminantReport:
    """P(g, k) and the candidate roots y = sz^2 of the biquadratic.

    Within 1e-12 of the fold (P = 0) the sign of the computed P is pure
    roundoff; it is clamped to exactly zero and the merged double root
    is reported in both slots, keeping the boundary deterministic.
    """
    P = g ** 4 + k ** 4 + 2.0 * g * g * k * k - 4.0 * k * k
    if k == 0.0:
        # Linear limit of the biquadratic; a root exists only in the
        # self-trapping regime |g| > 1.
        if abs(g) > 1.0:
            return DiscriminantReport(P, (g * g - 1.0) / (4.0 * g * g), None)
        return DiscriminantReport(P, None, None)
    if abs(P) <= BOUNDARY_TOL:
        merged = (k * k - g * g) / (8.0 * k * k)
        return DiscriminantReport(0.0, merged, merged)
    if P < 0.0:
        return DiscriminantReport(P, None, None)
    root = math.sqrt(P)
    denom = 8.0 * k * k
    return DiscriminantReport(
        P, (k * k - g * g + root) / denom, (k * k - g * g - root) / denom
    )


def classify_region(g: float, k: float) -> Region:
    """Region of the (g, k) plane; Boundary within 1e-12 of P = 0 or
    |g| = 1 (the latter only matters where roots exist)."""
    rep = discriminant(g, k)
    if abs(rep.P) <= BOUNDARY_TOL or abs(abs(g) - 1.0) <= BOUNDARY_TOL:
        return Region.BOUNDARY
    if rep.P < 0.0:
        return Region.REGION_1
    return Region.REGION_3 if abs(g) > 1.0 else Region.REGION_2


def rhs_residual(s: BlochState, p: ModelParams) -> float:
    """Magnitude of the Bloch part of the interaction-loss flow."""
    d = mf_rhs_complex_interaction(s, p)
    return math.sqrt(d.dsx ** 2 + d.dsy ** 2 + d.dsz ** 2)


def _branch_records(y, plus_family, minus_family, g, k, p):
    """The +-sz pair of stationary points sharing the root y = sz^2."""
    if y is None or not 0.0 < y <= SPHERE_RADIUS_SQ:
        return []
    sz = math.sqrt(y)
    shrink = 1.0 - 4.0 * y
    sx = 0.5 * g * shrink
    records = []
    for family, sign in ((plus_family, 1.0), (minus_family, -1.0)):
        pos = BlochState(sx, sign * k * sz * shrink, sign * sz)
        records.append(
            FixedPointRecord(pos, family, y, rhs_residual(pos, p))
        )
    return records


def fixed_point_catalog(
    g: float, k: float, classify: bool = True
) -> FixedPointCatalog:
    """Closed-form catalog of stationary points at (g, k), v = 1,
    with stability typing filled in for every record.

    ``classify=False`` skips the eigenvalue work and leaves the
    stability fields unset; parameter-plane sweeps that only count
    points are about five times faster that way.
    """
    p = ModelParams(v=1.0, g=g, k=k)
    region = classify_region(g, k)
    records = [
        FixedPointRecord(
            BlochState(0.5, 0.0, 0.0), Family.TRIVIAL_PLUS, None,
            rhs_residual(BlochState(0.5, 0.0, 0.0), p),
        ),
        FixedPointRecord(
            BlochState(-0.5, 0.0, 0.0), Family.TRIVIAL_MINUS, None,
            rhs_residual(BlochState(-0.5, 0.0, 0.0), p),
        ),
    ]
    rep = discriminant(g, k)
    degenerate = region is Region.BOUNDARY
    merged = (
        rep.y_plus is not None
        and rep.y_minus is not None
        and abs(rep.P) <= BOUNDARY_TOL
    )
    records += _branch_records(rep.y_plus, Family.S1_PLUS, Family.S1_MINUS, g, k, p)
    if not merged:
        records += _branch_records(
            rep.y_minus, Family.S2_PLUS, Family.S2_MINUS, g, k, p
        )
    for rec in records:
        if rec.residual > _RESIDUAL_TOL:
            raise RuntimeError(
                f"closed-form point {rec.family.value} at (g,k)=({g},{k}) "
                f"violates stationarity: residual {rec.residual:.3e}"
            )
    if not classify:
        return FixedPointCatalog(tuple(records), region, degenerate)
    typed = []
    for rec in records:
        result = classify_stability(rec, p)
        typed.append(
            replace(
                rec,
                tangent_eigenvalues=result.tangent_eigenvalues,
                normal_eigenvalue=result.normal_eigenvalue,
                stability=result.stability,
            )
        )
    return FixedPointCatalog(tuple(typed), region, degenerate)


def stability_matrix(s: BlochState, p: ModelParams) -> np.ndarray:
    """Linearisation of the interaction-loss flow at an on-sphere point.

    The closed form below already substitutes the sphere constraint, so
    it is only valid on the sphere; off-sphere input is rejected.  Its
    restriction to the tangent plane agrees with the raw Jacobian of
    the flow; the normal column differs by a rank-one term.
    """
    if abs(s.radius_sq - SPHERE_RADIUS_SQ) > _SPHERE_PRE_TOL:
        raise ValueError(
            f"stability matrix needs an on-sphere point, r^2={s.radius_sq!r}"
        )
    v, g, k = p.v, p.g, p.k
    sx, sy, sz = s.sx, s.sy, s.sz
    return np.array(
        [
            [8.0 * k * sz * sz, -4.0 * g * sz, -4.0 * g * sy + 16.0 * k * sx * sz],
            [4.0 * g * sz, 8.0 * k * sz * sz, 4.0 * g * sx - 2.0 * v + 16.0 * k * sy * sz],
            [-16.0 * k * sx * sz, 2.0 * v - 16.0 * k * sy * sz, -8.0 * k * (sx * sx + sy * sy)],
        ]
    )


def tangent_basis(s: BlochState):
    """Orthonormal pair spanning the tangent plane of the sphere at s."""
    normal = np.array([s.sx, s.sy, s.sz])
    normal = normal / np.linalg.norm(normal)
    helper = np.array([0.0, 0.0, 1.0]) if abs(normal[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, normal)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return e1, e2


def _eig2(a):
    """Closed-form eigenvalues of a real 2x2 matrix."""
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return complex(0.5 * (tr + root)), complex(0.5 * (tr - root))
    root = math.sqrt(-disc)
    return complex(0.5 * tr, 0.5 * root), complex(0.5 * tr, -0.5 * root)


def classify_stability(
    fp, p: ModelParams, tol_center: Optional[float] = None
) -> StabilityResult:
    """Type a stationary point from the tangent-projected linearisation.

    Accepts a FixedPointRecord (whose residual must already satisfy the
    stationarity invariant) or a bare on-sphere BlochState.  The third
    eigenvalue, belonging to the normal direction, is reported but not
    used for typing: the dynamics of interest lives on the sphere.
    """
    if isinstance(fp, FixedPointRecord):
        if fp.residual > 1e-8:
            raise ValueError(
                f"point fails the stationarity invariant: residual={fp.residual!r}"
            )
        point = fp.position
    else:
        point = fp
    J = stability_matrix(point, p)
    if tol_center is None:
        tol_center = 1e-9 * max(1e-300, float(np.max(np.abs(J))))
    e1, e2 = tangent_basis(point)
    basis = np.column_stack([e1, e2])
    block = basis.T @ J @ basis
    lam1, lam2 = _eig2(block)
    normal = complex(np.trace(J)) - lam1 - lam2
    re1, re2 = lam1.real, lam2.real
    small1, small2 = abs(re1) <= tol_center, abs(re2) <= tol_center
    if small1 and small2:
        tag = Stability.CENTER
    elif small1 or small2:
        tag = Stability.DEGENERATE
    elif re1 < 0.0 and re2 < 0.0:
        tag = Stability.SINK
    elif re1 > 0.0 and re2 > 0.0:
        tag = Stability.SOURCE
    else:
        # Opposite-sign real parts occur only for a real pair.
        tag = Stability.SADDLE
    return StabilityResult(tag, (lam1, lam2), normal)


# ---------------------------------------------------------------------------
# Limit cycle detection.

@dataclass(frozen=True)
class LimitCycle:
    """One period of an isolated closed orbit, sampled forward in time."""

    trajectory: Trajectory
    period: float
    section_state: BlochState


_SECTION_BRACKET = 0.4
_MAX_RETURN_TIME = 80.0
_TRAP_RADIUS = 0.02


def _section_state(sx: float) -> BlochState:
    """Point of the section {sy = 0, sz > 0} on the sphere."""
    if abs(sx) >= 0.5:
        raise ValueError(f"section coordinate out of range: {sx}")
    return BlochState(sx, 0.0, math.sqrt(SPHERE_RADIUS_SQ - sx * sx))


def _first_return(f, y0, direction, max_step, traps):
    """Integrate until the orbit next crosses sy = 0 with sz > 0.

    Returns (crossing state, |elapsed time|), or None when no crossing
    happens within the time budget or the orbit falls into one of the
    trap points (fixed points attracting in this time direction, from
    whose neighbourhood no return is possible).
    """
    t, y = 0.0, np.asarray(y0, dtype=float)
    h = direction * max_step
    elapsed = 0.0
    armed = False  # require leaving the section before detecting a return
    steps = 0
    while elapsed < _MAX_RETURN_TIME:
        y_new = rk4_step(f, t, y, h)
        if not np.all(np.isfinite(y_new)):
            return None
        if abs(y_new[1]) > 1e-4:
            armed = True
        if armed and y[1] * y_new[1] < 0.0 and max(y[2], y_new[2]) > 0.0:
            # Bisect the crossing time within this step.
            lo, hi = 0.0, h
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                y_mid = rk4_step(f, t, y, mid)
                if y[1] * y_mid[1] < 0.0:
                    hi = mid
                else:
                    lo = mid
            y_cross = rk4_step(f, t, y, hi)
            if y_cross[2] > 0.0:
                return y_cross, elapsed + abs(hi)
            armed = False  # southern crossing; keep going
        steps += 1
        if steps % 50 == 0 and traps:
            for trap in traps:
                if np.linalg.norm(y_new - trap) < _TRAP_RADIUS:
                    return None
        t += h
        elapsed += abs(h)
        y = y_new
    return None


def _return_map(p: ModelParams, direction, traps, max_step=0.01):
    _, factory = VECTOR_FIELDS["mf_complex_interaction"]
    f3 = factory(p)

    def f(t, y):
        full = f3(t, np.array([y[0], y[1], y[2], 1.0]))
        return full[:3]

    def ret(sx):
        s = _section_state(sx)
        hit = _first_return(f, [s.sx, s.sy, s.sz], direction, max_step, traps)
        if hit is None:
            return None
        y_cross, elapsed = hit
        return float(y_cross[0]), elapsed

    return ret


def find_limit_cycle(
    p: ModelParams,
    seed: Optional[BlochState] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> Optional[LimitCycle]:
    """Locate the isolated periodic orbit of the interaction-loss flow.

    For g = 0 the orbit is the great circle sx = 0 (it exists only while
    the on-circle flow 2v - k sin(2 beta) has no zeros, i.e. inside
    region 1); the returned trajectory starts from the seed projected
    onto that circle and covers one measured period.  For g != 0 the
    orbit is found as a fixed point of the first-return map on the
    section {sy = 0, sz > 0}, scanning sx in (-0.4, 0.4); the map is
    iterated backward in time for k > 0, where the cycle is repelling
    forward, and forward for k < 0.  Returns None when no periodic
    orbit exists (including the degenerate Hermitian case k = 0, where
    closed orbits are not isolated).
    """
    _require_unit_v(p)
    p.require_symmetric()
    if p.k == 0.0:
        return None
    direction = -1.0 if p.k > 0.0 else 1.0
    # Fixed points attracting in the integration direction swallow
    # orbits without further section returns; bail out early there.
    trap_tag = Stability.SOURCE if p.k > 0.0 else Stability.SINK
    traps = [
        np.array([r.position.sx, r.position.sy, r.position.sz])
        for r in fixed_point_catalog(p.g, p.k)
        if r.stability is trap_tag
    ]
    ret = _return_map(p, direction, traps)

    if p.g == 0.0:
        if classify_region(p.g, p.k) is not Region.REGION_1:
            log.debug("no cycle: the g=0 great circle carries fixed points "
                      "outside region 1 (g=%s, k=%s)", p.g, p.k)
            return None
        sx_star = 0.0
    else:
        n_scan = 17
        grid = np.linspace(-_SECTION_BRACKET, _SECTION_BRACKET, n_scan)
        values = []
        for sx in grid:
            out = ret(float(sx))
            values.append(None if out is None else out[0] - sx)
        sx_star = None
        for i in range(n_scan - 1):
            a, b = values[i], values[i + 1]
            if a is None or b is None or a * b > 0.0:
                continue
            lo, hi, flo = float(grid[i]), float(grid[i + 1]), a
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                out = ret(mid)
                if out is None:
                    break
                fm = out[0] - mid
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            else:
                sx_star = 0.5 * (lo + hi)
            if sx_star is not None:
                break
        if sx_star is None:
            log.debug("no cycle: return map has no fixed point in the "
                      "bracket at (g=%s, k=%s)", p.g, p.k)
            return None

    out = ret(sx_star)
    if out is None:
        log.debug("no cycle: no section return within the time budget "
                  "from sx=%s at (g=%s, k=%s)", sx_star, p.g, p.k)
        return None
    if abs(out[0] - sx_star) > 1e-7:
        log.debug("no cycle: candidate sx=%s fails the return-map "
                  "residual (%s)", sx_star, abs(out[0] - sx_star))
        return None
    period = out[1]
    start = _section_state(sx_star)
    # Reject spurious return-map roots sitting at a stationary point.
    if rhs_residual(start, p) < 1e-6:
        return None
    cfg = cfg or IntegratorConfig()
    if p.g == 0.0 and seed is not None:
        # Any seed projects onto the g = 0 cycle: zero sx, rescale.
        r = math.hypot(seed.sy, seed.sz)
        if r > 1e-12:
            start = BlochState(0.0, 0.5 * seed.sy / r, 0.5 * seed.sz / r)
    traj = integrate(
        "mf_complex_interaction",
        BlochState(start.sx, start.sy, start.sz, 1.0),
        p,
        period,
        cfg,
    )
    closure = np.linalg.norm(traj.states[-1][:3] - traj.states[0][:3])
    if closure > 1e-5:
        log.debug("no cycle: one-period closure residual %s at "
                  "(g=%s, k=%s)", closure, p.g, p.k)
        return None
    return LimitCycle(traj, period, start)
