"""Time integration of the dimer vector fields.

Two explicit steppers are provided: the classical fixed-step 4th-order
Runge-Kutta scheme and an adaptive Cash-Karp embedded 4(5) pair with
elementwise error control.  Both operate on plain (real or complex)
numpy vectors and accept an optional post-accept hook, which the
many-particle module uses for per-step renormalisation.

No projection onto the Bloch sphere is ever applied: sphere membership
is a property of the initial data, monitored by the tests rather than
enforced, because the off-sphere drift law is itself part of the model
being checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    BlochState,
    ModelParams,
    SpinorState,
    bloch_from_spinor,
    lb_mf_rhs,
    mf_rhs_complex_interaction,
    mf_rhs_hermitian,
    nlse_rhs_complex_interaction,
    nlse_rhs_gpe,
)

__all__ = [
    "IntegratorConfig",
    "IntegrationError",
    "Trajectory",
    "integrate",
    "detect_convergence",
    "rk4_step",
    "integrate_fixed",
    "integrate_adaptive",
    "VECTOR_FIELDS",
]


class IntegrationError(RuntimeError):
    """Step-size underflow; carries the last accepted time and state."""

    def __init__(self, message, t_last, y_last):
        super().__init__(message)
        self.t_last = t_last
        self.y_last = y_last


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and stepping mode.

    method is "adaptive" (Cash-Karp 4(5)) or "rk4" (fixed step of size
    max_step).  Defaults are chosen so that on-sphere trajectories stay
    within 1e-8 of the sphere over t in [0, 10] with a wide margin.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.01
    method: str = "adaptive"

    def __post_init__(self):
        for name, tol in (("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)):
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {tol}")
        if not self.max_step > 0.0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if self.method not in ("adaptive", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")


# Cash-Karp embedded pair: 5th-order propagating weights B5, 4th-order
# embedded weights B4, stage times C and coupling coefficients A.
_CK_C = (0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8)
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)

_MIN_STEP_FACTOR = 1e-14
_SAFETY = 0.9
_MAX_GROW = 5.0
_MIN_SHRINK = 0.1


def rk4_step(f, t, y, h):
    """One classical 4th-order Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _ck_step(f, t, y, h):
    """One Cash-Karp step: returns the 5th-order result and the local
    error estimate (difference of the embedded orders)."""
    ks = [f(t, y)]
    for i in range(1, 6):
        yi = y
        for a, k in zip(_CK_A[i], ks):
            if a != 0.0:
                yi = yi + (h * a) * k
        ks.append(f(t + _CK_C[i] * h, yi))
    y5 = y
    err = np.zeros_like(y)
    for b5, b4, k in zip(_CK_B5, _CK_B4, ks):
        if b5 != 0.0:
            y5 = y5 + (h * b5) * k
        err = err + (h * (b5 - b4)) * k
    return y5, err


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise ValueError(f"non-finite derivative or state at t={t}")


def integrate_fixed(f, y0, t0, t_end, h, post_accept=None):
    """Fixed-step RK4 over [t0, t_end]; h may be negative for backward
    integration.  Returns (times, states, extras) where extras collects
    the post_accept return values (or None)."""
    if h == 0.0:
        raise ValueError("step size must be nonzero")
    direction = 1.0 if t_end >= t0 else -1.0
    h = abs(h) * direction
    t, y = t0, np.asarray(y0)
    times, states, extras = [t], [y], [None]
    while (t_end - t) * direction > 1e-15 * max(1.0, abs(t_end)):
        step = h
        if (t + step - t_end) * direction > 0.0:
            step = t_end - t
        y = rk4_step(f, t, y, step)
        t = t + step
        _check_finite(y, t)
        extra = None
        if post_accept is not None:
            y, extra = post_accept(t, y)
        times.append(t)
        states.append(y)
        extras.append(extra)
    return np.array(times), np.array(states), extras


def integrate_adaptive(
    f,
    y0,
    t0,
    t_end,
    rel_tol=1e-10,
    abs_tol=1e-10,
    max_step=0.01,
    post_accept=None,
):
    """Adaptive Cash-Karp 4(5) over [t0, t_end] (either direction).

    Accepted steps are recorded; local error per component is kept
    below abs_tol + rel_tol * |y|.  Raises IntegrationError carrying
    the last good state when the step size underflows.
    """
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    if span == 0.0:
        raise ValueError("empty integration interval")
    t = t0
    y = np.asarray(y0, dtype=complex if np.iscomplexobj(y0) else float)
    times, states, extras = [t], [y], [None]
    h = direction * min(max_step, span / 10.0)
    while (t_end - t) * direction > 1e-15 * max(1.0, abs(t_end)):
        if abs(h) > max_step:
            h = direction * max_step
        if (t + h - t_end) * direction > 0.0:
            h = t_end - t
        y_new, err = _ck_step(f, t, y, h)
        _check_finite(y_new, t + h)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        if err_norm <= 1.0:
            t = t + h
            y = y_new
            extra = None
            if post_accept is not None:
                y, extra = post_accept(t, y)
            times.append(t)
            states.append(y)
            extras.append(extra)
            if err_norm == 0.0:
                factor = _MAX_GROW
            else:
                factor = min(_MAX_GROW, max(_MIN_SHRINK, _SAFETY * err_norm ** -0.2))
            h = h * factor
        else:
            h = h * max(_MIN_SHRINK, _SAFETY * err_norm ** -0.25)
        if abs(h) < _MIN_STEP_FACTOR * max(1.0, abs(t)):
            raise IntegrationError(
                f"step size underflow at t={t} (h={h})", t, y
            )
    return np.array(times), np.array(states), extras


# ---------------------------------------------------------------------------
# Named vector fields and the high-level trajectory interface.

def _bloch_field(rhs):
    def wrapped(p):
        def f(t, y):
            d = rhs(BlochState(y[0], y[1], y[2], y[3]), p)
            return np.array([d.dsx, d.dsy, d.dsz, d.dn])

        return f

    return wrapped


def _spinor_field(rhs, **kw):
    def wrapped(p):
        def f(t, y):
            d = rhs(SpinorState(y[0], y[1]), p, **kw)
            return np.array([d.dpsi1, d.dpsi2])

        return f

    return wrapped


#: field id -> (state kind, factory producing an array-valued RHS)
VECTOR_FIELDS = {
    "mf_complex_interaction": ("bloch", _bloch_field(mf_rhs_complex_interaction)),
    "mf_hermitian": ("bloch", _bloch_field(mf_rhs_hermitian)),
    "mf_two_particle_loss": ("bloch", _bloch_field(lb_mf_rhs)),
    "nlse_complex_interaction": ("spinor", _spinor_field(nlse_rhs_complex_interaction)),
    "gpe": ("spinor", _spinor_field(nlse_rhs_gpe, complex_g=False)),
    "gpe_complex": ("spinor", _spinor_field(nlse_rhs_gpe, complex_g=True)),
}

_MIN_SAMPLES = 200


@dataclass
class Trajectory:
    """Sampled solution: accepted steps plus the endpoint.

    states holds rows (sx, sy, sz, n) for Bloch fields or complex rows
    (psi1, psi2) for spinor fields.  Interpolation between samples, when
    needed, is linear.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str
    field: str
    params: ModelParams
    config: IntegratorConfig
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, i):
        row = self.states[i]
        if self.kind == "bloch":
            return BlochState(row[0], row[1], row[2], row[3])
        return SpinorState(row[0], row[1])

    def bloch(self, i) -> BlochState:
        """Sample i in the Bloch picture (spinor rows are mapped)."""
        if self.kind == "bloch":
            return self.state(i)
        return bloch_from_spinor(self.state(i))

    @property
    def final(self):
        return self.state(len(self.times) - 1)

    def bloch_array(self) -> np.ndarray:
        """All samples as (sx, sy, sz, n) rows."""
        if self.kind == "bloch":
            return np.asarray(self.states, dtype=float)
        out = np.empty((len(self.times), 4))
        for i in range(len(self.times)):
            b = self.bloch(i)
            out[i] = (b.sx, b.sy, b.sz, b.n)
        return out


def _state_to_array(state, kind):
    if kind == "bloch":
        if not isinstance(state, BlochState):
            raise ValueError(f"field expects a BlochState, got {type(state).__name__}")
        return np.array([state.sx, state.sy, state.sz, state.n])
    if not isinstance(state, SpinorState):
        raise ValueError(f"field expects a SpinorState, got {type(state).__name__}")
    return np.array([state.psi1, state.psi2], dtype=complex)


def integrate(
    field: str,
    s0,
    p: ModelParams,
    t_end: float,
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """Integrate a named vector field from s0 over [0, t_end].

    Output is dense enough for event detection: the step size is capped
    so at least 200 samples are produced even on short intervals.
    """
    if field not in VECTOR_FIELDS:
        raise ValueError(f"unknown vector field {field!r}")
    if not t_end > 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    cfg = cfg or IntegratorConfig()
    kind, factory = VECTOR_FIELDS[field]
    y0 = _state_to_array(s0, kind)
    f = factory(p)
    step_cap = min(cfg.max_step, t_end / _MIN_SAMPLES)
    if cfg.method == "rk4":
        times, states, _ = integrate_fixed(f, y0, 0.0, t_end, step_cap)
    else:
        times, states, _ = integrate_adaptive(
            f, y0, 0.0, t_end,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=step_cap,
        )
    return Trajectory(times, states, kind, field, p, cfg)


def detect_convergence(
    traj: Trajectory, candidates: Sequence[BlochState], radius: float
) -> Optional[int]:
    """Index of the candidate whose ball of the given radius contains
    the whole trailing 10% of the trajectory, or None."""
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    pts = traj.bloch_array()[:, :3]
    tail = pts[int(math.floor(0.9 * len(pts))):]
    best = None
    best_final = math.inf
    for idx, cand in enumerate(candidates):
        center = np.array([cand.sx, cand.sy, cand.sz])
        dists = np.linalg.norm(tail - center, axis=1)
        if np.all(dists <= radius) and dists[-1] < best_final:
            best = idx
            best_final = float(dists[-1])
    return best
