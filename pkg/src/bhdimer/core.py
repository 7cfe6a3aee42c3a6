"""Domain types and mean-field vector fields for the two-mode boson dimer.

Two equivalent state pictures are used throughout:

* Bloch picture: a vector s = (sx, sy, sz) on (or near) the sphere of
  radius 1/2, together with a per-particle norm n.
* Spinor picture: two complex mode amplitudes (psi1, psi2).

All right-hand sides below are pure functions; no integration or root
finding happens here.

Hermitian dimer (tunneling v, on-site asymmetry eps, interaction g)::

    sx' = -2 eps sy - 4 g sy sz
    sy' =  2 eps sx + 4 g sx sz - 2 v sz
    sz' =  2 v sy
    n'  =  0

with conserved energy H = 2 eps sz + 2 v sx + 2 g sz^2.

Interaction-loss dimer (loss strength k, eps = 0)::

    sx' = -4 g sy sz + 8 k sx sz^2
    sy' =  4 g sx sz - 2 v sz + 8 k sy sz^2
    sz' =  2 v sy - 2 k sz (1 - 4 sz^2)
    n'  = -4 k (sz^2 + 1/4) n

The squared radius r^2 = sx^2 + sy^2 + sz^2 obeys
d(r^2)/dt = -16 k sz^2 (1/4 - r^2), so the radius-1/2 sphere is
invariant while n decays pointwise.  Off-sphere initial data drifts;
this is deliberately not projected away.

Two-particle-loss mean field (from the master-equation description)::

    sx' = -4 g sy sz - k n sx
    sy' =  4 g sx sz - 2 v sz - k n sy
    sz' =  2 v sy - 2 k n sz
    n'  = -2 k (n^2/2 + 2 sz^2)

Here the Bloch vector itself shrinks: sx^2 + sy^2 + sz^2 = n^2/4 is
preserved, and n shows the n' ~ -n^2 decay characteristic of pairwise
losses.

The spinor forms of these flows are `nlse_rhs_complex_interaction`
(population-ratio nonlinearity, norm-decaying) and `nlse_rhs_gpe`
(cubic nonlinearity, optionally with a complex coefficient g - ik).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

SPHERE_RADIUS_SQ = 0.25
ON_SPHERE_TOL = 1e-12


def _require_finite(**values):
    for name, value in values.items():
        if isinstance(value, complex):
            ok = math.isfinite(value.real) and math.isfinite(value.imag)
        else:
            ok = math.isfinite(value)
        if not ok:
            raise ValueError(f"non-finite value for {name}: {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Scaled parameters of the dimer: tunneling v, on-site asymmetry
    epsilon, interaction strength g, interaction loss k.

    epsilon enters only the Hermitian flow; every operation derived from
    the lossy interaction requires epsilon == 0 and raises otherwise.
    """

    v: float = 1.0
    epsilon: float = 0.0
    g: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        _require_finite(v=self.v, epsilon=self.epsilon, g=self.g, k=self.k)

    def require_symmetric(self):
        if self.epsilon != 0.0:
            raise ValueError(
                f"operation requires epsilon = 0, got epsilon={self.epsilon}"
            )


@dataclass(frozen=True)
class BlochState:
    """Bloch components plus per-particle norm n."""

    sx: float
    sy: float
    sz: float
    n: float = 1.0

    def __post_init__(self):
        _require_finite(sx=self.sx, sy=self.sy, sz=self.sz, n=self.n)

    @property
    def radius_sq(self) -> float:
        return self.sx * self.sx + self.sy * self.sy + self.sz * self.sz

    @classmethod
    def on_sphere(cls, sx, sy, sz, n=1.0) -> "BlochState":
        """Construct a state that must lie on the radius-1/2 sphere."""
        state = cls(sx, sy, sz, n)
        if abs(state.radius_sq - SPHERE_RADIUS_SQ) > ON_SPHERE_TOL:
            raise ValueError(
                f"({sx}, {sy}, {sz}) is off the radius-1/2 sphere: "
                f"r^2 = {state.radius_sq!r}"
            )
        return state

    @classmethod
    def from_angles(cls, theta, phi, n=1.0) -> "BlochState":
        """Spherical parametrisation (theta from the +z pole)."""
        return cls(
            0.5 * math.sin(theta) * math.cos(phi),
            0.5 * math.sin(theta) * math.sin(phi),
            0.5 * math.cos(theta),
            n,
        )


@dataclass(frozen=True)
class SpinorState:
    """Two complex mode amplitudes with strictly positive population."""

    psi1: complex
    psi2: complex

    def __post_init__(self):
        _require_finite(psi1=self.psi1, psi2=self.psi2)
        if self.population == 0.0:
            raise ValueError("spinor has zero total population")

    @property
    def population(self) -> float:
        return abs(self.psi1) ** 2 + abs(self.psi2) ** 2


@dataclass(frozen=True)
class Derivative:
    """Time derivative of a BlochState."""

    dsx: float
    dsy: float
    dsz: float
    dn: float


@dataclass(frozen=True)
class SpinorDerivative:
    """Time derivative of a SpinorState."""

    dpsi1: complex
    dpsi2: complex


def mf_rhs_complex_interaction(s: BlochState, p: ModelParams) -> Derivative:
    """Bloch flow of the dimer with interaction loss k (epsilon = 0)."""
    p.require_symmetric()
    v, g, k = p.v, p.g, p.k
    sx, sy, sz = s.sx, s.sy, s.sz
    return Derivative(
        -4.0 * g * sy * sz + 8.0 * k * sx * sz * sz,
        4.0 * g * sx * sz - 2.0 * v * sz + 8.0 * k * sy * sz * sz,
        2.0 * v * sy - 2.0 * k * sz * (1.0 - 4.0 * sz * sz),
        -4.0 * k * (sz * sz + 0.25) * s.n,
    )


def mf_rhs_hermitian(s: BlochState, p: ModelParams) -> Derivative:
    """Bloch flow of the closed (norm-conserving) dimer."""
    v, eps, g = p.v, p.epsilon, p.g
    sx, sy, sz = s.sx, s.sy, s.sz
    return Derivative(
        -2.0 * eps * sy - 4.0 * g * sy * sz,
        2.0 * eps * sx + 4.0 * g * sx * sz - 2.0 * v * sz,
        2.0 * v * sy,
        0.0,
    )


def lb_mf_rhs(s: BlochState, p: ModelParams) -> Derivative:
    """Bloch flow of the two-particle-loss mean field.

    The Bloch vector is normalised against the initial particle number,
    so it shrinks together with n: sx^2 + sy^2 + sz^2 = n^2 / 4.
    """
    p.require_symmetric()
    if not s.n > 0.0:
        raise ValueError(f"two-particle-loss flow needs n > 0, got n={s.n}")
    v, g, k = p.v, p.g, p.k
    sx, sy, sz, n = s.sx, s.sy, s.sz, s.n
    return Derivative(
        -4.0 * g * sy * sz - k * n * sx,
        4.0 * g * sx * sz - 2.0 * v * sz - k * n * sy,
        2.0 * v * sy - 2.0 * k * n * sz,
        -2.0 * k * (0.5 * n * n + 2.0 * sz * sz),
    )


def nlse_rhs_complex_interaction(
    psi: SpinorState, p: ModelParams
) -> SpinorDerivative:
    """Spinor flow equivalent to `mf_rhs_complex_interaction`.

    The generator is, with S = |psi1|^2 + |psi2|^2 and
    Q = (|psi1|^4 + |psi2|^4) / S^2::

        i psi1' = (2 (g - ik) |psi1|^2 / S + i k Q) psi1 + v psi2
        i psi2' = v psi1 + (2 (g - ik) |psi2|^2 / S + i k Q) psi2

    The population-ratio nonlinearity makes the flow of the normalised
    Bloch vector independent of S, while S itself decays at the rate
    4 k (sz^2 + 1/4).
    """
    p.require_symmetric()
    v, g, k = p.v, p.g, p.k
    pop1 = abs(psi.psi1) ** 2
    pop2 = abs(psi.psi2) ** 2
    total = pop1 + pop2
    q = (pop1 * pop1 + pop2 * pop2) / (total * total)
    c1 = 2.0 * complex(g, -k) * (pop1 / total) + 1j * k * q
    c2 = 2.0 * complex(g, -k) * (pop2 / total) + 1j * k * q
    return SpinorDerivative(
        -1j * (c1 * psi.psi1 + v * psi.psi2),
        -1j * (v * psi.psi1 + c2 * psi.psi2),
    )


def nlse_rhs_gpe(
    psi: SpinorState, p: ModelParams, complex_g: bool = False
) -> SpinorDerivative:
    """Cubic nonlinear Schroedinger flow of the dimer.

    With ``complex_g`` false this is the norm-conserving form::

        i psi1' = (eps + 2 g |psi1|^2) psi1 + v psi2
        i psi2' = v psi1 + (-eps + 2 g |psi2|^2) psi2

    With ``complex_g`` true the interaction coefficient acquires the
    loss part (eps = 0 required)::

        i psi1' = (2 g - ik) |psi1|^2 psi1 + v psi2
        i psi2' = v psi1 + (2 g - ik) |psi2|^2 psi2

    and the population obeys n' = -2 k (n^2/2 + 2 sz^2), matching
    `lb_mf_rhs` under the unnormalised Bloch map (s scaled by n).
    """
    v = p.v
    pop1 = abs(psi.psi1) ** 2
    pop2 = abs(psi.psi2) ** 2
    if complex_g:
        p.require_symmetric()
        coeff = complex(2.0 * p.g, -p.k)
        c1 = coeff * pop1
        c2 = coeff * pop2
    else:
        c1 = p.epsilon + 2.0 * p.g * pop1
        c2 = -p.epsilon + 2.0 * p.g * pop2
    return SpinorDerivative(
        -1j * (c1 * psi.psi1 + v * psi.psi2),
        -1j * (v * psi.psi1 + c2 * psi.psi2),
    )


def bloch_from_spinor(psi: SpinorState) -> BlochState:
    """Map a spinor to the Bloch picture.

    The components are normalised by the total population so that the
    (sx, sy, sz) part always lies exactly on the radius-1/2 sphere; the
    population itself is carried in n.  A unit-population spinor maps
    to (Re(psi1* psi2), Im(psi1* psi2), (|psi1|^2 - |psi2|^2)/2, 1).
    """
    total = psi.population
    cross = psi.psi1.conjugate() * psi.psi2
    return BlochState(
        cross.real / total,
        cross.imag / total,
        0.5 * (abs(psi.psi1) ** 2 - abs(psi.psi2) ** 2) / total,
        total,
    )


def spinor_from_bloch(s: BlochState) -> SpinorState:
    """Inverse of `bloch_from_spinor` for on-sphere Bloch states.

    The direction of s fixes the mode ratio and relative phase; s.n is
    the total population.  The overall phase is gauge and chosen so
    that psi2 is real and non-negative.
    """
    r = math.sqrt(s.radius_sq)
    if r == 0.0:
        raise ValueError("zero Bloch vector has no spinor preimage")
    costheta = max(-1.0, min(1.0, s.sz / r))
    theta = math.acos(costheta)
    phi = math.atan2(s.sy, s.sx)
    amp = math.sqrt(s.n)
    return SpinorState(
        amp * cmath.exp(-1j * phi) * math.cos(0.5 * theta),
        amp * math.sin(0.5 * theta) + 0j,
    )
