"""SU(2) coherent states in the two-mode Fock basis and closed-form
expectation values of angular-momentum operator products.

A condensed N-particle state with single-particle amplitudes
psi1 = e^{-i phi} cos(theta/2), psi2 = sin(theta/2) has Fock amplitudes
sqrt(binom(N, n1)) psi1^{n1} psi2^{N - n1}.  The Fock basis is ordered
with n1 descending (|N, 0> first) project-wide.

The closed forms implemented here (anticommutators, covariances with
Lz^2 and N^2, and the third moments <Lz^3>, <Lz^2 Lx>, <Lz^2 Ly>) come
with an independent brute-force oracle, `fock_oracle_expectation`,
which evaluates arbitrary ordered products of {Lx, Ly, Lz, N} by dense
matrix application.  Every closed form is tested against the oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BlochState

__all__ = [
    "CoherentAngles",
    "FockVector",
    "coherent_fock",
    "angular_momentum_matrices",
    "number_matrix",
    "anticommutator_expectation_closed",
    "covariance_LiLz2_closed",
    "covariance_LiN2_closed",
    "third_moment_closed",
    "fock_oracle_expectation",
    "LZ3",
    "LZ2LX",
    "LZ2LY",
]

LZ3 = "lz3"
LZ2LX = "lz2lx"
LZ2LY = "lz2ly"

_LOG_SPACE_THRESHOLD = 500
_MAX_ORACLE_N = 2000


@dataclass(frozen=True)
class CoherentAngles:
    """Spherical angles of a coherent state; gamma is the stereographic
    parameter e^{i phi} tan(theta/2), infinite at the south pole."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise ValueError(f"non-finite phi: {self.phi}")

    @property
    def gamma(self) -> complex:
        if self.theta == math.pi:
            return complex(math.inf, 0.0)
        return cmath.exp(1j * self.phi) * math.tan(0.5 * self.theta)

    def bloch(self) -> BlochState:
        return BlochState.from_angles(self.theta, self.phi)


@dataclass
class FockVector:
    """N-particle two-mode pure state; amplitudes[i] belongs to the
    basis state with n1 = N - i particles in mode 1."""

    N: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.N < 0:
            raise ValueError(f"negative particle number: {self.N}")
        if self.amplitudes.shape != (self.N + 1,):
            raise ValueError(
                f"expected {self.N + 1} amplitudes, got {self.amplitudes.shape}"
            )
        if not (
            np.all(np.isfinite(self.amplitudes.real))
            and np.all(np.isfinite(self.amplitudes.imag))
        ):
            raise ValueError("non-finite amplitude")

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "FockVector":
        norm = math.sqrt(self.norm_sq)
        if norm == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return FockVector(self.N, self.amplitudes / norm)


def coherent_fock(N: int, angles: CoherentAngles) -> FockVector:
    """Condensed state of N particles at the given angles, unit norm.

    For N above 500 the binomial amplitudes are assembled in log space
    to avoid overflow; the phase e^{-i phi n1} is applied separately.
    """
    if N < 0:
        raise ValueError(f"negative particle number: {N}")
    theta, phi = angles.theta, angles.phi
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    n1 = np.arange(N, -1, -1)
    if N <= _LOG_SPACE_THRESHOLD:
        mags = np.array(
            [math.sqrt(math.comb(N, int(m))) * c ** int(m) * s ** (N - int(m)) for m in n1]
        )
    else:
        logs = np.full(N + 1, -np.inf)
        for i, m in enumerate(n1):
            m = int(m)
            if (c == 0.0 and m > 0) or (s == 0.0 and m < N):
                continue
            logs[i] = 0.5 * (
                math.lgamma(N + 1) - math.lgamma(m + 1) - math.lgamma(N - m + 1)
            )
            if m > 0:
                logs[i] += m * math.log(c)
            if m < N:
                logs[i] += (N - m) * math.log(s)
        mags = np.exp(logs)
    amps = mags * np.exp(-1j * phi * n1)
    return FockVector(N, amps).normalized()


def angular_momentum_matrices(N: int):
    """Dense (N+1) x (N+1) matrices of Lx, Ly, Lz in the Fock basis.

    Built from the two-mode ladder action: the raising part a1^dag a2
    sends |n1, n2> to sqrt((n1 + 1) n2) |n1 + 1, n2 - 1>, and
    Lz = (n1 - n2) / 2 is diagonal.
    """
    if N < 0:
        raise ValueError(f"negative particle number: {N}")
    dim = N + 1
    raising = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        n1 = N - i
        n2 = i
        raising[i - 1, i] = math.sqrt((n1 + 1) * n2)
    lowering = raising.conj().T
    lx = 0.5 * (raising + lowering)
    ly = (raising - lowering) / 2j
    lz = np.diag((np.arange(N, -1, -1) - 0.5 * N).astype(complex))
    return lx, ly, lz


def number_matrix(N: int) -> np.ndarray:
    """Total particle number, a scalar on the fixed-N sector."""
    return N * np.eye(N + 1, dtype=complex)


def _component(s, axis: str) -> float:
    if isinstance(s, BlochState):
        return {"x": s.sx, "y": s.sy, "z": s.sz}[axis]
    return {"x": s[0], "y": s[1], "z": s[2]}[axis]


def anticommutator_expectation_closed(i: str, j: str, s, N: int) -> float:
    """<[L_i, L_j]_+> in a condensed state:
    2 (1 - 1/N) <L_i> <L_j> + delta_ij N / 2, with <L_i> = N s_i."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    li = N * _component(s, i)
    lj = N * _component(s, j)
    value = 2.0 * (1.0 - 1.0 / N) * li * lj
    if i == j:
        value += 0.5 * N
    return value


def covariance_LiLz2_closed(i: str, s, N: int) -> float:
    """Covariance of L_i with Lz^2 in a condensed state:
    -(2/N)(1 - 1/N) <L_i> <Lz>^2 + delta_iz (N/2)(1 - 1/N) <Lz>."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    li = N * _component(s, i)
    lz = N * _component(s, "z")
    value = -(2.0 / N) * (1.0 - 1.0 / N) * li * lz * lz
    if i == "z":
        value += 0.5 * N * (1.0 - 1.0 / N) * lz
    return value


def covariance_LiN2_closed(i: str, s, N: int) -> float:
    """Covariance of L_i with N^2: identically zero on fixed-N states."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    return 0.0


def third_moment_closed(kind: str, s, N: int) -> complex:
    """Closed-form third moments of a condensed state.

    lz3:   <Lz^3>    = N^3 (1 - 3/N + 2/N^2) sz^3 + N^2 (3/4 - 1/(2N)) sz
    lz2lx: <Lz^2 Lx> = N^3 (1 - 3/N + 2/N^2) sx sz^2 + (N^2/4) sx
                       + i N^2 (1 - 1/N) sy sz
    lz2ly: <Lz^2 Ly> = N^3 (1 - 3/N + 2/N^2) sy sz^2 + (N^2/4) sy
                       - i N^2 (1 - 1/N) sx sz

    The cross moments carry imaginary parts because the operator
    products are not Hermitian; symmetrised combinations are real.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    sx = _component(s, "x")
    sy = _component(s, "y")
    sz = _component(s, "z")
    cubic = N ** 3 * (1.0 - 3.0 / N + 2.0 / N ** 2)
    if kind == LZ3:
        return complex(cubic * sz ** 3 + N * N * (0.75 - 0.5 / N) * sz)
    if kind == LZ2LX:
        return complex(
            cubic * sx * sz * sz + 0.25 * N * N * sx,
            N * N * (1.0 - 1.0 / N) * sy * sz,
        )
    if kind == LZ2LY:
        return complex(
            cubic * sy * sz * sz + 0.25 * N * N * sy,
            -N * N * (1.0 - 1.0 / N) * sx * sz,
        )
    raise ValueError(f"unknown third-moment kind {kind!r}")


_ORACLE_OPS = ("lx", "ly", "lz", "n")


def fock_oracle_expectation(ops, state: FockVector) -> complex:
    """Brute-force expectation of an ordered operator product.

    ops is a sequence over {"lx", "ly", "lz", "n"}, leftmost factor
    first; the product is applied to the state by dense matrix-vector
    multiplication and the expectation is normalised by <psi|psi>.
    This routine is the correctness anchor for every closed form above.
    """
    if state.N > _MAX_ORACLE_N:
        raise ValueError(f"oracle limited to N <= {_MAX_ORACLE_N}, got {state.N}")
    lx, ly, lz = angular_momentum_matrices(state.N)
    matrices = {"lx": lx, "ly": ly, "lz": lz, "n": number_matrix(state.N)}
    vec = state.amplitudes
    for op in reversed(list(ops)):
        if op not in _ORACLE_OPS:
            raise ValueError(f"unknown operator {op!r}")
        vec = matrices[op] @ vec
    return complex(np.vdot(state.amplitudes, vec) / state.norm_sq)
