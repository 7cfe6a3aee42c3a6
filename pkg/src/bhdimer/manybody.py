"""Finite-N many-particle dynamics of the dimer.

Two evolutions are provided:

* `evolve_nonhermitian`: Schroedinger dynamics i psi' = H psi with the
  complex-interaction Hamiltonian

      H = 2 v Lx + 2 (c - i kappa) Lz^2 + (c - i kappa) N^2 / 2.

  The scalar term acts as the identity on the fixed-N sector and would
  drive every amplitude to underflow (the decay rate kappa N^2 grows
  linearly with N at fixed k = N kappa), so it is removed from the
  matrix and accumulated analytically in a log-norm ledger; the state
  vector is additionally renormalised after every accepted step, with
  the removed factor credited to the same ledger.

* `evolve_lindblad`: master-equation dynamics with two-particle losses,
  jump operators a_j^2 at rate kappa.  Losses connect the particle
  sectors N -> N-2 -> ..., so the state is stored block-diagonally over
  sectors; coherences between sectors never develop from sector-diagonal
  initial states.

Normalised Bloch observables (s_i = <L_i> / N, n from the log-norm
ledger via n^N = <Psi|Psi>) connect both pictures to the mean-field
module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import BlochState
from .coherent import FockVector, angular_momentum_matrices
from .dynamics import IntegratorConfig, integrate_adaptive, integrate_fixed

__all__ = [
    "ManyBodyParams",
    "ManyBodyTrajectory",
    "DensityOperator",
    "LindbladTrajectory",
    "LindbladObservables",
    "build_hamiltonian",
    "scalar_coefficient",
    "evolve_nonhermitian",
    "mp_bloch",
    "quantum_eom_residual",
    "lindblad_rhs",
    "evolve_lindblad",
    "lindblad_observables",
]


@dataclass(frozen=True)
class ManyBodyParams:
    """Per-pair couplings of the N-particle dimer.

    c and kappa are the interaction and loss per pair; the scaled
    mean-field strengths g = N c and k = N kappa are exposed for
    cross-module comparisons.
    """

    N: int
    v: float = 1.0
    epsilon: float = 0.0
    c: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"need N >= 1, got {self.N}")

    @property
    def g(self) -> float:
        return self.N * self.c

    @property
    def k(self) -> float:
        return self.N * self.kappa

    @classmethod
    def from_scaled(cls, N, v=1.0, g=0.0, k=0.0, epsilon=0.0) -> "ManyBodyParams":
        """Construct from the scaled strengths, keeping N c = g and
        N kappa = k fixed."""
        return cls(N=N, v=v, epsilon=epsilon, c=g / N, kappa=k / N)


def build_hamiltonian(p: ManyBodyParams, complex_interaction: bool = False) -> np.ndarray:
    """Dense dimer Hamiltonian in the Fock basis, without the scalar
    (c - i kappa) N^2 / 2 term, which is tracked analytically.

    With ``complex_interaction`` false the matrix is the Hermitian
    2 eps Lz + 2 v Lx + 2 c Lz^2; with it true the interaction picks up
    the loss part, 2 v Lx + 2 (c - i kappa) Lz^2, and eps must be zero.
    """
    lx, _, lz = angular_momentum_matrices(p.N)
    if complex_interaction:
        if p.epsilon != 0.0:
            raise ValueError("complex-interaction Hamiltonian requires epsilon = 0")
        coeff = complex(p.c, -p.kappa)
        return 2.0 * p.v * lx + 2.0 * coeff * (lz @ lz)
    return 2.0 * p.epsilon * lz + 2.0 * p.v * lx + 2.0 * p.c * (lz @ lz)


def scalar_coefficient(p: ManyBodyParams, complex_interaction: bool = False) -> complex:
    """The scalar Hamiltonian term (c - i kappa) N^2 / 2."""
    coeff = complex(p.c, -p.kappa) if complex_interaction else complex(p.c)
    return coeff * p.N * p.N / 2.0


@dataclass
class ManyBodyTrajectory:
    """Non-Hermitian evolution record: unit-normalised state vectors at
    the accepted times plus the log-norm ledger ln <Psi|Psi>."""

    times: np.ndarray
    amplitudes: np.ndarray = field(repr=False)
    log_norm: np.ndarray
    params: ManyBodyParams

    def __len__(self):
        return len(self.times)

    def state(self, i) -> FockVector:
        return FockVector(self.params.N, self.amplitudes[i])

    def bloch(self, i) -> BlochState:
        return mp_bloch(self.state(i), self.log_norm[i])

    @property
    def final(self) -> FockVector:
        return self.state(len(self.times) - 1)


def evolve_nonhermitian(
    psi0: FockVector,
    p: ManyBodyParams,
    t_end: float,
    cfg: Optional[IntegratorConfig] = None,
) -> ManyBodyTrajectory:
    """Integrate i psi' = H psi with the complex-interaction Hamiltonian.

    The returned amplitudes are renormalised to unit norm at every
    sample; the total norm (matrix part plus the analytic scalar-term
    decay exp(-kappa N^2 t)) lives in the log_norm ledger, so
    amplitudes never underflow however large N kappa t gets.
    """
    if abs(psi0.norm_sq - 1.0) > 1e-8:
        raise ValueError(f"initial state must be normalised, <psi|psi>={psi0.norm_sq!r}")
    if psi0.N != p.N:
        raise ValueError(f"state has N={psi0.N}, params have N={p.N}")
    cfg = cfg or IntegratorConfig()
    h_matrix = build_hamiltonian(p, complex_interaction=True)

    def rhs(t, y):
        return -1j * (h_matrix @ y)

    def renormalise(t, y):
        norm = float(np.linalg.norm(y))
        return y / norm, 2.0 * math.log(norm)

    if cfg.method == "rk4":
        times, states, extras = integrate_fixed(
            rhs, psi0.amplitudes, 0.0, t_end, cfg.max_step, post_accept=renormalise
        )
    else:
        times, states, extras = integrate_adaptive(
            rhs, psi0.amplitudes, 0.0, t_end,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=cfg.max_step,
            post_accept=renormalise,
        )
    ledger = np.cumsum([0.0 if e is None else e for e in extras])
    log_norm = ledger - p.kappa * p.N * p.N * times
    return ManyBodyTrajectory(times, states, log_norm, p)


def mp_bloch(psi: FockVector, log_norm: Optional[float] = None) -> BlochState:
    """Normalised Bloch observables of a many-particle state.

    s_i = <L_i> / N with normalised expectations; the per-particle norm
    is n = exp(log_norm / N), defaulting to the norm carried by the
    amplitudes themselves when no ledger value is supplied.
    """
    norm_sq = psi.norm_sq
    if norm_sq == 0.0:
        raise ValueError("cannot take observables of the zero vector")
    if log_norm is None:
        log_norm = math.log(norm_sq)
    lx, ly, lz = angular_momentum_matrices(psi.N)
    vec = psi.amplitudes
    return BlochState(
        float(np.vdot(vec, lx @ vec).real / norm_sq) / psi.N,
        float(np.vdot(vec, ly @ vec).real / norm_sq) / psi.N,
        float(np.vdot(vec, lz @ vec).real / norm_sq) / psi.N,
        math.exp(log_norm / psi.N),
    )


def _five_point_derivative(values, h):
    """4th-order central difference from samples at -2h,-h,h,2h."""
    m2, m1, p1, p2 = values
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)


def _short_evolution(psi, h_matrix, t, steps=8):
    """Fixed fine-step propagation used for finite-difference probes."""
    def rhs(_, y):
        return -1j * (h_matrix @ y)

    _, states, _ = integrate_fixed(rhs, psi, 0.0, t, abs(t) / steps)
    return states[-1]


def quantum_eom_residual(
    psi: FockVector, p: ManyBodyParams, fd_step: float = 1e-3
) -> np.ndarray:
    """Consistency of the expectation dynamics with the evolution.

    The exact rate of <L_i> under a Hamiltonian H0 - i Gamma is
    -i <[L_i, H0]> - 2 cov(L_i, Gamma); here H0 = 2 v Lx + 2 c Lz^2 and
    Gamma = 2 kappa Lz^2 (the scalar part of Gamma has zero covariance
    on a fixed-N sector).  The result is compared with a finite
    difference along `evolve_nonhermitian` and the three absolute
    residuals are returned.
    """
    if abs(psi.norm_sq - 1.0) > 1e-8:
        raise ValueError("state must be normalised")
    lx, ly, lz = angular_momentum_matrices(psi.N)
    h0 = 2.0 * p.v * lx + 2.0 * p.c * (lz @ lz)
    gamma = 2.0 * p.kappa * (lz @ lz)
    h_matrix = build_hamiltonian(p, complex_interaction=True)
    vec = psi.amplitudes

    def expectation(op, v):
        return complex(np.vdot(v, op @ v) / np.vdot(v, v))

    residuals = []
    probes = [
        _short_evolution(vec, h_matrix, t)
        for t in (-2.0 * fd_step, -fd_step, fd_step, 2.0 * fd_step)
    ]
    for op in (lx, ly, lz):
        commutator = op @ h0 - h0 @ op
        anti = op @ gamma + gamma @ op
        law = (
            -1j * expectation(commutator, vec)
            - (expectation(anti, vec) - 2.0 * expectation(op, vec) * expectation(gamma, vec))
        ).real
        fd = _five_point_derivative(
            [expectation(op, v).real for v in probes], fd_step
        )
        residuals.append(abs(law - fd))
    return np.array(residuals)


# ---------------------------------------------------------------------------
# Lindblad dynamics with two-particle losses.

@dataclass(frozen=True)
class LindbladObservables:
    lx: float
    ly: float
    lz: float
    n: float
    n_sq: float
    lz_sq: float


@dataclass
class DensityOperator:
    """Mixed state over the particle sectors N, N-2, ..., stored
    block-diagonally.  blocks[j] is the (n+1) x (n+1) matrix of sector
    n = N - 2j."""

    N: int
    blocks: list = field(repr=False)

    def __post_init__(self):
        expected = [self.N - 2 * j for j in range((self.N // 2) + 1)]
        if len(self.blocks) != len(expected):
            raise ValueError(
                f"expected {len(expected)} sector blocks, got {len(self.blocks)}"
            )
        self.blocks = [np.asarray(b, dtype=complex) for b in self.blocks]
        for n, b in zip(expected, self.blocks):
            if b.shape != (n + 1, n + 1):
                raise ValueError(f"sector {n} block has shape {b.shape}")

    @property
    def sectors(self):
        return [self.N - 2 * j for j in range((self.N // 2) + 1)]

    @classmethod
    def from_pure(cls, psi: FockVector) -> "DensityOperator":
        blocks = [np.outer(psi.amplitudes, psi.amplitudes.conj())]
        for n in range(psi.N - 2, -1, -2):
            blocks.append(np.zeros((n + 1, n + 1), dtype=complex))
        return cls(psi.N, blocks)

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    def purity(self) -> float:
        return float(sum(np.trace(b @ b).real for b in self.blocks))

    def hermiticity_defect(self) -> float:
        return max(
            float(np.max(np.abs(b - b.conj().T))) if b.size else 0.0
            for b in self.blocks
        )

    def min_eigenvalue(self) -> float:
        return min(
            float(np.min(np.linalg.eigvalsh(0.5 * (b + b.conj().T))))
            for b in self.blocks
        )


def _pair_loss_jump(n: int, mode: int) -> np.ndarray:
    """Matrix of a_mode^2 from sector n to sector n - 2 (n >= 2)."""
    out = np.zeros((n - 1, n + 1), dtype=complex)
    for i in range(n + 1):
        n1 = n - i
        n2 = i
        if mode == 1 and n1 >= 2:
            out[i, i] = math.sqrt(n1 * (n1 - 1))
        elif mode == 2 and n2 >= 2:
            out[i - 2, i] = math.sqrt(n2 * (n2 - 1))
    return out


class _SectorOperators:
    """Per-sector Hamiltonians, jump operators and loss diagonals for a
    given top sector N; read-only after construction."""

    def __init__(self, p: ManyBodyParams):
        self.params = p
        self.hamiltonians = []
        self.jumps = []  # sector n: operators mapping n -> n - 2
        self.loss_diagonals = []
        for n in range(p.N, -1, -2):
            if n == 0:
                self.hamiltonians.append(np.zeros((1, 1), dtype=complex))
            else:
                lx, _, lz = angular_momentum_matrices(n)
                self.hamiltonians.append(
                    2.0 * p.epsilon * lz + 2.0 * p.v * lx + 2.0 * p.c * (lz @ lz)
                )
            if n >= 2:
                self.jumps.append((_pair_loss_jump(n, 1), _pair_loss_jump(n, 2)))
            else:
                self.jumps.append(None)
            n1 = np.arange(n, -1, -1, dtype=float)
            n2 = n - n1
            self.loss_diagonals.append(n1 * (n1 - 1.0) + n2 * (n2 - 1.0))


def _lindblad_block_rhs(blocks, ops: _SectorOperators):
    kappa = ops.params.kappa
    out = []
    for j, rho in enumerate(blocks):
        h = ops.hamiltonians[j]
        d = ops.loss_diagonals[j]
        drho = -1j * (h @ rho - rho @ h)
        if kappa != 0.0:
            drho = drho - 0.5 * kappa * (d[:, None] + d[None, :]) * rho
            if j > 0 and ops.jumps[j - 1] is not None:
                above = blocks[j - 1]
                for a in ops.jumps[j - 1]:
                    drho = drho + kappa * (a @ above @ a.conj().T)
        out.append(drho)
    return out


def lindblad_rhs(rho: DensityOperator, p: ManyBodyParams):
    """Right-hand side of the two-particle-loss master equation,
    rho' = -i [H, rho] + kappa sum_j (a_j^2 rho a_j^dag2
    - (1/2) {a_j^dag2 a_j^2, rho}), as sector blocks.

    H is the Hermitian dimer Hamiltonian (real interaction c); the loss
    rate kappa enters only through the jump terms.  The derivative is
    traceless and Hermiticity-preserving.
    """
    if rho.N != p.N:
        raise ValueError(f"state has N={rho.N}, params have N={p.N}")
    return _lindblad_block_rhs(rho.blocks, _SectorOperators(p))


@dataclass
class LindbladTrajectory:
    """Observable record of a master-equation run, with thinned full
    snapshots for spectral checks."""

    times: np.ndarray
    observables: np.ndarray  # rows: lx, ly, lz, n, n_sq, lz_sq
    traces: np.ndarray
    min_eigenvalues: np.ndarray  # sampled every eig_stride steps, else nan
    snapshots: list  # (time, DensityOperator) pairs, thinned
    final: DensityOperator
    params: ManyBodyParams

    def observable_state(self, i) -> LindbladObservables:
        return LindbladObservables(*self.observables[i])


def _pack(blocks):
    return np.concatenate([b.ravel() for b in blocks])


def _unpack(vec, sectors):
    blocks = []
    offset = 0
    for n in sectors:
        size = (n + 1) * (n + 1)
        blocks.append(vec[offset:offset + size].reshape(n + 1, n + 1))
        offset += size
    return blocks


def lindblad_observables(rho: DensityOperator) -> LindbladObservables:
    """Angular-momentum and particle-number expectations,
    Tr(A rho) summed over the particle sectors."""
    lx = ly = lz = n_exp = n_sq = lz_sq = 0.0
    for n, block in zip(rho.sectors, rho.blocks):
        tr = float(np.trace(block).real)
        n_exp += n * tr
        n_sq += n * n * tr
        if n == 0:
            continue
        mx, my, mz = angular_momentum_matrices(n)
        lx += float(np.trace(mx @ block).real)
        ly += float(np.trace(my @ block).real)
        lz += float(np.trace(mz @ block).real)
        lz_sq += float(np.trace(mz @ mz @ block).real)
    return LindbladObservables(lx, ly, lz, n_exp, n_sq, lz_sq)


def evolve_lindblad(
    rho0: DensityOperator,
    p: ManyBodyParams,
    t_end: float,
    cfg: Optional[IntegratorConfig] = None,
    eig_stride: int = 10,
    snapshot_count: int = 25,
) -> LindbladTrajectory:
    """Integrate the two-particle-loss master equation.

    Observables and the trace are recorded at every accepted step; the
    minimum eigenvalue over sectors every ``eig_stride`` steps (nan in
    between); roughly ``snapshot_count`` full density operators are
    kept for offline inspection.
    """
    if rho0.N != p.N:
        raise ValueError(f"state has N={rho0.N}, params have N={p.N}")
    cfg = cfg or IntegratorConfig()
    ops = _SectorOperators(p)
    sectors = rho0.sectors

    obs_matrices = []
    for n in sectors:
        if n == 0:
            zero = np.zeros((1, 1), dtype=complex)
            obs_matrices.append((zero, zero, zero, zero))
        else:
            mx, my, mz = angular_momentum_matrices(n)
            obs_matrices.append((mx, my, mz, mz @ mz))

    def rhs(t, y):
        return _pack(_lindblad_block_rhs(_unpack(y, sectors), ops))

    y0 = _pack(rho0.blocks)
    if cfg.method == "rk4":
        times, states, _ = integrate_fixed(rhs, y0, 0.0, t_end, cfg.max_step)
    else:
        times, states, _ = integrate_adaptive(
            rhs, y0, 0.0, t_end,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=cfg.max_step,
        )

    count = len(times)
    observables = np.empty((count, 6))
    traces = np.empty(count)
    min_eigs = np.full(count, np.nan)
    snapshots = []
    snap_stride = max(1, count // max(1, snapshot_count))
    final = None
    for i in range(count):
        blocks = _unpack(states[i], sectors)
        lx = ly = lz = n_exp = n_sq = lz_sq = 0.0
        trace = 0.0
        for (mx, my, mz, mzz), n, block in zip(obs_matrices, sectors, blocks):
            tr = float(np.trace(block).real)
            trace += tr
            n_exp += n * tr
            n_sq += n * n * tr
            if n == 0:
                continue
            lx += float(np.sum(mx.T * block).real)
            ly += float(np.sum(my.T * block).real)
            lz += float(np.sum(mz.T * block).real)
            lz_sq += float(np.sum(mzz.T * block).real)
        observables[i] = (lx, ly, lz, n_exp, n_sq, lz_sq)
        traces[i] = trace
        rho_i = None
        if i % eig_stride == 0 or i == count - 1:
            rho_i = DensityOperator(p.N, [b.copy() for b in blocks])
            min_eigs[i] = rho_i.min_eigenvalue()
        if i % snap_stride == 0 or i == count - 1:
            if rho_i is None:
                rho_i = DensityOperator(p.N, [b.copy() for b in blocks])
            snapshots.append((float(times[i]), rho_i))
        if i == count - 1:
            final = rho_i or DensityOperator(p.N, [b.copy() for b in blocks])
    return LindbladTrajectory(
        times, observables, traces, min_eigs, snapshots, final, p
    )
