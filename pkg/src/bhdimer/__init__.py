"""Mean-field and many-particle dynamics of the two-mode Bose-Hubbard
dimer with interaction losses: dissipative Bloch flows, fixed-point and
stability analysis, limit cycles, coherent-state algebra, non-Hermitian
Schroedinger and two-particle-loss master-equation simulators."""

from .core import (
    BlochState,
    Derivative,
    ModelParams,
    SpinorDerivative,
    SpinorState,
    bloch_from_spinor,
    lb_mf_rhs,
    mf_rhs_complex_interaction,
    mf_rhs_hermitian,
    nlse_rhs_complex_interaction,
    nlse_rhs_gpe,
    spinor_from_bloch,
)
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    detect_convergence,
    integrate,
)
from .fixed_points import (
    DiscriminantReport,
    Family,
    FixedPointCatalog,
    FixedPointRecord,
    LimitCycle,
    Region,
    Stability,
    classify_region,
    classify_stability,
    discriminant,
    find_limit_cycle,
    fixed_point_catalog,
    stability_matrix,
)
from .coherent import (
    CoherentAngles,
    FockVector,
    angular_momentum_matrices,
    anticommutator_expectation_closed,
    coherent_fock,
    covariance_LiLz2_closed,
    covariance_LiN2_closed,
    fock_oracle_expectation,
    third_moment_closed,
)
from .manybody import (
    DensityOperator,
    LindbladObservables,
    LindbladTrajectory,
    ManyBodyParams,
    ManyBodyTrajectory,
    build_hamiltonian,
    evolve_lindblad,
    evolve_nonhermitian,
    lindblad_observables,
    lindblad_rhs,
    mp_bloch,
    quantum_eom_residual,
)

__version__ = "0.1.0"
