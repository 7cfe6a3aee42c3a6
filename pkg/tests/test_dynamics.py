import math

import numpy as np
import pytest

from bhdimer.core import BlochState, ModelParams
from bhdimer.dynamics import (
    IntegrationError,
    IntegratorConfig,
    detect_convergence,
    integrate,
    integrate_adaptive,
    integrate_fixed,
)


class TestConfig:
    def test_tolerance_bounds(self):
        IntegratorConfig(rel_tol=1e-2, abs_tol=1e-12)
        with pytest.raises(ValueError):
            IntegratorConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(abs_tol=0.1)
        with pytest.raises(ValueError):
            IntegratorConfig(max_step=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(method="euler")


class TestRabiOscillation:
    """g = 0, eps = 0: rigid rotation about x at angular frequency 2v,
    so sz(t) = cos(2 v t) / 2 from the north pole."""

    def test_adaptive_endpoint(self):
        traj = integrate(
            "mf_hermitian",
            BlochState(0.0, 0.0, 0.5),
            ModelParams(v=1.0, g=0.0),
            math.pi / 2,
        )
        final = traj.final
        assert abs(final.sx) < 1e-8
        assert abs(final.sy) < 1e-8
        assert abs(final.sz + 0.5) < 1e-8

    def test_fixed_step_endpoint(self):
        cfg = IntegratorConfig(method="rk4", max_step=0.002)
        traj = integrate(
            "mf_hermitian",
            BlochState(0.0, 0.0, 0.5),
            ModelParams(v=1.0, g=0.0),
            math.pi / 2,
            cfg,
        )
        assert abs(traj.final.sz + 0.5) < 1e-8

    def test_fourth_order_convergence(self):
        # halving the step shrinks the endpoint error about 16 times
        from bhdimer.dynamics import VECTOR_FIELDS

        f = VECTOR_FIELDS["mf_hermitian"][1](ModelParams(v=1.0, g=0.0))
        y0 = np.array([0.0, 0.0, 0.5, 1.0])
        exact = np.array([0.0, -0.5 * math.sin(2.0), 0.5 * math.cos(2.0)])
        errors = []
        for h in (0.02, 0.01):
            _, states, _ = integrate_fixed(f, y0, 0.0, 1.0, h)
            errors.append(np.linalg.norm(states[-1][:3] - exact))
        ratio = errors[0] / errors[1]
        assert 12.0 < ratio < 20.0


class TestAdaptiveBehaviour:
    def test_agreement_with_fixed_step(self):
        p = ModelParams(v=1.0, g=0.5, k=1.0)
        s0 = BlochState.from_angles(1.2, 2.1)
        a = integrate("mf_complex_interaction", s0, p, 10.0)
        cfg = IntegratorConfig(method="rk4", max_step=0.002)
        b = integrate("mf_complex_interaction", s0, p, 10.0, cfg)
        assert np.linalg.norm(a.states[-1] - b.states[-1]) < 10.0 * a.config.rel_tol

    def test_sample_density_floor(self):
        traj = integrate(
            "mf_hermitian",
            BlochState(0.0, 0.0, 0.5),
            ModelParams(v=1.0, g=0.0),
            0.1,
        )
        assert len(traj) >= 200

    def test_on_sphere_stays_within_1e8(self):
        p = ModelParams(v=1.0, g=0.5, k=1.0)
        traj = integrate(
            "mf_complex_interaction", BlochState.from_angles(0.9, 0.3), p, 10.0
        )
        drift = np.max(np.abs(np.sum(traj.states[:, :3] ** 2, axis=1) - 0.25))
        assert drift < 1e-8

    def test_off_sphere_drift_matches_identity(self):
        from bhdimer.dynamics import VECTOR_FIELDS, rk4_step

        p = ModelParams(v=1.0, g=0.3, k=1.0)
        s0_vec = np.array([0.5, -0.3, 0.8])
        s0_vec *= math.sqrt(0.2) / np.linalg.norm(s0_vec)
        s0 = BlochState(*s0_vec, 1.0)
        f = VECTOR_FIELDS["mf_complex_interaction"][1](p)
        y0 = np.array([*s0_vec, 1.0])
        h = 1e-4
        probes = [rk4_step(f, 0.0, y0, t) for t in (-2 * h, -h, h, 2 * h)]
        r2 = [float(np.sum(y[:3] ** 2)) for y in probes]
        measured = (r2[0] - 8 * r2[1] + 8 * r2[2] - r2[3]) / (12 * h)
        expected = -16.0 * p.k * s0.sz ** 2 * (0.25 - s0.radius_sq)
        assert measured == pytest.approx(expected, abs=1e-8)

    def test_blowup_raises_integration_error_with_last_state(self):
        def f(t, y):
            return y * y

        with pytest.raises((IntegrationError, ValueError)) as err:
            integrate_adaptive(f, np.array([1.0]), 0.0, 2.0, max_step=0.1)
        if isinstance(err.value, IntegrationError):
            assert err.value.t_last < 2.0
            assert np.isfinite(err.value.y_last).all()

    def test_backward_integration(self):
        def f(t, y):
            return np.array([1.0])

        times, states, _ = integrate_adaptive(
            f, np.array([0.0]), 0.0, -1.0, max_step=0.05
        )
        assert times[-1] == pytest.approx(-1.0)
        assert states[-1][0] == pytest.approx(-1.0, abs=1e-12)

    def test_post_accept_hook_ledger(self):
        def f(t, y):
            return -y

        def hook(t, y):
            return y * 2.0, 1.0

        times, states, extras = integrate_fixed(
            f, np.array([1.0]), 0.0, 1.0, 0.25, post_accept=hook
        )
        assert extras[0] is None and all(e == 1.0 for e in extras[1:])


class TestTrajectoryApi:
    def test_metadata_and_states(self):
        p = ModelParams(v=1.0, g=0.2, k=0.1)
        traj = integrate(
            "mf_complex_interaction", BlochState(0.5, 0.0, 0.0), p, 1.0
        )
        assert traj.field == "mf_complex_interaction"
        assert traj.kind == "bloch"
        assert traj.params == p
        assert len(traj.times) == len(traj.states)
        assert np.all(np.diff(traj.times) > 0)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError):
            integrate("nonsense", BlochState(0.5, 0, 0), ModelParams(), 1.0)

    def test_wrong_state_kind_rejected(self):
        with pytest.raises(ValueError):
            integrate(
                "nlse_complex_interaction", BlochState(0.5, 0, 0), ModelParams(), 1.0
            )

    def test_t_end_must_be_positive(self):
        with pytest.raises(ValueError):
            integrate("mf_hermitian", BlochState(0.5, 0, 0), ModelParams(), -1.0)


class TestConvergenceDetection:
    def test_region_one_basins(self):
        p = ModelParams(v=1.0, g=0.0, k=1.0)
        sinks = [BlochState(0.5, 0.0, 0.0), BlochState(-0.5, 0.0, 0.0)]
        traj = integrate(
            "mf_complex_interaction",
            BlochState.on_sphere(0.01, math.sqrt(0.25 - 1e-4), 0.0),
            p,
            50.0,
        )
        assert detect_convergence(traj, sinks, radius=0.05) == 0
        traj = integrate(
            "mf_complex_interaction",
            BlochState.on_sphere(-0.01, math.sqrt(0.25 - 1e-4), 0.0),
            p,
            50.0,
        )
        assert detect_convergence(traj, sinks, radius=0.05) == 1

    def test_deformed_region_one_sink(self):
        # g breaks the mirror symmetry but interior seeds with sx > 0
        # still spiral into the (1/2, 0, 0) sink
        p = ModelParams(v=1.0, g=0.5, k=1.0)
        sinks = [BlochState(0.5, 0.0, 0.0), BlochState(-0.5, 0.0, 0.0)]
        traj = integrate(
            "mf_complex_interaction",
            BlochState.on_sphere(0.3, 0.4, 0.0),
            p,
            50.0,
        )
        assert detect_convergence(traj, sinks, radius=0.05) == 0

    def test_limit_cycle_never_converges(self):
        p = ModelParams(v=1.0, g=0.0, k=1.0)
        sinks = [BlochState(0.5, 0.0, 0.0), BlochState(-0.5, 0.0, 0.0)]
        traj = integrate(
            "mf_complex_interaction", BlochState(0.0, 0.5, 0.0), p, 50.0
        )
        assert detect_convergence(traj, sinks, radius=0.05) is None

    def test_hermitian_orbits_never_converge(self):
        p = ModelParams(v=1.0, g=0.5, k=0.0)
        sinks = [BlochState(0.5, 0.0, 0.0), BlochState(-0.5, 0.0, 0.0)]
        traj = integrate(
            "mf_complex_interaction", BlochState.from_angles(1.0, 1.0), p, 50.0
        )
        assert detect_convergence(traj, sinks, radius=0.05) is None

    def test_radius_must_be_positive(self):
        p = ModelParams(v=1.0, g=0.0, k=1.0)
        traj = integrate(
            "mf_complex_interaction", BlochState(0.5, 0.0, 0.0), p, 1.0
        )
        with pytest.raises(ValueError):
            detect_convergence(traj, [BlochState(0.5, 0, 0)], radius=0.0)
