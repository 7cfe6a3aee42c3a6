import math

import numpy as np
import pytest

from bhdimer.core import BlochState, ModelParams, mf_rhs_complex_interaction
from bhdimer.fixed_points import (
    Family,
    Region,
    Stability,
    classify_region,
    classify_stability,
    discriminant,
    find_limit_cycle,
    fixed_point_catalog,
    rhs_residual,
    stability_matrix,
    tangent_basis,
)

# Frozen oracle values: formula evaluation checked against the
# biquadratic residual (< 1e-12) and the on-sphere constraint.
Y_PLUS_15_1 = 0.16396721143623744
Y_MINUS_15_1 = -0.47646721143623744
Y_PLUS_05_25 = 0.20306623862918072
Y_MINUS_05_25 = 0.036933761370819253
S1_PLUS_15_1 = (0.25809836569128769, 0.13934856364975171, 0.40492864980912063)


def biquadratic(g, k, y):
    return -g * g + 1.0 + 4.0 * g * g * y - 4.0 * k * k * y + 16.0 * k * k * y * y


class TestDiscriminant:
    def test_region_one_point_has_no_roots(self):
        rep = discriminant(0.0, 1.0)
        assert rep.P == -3.0
        assert rep.y_plus is None and rep.y_minus is None

    def test_boundary_circle_point(self):
        rep = discriminant(0.6, 0.2)
        assert abs(rep.P) < 1e-12

    def test_region_three_roots(self):
        rep = discriminant(1.5, 1.0)
        assert rep.P == pytest.approx(6.5625, abs=1e-14)
        assert rep.y_plus == pytest.approx(Y_PLUS_15_1, abs=1e-15)
        assert rep.y_minus == pytest.approx(Y_MINUS_15_1, abs=1e-15)
        assert abs(biquadratic(1.5, 1.0, rep.y_plus)) < 1e-12

    def test_region_two_roots(self):
        rep = discriminant(0.5, 2.5)
        assert rep.y_plus == pytest.approx(Y_PLUS_05_25, abs=1e-15)
        assert rep.y_minus == pytest.approx(Y_MINUS_05_25, abs=1e-15)
        for y in (rep.y_plus, rep.y_minus):
            assert abs(biquadratic(0.5, 2.5, y)) < 1e-12

    def test_k_zero_self_trapping_root(self):
        rep = discriminant(1.5, 0.0)
        assert rep.y_plus == pytest.approx(5.0 / 36.0, abs=1e-15)
        assert rep.y_minus is None
        assert discriminant(0.5, 0.0).y_plus is None


class TestRegionClassification:
    @pytest.mark.parametrize(
        "g,k,region",
        [
            (0.5, 1.0, Region.REGION_1),
            (0.5, 2.5, Region.REGION_2),
            (1.5, 1.0, Region.REGION_3),
            (0.6, 0.2, Region.BOUNDARY),
            (1.0, 2.0, Region.BOUNDARY),
        ],
    )
    def test_reference_points(self, g, k, region):
        assert classify_region(g, k) is region

    def test_sign_symmetry_in_k(self):
        assert classify_region(0.5, -1.0) is Region.REGION_1
        assert classify_region(0.5, -2.5) is Region.REGION_2


class TestCatalog:
    def test_region_one_only_trivial_points(self):
        cat = fixed_point_catalog(0.0, 1.0)
        assert len(cat) == 2
        positions = sorted(rec.position.sx for rec in cat)
        assert positions == [-0.5, 0.5]

    def test_counts_by_region(self):
        assert len(fixed_point_catalog(0.5, 1.0)) == 2
        assert len(fixed_point_catalog(0.5, 2.5)) == 6
        assert len(fixed_point_catalog(1.5, 1.0)) == 4

    def test_frozen_s1_plus_position(self):
        rec = fixed_point_catalog(1.5, 1.0).by_family(Family.S1_PLUS)
        assert rec.position.sx == pytest.approx(S1_PLUS_15_1[0], abs=1e-12)
        assert rec.position.sy == pytest.approx(S1_PLUS_15_1[1], abs=1e-12)
        assert rec.position.sz == pytest.approx(S1_PLUS_15_1[2], abs=1e-12)
        assert rec.y_root == pytest.approx(Y_PLUS_15_1, abs=1e-15)

    def test_residual_and_sphere_invariants_random_draws(self):
        rng = np.random.default_rng(42)
        count = 0
        while count < 60:
            g = rng.uniform(-2.5, 2.5)
            k = rng.uniform(-3.0, 3.0)
            if classify_region(g, k) is Region.BOUNDARY:
                continue
            count += 1
            for rec in fixed_point_catalog(g, k):
                assert rec.residual < 1e-10
                assert abs(rec.position.radius_sq - 0.25) < 1e-12

    def test_boundary_flagged_degenerate(self):
        cat = fixed_point_catalog(0.6, 0.2)
        assert cat.degenerate
        assert cat.region is Region.BOUNDARY

    def test_boundary_merged_pair(self):
        # on the upper circle with k^2 > g^2 the two roots coincide at
        # an admissible y, giving one merged nontrivial pair
        g = 0.2
        k = 1.0 + math.sqrt(1.0 - g * g)
        assert abs(discriminant(g, k).P) < 1e-12
        cat = fixed_point_catalog(g, k)
        assert cat.degenerate
        families = {rec.family for rec in cat}
        assert Family.S1_PLUS in families and Family.S1_MINUS in families
        assert Family.S2_PLUS not in families
        assert len(cat) == 4
        for rec in cat:
            assert rec.residual < 1e-10

    def test_newton_refinement_oracle(self):
        """Damped Newton on local sphere charts moves every closed-form
        point by less than 1e-9, converging within 3 steps."""
        for g, k in ((0.5, 1.0), (0.5, 2.5), (1.5, 1.0), (-0.7, 1.8)):
            p = ModelParams(v=1.0, g=g, k=k)
            for rec in fixed_point_catalog(g, k):
                s0 = np.array([rec.position.sx, rec.position.sy, rec.position.sz])
                e1, e2 = tangent_basis(rec.position)

                def chart(u):
                    q = s0 + u[0] * e1 + u[1] * e2
                    return 0.5 * q / np.linalg.norm(q)

                def fval(u):
                    q = chart(u)
                    d = mf_rhs_complex_interaction(BlochState(*q, 1.0), p)
                    return np.array([e1 @ [d.dsx, d.dsy, d.dsz],
                                     e2 @ [d.dsx, d.dsy, d.dsz]])

                u = np.zeros(2)
                steps = 0
                h = 1e-7
                while np.linalg.norm(fval(u)) > 1e-12 and steps < 3:
                    jac = np.zeros((2, 2))
                    for j in range(2):
                        du = np.zeros(2)
                        du[j] = h
                        jac[:, j] = (fval(u + du) - fval(u - du)) / (2 * h)
                    step = np.linalg.solve(jac, -fval(u))
                    scale = 1.0
                    while np.linalg.norm(fval(u + scale * step)) > np.linalg.norm(
                        fval(u)
                    ) and scale > 1e-4:
                        scale *= 0.5
                    u = u + scale * step
                    steps += 1
                assert np.linalg.norm(fval(u)) <= 1e-12
                assert steps <= 3
                assert np.linalg.norm(chart(u) - s0) < 1e-9


class TestStabilityMatrix:
    def test_literal_entries_at_reference_point(self):
        J = stability_matrix(
            BlochState(0.5, 0.0, 0.0), ModelParams(v=1.0, g=0.0, k=1.0)
        )
        assert np.array_equal(
            J, np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -2.0], [0.0, 2.0, -2.0]])
        )

    def test_off_sphere_rejected(self):
        with pytest.raises(ValueError):
            stability_matrix(BlochState(0.5, 0.2, 0.0), ModelParams(v=1.0, k=1.0))

    def test_tangent_block_matches_fd_jacobian(self):
        rng = np.random.default_rng(11)
        h = 1e-6
        for _ in range(20):
            vec = rng.normal(size=3)
            vec = 0.5 * vec / np.linalg.norm(vec)
            s = BlochState(*vec, 1.0)
            p = ModelParams(v=1.0, g=rng.normal(), k=rng.normal())
            J_fd = np.zeros((3, 3))
            for j in range(3):
                dp, dm = np.array(vec), np.array(vec)
                dp[j] += h
                dm[j] -= h
                fp = mf_rhs_complex_interaction(BlochState(*dp, 1.0), p)
                fm = mf_rhs_complex_interaction(BlochState(*dm, 1.0), p)
                J_fd[:, j] = (
                    np.array([fp.dsx, fp.dsy, fp.dsz])
                    - np.array([fm.dsx, fm.dsy, fm.dsz])
                ) / (2 * h)
            e1, e2 = tangent_basis(s)
            basis = np.column_stack([e1, e2])
            gap = basis.T @ (stability_matrix(s, p) - J_fd) @ basis
            assert np.max(np.abs(gap)) < 1e-6


class TestStabilityClassification:
    def test_region_one_both_sinks(self):
        tags = {r.family: r.stability for r in fixed_point_catalog(0.5, 1.0)}
        assert tags[Family.TRIVIAL_PLUS] is Stability.SINK
        assert tags[Family.TRIVIAL_MINUS] is Stability.SINK

    def test_region_two_classification(self):
        tags = {r.family: r.stability for r in fixed_point_catalog(0.5, 2.5)}
        assert tags[Family.TRIVIAL_PLUS] is Stability.SINK
        assert tags[Family.TRIVIAL_MINUS] is Stability.SINK
        assert tags[Family.S1_PLUS] is Stability.SOURCE
        assert tags[Family.S1_MINUS] is Stability.SOURCE
        assert tags[Family.S2_PLUS] is Stability.SADDLE
        assert tags[Family.S2_MINUS] is Stability.SADDLE

    def test_region_three_classification(self):
        tags = {r.family: r.stability for r in fixed_point_catalog(1.5, 1.0)}
        assert tags[Family.TRIVIAL_PLUS] is Stability.SADDLE
        assert tags[Family.TRIVIAL_MINUS] is Stability.SINK
        assert tags[Family.S1_PLUS] is Stability.SOURCE
        assert tags[Family.S1_MINUS] is Stability.SOURCE

    def test_k_negation_swaps_sinks_and_sources(self):
        for g, k in ((0.5, 1.0), (0.5, 2.5), (1.5, 1.0)):
            plus = fixed_point_catalog(g, k)
            minus = fixed_point_catalog(g, -k)
            swap = {
                Stability.SINK: Stability.SOURCE,
                Stability.SOURCE: Stability.SINK,
            }
            for rec in plus:
                twin = minus.by_family(rec.family)
                assert twin.stability is swap.get(rec.stability, rec.stability)

    def test_k_negation_negates_spectrum(self):
        plus = fixed_point_catalog(0.7, 1.9)
        minus = fixed_point_catalog(0.7, -1.9)
        for rec in plus:
            twin = minus.by_family(rec.family)
            a = sorted(
                (-lam for lam in rec.tangent_eigenvalues),
                key=lambda z: (z.real, z.imag),
            )
            b = sorted(twin.tangent_eigenvalues, key=lambda z: (z.real, z.imag))
            assert max(abs(x - y) for x, y in zip(a, b)) < 1e-9

    def test_k_zero_centers_except_persistent_saddle(self):
        tags = {r.family: r.stability for r in fixed_point_catalog(0.5, 0.0)}
        assert set(tags.values()) == {Stability.CENTER}
        tags = {r.family: r.stability for r in fixed_point_catalog(1.5, 0.0)}
        assert tags[Family.TRIVIAL_PLUS] is Stability.SADDLE
        assert tags[Family.TRIVIAL_MINUS] is Stability.CENTER
        assert tags[Family.S1_PLUS] is Stability.CENTER
        assert tags[Family.S1_MINUS] is Stability.CENTER

    def test_normal_eigenvalue_is_trace_complement(self):
        for rec in fixed_point_catalog(0.5, 2.5):
            J = stability_matrix(rec.position, ModelParams(v=1.0, g=0.5, k=2.5))
            total = complex(np.trace(J))
            assert rec.normal_eigenvalue == pytest.approx(
                total - sum(rec.tangent_eigenvalues), abs=1e-12
            )

    def test_tangent_eigenvalues_are_full_matrix_eigenvalues(self):
        # the tangent plane is invariant at on-sphere fixed points, so
        # the projected pair must appear in the 3x3 spectrum
        for g, k in ((0.5, 2.5), (1.5, 1.0)):
            for rec in fixed_point_catalog(g, k):
                J = stability_matrix(rec.position, ModelParams(v=1.0, g=g, k=k))
                spectrum = np.linalg.eigvals(J)
                for lam in rec.tangent_eigenvalues:
                    assert min(abs(spectrum - lam)) < 1e-9

    def test_nonstationary_record_rejected(self):
        cat = fixed_point_catalog(0.5, 1.0)
        import dataclasses

        bogus = dataclasses.replace(cat[0], residual=1.0)
        with pytest.raises(ValueError):
            classify_stability(bogus, ModelParams(v=1.0, g=0.5, k=1.0))


class TestLimitCycle:
    def test_great_circle_cycle_at_g_zero(self):
        p = ModelParams(v=1.0, g=0.0, k=1.0)
        cycle = find_limit_cycle(p, seed=BlochState(0.0, 0.5, 0.0))
        assert cycle is not None
        assert np.max(np.abs(cycle.trajectory.states[:, 0])) < 1e-6
        # independent oracle: period of ds/dt on the circle is
        # 2 pi / sqrt(4 v^2 - k^2)
        assert cycle.period == pytest.approx(
            2.0 * math.pi / math.sqrt(3.0), abs=1e-6
        )

    def test_deformed_cycle_in_region_one(self):
        cycle = find_limit_cycle(ModelParams(v=1.0, g=0.5, k=1.0))
        assert cycle is not None
        assert 0.0 < abs(cycle.section_state.sx) < 0.1
        closure = np.linalg.norm(
            cycle.trajectory.states[-1][:3] - cycle.trajectory.states[0][:3]
        )
        assert closure < 1e-5
        assert rhs_residual(cycle.section_state, ModelParams(v=1.0, g=0.5, k=1.0)) > 1e-3

    def test_stable_cycle_for_negative_k(self):
        cycle = find_limit_cycle(ModelParams(v=1.0, g=0.5, k=-1.0))
        assert cycle is not None

    def test_no_cycle_outside_region_one(self):
        assert find_limit_cycle(ModelParams(v=1.0, g=0.5, k=2.5)) is None
        assert find_limit_cycle(ModelParams(v=1.0, g=0.0, k=2.5)) is None
        assert find_limit_cycle(ModelParams(v=1.0, g=1.5, k=1.0)) is None

    def test_no_cycle_at_k_zero(self):
        assert find_limit_cycle(ModelParams(v=1.0, g=0.5, k=0.0)) is None

    def test_requires_unit_tunneling(self):
        with pytest.raises(ValueError):
            find_limit_cycle(ModelParams(v=2.0, g=0.0, k=1.0))
