import math

import numpy as np
import pytest

from oraclebench import (
    InvalidInputError,
    InvalidProfileError,
    IterationLimitError,
    Sample,
    criterion_bound,
    empirical_risk,
    erm_residual,
    generalized_inverse,
    l1_complexity_profile,
    l1_penalty_level,
    project_l1_ball,
    rerm_regularizer,
    rerm_residual,
    solve_lasso,
    solve_lq_rerm,
    solve_square_lasso,
    vc_rate,
)


def sort_threshold_projection(v, radius):
    """Independent sort-based oracle for the l1 projection."""
    v = np.asarray(v, dtype=float)
    absv = np.abs(v)
    if absv.sum() <= radius:
        return v.copy()
    u = np.sort(absv)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(len(u)):
        if u[j] > (css[j] - radius) / (j + 1):
            rho = j
    theta = (css[rho] - radius) / (rho + 1)
    return np.sign(v) * np.maximum(absv - theta, 0.0)


def grid_objective_min(sample, weight, power, grid_pts=400, lo=-3.0, hi=3.0):
    """Brute-force d=2 objective minimum over a square grid."""
    g = np.linspace(lo, hi, grid_pts)
    b1, b2 = np.meshgrid(g, g)
    betas = np.stack([b1.ravel(), b2.ravel()], axis=1)
    risks = np.mean(
        np.abs(sample.response[None, :] - betas @ sample.design.T) ** 2, axis=1
    )
    return float((risks + weight * np.abs(betas).sum(axis=1) ** power).min())


def random_instance(rng, n=20, d=2, noise=0.3):
    design = rng.standard_normal((n, d))
    response = design @ rng.uniform(-1, 1, d) + noise * rng.standard_normal(n)
    return Sample(design=design, response=response)


class TestProjectL1Ball:
    def test_inside_unchanged(self):
        v = np.array([0.25, -0.25, 0.1])
        assert np.array_equal(project_l1_ball(v, 1.0), v)

    def test_axis_example(self):
        assert np.allclose(project_l1_ball(np.array([3.0, 0.0]), 1.0), [1.0, 0.0])

    def test_two_coordinate_example(self):
        assert np.allclose(project_l1_ball(np.array([2.0, 1.0]), 1.0), [1.0, 0.0])

    def test_matches_sort_oracle_exactly(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            d = int(rng.integers(1, 12))
            v = rng.standard_normal(d) * rng.uniform(0.1, 10)
            r = rng.uniform(0, 4)
            assert np.array_equal(project_l1_ball(v, r), sort_threshold_projection(v, r))

    def test_norm_bound_and_idempotence(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            v = rng.standard_normal(6) * 3
            r = rng.uniform(0, 2)
            p = project_l1_ball(v, r)
            assert np.abs(p).sum() <= r + 1e-10
            assert np.allclose(project_l1_ball(p, r), p, atol=1e-14)

    def test_zero_radius(self):
        assert np.array_equal(project_l1_ball(np.array([1.0, -2.0]), 0.0), [0.0, 0.0])

    def test_negative_radius(self):
        with pytest.raises(InvalidInputError):
            project_l1_ball(np.array([1.0]), -0.5)


class TestSolveLqRerm:
    def test_huge_penalty_drives_beta_to_zero(self):
        rng = np.random.default_rng(2)
        s = random_instance(rng)
        sol = solve_lq_rerm(s, 2.0, penalty_coef=1e9, tol=1e-10)
        assert np.abs(sol.beta).sum() < 1e-6
        assert sol.objective == pytest.approx(np.mean(s.response**2), rel=1e-4)

    def test_zero_penalty_one_dim_mean(self):
        y = np.array([1.0, 2.0, 6.0])
        s = Sample(design=np.ones((3, 1)), response=y)
        sol = solve_lq_rerm(s, 2.0, penalty_coef=0.0, tol=1e-10)
        assert sol.beta[0] == pytest.approx(y.mean(), abs=1e-6)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(3)
        tol = 1e-8
        for _ in range(8):
            s = random_instance(rng)
            weight = rng.uniform(0, 0.3)
            sol = solve_lq_rerm(s, 2.0, weight, tol=tol)
            gridmin = grid_objective_min(s, weight, 2.0)
            assert sol.objective <= gridmin + tol
            assert sol.optimality_gap <= tol

    def test_q4_matches_direct_search(self):
        rng = np.random.default_rng(4)
        s = random_instance(rng, n=15)
        weight = 0.05
        sol = solve_lq_rerm(s, 4.0, weight, tol=1e-8)
        g = np.linspace(-3, 3, 300)
        b1, b2 = np.meshgrid(g, g)
        betas = np.stack([b1.ravel(), b2.ravel()], axis=1)
        objs = np.mean(
            np.abs(s.response[None, :] - betas @ s.design.T) ** 4, axis=1
        ) + weight * np.abs(betas).sum(axis=1) ** 4
        assert sol.objective <= objs.min() + 1e-8

    def test_objective_identity_and_radius(self):
        rng = np.random.default_rng(5)
        s = random_instance(rng)
        sol = solve_lq_rerm(s, 3.0, 0.07, tol=1e-8)
        risk = empirical_risk(np.abs(s.response - s.design @ sol.beta) ** 3)
        assert sol.objective == pytest.approx(risk + 0.07 * np.abs(sol.beta).sum() ** 3, abs=1e-10)
        assert np.abs(sol.beta).sum() <= sol.inner_radius + 1e-8

    def test_never_beats_reference_probes(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            s = random_instance(rng)
            weight = rng.uniform(0, 1)
            sol = solve_lq_rerm(s, 2.0, weight, tol=1e-9)
            at_zero = np.mean(s.response**2)
            ls = np.linalg.lstsq(s.design, s.response, rcond=None)[0]
            at_ls = np.mean((s.response - s.design @ ls) ** 2) + weight * np.abs(ls).sum() ** 2
            assert sol.objective <= at_zero + 1e-9
            assert sol.objective <= at_ls + 1e-9

    def test_constrained_value_convex_nonincreasing(self):
        # sampled V(r) must be nonincreasing and convex up to inner tolerance
        rng = np.random.default_rng(7)
        s = random_instance(rng)
        radii = np.linspace(0.0, 2.0, 9)
        values = [_constrained_value(s, r) for r in radii]
        diffs = np.diff(values)
        assert np.all(diffs <= 1e-8)
        second = np.diff(values, 2)
        assert np.all(second >= -1e-6)

    def test_q_domain(self):
        rng = np.random.default_rng(8)
        s = random_instance(rng)
        with pytest.raises(InvalidInputError):
            solve_lq_rerm(s, 1.5, 0.1)
        with pytest.raises(InvalidInputError):
            solve_lq_rerm(s, 2.0, -0.1)

    def test_iteration_limit_carries_best_iterate(self):
        rng = np.random.default_rng(20)
        s = random_instance(rng)
        with pytest.raises(IterationLimitError) as info:
            solve_lq_rerm(s, 2.0, 0.05, tol=1e-12, max_iter=2)
        best = info.value.best
        assert best is not None
        assert np.all(np.isfinite(best.beta))
        assert best.objective <= np.mean(s.response**2) + 1e-12


def _constrained_value(sample, radius):
    from oraclebench.solvers import _inner_solve, _LqObjective

    obj = _LqObjective(sample, 2.0)
    step = 1.0 / obj.lipschitz_estimate(np.zeros(obj.d))
    _, value, _, _ = _inner_solve(obj, radius, np.zeros(obj.d), step, 1e-12, 50_000)
    return value


class TestSolveSquareLasso:
    def test_kappa_zero_is_least_squares(self):
        rng = np.random.default_rng(9)
        s = random_instance(rng)
        sol = solve_square_lasso(s, 0.0, tol=1e-10)
        ls = np.linalg.lstsq(s.design, s.response, rcond=None)[0]
        ls_obj = np.mean((s.response - s.design @ ls) ** 2)
        assert sol.objective <= ls_obj + 1e-9

    def test_zero_response(self):
        s = Sample(design=np.eye(3), response=np.zeros(3))
        sol = solve_square_lasso(s, 1.0, tol=1e-10)
        assert np.allclose(sol.beta, 0.0)
        assert sol.objective == 0.0

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            s = random_instance(rng)
            kappa = rng.uniform(0, 5)
            sol = solve_square_lasso(s, kappa, tol=1e-8)
            gridmin = grid_objective_min(s, kappa / s.n, 2.0)
            assert sol.objective <= gridmin + 1e-8

    def test_penalty_monotone_shrinkage(self):
        rng = np.random.default_rng(11)
        s = random_instance(rng, n=30, d=4)
        norms = []
        for kappa in (0.0, 0.5, 2.0, 8.0, 32.0):
            sol = solve_square_lasso(s, kappa, tol=1e-9)
            norms.append(np.abs(sol.beta).sum())
        assert all(b <= a + 1e-6 for a, b in zip(norms, norms[1:]))


class TestSolveLasso:
    def test_zero_penalty_least_squares(self):
        rng = np.random.default_rng(12)
        s = random_instance(rng)
        beta = solve_lasso(s, 0.0, tol=1e-12)
        ls = np.linalg.lstsq(s.design, s.response, rcond=None)[0]
        assert np.allclose(beta, ls, atol=1e-8)

    def test_threshold_kills_all_coordinates(self):
        rng = np.random.default_rng(13)
        s = random_instance(rng)
        lam = 2 * np.abs(s.design.T @ s.response).max() / s.n
        beta = solve_lasso(s, lam * 1.0001, tol=1e-12)
        assert np.array_equal(beta, np.zeros(s.d))

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            s = random_instance(rng)
            lam = rng.uniform(0.01, 0.5)
            beta = solve_lasso(s, lam, tol=1e-10)
            mine = np.mean((s.response - s.design @ beta) ** 2) + lam * np.abs(beta).sum()
            gridmin = grid_objective_min(s, lam, 1.0)
            assert mine <= gridmin + 1e-8


class TestPenaltyLevel:
    def test_unit_plug_in(self):
        value = l1_penalty_level(math.e, math.e, 1e-12, 2.0, 1.0)
        assert value == pytest.approx(1.0, rel=1e-9)

    def test_homogeneity_in_scale(self):
        for q in (2.0, 4.0):
            a = l1_penalty_level(100, 50, 1.0, q, 1.0)
            b = l1_penalty_level(100, 50, 1.0, q, 2.0)
            assert b == pytest.approx(2**q * a, rel=1e-12)

    def test_increasing_in_x(self):
        values = [l1_penalty_level(100, 50, x, 2.0, 1.0) for x in (0.5, 1.0, 2.0, 4.0)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_domain(self):
        with pytest.raises(InvalidInputError):
            l1_penalty_level(1, 50, 1.0, 2.0, 1.0)
        with pytest.raises(InvalidInputError):
            l1_penalty_level(100, 50, 0.0, 2.0, 1.0)


class TestErmResidual:
    def test_lambda_dominates(self):
        spec = erm_residual(0.7, 0.0, 0.0, 0.25, 1.0, 100)
        assert spec.value == 0.7

    def test_deviation_plug_in(self):
        n = 64
        eps = 0.4
        spec = erm_residual(0.0, 1.0, 0.0, eps, float(n), n)
        assert spec.value == pytest.approx(1.0 / eps)

    def test_monotone_in_x(self):
        values = [erm_residual(0.0, 1.0, 2.0, 0.25, x, 100).value for x in (0.5, 1.0, 2.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_linear_in_c0(self):
        a = erm_residual(0.0, 1.0, 2.0, 0.25, 1.0, 100, c0=1.0).value
        b = erm_residual(0.0, 1.0, 2.0, 0.25, 1.0, 100, c0=2.0).value
        assert b == pytest.approx(2 * a)

    def test_epsilon_domain(self):
        with pytest.raises(InvalidInputError):
            erm_residual(0.0, 1.0, 1.0, 0.5, 1.0, 100)


class TestRermResidual:
    @staticmethod
    def degenerate_profile():
        from oraclebench import ComplexityProfile

        zero = lambda r: 0.0
        return ComplexityProfile(n=100, epsilon=0.25, lambda_star=zero, bn=zero, phi_n=zero)

    def test_degenerate_profile(self):
        assert rerm_residual(self.degenerate_profile(), 1.0, 1.0) == 0.0

    def test_monotone_in_r_and_x(self):
        profile = l1_complexity_profile(256, 20, 2.0, 1.0, 0.25)
        base = rerm_residual(profile, 1.0, 1.0)
        assert rerm_residual(profile, 2.0, 1.0) >= base
        assert rerm_residual(profile, 1.0, 2.0) >= base

    def test_closed_form_cross_check(self):
        n, d, q, kd, eps = 256, 20, 2.0, 1.0, 0.25
        profile = l1_complexity_profile(n, d, q, kd, eps)
        r, x = 1.5, 2.0
        expected = max(
            profile.lambda_star(r),
            (profile.phi_n(r) + profile.bn(r) / eps) * (x + 1) / (n * eps),
        )
        assert rerm_residual(profile, r, x) == pytest.approx(expected, rel=1e-12)


class TestGeneralizedInverse:
    def test_identity_map(self):
        assert generalized_inverse(lambda r: r, 3.0, tol=1e-10) == pytest.approx(3.0, abs=1e-8)

    def test_quadratic_map(self):
        assert generalized_inverse(lambda r: (1 + r) ** 2, 4.0, tol=1e-10) == pytest.approx(
            1.0, abs=1e-8
        )

    def test_constant_above_target(self):
        assert generalized_inverse(lambda r: 7.0, 3.0) == 0.0

    def test_constant_below_target_raises(self):
        with pytest.raises(InvalidProfileError):
            generalized_inverse(lambda r: 1.0, 3.0)

    def test_tabulated_map(self):
        grid = np.linspace(0, 10, 101)
        values = grid**2
        assert generalized_inverse((grid, values), 25.0) == pytest.approx(5.0)
        assert generalized_inverse((grid, values), -1.0) == 0.0
        assert generalized_inverse((grid, values), 1e9) == 10.0


class TestCriterionBound:
    def test_bounded_case(self):
        assert criterion_bound(None, 0, 0, 0, 1.0, 0.25, bounded_crit=7.0) == 7.0

    def test_zero_risk_anchor(self):
        profile = TestRermResidual.degenerate_profile()
        profile2 = l1_complexity_profile(256, 20, 2.0, 1.0, 0.25)
        # anchor with zero risk and zero tail bounds: inverse at 0 is 0
        value = criterion_bound(profile2, 0.0, 1.0, 0.0, 1.0, 0.25, k1=1.0, k_prime=0.0)
        assert value == pytest.approx(1.0 * (1.0 + 2.0))

    def test_monotone_in_x(self):
        profile = l1_complexity_profile(256, 20, 2.0, 1.0, 0.25)
        a = criterion_bound(profile, 0.5, 1.0, 0.3, 1.0, 0.25)
        b = criterion_bound(profile, 0.5, 1.0, 0.3, 5.0, 0.25)
        assert b >= a


class TestRermRegularizer:
    def test_degenerate_profile(self):
        profile = TestRermResidual.degenerate_profile()
        assert rerm_regularizer(profile, 1.0, 1.0, 1.0, 0.25) == 0.0

    def test_monotone_in_crit(self):
        profile = l1_complexity_profile(256, 20, 2.0, 1.0, 0.25)
        values = [rerm_regularizer(profile, c, 1.0, 2.0, 0.25) for c in (0.0, 1.0, 2.0, 4.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_prefactor_against_residual(self):
        profile = l1_complexity_profile(256, 20, 2.0, 1.0, 0.25)
        crit, x, alpha_n, eps = 1.0, 1.0, 3.0, 0.01
        rho = rerm_residual(profile, crit + 1.0, x + math.log(alpha_n))
        value = rerm_regularizer(profile, crit, x, alpha_n, eps)
        assert value == pytest.approx(2.0 / (1.0 + 2 * eps) * rho, rel=1e-12)
        # prefactor tends to 2 as eps tends to 0
        assert value == pytest.approx(2.0 * rho, rel=0.05)

    def test_alpha_domain(self):
        profile = TestRermResidual.degenerate_profile()
        with pytest.raises(InvalidInputError):
            rerm_regularizer(profile, 1.0, 1.0, 0.5, 0.25)


class TestVcRate:
    def test_v_equals_n(self):
        assert vc_rate(16, 16, 2.0, 0.25) == pytest.approx(2.0 / 0.25**2)

    def test_linear_in_x(self):
        a = vc_rate(4, 100, 1.0, 0.25)
        assert vc_rate(4, 100, 3.0, 0.25) == pytest.approx(3 * a)

    def test_zero_constant(self):
        assert vc_rate(4, 100, 1.0, 0.25, c0=0.0) == 0.0

    def test_domain(self):
        with pytest.raises(InvalidInputError):
            vc_rate(101, 100, 1.0, 0.25)
