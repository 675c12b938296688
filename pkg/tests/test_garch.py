import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import volkit as vk
from volkit import Family, GarchParams, InnovationSpec, Model
from volkit.distributions import log_pdf
from volkit.errors import InfeasibleParamsError, NonPositiveVarianceError
from volkit.garch import filter_variance, log_likelihood, simulate_path, variance_step

GED2 = InnovationSpec(Family.GED, 2.0)


class TestParamsValidation:
    def test_sgarch_persistence_bound(self):
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.SGARCH, 0.1, 0.5, 0.5, GED2)

    def test_sgarch_needs_positive_omega(self):
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.SGARCH, 0.0, 0.1, 0.8, GED2)

    def test_igarch_coefficients_tied(self):
        params = GarchParams.igarch(0.1, 0.8, GED2)
        assert params.alpha == pytest.approx(0.2)
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.IGARCH, 0.1, 0.3, 0.8, GED2)

    def test_igarch_accepts_zero_omega(self):
        params = GarchParams.igarch(0.0, 0.8, GED2)
        assert params.omega == 0.0

    def test_tgarch_feasibility_uses_negative_tail_mass(self):
        # persistence alpha + beta + lam * P(z < 0); symmetric law gives 1/2
        GarchParams(Model.TGARCH, 0.1, 0.1, 0.7, GED2, 0.39)
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.TGARCH, 0.1, 0.1, 0.7, GED2, 0.41)

    def test_tgarch_skewed_innovation_shifts_bound(self):
        # negative skew puts less mass below zero, loosening the lam bound
        skewed = InnovationSpec(Family.NIG, 1.5, -0.9)
        sym = InnovationSpec(Family.NIG, 1.5, 0.0)
        lam = 0.45
        GarchParams(Model.TGARCH, 0.1, 0.1, 0.7, skewed, lam)
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.TGARCH, 0.1, 0.1, 0.7, sym, lam)

    def test_tgarch_bad_news_coefficient_bound(self):
        with pytest.raises(InfeasibleParamsError):
            GarchParams(Model.TGARCH, 0.1, 0.1, 0.5, GED2, -0.2)


class TestVarianceStep:
    def test_sgarch_hand_value(self):
        params = GarchParams(Model.SGARCH, 0.1, 0.2, 0.7, GED2)
        assert variance_step(params, 1.0, 2.0) == pytest.approx(1.6, abs=1e-12)

    def test_igarch_hand_value(self):
        params = GarchParams.igarch(0.1, 0.8, GED2)
        assert variance_step(params, 1.0, 2.0) == pytest.approx(1.7, abs=1e-12)

    def test_tgarch_hand_values_bad_news_exceeds_good(self):
        # omega + (alpha + lam) x^2 + beta s2 = 0.1 + 0.5*4 + 0.5 = 2.6 on bad news
        params = GarchParams(Model.TGARCH, 0.1, 0.2, 0.5, GED2, 0.3)
        bad = variance_step(params, 1.0, -2.0)
        good = variance_step(params, 1.0, 2.0)
        assert bad == pytest.approx(2.6, abs=1e-12)
        assert good == pytest.approx(1.4, abs=1e-12)
        assert bad - good == pytest.approx(params.lam * 4.0, abs=1e-12)

    def test_zero_shock_is_good_news(self):
        params = GarchParams(Model.TGARCH, 0.1, 0.2, 0.5, GED2, 0.3)
        assert variance_step(params, 1.0, 0.0) == pytest.approx(0.6, abs=1e-15)

    def test_requires_positive_previous_variance(self):
        params = GarchParams(Model.SGARCH, 0.1, 0.2, 0.7, GED2)
        with pytest.raises(NonPositiveVarianceError):
            variance_step(params, 0.0, 1.0)

    @given(
        s2=st.floats(min_value=1e-8, max_value=1e4),
        x=st.floats(min_value=1e-8, max_value=1e3),
    )
    @settings(max_examples=150, deadline=None)
    def test_tgarch_news_asymmetry_identity(self, s2, x):
        """variance_step(s2, -|x|) - variance_step(s2, +|x|) equals lam x^2.

        Exact up to rounding of the shared recursion terms, so the error
        bound scales with the largest intermediate value.
        """
        params = GarchParams(Model.TGARCH, 0.1, 0.2, 0.5, GED2, 0.3)
        bad = variance_step(params, s2, -x)
        good = variance_step(params, s2, x)
        tol = 8.0 * np.finfo(float).eps * max(bad, good)
        assert bad - good == pytest.approx(params.lam * x * x, abs=tol)

    @given(
        s2=st.floats(min_value=1e-8, max_value=1e4),
        x=st.floats(min_value=-1e3, max_value=1e3),
    )
    @settings(max_examples=150, deadline=None)
    def test_tgarch_with_zero_lam_equals_sgarch(self, s2, x):
        t = GarchParams(Model.TGARCH, 0.1, 0.2, 0.5, GED2, 0.0)
        s = GarchParams(Model.SGARCH, 0.1, 0.2, 0.5, GED2)
        assert variance_step(t, s2, x) == variance_step(s, s2, x)

    def test_igarch_fixed_point_with_zero_omega(self):
        params = GarchParams.igarch(0.0, 0.8, GED2)
        c = 2.37
        assert variance_step(params, c, math.sqrt(c)) == pytest.approx(c, rel=1e-15)


class TestFilterVariance:
    def test_constant_variance_degenerate_case(self):
        params = GarchParams(Model.SGARCH, 0.7, 0.0, 0.0, GED2)
        path = filter_variance(params, np.array([1.0, -2.0, 3.0, 0.5]), 5.0)
        np.testing.assert_allclose(path.sigma2, [5.0, 0.7, 0.7, 0.7], atol=1e-15)

    def test_five_step_hand_recursion(self):
        params = GarchParams(Model.SGARCH, 0.1, 0.2, 0.7, GED2)
        x = np.array([1.0, -1.0, 2.0, 0.0, 1.0])
        path = filter_variance(params, x, 1.0)
        np.testing.assert_allclose(path.sigma2, [1.0, 1.0, 1.0, 1.6, 1.22], atol=1e-12)

    def test_igarch_zero_omega_convex_combination(self, rng):
        params = GarchParams.igarch(0.0, 0.8, GED2)
        x = rng.standard_normal(50)
        path = filter_variance(params, x, 1.0)
        for t in range(1, 50):
            lo = min(path.sigma2[t - 1], x[t - 1] ** 2)
            hi = max(path.sigma2[t - 1], x[t - 1] ** 2)
            assert lo - 1e-12 <= path.sigma2[t] <= hi + 1e-12

    @pytest.mark.parametrize(
        "params",
        [
            GarchParams(Model.SGARCH, 0.05, 0.1, 0.85, GED2),
            GarchParams.igarch(0.05, 0.8, GED2),
            GarchParams(Model.TGARCH, 0.05, 0.05, 0.8, InnovationSpec(Family.NIG, 1.5, -0.4), 0.15),
        ],
    )
    def test_filter_matches_stepwise_recursion(self, params, rng):
        """The vectorized filter agrees with naive step iteration."""
        x = rng.standard_normal(300)
        path = filter_variance(params, x, 1.3)
        manual = np.empty_like(x)
        manual[0] = 1.3
        for t in range(1, x.size):
            manual[t] = variance_step(params, manual[t - 1], x[t - 1])
        np.testing.assert_allclose(path.sigma2, manual, rtol=1e-12, atol=0.0)

    def test_positivity_for_feasible_params(self, rng):
        params = GarchParams(Model.TGARCH, 1e-6, 0.3, 0.4, GED2, 0.3)
        x = rng.standard_normal(2000) * 10.0
        assert np.all(filter_variance(params, x, 1e-8).sigma2 > 0.0)

    def test_rejects_bad_init(self):
        params = GarchParams(Model.SGARCH, 0.1, 0.1, 0.8, GED2)
        with pytest.raises(NonPositiveVarianceError):
            filter_variance(params, np.ones(5), 0.0)


class TestLogLikelihood:
    def test_degenerate_equals_iid_normal(self, rng):
        x = rng.standard_normal(400)
        params = GarchParams(Model.SGARCH, 1.0, 0.0, 0.0, GED2)
        got = log_likelihood(params, x, 1.0)
        want = float(np.sum(-0.5 * math.log(2.0 * math.pi) - 0.5 * x**2))
        assert got == pytest.approx(want, abs=1e-8)

    @pytest.mark.parametrize(
        "params",
        [
            GarchParams(Model.SGARCH, 0.05, 0.1, 0.85, InnovationSpec(Family.STUDENT_T, 5.0)),
            GarchParams(Model.TGARCH, 0.05, 0.05, 0.8, InnovationSpec(Family.NIG, 1.5, 0.4), 0.1),
        ],
    )
    def test_two_pass_oracle_identity(self, params, rng):
        """One-shot likelihood equals filtering first and summing densities after."""
        x = rng.standard_normal(500)
        got = log_likelihood(params, x, 0.9)
        path = filter_variance(params, x, 0.9)
        z = x / np.sqrt(path.sigma2)
        want = float(np.sum(log_pdf(params.innovation, z) - 0.5 * np.log(path.sigma2)))
        assert got == pytest.approx(want, abs=1e-10)

    def test_continuity_under_tiny_perturbations(self, rng):
        x = rng.standard_normal(2000)
        base = GarchParams(Model.SGARCH, 0.05, 0.1, 0.85, InnovationSpec(Family.STUDENT_T, 6.0))
        ll = log_likelihood(base, x, 1.0)
        bumped = [
            GarchParams(Model.SGARCH, 0.05 + 1e-8, 0.1, 0.85, base.innovation),
            GarchParams(Model.SGARCH, 0.05, 0.1 + 1e-8, 0.85, base.innovation),
            GarchParams(Model.SGARCH, 0.05, 0.1, 0.85 + 1e-8, base.innovation),
            GarchParams(
                Model.SGARCH, 0.05, 0.1, 0.85, InnovationSpec(Family.STUDENT_T, 6.0 + 1e-8)
            ),
        ]
        for params in bumped:
            assert abs(log_likelihood(params, x, 1.0) - ll) < 1e-3

    def test_accepts_return_series(self, rng):
        series = vk.ReturnSeries.from_values(rng.standard_normal(50) * 0.01)
        params = GarchParams(Model.SGARCH, 1e-5, 0.1, 0.8, GED2)
        assert math.isfinite(log_likelihood(params, series, 1e-4))


class TestSimulatePath:
    def test_same_seed_identical_paths(self):
        params = GarchParams(Model.TGARCH, 0.05, 0.05, 0.8, InnovationSpec(Family.NIG, 1.5, -0.4), 0.15)
        x1, s1 = simulate_path(params, 500, 1.0, seed=3)
        x2, s2 = simulate_path(params, 500, 1.0, seed=3)
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_array_equal(s1, s2)

    def test_degenerate_unit_variance_draws(self):
        params = GarchParams(Model.SGARCH, 1.0, 0.0, 0.0, GED2)
        x, s2 = simulate_path(params, 1_000_000, 1.0, seed=12)
        assert np.all(s2[1:] == 1.0)
        assert x.var() == pytest.approx(1.0, abs=0.02)

    def test_stationary_variance_recovered(self):
        params = GarchParams(Model.SGARCH, 0.05, 0.1, 0.85, GED2)
        x, _ = simulate_path(params, 1_000_000, 1.0, seed=21)
        assert x.var() == pytest.approx(1.0, abs=0.05)

    def test_variances_stay_positive(self):
        params = GarchParams(Model.TGARCH, 0.01, 0.25, 0.5, InnovationSpec(Family.STUDENT_T, 4.0), 0.3)
        _, s2 = simulate_path(params, 20_000, 0.5, seed=9)
        assert np.all(s2 > 0.0)
