import datetime as dt

import numpy as np
import pytest

from ecovar import (
    DegreesOfFreedomError,
    LagSelectionError,
    RankError,
    VarModel,
    assemble_dataset,
    companion_and_stability,
    fit_var,
    make_dummy,
    residual_whiteness,
    select_lag,
)
from conftest import daily_series, simulate_var1, simulate_varp


class TestFitVar:
    def test_bivariate_var1_recovery(self):
        a1 = np.array([[0.5, 0.1], [0.0, 0.3]])
        y = simulate_var1(a1, 50000, seed=1)
        fit = VarModel(p=1).fit(y)
        assert np.max(np.abs(fit.coefs_[0] - a1)) < 0.02

    def test_uncoupled_systems_show_no_coupling(self):
        rng = np.random.default_rng(2)
        n = 20000
        y = np.zeros((n, 2))
        e = rng.standard_normal((n, 2))
        for t in range(1, n):
            y[t, 0] = 0.6 * y[t - 1, 0] + e[t, 0]
            y[t, 1] = 0.4 * y[t - 1, 1] + e[t, 1]
        fit = VarModel(p=1).fit(y)
        se = np.sqrt(np.stack([np.diag(fit.coef_cov_[i]) for i in range(2)]))
        # off-diagonal lag coefficients: columns 1..2 of coef_ are the lag block
        assert abs(fit.coefs_[0][0, 1]) <= 3.0 * se[0, 2]
        assert abs(fit.coefs_[0][1, 0]) <= 3.0 * se[1, 1]

    def test_degrees_of_freedom_error_message(self):
        rng = np.random.default_rng(3)
        y = rng.standard_normal((100, 4))
        exog = rng.standard_normal(100)
        # k=4, p=20 needs more than 82 effective observations, 100 - 20 = 80
        with pytest.raises(DegreesOfFreedomError, match="more than 82"):
            VarModel(p=20).fit(y, exog=exog)

    def test_rank_error_names_column(self):
        rng = np.random.default_rng(4)
        y = rng.standard_normal((200, 2))
        zero = np.zeros(200)
        with pytest.raises(RankError, match="dead"):
            VarModel(p=1).fit(y, exog=zero, exog_names=["dead"])

    def test_residual_means_near_zero(self):
        y = simulate_var1(np.array([[0.4, 0.2], [0.1, 0.5]]), 3000, seed=5)
        fit = VarModel(p=2).fit(y)
        assert np.max(np.abs(fit.resid_.mean(axis=0))) < 1e-8

    def test_sigma_u_consistency_bit_exact(self):
        y = simulate_var1(np.array([[0.4, 0.0], [0.0, 0.5]]), 1000, seed=6)
        fit = VarModel(p=1).fit(y)
        recomputed = fit.resid_.T @ fit.resid_ / fit.nobs_
        assert np.array_equal(recomputed, fit.sigma_u_)

    def test_sigma_u_symmetric_psd(self):
        y = simulate_var1(np.array([[0.5, 0.1], [0.2, 0.3]]), 500, seed=7)
        fit = VarModel(p=1).fit(y)
        assert np.array_equal(fit.sigma_u_, fit.sigma_u_.T)
        assert np.min(np.linalg.eigvalsh(fit.sigma_u_)) > -1e-10

    def test_ols_orthogonality(self):
        y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), 2000, seed=8)
        fit = VarModel(p=3).fit(y)
        p, k, nobs = 3, 2, fit.nobs_
        X = np.column_stack(
            [np.ones(nobs)] + [y[p - lag : len(y) - lag] for lag in range(1, p + 1)]
        )
        Xs = X / np.maximum(np.abs(X).max(axis=0), 1e-12)
        for i in range(k):
            assert np.max(np.abs(Xs.T @ fit.resid_[:, i])) / nobs < 1e-8

    def test_matches_normal_equations_oracle(self):
        coefs = np.array([
            [[0.4, 0.1, 0.0], [0.0, 0.3, 0.1], [0.1, 0.0, 0.2]],
            [[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]],
        ])
        y = simulate_varp(coefs, 200, seed=9)
        fit = VarModel(p=2).fit(y)
        T, k, p = len(y), 3, 2
        X = np.column_stack(
            [np.ones(T - p)] + [y[p - lag : T - lag] for lag in range(1, p + 1)]
        )
        beta_oracle = np.linalg.solve(X.T @ X, X.T @ y[p:])
        assert np.max(np.abs(beta_oracle.T - fit.coef_)) < 1e-9

    def test_point_dummy_equals_dropping_the_row(self):
        # an exogenous dummy with a single 1 absorbs that observation exactly:
        # dropping the row and the dummy gives the same remaining-sample fit
        rng = np.random.default_rng(10)
        T, spike = 300, 150
        y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), T, seed=10)
        dummy = np.zeros(T)
        dummy[spike] = 1.0
        with_dummy = VarModel(p=1).fit(y, exog=dummy)

        # oracle: OLS on all rows except the spiked one, no dummy
        X = np.column_stack([np.ones(T - 1), y[:-1]])
        target = y[1:]
        keep = np.ones(T - 1, dtype=bool)
        keep[spike - 1] = False  # regression row t = spike
        beta = np.linalg.solve(
            X[keep].T @ X[keep], X[keep].T @ target[keep]
        )
        assert np.max(np.abs(beta.T - with_dummy.coef_[:, :3])) < 1e-9

    def test_exog_names_and_labels(self):
        y = simulate_var1(np.array([[0.5, 0.0], [0.0, 0.5]]), 200, seed=11)
        d = np.zeros(200)
        d[100] = 1.0
        fit = VarModel(p=1).fit(y, exog=d, var_names=["u", "v"], exog_names=["D"])
        assert fit.regressor_names_ == ["const", "u.l1", "v.l1", "D"]
        assert fit.exog_coefs_.shape == (2, 1)


class TestWhitenessAndLagSelection:
    def _dataset(self, y, names):
        start = dt.date(2020, 1, 1)
        cols = {
            nm: daily_series(y[:, i], start=start, name=nm) for i, nm in enumerate(names)
        }
        end = start + dt.timedelta(days=len(y) - 1)
        return assemble_dataset(cols, names, start, end)

    def test_correct_specification_is_white(self):
        ok = 0
        for seed in range(50):
            y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), 500, seed=100 + seed)
            fit = VarModel(p=1).fit(y)
            pvals = [r.p_value for r in residual_whiteness(fit, h=10)]
            ok += min(pvals) > 0.05
        assert ok >= 0.85 * 50

    def test_underfit_detected(self):
        coefs = np.array([
            [[0.3, 0.0], [0.0, 0.3]],
            [[0.4, 0.2], [0.2, 0.4]],
        ])
        hits = 0
        for seed in range(50):
            y = simulate_varp(coefs, 500, seed=200 + seed)
            fit = VarModel(p=1).fit(y)
            pvals = [r.p_value for r in residual_whiteness(fit, h=10)]
            hits += min(pvals) < 0.05
        assert hits >= 0.90 * 50

    def test_whiteness_h_zero_is_error(self):
        y = simulate_var1(np.array([[0.5, 0.0], [0.0, 0.3]]), 300, seed=12)
        fit = VarModel(p=1).fit(y)
        with pytest.raises(ValueError):
            residual_whiteness(fit, h=0)

    def test_select_lag_returns_truth_order(self):
        y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), 800, seed=13)
        ds = self._dataset(y, ["a", "b"])
        p, table = select_lag(ds, 1, 4, alpha=0.05, h=10)
        assert p == 1
        assert 1 in table

    def test_select_lag_needs_higher_order_for_lag6_coupling(self):
        coefs = np.zeros((6, 2, 2))
        coefs[0] = np.array([[0.2, 0.0], [0.0, 0.2]])
        coefs[5] = np.array([[0.5, 0.2], [0.2, 0.5]])
        y = simulate_varp(coefs, 2000, seed=14)
        ds = self._dataset(y, ["a", "b"])
        p, _ = select_lag(ds, 1, 8, alpha=0.05, h=12)
        assert p >= 6

    def test_select_lag_failure_reports_table(self):
        coefs = np.zeros((6, 2, 2))
        coefs[5] = np.array([[0.55, 0.2], [0.2, 0.55]])
        y = simulate_varp(coefs, 2000, seed=15)
        ds = self._dataset(y, ["a", "b"])
        with pytest.raises(LagSelectionError) as err:
            select_lag(ds, 1, 3, alpha=0.05, h=12)
        assert set(err.value.pvalues) == {1, 2, 3}

    def test_select_lag_bad_range_is_error(self):
        y = simulate_var1(np.array([[0.5, 0.0], [0.0, 0.3]]), 300, seed=16)
        ds = self._dataset(y, ["a", "b"])
        with pytest.raises(ValueError):
            select_lag(ds, 3, 2)

    def test_fit_var_uses_dataset_roles(self):
        y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), 400, seed=17)
        start = dt.date(2020, 1, 1)
        end = start + dt.timedelta(days=399)
        cols = {
            "a": daily_series(y[:, 0], start=start, name="a"),
            "b": daily_series(y[:, 1], start=start, name="b"),
            "D": make_dummy(start, end, {start + dt.timedelta(days=200)}),
        }
        ds = assemble_dataset(cols, ["a", "b"], start, end, exog=["D"])
        fit = fit_var(ds, p=2)
        assert fit.names_ == ["a", "b"]
        assert fit.exog_names_ == ["D"]
        assert fit.nobs_ == 398


class TestCompanionAndStability:
    def test_diagonal_case(self):
        coefs = np.array([[[0.5, 0.0], [0.0, 0.3]]])
        res = companion_and_stability(coefs)
        assert res.max_eigenvalue_modulus == pytest.approx(0.5, abs=1e-12)
        assert res.stable

    def test_identity_is_unit_root(self):
        res = companion_and_stability(np.eye(2)[None])
        assert res.max_eigenvalue_modulus == pytest.approx(1.0, abs=1e-12)
        assert not res.stable

    def test_companion_shape_var2(self):
        coefs = np.array([
            [[0.4, 0.1], [0.0, 0.3]],
            [[0.1, 0.0], [0.0, 0.1]],
        ])
        res = companion_and_stability(coefs)
        assert res.companion.shape == (4, 4)
        assert np.array_equal(res.companion[2:, :2], np.eye(2))

    def test_estimator_method_agrees(self):
        y = simulate_var1(np.array([[0.5, 0.1], [0.0, 0.3]]), 1000, seed=18)
        fit = VarModel(p=1).fit(y)
        assert fit.stability().max_eigenvalue_modulus == pytest.approx(
            companion_and_stability(fit.coefs_).max_eigenvalue_modulus
        )
