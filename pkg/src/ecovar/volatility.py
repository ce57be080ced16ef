"""Conditional-volatility extraction: AR mean model plus GARCH variance model.

The variance model follows the convention that ``arch_order`` counts lags of
the squared shock and ``garch_order`` counts lags of the conditional variance:

    h_t = omega + sum_i alpha_i e_{t-i}^2 + sum_j beta_j h_{t-j}

fitted by Gaussian quasi-maximum likelihood under the constraints omega > 0,
alpha >= 0, beta >= 0, sum(alpha) + sum(beta) < 1.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter, lfiltic
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .diagnostics import LjungBoxResult, ljung_box, _ols_qr
from .errors import RankError
from .series import TimeSeries, first_difference

_SUM_CAP = 1.0 - 1e-6  # strict stationarity margin on sum(alpha) + sum(beta)


def _check_garch_params(omega, alpha, beta):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float)) if beta is not None else np.empty(0)
    if omega <= 0:
        raise ValueError(f"omega must be > 0: got {omega}")
    if np.any(alpha < 0) or np.any(beta < 0):
        raise ValueError("alpha and beta must be nonnegative")
    if alpha.sum() + beta.sum() >= 1.0:
        raise ValueError(
            f"sum(alpha) + sum(beta) = {alpha.sum() + beta.sum():.6f} must be < 1"
        )
    return float(omega), alpha, beta


def garch_filter(omega, alpha, beta, eps, presample: float | None = None) -> np.ndarray:
    """Conditional-variance recursion for given parameters.

    Presample squared shocks and variances are set to the sample variance of
    ``eps`` (overridable via ``presample``), so the path is a deterministic
    function of the inputs. Every h_t >= omega by construction.
    """
    omega, alpha, beta = _check_garch_params(omega, alpha, beta)
    eps = np.asarray(eps, dtype=float).ravel()
    n = len(eps)
    if n == 0:
        raise ValueError("empty shock sequence")
    pres = float(np.var(eps)) if presample is None else float(presample)
    e2 = eps**2
    q, p = len(alpha), len(beta)
    if q:
        e2full = np.concatenate([np.full(q, pres), e2])
        x = np.full(n, omega)
        for i in range(1, q + 1):
            x += alpha[i - 1] * e2full[q - i : q - i + n]
    else:
        x = np.full(n, omega)
    if p:
        a = np.concatenate([[1.0], -beta])
        zi = lfiltic([1.0], a, y=np.full(p, pres))
        h, _ = lfilter([1.0], a, x, zi=zi)
    else:
        h = x
    return h


def _gaussian_quasi_loglik(eps2: np.ndarray, h: np.ndarray) -> float:
    # constant term dropped
    return -0.5 * float(np.sum(np.log(h) + eps2 / h))


def simulate_garch(omega, alpha, beta, n: int, burn_in: int = 500, seed: int = 0) -> np.ndarray:
    """Simulate a GARCH shock sequence with iid standard-normal innovations.

    Deterministic given ``seed``; the recursion starts at the unconditional
    variance and the first ``burn_in`` draws are discarded.
    """
    omega, alpha, beta = _check_garch_params(omega, alpha, beta)
    if n < 1:
        raise ValueError(f"n must be >= 1: got {n}")
    rng = np.random.default_rng(seed)
    q, p = len(alpha), len(beta)
    total = n + burn_in
    z = rng.standard_normal(total)
    h0 = omega / (1.0 - alpha.sum() - beta.sum())
    e2_hist = [h0] * q
    h_hist = [h0] * p
    eps = np.empty(total)
    for t in range(total):
        h = omega
        for i in range(q):
            h += alpha[i] * e2_hist[i]
        for j in range(p):
            h += beta[j] * h_hist[j]
        e = z[t] * np.sqrt(h)
        eps[t] = e
        if q:
            e2_hist = [e * e] + e2_hist[:-1]
        if p:
            h_hist = [h] + h_hist[:-1]
    return eps[burn_in:]


class ArModel(BaseEstimator):
    """Autoregressive mean model on a sparse lag set, fit by OLS.

    ``lags`` lists the included lags, e.g. ``(1, 6)`` regresses y_t on an
    intercept, y_{t-1} and y_{t-6}, conditioning on the first max(lags)
    observations.
    """

    def __init__(self, lags=(1,)):
        self.lags = lags

    def fit(self, y):
        y = np.asarray(y, dtype=float).ravel()
        lags = sorted(set(int(k) for k in self.lags))
        if not lags or lags[0] < 1:
            raise ValueError(f"lags must be positive integers: got {self.lags}")
        kmax = lags[-1]
        n = len(y)
        m = len(lags) + 1
        if n <= kmax + m + 1:
            raise ValueError(
                f"need more than max(lags) + {m} + 1 = {kmax + m + 1} observations, got {n}"
            )
        rows = n - kmax
        X = np.empty((rows, m))
        X[:, 0] = 1.0
        labels = ["const"]
        for j, k in enumerate(lags, start=1):
            X[:, j] = y[kmax - k : n - k]
            labels.append(f"lag{k}")
        target = y[kmax:]
        try:
            beta, resid, xtx_inv = _ols_qr(X, target, labels)
        except RankError:
            raise RankError(
                "AR design matrix is rank deficient (constant or degenerate input)"
            ) from None
        sigma2 = float(resid @ resid) / (rows - m)
        self.lags_ = tuple(lags)
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:].copy()
        self.coef_se_ = np.sqrt(sigma2 * np.diag(xtx_inv))[1:]
        self.intercept_se_ = float(np.sqrt(sigma2 * xtx_inv[0, 0]))
        self.resid_ = resid
        self.sigma2_ = sigma2
        self.nobs_ = rows
        return self

    def residuals(self, y) -> np.ndarray:
        """Residuals of the fitted equation evaluated on a new sequence."""
        check_is_fitted(self, "coef_")
        y = np.asarray(y, dtype=float).ravel()
        kmax = self.lags_[-1]
        if len(y) <= kmax:
            raise ValueError(f"need more than {kmax} observations, got {len(y)}")
        pred = np.full(len(y) - kmax, self.intercept_)
        for c, k in zip(self.coef_, self.lags_):
            pred += c * y[kmax - k : len(y) - k]
        return y[kmax:] - pred


class Garch(BaseEstimator):
    """GARCH conditional-variance model fit by Gaussian quasi-maximum likelihood.

    The constrained problem is solved in unconstrained coordinates: omega
    through exp, the ARCH/GARCH coefficients through exponentials rescaled so
    their sum stays below 1. A quasi-Newton (BFGS) ascent with numerical
    gradients runs on the per-observation average log-likelihood; reported
    ``loglik_`` is the full-sample value.
    """

    MAX_ITER = 500

    def __init__(self, arch_order=1, garch_order=1, lb_lags=20):
        self.arch_order = arch_order
        self.garch_order = garch_order
        self.lb_lags = lb_lags

    # --- parameter transform -------------------------------------------------

    def _unpack(self, theta):
        q, p = self.arch_order, self.garch_order
        omega = np.exp(theta[0])
        if q + p:
            u = np.exp(theta[1:])
            coefs = _SUM_CAP * u / (1.0 + u.sum())
        else:
            coefs = np.empty(0)
        return omega, coefs[:q], coefs[q:]

    def _pack(self, omega, alpha, beta):
        coefs = np.concatenate([alpha, beta])
        if coefs.size:
            u = coefs / (_SUM_CAP - coefs.sum())
            return np.concatenate([[np.log(omega)], np.log(u)])
        return np.array([np.log(omega)])

    def fit(self, eps):
        eps = np.asarray(eps, dtype=float).ravel()
        n = len(eps)
        q, p = int(self.arch_order), int(self.garch_order)
        if q < 0 or p < 0:
            raise ValueError(f"orders must be >= 0: got ({q}, {p})")
        if n < 50:
            raise ValueError(f"need at least 50 observations, got {n}")
        var = float(np.var(eps))
        if var <= 0.0:
            raise ValueError("zero-variance input, GARCH likelihood undefined")

        e2 = eps**2
        pres = var

        def negloglik(theta):
            with np.errstate(over="ignore", invalid="ignore"):
                omega, alpha, beta = self._unpack(theta)
                if not (np.isfinite(omega) and omega > 0.0
                        and np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
                    return 1e10
                h = garch_filter(omega, alpha, beta, eps, presample=pres)
                val = 0.5 * np.mean(np.log(h) + e2 / h)
            return val if np.isfinite(val) else 1e10

        # start at omega = 0.1 var, total ARCH mass 0.05, total GARCH mass 0.85
        alpha0 = np.full(q, 0.05 / q) if q else np.empty(0)
        beta0 = np.full(p, 0.85 / p) if p else np.empty(0)
        theta0 = self._pack(0.1 * var, alpha0, beta0)

        best = {"f": negloglik(theta0), "x": theta0.copy()}

        def tracked(theta):
            f = negloglik(theta)
            if f < best["f"]:
                best["f"] = f
                best["x"] = np.array(theta, copy=True)
            return f

        res = minimize(
            tracked, theta0, method="BFGS",
            options={"gtol": 1e-4, "xrtol": 1e-6, "maxiter": self.MAX_ITER},
        )
        theta = res.x if negloglik(res.x) <= best["f"] else best["x"]

        omega, alpha, beta = self._unpack(theta)
        h = garch_filter(omega, alpha, beta, eps, presample=pres)
        grad = self._fd_gradient(negloglik, theta)
        self.omega_ = float(omega)
        self.alpha_ = alpha.copy()
        self.beta_ = beta.copy()
        self.h_ = h
        self.z_ = eps / np.sqrt(h)
        self.loglik_ = _gaussian_quasi_loglik(e2, h)
        self.n_iter_ = int(res.nit)
        self.grad_max_ = float(np.max(np.abs(grad)))
        self.converged_ = bool(res.success or self.grad_max_ < 1e-3)
        self.presample_ = pres
        self.nobs_ = n
        m = q + p
        self.lb_z2_ = ljung_box(self.z_**2, h=self.lb_lags, fitted_params=m) \
            if self.lb_lags > m else None
        return self

    @staticmethod
    def _fd_gradient(fun, x, step=1e-6):
        g = np.empty_like(x)
        f0 = fun(x)
        for i in range(len(x)):
            xp = x.copy()
            xp[i] += step
            g[i] = (fun(xp) - f0) / step
        return g

    def filter(self, eps) -> np.ndarray:
        """Variance path of the fitted parameters on a shock sequence."""
        check_is_fitted(self, "omega_")
        return garch_filter(self.omega_, self.alpha_, self.beta_, eps)

    def standardized_residuals(self, eps=None) -> np.ndarray:
        check_is_fitted(self, "omega_")
        if eps is None:
            return self.z_
        eps = np.asarray(eps, dtype=float).ravel()
        return eps / np.sqrt(self.filter(eps))


def standardized_residual_test(fit: Garch, h: int = 20) -> LjungBoxResult:
    """Ljung-Box on the squared standardized residuals of a fitted model."""
    check_is_fitted(fit, "z_")
    return ljung_box(fit.z_**2, h=h, fitted_params=fit.arch_order + fit.garch_order)


class VolatilityExtractor(BaseEstimator):
    """Derive a conditional-volatility series from a daily level series.

    Pipeline: first difference, AR mean model on the chosen lag set, GARCH on
    the mean residuals; the filtered conditional variance becomes the output
    series, dated to the AR residual dates.
    """

    def __init__(self, ar_lags=(1, 6), arch_order=2, garch_order=1, output_name="SMV"):
        self.ar_lags = ar_lags
        self.arch_order = arch_order
        self.garch_order = garch_order
        self.output_name = output_name

    def fit(self, series: TimeSeries):
        diffed = first_difference(series)
        self.ar_ = ArModel(lags=self.ar_lags).fit(diffed.values)
        eps = self.ar_.resid_
        self.garch_ = Garch(self.arch_order, self.garch_order).fit(eps)
        self.lb_resid_ = ljung_box(eps, h=20, fitted_params=len(self.ar_.lags_)) \
            if len(eps) > 20 else None
        offset = 1 + self.ar_.lags_[-1]  # differencing plus conditioning window
        self.smv_ = TimeSeries(self.output_name, series.date_at(offset), self.garch_.h_)
        self.converged_ = self.garch_.converged_
        return self

    def transform(self, series: TimeSeries) -> TimeSeries:
        """Volatility path of the fitted model on a (possibly new) series."""
        check_is_fitted(self, "garch_")
        diffed = first_difference(series)
        eps = self.ar_.residuals(diffed.values)
        h = garch_filter(self.garch_.omega_, self.garch_.alpha_, self.garch_.beta_,
                         eps, presample=float(np.var(eps)))
        offset = 1 + self.ar_.lags_[-1]
        return TimeSeries(self.output_name, series.date_at(offset), h)

    def fit_transform(self, series: TimeSeries) -> TimeSeries:
        return self.fit(series).smv_
