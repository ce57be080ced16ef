"""VAR(p) estimation by equation-wise OLS with exogenous regressors.

Every equation shares one regressor matrix: intercept, all endogenous
variables at lags 1..p, then exogenous columns at lag 0 (no exogenous lags).
The system is solved through one QR decomposition of that matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .diagnostics import LjungBoxResult, ljung_box
from .errors import DegreesOfFreedomError, LagSelectionError, RankError
from .series import Dataset


class VarModel(BaseEstimator):
    """Vector autoregression of order ``p`` fit by least squares.

    Fitted attributes: ``coefs_`` (p, k, k) lag matrices, ``intercept_`` (k,),
    ``exog_coefs_`` (k, n_exog), ``resid_`` (T-p, k), ``sigma_u_`` (k, k)
    normalized by the effective sample size, and per-equation coefficient
    covariances ``coef_cov_`` (k, m, m) with m regressors per equation.
    """

    def __init__(self, p=1):
        self.p = p

    def fit(self, y, exog=None, var_names=None, exog_names=None):
        y = np.asarray(y, dtype=float)
        if y.ndim != 2:
            raise ValueError(f"y must be 2-D (T, k): got shape {y.shape}")
        T, k = y.shape
        p = int(self.p)
        if p < 1:
            raise ValueError(f"lag order must be >= 1: got {p}")
        if exog is not None:
            exog = np.asarray(exog, dtype=float)
            if exog.ndim == 1:
                exog = exog[:, None]
            if exog.shape[0] != T:
                raise ValueError(f"exog has {exog.shape[0]} rows, y has {T}")
        n_exog = 0 if exog is None else exog.shape[1]
        names = list(var_names) if var_names is not None else [f"y{i+1}" for i in range(k)]
        ex_names = list(exog_names) if exog_names is not None else [f"x{i+1}" for i in range(n_exog)]
        if len(names) != k or len(ex_names) != n_exog:
            raise ValueError("variable name lists do not match data shapes")

        m = k * p + 1 + n_exog
        nobs = T - p
        if nobs <= m:
            raise DegreesOfFreedomError(
                f"VAR(p={p}) with k={k}, n_exog={n_exog} needs more than {m} "
                f"effective observations, have {nobs} (T={T})"
            )

        labels = ["const"]
        X = np.empty((nobs, m))
        X[:, 0] = 1.0
        col = 1
        for lag in range(1, p + 1):
            X[:, col : col + k] = y[p - lag : T - lag]
            labels += [f"{nm}.l{lag}" for nm in names]
            col += k
        if n_exog:
            X[:, col:] = exog[p:]
            labels += list(ex_names)

        # one pivoted QR for the rank check, one plain QR shared by all equations
        _, r_piv, piv = qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r_piv))
        tol = diag[0] * max(X.shape) * np.finfo(float).eps if diag[0] > 0 else 0.0
        bad = np.flatnonzero(diag <= tol)
        if diag[0] == 0.0 or bad.size:
            j = int(piv[bad[0]]) if bad.size else 0
            raise RankError(f"VAR regressor matrix is rank deficient at column {labels[j]!r}")
        q_mat, r_mat = np.linalg.qr(X)
        target = y[p:]
        coef = solve_triangular(r_mat, q_mat.T @ target, lower=False).T  # (k, m)
        resid = target - X @ coef.T
        sigma_u = resid.T @ resid / nobs
        r_inv = solve_triangular(r_mat, np.eye(m), lower=False)
        xtx_inv = r_inv @ r_inv.T
        coef_cov = np.einsum("i,jk->ijk", np.diag(sigma_u), xtx_inv)

        self.k_ = k
        self.names_ = names
        self.exog_names_ = ex_names
        self.regressor_names_ = labels
        self.coef_ = coef
        self.intercept_ = coef[:, 0].copy()
        self.coefs_ = np.stack(
            [coef[:, 1 + (lag - 1) * k : 1 + lag * k] for lag in range(1, p + 1)]
        )
        self.exog_coefs_ = coef[:, 1 + k * p :].copy()
        self.resid_ = resid
        self.sigma_u_ = sigma_u
        self.coef_cov_ = coef_cov
        self.nobs_ = nobs
        return self

    @property
    def lag_block_slice(self) -> slice:
        """Columns of ``coef_`` holding the endogenous lag coefficients."""
        check_is_fitted(self, "coef_")
        return slice(1, 1 + self.k_ * int(self.p))

    def companion(self) -> np.ndarray:
        check_is_fitted(self, "coefs_")
        return companion_matrix(self.coefs_)

    def stability(self) -> "StabilityResult":
        check_is_fitted(self, "coefs_")
        return companion_and_stability(self.coefs_)

    def whiteness(self, h: int = 20) -> list[LjungBoxResult]:
        check_is_fitted(self, "resid_")
        return residual_whiteness(self, h)


def fit_var(ds: Dataset, p: int, exog: list[str] | None = None) -> VarModel:
    """Fit a VAR on a dataset's endogenous block, exogenous columns at lag 0.

    ``exog`` defaults to every exogenous column in the dataset. Lag
    observations are consumed from the front of the dataset range.
    """
    endo = ds.endog_matrix()
    exog_names = ds.exog_names if exog is None else list(exog)
    X = np.column_stack([ds.series(n).values for n in exog_names]) if exog_names else None
    return VarModel(p=p).fit(endo, exog=X, var_names=ds.endog_names, exog_names=exog_names)


def residual_whiteness(fit: VarModel, h: int = 20) -> list[LjungBoxResult]:
    """Per-equation Ljung-Box on the VAR residuals, no dof correction (m=0)."""
    check_is_fitted(fit, "resid_")
    if h < 1:
        raise ValueError(f"lag horizon must be >= 1: got {h}")
    return [ljung_box(fit.resid_[:, i], h=h, fitted_params=0) for i in range(fit.k_)]


def select_lag(ds: Dataset, p_min: int, p_max: int, alpha: float = 0.05,
               h: int = 20, exog: list[str] | None = None) -> tuple[int, dict]:
    """Smallest order in [p_min, p_max] whose residuals all test white at ``alpha``.

    Returns (selected order, {order: per-equation p-values}). Raises
    LagSelectionError carrying the full p-value table when no order qualifies.
    """
    if p_min < 1 or p_max < p_min:
        raise ValueError(f"need 1 <= p_min <= p_max: got ({p_min}, {p_max})")
    table: dict[int, list[float]] = {}
    for p in range(p_min, p_max + 1):
        fit = fit_var(ds, p, exog=exog)
        pvals = [r.p_value for r in residual_whiteness(fit, h=h)]
        table[p] = pvals
        if min(pvals) >= alpha:
            return p, table
    raise LagSelectionError(
        f"no order in [{p_min}, {p_max}] gives white residuals at alpha={alpha}", table
    )


@dataclass(frozen=True)
class StabilityResult:
    companion: np.ndarray
    max_eigenvalue_modulus: float
    stable: bool


def companion_matrix(coefs: np.ndarray) -> np.ndarray:
    """Stack VAR(p) lag matrices into the (kp, kp) companion form."""
    coefs = np.asarray(coefs, dtype=float)
    p, k, k2 = coefs.shape
    if k != k2:
        raise ValueError(f"lag matrices must be square: got {coefs.shape}")
    top = coefs.transpose(1, 0, 2).reshape(k, k * p)
    if p == 1:
        return top
    eye = np.eye(k * (p - 1))
    bottom = np.hstack([eye, np.zeros((k * (p - 1), k))])
    return np.vstack([top, bottom])


def companion_and_stability(coefs: np.ndarray) -> StabilityResult:
    """Companion form, its spectral radius, and the stability flag."""
    comp = companion_matrix(coefs)
    radius = float(np.max(np.abs(np.linalg.eigvals(comp))))
    return StabilityResult(comp, radius, radius < 1.0)
