"""Autocorrelation measurement, Ljung-Box whiteness tests, and ADF unit-root tests.

All functions are stateless and operate on plain 1-D float arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular
from scipy.special import gammaincc

from .errors import DegreesOfFreedomError, RankError

ADF_SPECS = ("none", "constant", "constant+trend")


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    return x


def acf(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag.

    Uses the common-denominator convention: rho_k = sum_{t>k} (x_t - xbar)
    (x_{t-k} - xbar) / sum_t (x_t - xbar)^2, so every value lies in [-1, 1].
    """
    x = _as_series(x)
    n = len(x)
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1: got {max_lag}")
    if n <= max_lag + 1:
        raise ValueError(f"need more than max_lag + 1 = {max_lag + 1} observations, got {n}")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom <= 0.0:
        raise ValueError("zero sample variance, autocorrelation undefined")
    rho = np.empty(max_lag, dtype=float)
    for k in range(1, max_lag + 1):
        rho[k - 1] = float(xc[k:] @ xc[:-k]) / denom
    return rho


def pacf(x, max_lag: int) -> np.ndarray:
    """Partial autocorrelations at lags 1..max_lag via the Durbin-Levinson recursion."""
    rho = acf(x, max_lag)
    phi_prev = np.zeros(0)
    out = np.empty(max_lag, dtype=float)
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_kk = rho[0]
            phi = np.array([phi_kk])
        else:
            num = rho[k - 1] - float(phi_prev @ rho[k - 2 :: -1][: k - 1])
            den = 1.0 - float(phi_prev @ rho[: k - 1])
            if den == 0.0:
                raise ZeroDivisionError(f"Durbin-Levinson breakdown at lag {k}")
            phi_kk = num / den
            phi = np.empty(k)
            phi[: k - 1] = phi_prev - phi_kk * phi_prev[::-1]
            phi[k - 1] = phi_kk
        out[k - 1] = phi_kk
        phi_prev = phi
    return out


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-square distribution via the regularized incomplete gamma."""
    if dof < 1:
        raise ValueError(f"dof must be >= 1: got {dof}")
    if x < 0:
        return 1.0
    return float(gammaincc(dof / 2.0, x / 2.0))


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    h: int
    dof: int
    p_value: float

    def __post_init__(self):
        if self.statistic < 0 or not 0.0 <= self.p_value <= 1.0 or self.dof < 1:
            raise ValueError(f"inconsistent Ljung-Box result: {self}")


def ljung_box(residuals, h: int, fitted_params: int = 0) -> LjungBoxResult:
    """Portmanteau whiteness test on ``residuals`` aggregating lags 1..h.

    Q = n (n + 2) sum_k rho_k^2 / (n - k); the p-value is the chi-square upper
    tail with h - fitted_params degrees of freedom.
    """
    x = _as_series(residuals)
    n = len(x)
    if h <= fitted_params:
        raise DegreesOfFreedomError(
            f"lag horizon h={h} must exceed fitted parameter count m={fitted_params}"
        )
    if n <= h:
        raise ValueError(f"need more than h={h} residuals, got {n}")
    rho = acf(x, h)
    k = np.arange(1, h + 1)
    q = float(n * (n + 2) * np.sum(rho**2 / (n - k)))
    dof = h - fitted_params
    return LjungBoxResult(q, h, dof, chi2_sf(q, dof))


# Tau critical values at 1%/5%/10% by deterministic specification and sample
# size (Fuller's tables); interpolated linearly in 1/n between breakpoints.
_ADF_BREAKPOINTS = (25, 50, 100, 250, 500)
_ADF_TABLE = {
    "none": {
        25: (-2.66, -1.95, -1.60),
        50: (-2.62, -1.95, -1.61),
        100: (-2.60, -1.95, -1.61),
        250: (-2.58, -1.95, -1.62),
        500: (-2.58, -1.95, -1.62),
        None: (-2.58, -1.95, -1.62),
    },
    "constant": {
        25: (-3.75, -3.00, -2.63),
        50: (-3.58, -2.93, -2.60),
        100: (-3.51, -2.89, -2.58),
        250: (-3.46, -2.88, -2.57),
        500: (-3.44, -2.87, -2.57),
        None: (-3.43, -2.86, -2.57),
    },
    "constant+trend": {
        25: (-4.38, -3.60, -3.24),
        50: (-4.15, -3.50, -3.18),
        100: (-4.04, -3.45, -3.15),
        250: (-3.99, -3.43, -3.13),
        500: (-3.98, -3.42, -3.13),
        None: (-3.96, -3.41, -3.12),
    },
}


def adf_critical_values(spec: str, n: int) -> tuple[float, float, float]:
    """(1%, 5%, 10%) tau critical values for ``spec`` at sample size ``n``."""
    if spec not in ADF_SPECS:
        raise ValueError(f"unknown spec {spec!r}, expected one of {ADF_SPECS}")
    table = _ADF_TABLE[spec]
    if n <= _ADF_BREAKPOINTS[0]:
        return table[25]
    lo = None
    for bp in _ADF_BREAKPOINTS:
        if n == bp:
            return table[bp]
        if n > bp:
            lo = bp
        else:
            # interpolate in 1/n between lo and bp
            w = (1.0 / n - 1.0 / bp) / (1.0 / lo - 1.0 / bp)
            return tuple(w * a + (1 - w) * b for a, b in zip(table[lo], table[bp]))
    # beyond the last finite breakpoint: interpolate toward the asymptotic row
    w = (1.0 / n) / (1.0 / _ADF_BREAKPOINTS[-1])
    return tuple(w * a + (1 - w) * b for a, b in zip(table[500], table[None]))


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    spec: str
    lags: int
    crit_1: float
    crit_5: float
    crit_10: float
    reject_unit_root_5pct: bool
    nobs: int

    def __post_init__(self):
        if not self.crit_1 < self.crit_5 < self.crit_10:
            raise ValueError(f"critical values out of order: {self}")


def _ols_qr(X: np.ndarray, y: np.ndarray, labels: list[str]):
    """OLS via QR with an explicit rank check; returns (beta, resid, XtX_inv)."""
    n, m = X.shape
    if n <= m:
        raise DegreesOfFreedomError(f"{n} observations for {m} regressors")
    # pivoted QR exposes which column breaks the rank
    _, r_piv, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r_piv))
    tol = diag[0] * max(n, m) * np.finfo(float).eps if diag[0] > 0 else 0.0
    deficient = np.flatnonzero(diag <= tol)
    if diag[0] == 0.0 or deficient.size:
        j = int(piv[deficient[0]]) if deficient.size else 0
        raise RankError(f"regressor matrix is rank deficient at column {labels[j]!r}")
    q_mat, r_mat = np.linalg.qr(X)
    beta = solve_triangular(r_mat, q_mat.T @ y, lower=False)
    resid = y - X @ beta
    r_inv = solve_triangular(r_mat, np.eye(m), lower=False)
    xtx_inv = r_inv @ r_inv.T
    return beta, resid, xtx_inv


def adf_test(x, spec: str = "constant", lags: int | str = 0, max_lags: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller tau test for a unit root.

    Regresses the first difference on the lagged level, ``lags`` lagged
    differences, and the deterministic terms named by ``spec``. ``lags`` may
    be ``"auto"``: start from max_lags (default ``floor(12 (n/100)**0.25)``)
    and trim while the last lagged difference is insignificant at 10%.
    """
    x = _as_series(x)
    if spec not in ADF_SPECS:
        raise ValueError(f"unknown spec {spec!r}, expected one of {ADF_SPECS}")
    n = len(x)
    if lags == "auto":
        cap = max_lags if max_lags is not None else int(np.floor(12.0 * (n / 100.0) ** 0.25))
        for k in range(cap, -1, -1):
            try:
                res = _adf_fixed(x, spec, k, check_last_lag=k > 0)
            except DegreesOfFreedomError:
                if k == 0:
                    raise
                continue  # cap infeasible for this sample, trim further
            if res is not None:
                return res
        raise AssertionError("unreachable: lag 0 always returns")
    if not isinstance(lags, (int, np.integer)) or lags < 0:
        raise ValueError(f"lags must be a nonnegative integer or 'auto': got {lags!r}")
    res = _adf_fixed(x, spec, int(lags), check_last_lag=False)
    assert res is not None
    return res


def _adf_fixed(x: np.ndarray, spec: str, lags: int, check_last_lag: bool) -> AdfResult | None:
    n = len(x)
    dx = np.diff(x)
    nobs = n - 1 - lags
    n_det = {"none": 0, "constant": 1, "constant+trend": 2}[spec]
    n_reg = n_det + 1 + lags
    if nobs - n_reg < 1:
        raise DegreesOfFreedomError(
            f"ADF with spec={spec!r}, lags={lags}: {nobs} usable observations "
            f"for {n_reg} regressors"
        )
    y = dx[lags:]
    cols, labels = [], []
    if n_det >= 1:
        cols.append(np.ones(nobs))
        labels.append("const")
    if n_det == 2:
        cols.append(np.arange(1.0, nobs + 1))
        labels.append("trend")
    cols.append(x[lags : n - 1])
    labels.append("level.l1")
    level_idx = len(cols) - 1
    for i in range(1, lags + 1):
        cols.append(dx[lags - i : n - 1 - i])
        labels.append(f"diff.l{i}")
    X = np.column_stack(cols)
    beta, resid, xtx_inv = _ols_qr(X, y, labels)
    sigma2 = float(resid @ resid) / (nobs - n_reg)
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    if check_last_lag:
        t_last = beta[-1] / se[-1]
        if abs(t_last) < 1.6449:  # 10% two-sided normal
            return None
    tau = float(beta[level_idx] / se[level_idx])
    c1, c5, c10 = adf_critical_values(spec, nobs)
    return AdfResult(tau, spec, lags, c1, c5, c10, bool(tau < c5), nobs)
