"""Orthogonalized impulse responses and Monte Carlo confidence bands.

Identification is recursive: variables are permuted to the requested ordering,
the residual covariance is Cholesky-factorized there, and responses are mapped
back to the original variable labels. Bands come from resampling the VAR
coefficients from their estimated asymptotic normal (residual covariance held
fixed), one counter-based random substream per draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import substream

_CHUNK = 2048  # draws evaluated per block; fixed so aggregates never depend on it
_POWER_ITERS = 64  # companion power-iteration steps for the spectral-radius estimate
_MAX_MAGNITUDE = 1e150  # responses beyond this would overflow the band accumulators


def cholesky_lower(S: np.ndarray, sym_tol: float = 1e-10) -> np.ndarray:
    """Lower-triangular P with P P' = S; fails naming the offending pivot.

    S must be symmetric within ``sym_tol`` and positive definite.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"matrix must be square: got shape {S.shape}")
    if np.max(np.abs(S - S.T)) > sym_tol:
        raise ValueError(f"matrix is not symmetric within {sym_tol}")
    n = S.shape[0]
    P = np.zeros_like(S)
    for j in range(n):
        d = S[j, j] - P[j, :j] @ P[j, :j]
        if d <= 0.0:
            raise np.linalg.LinAlgError(
                f"matrix is not positive definite: pivot {j + 1} of {n} is {d:.3e}"
            )
        P[j, j] = np.sqrt(d)
        if j + 1 < n:
            P[j + 1 :, j] = (S[j + 1 :, j] - P[j + 1 :, :j] @ P[j, :j]) / P[j, j]
    return P


def ma_coefficients(coefs: np.ndarray, horizon: int) -> np.ndarray:
    """Moving-average matrices of a VAR: Phi_0 = I, Phi_h = sum A_i Phi_{h-i}."""
    coefs = np.asarray(coefs, dtype=float)
    p, k, _ = coefs.shape
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0: got {horizon}")
    phi = np.empty((horizon + 1, k, k))
    phi[0] = np.eye(k)
    for h in range(1, horizon + 1):
        acc = np.zeros((k, k))
        for i in range(1, min(h, p) + 1):
            acc += coefs[i - 1] @ phi[h - i]
        phi[h] = acc
    return phi


def _ordering_permutation(var_names: list[str], ordering: list[str]) -> np.ndarray:
    if sorted(ordering) != sorted(var_names):
        raise ValueError(
            f"ordering {ordering} is not a permutation of the variables {var_names}"
        )
    return np.array([var_names.index(nm) for nm in ordering])


def orthogonal_irf(coefs: np.ndarray, sigma_u: np.ndarray, var_names: list[str],
                   ordering: list[str] | None = None, horizon: int = 60) -> np.ndarray:
    """Point responses Theta_h to one-standard-deviation orthogonal shocks.

    Rows and columns of the result are indexed by the original ``var_names``;
    entry (i, j) is the response of variable i to the shock identified with
    variable j under the recursive ordering.
    """
    var_names = list(var_names)
    ordering = list(ordering) if ordering is not None else var_names
    perm = _ordering_permutation(var_names, ordering)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    sigma_perm = np.asarray(sigma_u, dtype=float)[np.ix_(perm, perm)]
    P = cholesky_lower(sigma_perm)
    phi = ma_coefficients(coefs, horizon)
    theta_perm = phi[:, perm[:, None], perm[None, :]] @ P
    return theta_perm[:, inv[:, None], inv[None, :]]


@dataclass(frozen=True)
class IrfResult:
    """Orthogonalized responses with Monte Carlo two-standard-deviation bands.

    ``theta`` holds the point responses, ``mean``/``lower``/``upper`` the draw
    statistics; all are (horizon+1, k, k) arrays indexed by ``var_names`` with
    entry (i, j) = response of variable i to the orthogonal shock in j.
    """

    horizon: int
    var_names: tuple[str, ...]
    ordering: tuple[str, ...]
    theta: np.ndarray
    mean: np.ndarray
    half_width: np.ndarray  # two draw standard deviations
    lower: np.ndarray
    upper: np.ndarray
    n_draws: int
    seed: int
    n_explosive: int
    n_nonfinite: int
    unreliable: bool

    def _pair(self, impulse: str, response: str) -> tuple[int, int]:
        try:
            return self.var_names.index(response), self.var_names.index(impulse)
        except ValueError:
            raise KeyError(
                f"unknown impulse/response pair ({impulse!r}, {response!r}); "
                f"variables are {list(self.var_names)}"
            ) from None

    def response(self, impulse: str, response: str) -> dict[str, np.ndarray]:
        i, j = self._pair(impulse, response)
        return {
            "theta": self.theta[:, i, j],
            "mean": self.mean[:, i, j],
            "lower": self.lower[:, i, j],
            "upper": self.upper[:, i, j],
        }

    def significant_mask(self) -> np.ndarray:
        """True where the band strictly excludes zero."""
        return (self.lower > 0.0) | (self.upper < 0.0)

    def sig_horizons(self, impulse: str, response: str) -> tuple[int, ...]:
        """Horizons h >= 1 whose band strictly excludes zero for the pair."""
        i, j = self._pair(impulse, response)
        mask = self.significant_mask()[:, i, j]
        return tuple(int(h) for h in range(1, self.horizon + 1) if mask[h])


def _psd_factor(cov: np.ndarray, label: str) -> np.ndarray:
    """Factor L with L L' = cov for a symmetric PSD matrix.

    Ill-conditioned designs can leave coefficient covariances PSD only up to
    rounding, so eigenvalues within rounding of zero are clipped; genuinely
    negative ones still fail.
    """
    w, v = np.linalg.eigh((cov + cov.T) / 2.0)
    floor = -1e-10 * max(float(w[-1]), 0.0)
    if w[0] < floor:
        raise np.linalg.LinAlgError(
            f"{label}: covariance has negative eigenvalue {w[0]:.3e}"
        )
    return v * np.sqrt(np.maximum(w, 0.0))


def _spectral_radius_estimate(coef_draws: np.ndarray) -> np.ndarray:
    """Power-iteration estimate of the companion spectral radius per draw.

    ``coef_draws`` is (D, p, k, k). Uses the companion structure directly so a
    step costs one batched (k, k) contraction per lag. The estimate averages
    the log growth over the second half of the iterations.
    """
    D, p, k, _ = coef_draws.shape
    v = np.full((D, p, k), 1.0 / np.sqrt(p * k))
    log_growth = np.zeros(D)
    tail = _POWER_ITERS // 2
    dead = np.zeros(D, dtype=bool)
    for it in range(_POWER_ITERS):
        new_first = np.einsum("dlij,dlj->di", coef_draws, v)
        v = np.concatenate([new_first[:, None, :], v[:, :-1, :]], axis=1)
        norms = np.sqrt(np.einsum("dlj,dlj->d", v, v))
        dead |= norms == 0.0
        safe = np.where(norms == 0.0, 1.0, norms)
        v /= safe[:, None, None]
        if it >= _POWER_ITERS - tail:
            log_growth += np.log(safe)
    rho = np.exp(log_growth / tail)
    rho[dead] = 0.0  # nilpotent companion: radius 0
    return rho


def irf_bands(fit, ordering: list[str] | None = None, horizon: int = 60,
              n_draws: int = 10000, seed: int = 0) -> IrfResult:
    """Monte Carlo bands around the orthogonalized responses of a fitted VAR.

    Each draw resamples every equation's coefficient vector from a normal
    centered at the estimate with covariance ``coef_cov_``; the residual
    covariance (hence the Cholesky factor) stays at its estimate. Band at each
    (h, i, j) is draw mean +/- 2 draw standard deviations. Draws whose
    response path is non-finite (or too large to enter the statistics without
    overflow) are rejected and counted in ``n_nonfinite``; explosive draws
    (companion spectral radius >= 1) are kept but counted, and the result is
    flagged unreliable when more than 20% of draws are explosive.
    """
    if n_draws < 2:
        raise ValueError(f"n_draws must be >= 2: got {n_draws}")
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0: got {horizon}")
    k, p = fit.k_, int(fit.p)
    var_names = list(fit.names_)
    ordering = list(ordering) if ordering is not None else var_names
    perm = _ordering_permutation(var_names, ordering)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(k)

    sigma_perm = fit.sigma_u_[np.ix_(perm, perm)]
    P = cholesky_lower(sigma_perm)
    theta_point = orthogonal_irf(fit.coefs_, fit.sigma_u_, var_names, ordering, horizon)

    m = fit.coef_.shape[1]
    chol_cov = np.stack([
        _psd_factor(fit.coef_cov_[i], f"equation {fit.names_[i]}") for i in range(k)
    ])
    lag_cols = slice(1, 1 + k * p)

    total = np.zeros((horizon + 1, k, k))
    total_sq = np.zeros((horizon + 1, k, k))
    n_kept = 0
    n_explosive = 0
    n_nonfinite = 0

    for start in range(0, n_draws, _CHUNK):
        stop = min(start + _CHUNK, n_draws)
        d = stop - start
        z = np.empty((d, k, m))
        for j in range(d):
            z[j] = substream(seed, start + j).standard_normal((k, m))
        # coef draw: b_i = b_hat_i + L_i z_i, per equation
        draws = fit.coef_[None] + np.einsum("inm,dim->din", chol_cov, z)
        lag_block = draws[:, :, lag_cols]  # (d, k, k*p)
        A = lag_block.reshape(d, k, p, k).transpose(0, 2, 1, 3)  # (d, p, k, k)

        n_explosive += int(np.sum(_spectral_radius_estimate(A) >= 1.0))

        with np.errstate(over="ignore", invalid="ignore"):
            A_perm = A[:, :, perm[:, None], perm[None, :]]
            phi = np.empty((d, horizon + 1, k, k))
            phi[:, 0] = np.eye(k)
            for h in range(1, horizon + 1):
                acc = np.zeros((d, k, k))
                for i in range(1, min(h, p) + 1):
                    acc += np.einsum("dij,djk->dik", A_perm[:, i - 1], phi[:, h - i])
                phi[:, h] = acc
            theta_perm = phi @ P
            theta = theta_perm[:, :, inv[:, None], inv[None, :]]

            # reject draws that are non-finite or too large to aggregate
            finite = (np.abs(theta) < _MAX_MAGNITUDE).all(axis=(1, 2, 3))
        n_nonfinite += int(np.sum(~finite))
        kept = theta[finite]
        n_kept += kept.shape[0]
        total += kept.sum(axis=0)
        total_sq += (kept * kept).sum(axis=0)

    if n_kept < 2:
        raise RuntimeError(
            f"only {n_kept} of {n_draws} draws produced finite responses"
        )
    mean = total / n_kept
    var = np.maximum(total_sq / n_kept - mean * mean, 0.0)
    half = 2.0 * np.sqrt(var)
    return IrfResult(
        horizon=horizon,
        var_names=tuple(var_names),
        ordering=tuple(ordering),
        theta=theta_point,
        mean=mean,
        half_width=half,
        lower=mean - half,
        upper=mean + half,
        n_draws=n_draws,
        seed=seed,
        n_explosive=n_explosive,
        n_nonfinite=n_nonfinite,
        unreliable=bool(n_explosive > 0.2 * n_draws),
    )
