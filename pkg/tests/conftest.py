import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from ecovar import TimeSeries, VarModel

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "data" / "fixture"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    assert (FIXTURE_DIR / "study.json").is_file(), "bundled fixture missing"
    return FIXTURE_DIR


def simulate_var1(a1, n, seed, sigma=None):
    """Simulate y_t = A1 y_{t-1} + u_t with u ~ N(0, sigma)."""
    a1 = np.asarray(a1, dtype=float)
    k = a1.shape[0]
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(sigma) if sigma is not None else np.eye(k)
    y = np.zeros((n, k))
    shocks = rng.standard_normal((n, k)) @ chol.T
    for t in range(1, n):
        y[t] = a1 @ y[t - 1] + shocks[t]
    return y


def simulate_varp(coefs, n, seed):
    """Simulate a VAR(p) with unit-variance independent shocks."""
    coefs = np.asarray(coefs, dtype=float)
    p, k, _ = coefs.shape
    rng = np.random.default_rng(seed)
    y = np.zeros((n, k))
    shocks = rng.standard_normal((n, k))
    for t in range(p, n):
        acc = shocks[t].copy()
        for i in range(1, p + 1):
            acc += coefs[i - 1] @ y[t - i]
        y[t] = acc
    return y


@pytest.fixture(scope="session")
def bivariate_var_fit() -> VarModel:
    a1 = np.array([[0.5, 0.1], [0.0, 0.3]])
    y = simulate_var1(a1, 2000, seed=7)
    return VarModel(p=1).fit(y, var_names=["a", "b"])


def daily_series(values, start=dt.date(2020, 1, 1), name="x") -> TimeSeries:
    return TimeSeries(name, start, np.asarray(values, dtype=float))


def small_study_doc(seed=7, n_draws=300, p=6, n_days=400, driver_load=2.0):
    """A fast-running study config document for runner and CLI tests."""
    return {
        "seed": seed,
        "data": {
            "dataset_range": {"start": "2020-02-25", "end": "2021-03-30"},
            "estimation_range": {"start": "2020-03-17", "end": "2021-03-30"},
            "series": {
                "C": {"file": "cases.csv", "column": "cases", "log": True},
                "R": {"file": "rates.csv", "column": "rate", "log": False},
                "E": {"file": "fx_usd.csv", "column": "pkr_usd", "log": True},
                "SM": {"file": "index.csv", "column": "index", "log": True},
            },
            "dummy": {"name": "D", "dates": ["2020-04-15", "2020-05-01"]},
        },
        "volatility": {"source": "SM", "output": "SMV", "ar_lags": [1, 6],
                       "garch_order": [2, 1], "order_convention": "arch_first",
                       "log": True},
        "adf": {"default": {"spec": "constant", "lags": 2}},
        "var": {"policy": "fixed", "p": p, "whiteness_lags": 20},
        "ordering": ["C", "R", "E", "SMV"],
        "exog": ["D"],
        "irf": {"horizon": 30, "n_draws": n_draws},
        "variants": [
            {"name": "base"},
            {"name": "bivariate_reverse", "ordering": ["SMV", "C"]},
        ],
        "simulate": {"n_days": n_days, "start": "2020-02-25",
                     "dgp": {"driver_load": driver_load}},
    }
