"""Synthetic daily dataset generator for offline study fixtures and tests.

The data-generating process mirrors the study's ingestion shape: a cases-like
driver and a stringency index observed every day, plus a policy rate, two
exchange rates and an equity index observed on weekdays only. The index's
innovation variance loads on the lagged driver, so volatility extracted from
the index responds to driver shocks; a zero loading gives the null process.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, asdict

import numpy as np

ONE_DAY = dt.timedelta(days=1)


@dataclass(frozen=True)
class Ar1Spec:
    mean: float
    phi: float
    sigma: float

    def validate(self, label: str):
        if not abs(self.phi) < 1.0:
            raise ValueError(f"{label}: |phi| must be < 1 for a stable process, got {self.phi}")
        if self.sigma < 0.0:
            raise ValueError(f"{label}: sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class StudyDgp:
    """Parameters of the synthetic study process (all logs where noted)."""

    driver: Ar1Spec = Ar1Spec(mean=8.0, phi=0.95, sigma=0.30)        # log cases
    rate: Ar1Spec = Ar1Spec(mean=9.0, phi=0.98, sigma=0.05)          # percent level
    fx_usd: Ar1Spec = Ar1Spec(mean=5.05, phi=0.98, sigma=0.004)      # log PKR/USD
    fx_cny: Ar1Spec = Ar1Spec(mean=3.10, phi=0.98, sigma=0.004)      # log PKR/CNY
    stringency: Ar1Spec = Ar1Spec(mean=60.0, phi=0.99, sigma=1.0)    # index level
    index_log_start: float = 10.4
    return_ar1: float = 0.20
    return_ar6: float = 0.10
    base_vol: float = 0.01
    garch_alpha: float = 0.10  # intrinsic volatility clustering of the index
    garch_beta: float = 0.85
    driver_load: float = 2.0   # log-variance response to driver deviations
    driver_lag: int = 1

    def validate(self):
        for label in ("driver", "rate", "fx_usd", "fx_cny", "stringency"):
            getattr(self, label).validate(label)
        if abs(self.return_ar1) + abs(self.return_ar6) >= 1.0:
            raise ValueError("index return coefficients must sum below 1 in absolute value")
        if self.base_vol <= 0.0:
            raise ValueError(f"base_vol must be > 0, got {self.base_vol}")
        if self.garch_alpha < 0.0 or self.garch_beta < 0.0 \
                or self.garch_alpha + self.garch_beta >= 1.0:
            raise ValueError("index garch coefficients must be >= 0 and sum below 1")
        if self.driver_lag < 1:
            raise ValueError(f"driver_lag must be >= 1, got {self.driver_lag}")
        if not np.isfinite(self.driver_load):
            raise ValueError("driver_load must be finite")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "StudyDgp":
        kwargs = dict(d)
        for key in ("driver", "rate", "fx_usd", "fx_cny", "stringency"):
            if key in kwargs:
                kwargs[key] = Ar1Spec(**kwargs[key])
        return cls(**kwargs)


def _ar1_path(rng: np.random.Generator, spec: Ar1Spec, n: int, burn: int = 200) -> np.ndarray:
    shocks = rng.standard_normal(n + burn) * spec.sigma
    x = np.empty(n + burn)
    x[0] = spec.mean + shocks[0]
    for t in range(1, n + burn):
        x[t] = spec.mean + spec.phi * (x[t - 1] - spec.mean) + shocks[t]
    return x[burn:]


def _format_csv(dates, values, column: str, weekdays_only: bool) -> str:
    lines = [f"date,{column}"]
    for d, v in zip(dates, values):
        if weekdays_only and d.weekday() >= 5:
            continue
        lines.append(f"{d.isoformat()},{v:.10g}")
    return "\n".join(lines) + "\n"


def simulate_study_data(dgp: StudyDgp, n_days: int, seed: int,
                        start: dt.date = dt.date(2020, 2, 25)) -> dict[str, str]:
    """Generate the six CSV documents of one synthetic study dataset.

    Returns {filename: csv text}; byte-identical for identical arguments.
    Weekday-only files omit Saturday/Sunday rows so the ingestion pipeline
    exercises carry-forward alignment.
    """
    dgp.validate()
    if n_days < 30:
        raise ValueError(f"n_days must be >= 30, got {n_days}")
    rng = np.random.default_rng(seed)
    dates = [start + i * ONE_DAY for i in range(n_days)]

    driver = _ar1_path(rng, dgp.driver, n_days)
    stringency = np.clip(_ar1_path(rng, dgp.stringency, n_days), 1.0, 100.0)
    rate = _ar1_path(rng, dgp.rate, n_days)
    fx_usd = _ar1_path(rng, dgp.fx_usd, n_days)
    fx_cny = _ar1_path(rng, dgp.fx_cny, n_days)

    # index innovations: intrinsic GARCH clustering times a driver-dependent scale
    z = rng.standard_normal(n_days)
    returns = np.zeros(n_days)
    log_index = np.empty(n_days)
    log_index[0] = dgp.index_log_start
    uncond = dgp.base_vol**2
    omega_g = uncond * (1.0 - dgp.garch_alpha - dgp.garch_beta)
    h_prev, e2_prev = uncond, uncond
    for t in range(1, n_days):
        h_t = omega_g + dgp.garch_alpha * e2_prev + dgp.garch_beta * h_prev
        e_t = np.sqrt(h_t) * z[t]
        dev = driver[t - dgp.driver_lag] - dgp.driver.mean if t >= dgp.driver_lag else 0.0
        scale = np.exp(0.5 * dgp.driver_load * dev)
        ar = dgp.return_ar1 * returns[t - 1]
        if t >= 6:
            ar += dgp.return_ar6 * returns[t - 6]
        returns[t] = ar + scale * e_t
        log_index[t] = log_index[t - 1] + returns[t]
        h_prev, e2_prev = h_t, e_t * e_t

    return {
        "cases.csv": _format_csv(dates, np.exp(driver), "cases", weekdays_only=False),
        "stringency.csv": _format_csv(dates, stringency, "stringency", weekdays_only=False),
        "rates.csv": _format_csv(dates, rate, "rate", weekdays_only=True),
        "fx_usd.csv": _format_csv(dates, np.exp(fx_usd), "pkr_usd", weekdays_only=True),
        "fx_cny.csv": _format_csv(dates, np.exp(fx_cny), "pkr_cny", weekdays_only=True),
        "index.csv": _format_csv(dates, np.exp(log_index), "index", weekdays_only=True),
    }


def write_study_data(files: dict[str, str], out_dir) -> None:
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, newline="")
