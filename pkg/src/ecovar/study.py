"""Declarative study runner.

A study is one JSON config document plus a directory of CSV files. Running it
executes ingestion and alignment, volatility extraction, the unit-root screen,
then a VAR and orthogonalized impulse responses for each configured variant,
and collects everything into a report object. The unit-root screen is
informational and never gates estimation. A failure inside one variant is
recorded and the remaining variants still run.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import ADF_SPECS, AdfResult, LjungBoxResult, adf_test
from .errors import ConfigError, LagSelectionError
from .irf import IrfResult, irf_bands
from .series import TimeSeries, align_daily, assemble_dataset, log_transform, make_dummy, parse_csv
from .simulate import StudyDgp
from .varmodel import StabilityResult, VarModel, fit_var, residual_whiteness, select_lag
from .volatility import VolatilityExtractor

_CONVENTIONS = ("arch_first", "variance_first")


def _expect_keys(obj: dict, where: str, required: dict, optional: dict | None = None) -> None:
    optional = optional or {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    for key, typ in {**required, **optional}.items():
        if key in obj and typ is not None and not isinstance(obj[key], typ):
            raise ConfigError(
                f"{where}.{key}: expected {getattr(typ, '__name__', typ)}, "
                f"got {type(obj[key]).__name__}"
            )


def _parse_date(text, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: invalid ISO date {text!r}") from None


def _parse_range(obj, where: str) -> tuple[dt.date, dt.date]:
    _expect_keys(obj, where, {"start": str, "end": str})
    start = _parse_date(obj["start"], f"{where}.start")
    end = _parse_date(obj["end"], f"{where}.end")
    if end < start:
        raise ConfigError(f"{where}: end {end} before start {start}")
    return start, end


@dataclass(frozen=True)
class SeriesSpec:
    name: str
    file: str
    column: str
    log: bool


@dataclass(frozen=True)
class AdfChoice:
    spec: str
    lags: int | str  # nonnegative int or "auto"


@dataclass(frozen=True)
class VarPolicy:
    policy: str               # "fixed" or "select"
    p: int | None
    p_min: int | None
    p_max: int | None
    alpha: float | None
    whiteness_lags: int


@dataclass(frozen=True)
class Variant:
    name: str
    ordering: tuple[str, ...]
    exog: tuple[str, ...]
    var: VarPolicy
    horizon: int
    n_draws: int


@dataclass(frozen=True)
class StudyConfig:
    seed: int
    dataset_range: tuple[dt.date, dt.date]
    estimation_range: tuple[dt.date, dt.date]
    series: tuple[SeriesSpec, ...]
    dummy_name: str
    dummy_dates: tuple[dt.date, ...]
    vol_source: str
    vol_output: str
    vol_log: bool
    ar_lags: tuple[int, ...]
    arch_order: int
    garch_order: int
    order_convention: str
    adf_default: AdfChoice
    adf_overrides: dict[str, AdfChoice]
    var: VarPolicy
    ordering: tuple[str, ...]
    exog: tuple[str, ...]
    horizon: int
    n_draws: int
    variants: tuple[Variant, ...]
    simulate: StudyDgp | None
    simulate_n_days: int | None
    simulate_start: dt.date | None
    resolved: dict = field(compare=False, default_factory=dict)

    @property
    def known_columns(self) -> set[str]:
        return {s.name for s in self.series} | {self.vol_output, self.dummy_name}


def _parse_var_policy(obj, where: str) -> VarPolicy:
    _expect_keys(obj, where, {"policy": str},
                 {"p": int, "p_min": int, "p_max": int, "alpha": (int, float),
                  "whiteness_lags": int})
    policy = obj["policy"]
    wl = int(obj.get("whiteness_lags", 20))
    if wl < 1:
        raise ConfigError(f"{where}.whiteness_lags must be >= 1")
    if policy == "fixed":
        if "p" not in obj:
            raise ConfigError(f"{where}: fixed policy requires 'p'")
        if obj["p"] < 1:
            raise ConfigError(f"{where}.p must be >= 1")
        return VarPolicy("fixed", int(obj["p"]), None, None, None, wl)
    if policy == "select":
        for key in ("p_min", "p_max"):
            if key not in obj:
                raise ConfigError(f"{where}: select policy requires {key!r}")
        alpha = float(obj.get("alpha", 0.05))
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"{where}.alpha must be in (0, 1)")
        if not 1 <= obj["p_min"] <= obj["p_max"]:
            raise ConfigError(f"{where}: need 1 <= p_min <= p_max")
        return VarPolicy("select", None, int(obj["p_min"]), int(obj["p_max"]), alpha, wl)
    raise ConfigError(f"{where}.policy must be 'fixed' or 'select', got {policy!r}")


def _parse_adf_choice(obj, where: str) -> AdfChoice:
    _expect_keys(obj, where, {"spec": str}, {"lags": (int, str)})
    if obj["spec"] not in ADF_SPECS:
        raise ConfigError(f"{where}.spec must be one of {ADF_SPECS}, got {obj['spec']!r}")
    lags = obj.get("lags", "auto")
    if lags != "auto" and (not isinstance(lags, int) or lags < 0):
        raise ConfigError(f"{where}.lags must be a nonnegative integer or 'auto'")
    return AdfChoice(obj["spec"], lags)


def parse_config(doc: dict) -> StudyConfig:
    """Validate a config document; unknown keys anywhere are errors."""
    _expect_keys(doc, "config",
                 {"seed": int, "data": dict, "volatility": dict, "var": dict,
                  "ordering": list, "exog": list, "irf": dict, "variants": list},
                 {"adf": dict, "simulate": dict})
    if doc["seed"] < 0:
        raise ConfigError("config.seed must be >= 0")

    data = doc["data"]
    _expect_keys(data, "config.data",
                 {"dataset_range": dict, "estimation_range": dict, "series": dict},
                 {"dummy": dict})
    ds_range = _parse_range(data["dataset_range"], "config.data.dataset_range")
    est_range = _parse_range(data["estimation_range"], "config.data.estimation_range")
    if est_range[0] < ds_range[0] or est_range[1] > ds_range[1]:
        raise ConfigError("config.data.estimation_range must lie inside dataset_range")

    series = []
    for name, spec in data["series"].items():
        _expect_keys(spec, f"config.data.series.{name}", {"file": str, "column": str},
                     {"log": bool})
        series.append(SeriesSpec(name, spec["file"], spec["column"], bool(spec.get("log", True))))
    if not series:
        raise ConfigError("config.data.series must declare at least one series")

    dummy_name, dummy_dates = "D", ()
    if "dummy" in data:
        _expect_keys(data["dummy"], "config.data.dummy", {"name": str, "dates": list})
        dummy_name = data["dummy"]["name"]
        dummy_dates = tuple(
            _parse_date(d, "config.data.dummy.dates") for d in data["dummy"]["dates"]
        )
        for d in dummy_dates:
            if not ds_range[0] <= d <= ds_range[1]:
                raise ConfigError(f"config.data.dummy.dates: {d} outside dataset_range")

    vol = doc["volatility"]
    _expect_keys(vol, "config.volatility",
                 {"source": str, "ar_lags": list, "garch_order": list},
                 {"output": str, "order_convention": str, "log": bool})
    ar_lags = tuple(vol["ar_lags"])
    if not ar_lags or any(not isinstance(k, int) or k < 1 for k in ar_lags):
        raise ConfigError("config.volatility.ar_lags must be positive integers")
    order = vol["garch_order"]
    if len(order) != 2 or any(not isinstance(v, int) or v < 0 for v in order):
        raise ConfigError("config.volatility.garch_order must be two nonnegative integers")
    convention = vol.get("order_convention", "arch_first")
    if convention not in _CONVENTIONS:
        raise ConfigError(f"config.volatility.order_convention must be one of {_CONVENTIONS}")
    arch_order, garch_order = (order if convention == "arch_first" else order[::-1])
    vol_source = vol["source"]
    vol_output = vol.get("output", "SMV")
    series_names = {s.name for s in series}
    if vol_source not in series_names:
        raise ConfigError(f"config.volatility.source {vol_source!r} is not a declared series")
    if vol_output in series_names or vol_output == dummy_name:
        raise ConfigError(f"config.volatility.output {vol_output!r} collides with a column name")

    adf_default = AdfChoice("constant", "auto")
    adf_overrides: dict[str, AdfChoice] = {}
    if "adf" in doc:
        _expect_keys(doc["adf"], "config.adf", {}, {"default": dict, "overrides": dict})
        if "default" in doc["adf"]:
            adf_default = _parse_adf_choice(doc["adf"]["default"], "config.adf.default")
        for name, choice in doc["adf"].get("overrides", {}).items():
            adf_overrides[name] = _parse_adf_choice(choice, f"config.adf.overrides.{name}")

    var_policy = _parse_var_policy(doc["var"], "config.var")

    irf_cfg = doc["irf"]
    _expect_keys(irf_cfg, "config.irf", {"horizon": int, "n_draws": int})
    if irf_cfg["horizon"] < 1:
        raise ConfigError("config.irf.horizon must be >= 1")
    if irf_cfg["n_draws"] < 2:
        raise ConfigError("config.irf.n_draws must be >= 2")

    known = series_names | {vol_output, dummy_name}

    def check_columns(names, where):
        for nm in names:
            if not isinstance(nm, str) or nm not in known:
                raise ConfigError(f"{where}: unknown column {nm!r} (have {sorted(known)})")
        if len(set(names)) != len(names):
            raise ConfigError(f"{where}: duplicate names in {names}")

    check_columns(doc["ordering"], "config.ordering")
    check_columns(doc["exog"], "config.exog")
    if not doc["ordering"]:
        raise ConfigError("config.ordering must not be empty")

    variants = []
    seen = set()
    for idx, v in enumerate(doc["variants"]):
        where = f"config.variants[{idx}]"
        _expect_keys(v, where, {"name": str},
                     {"ordering": list, "exog": list, "var": dict,
                      "horizon": int, "n_draws": int})
        if v["name"] in seen:
            raise ConfigError(f"{where}: duplicate variant name {v['name']!r}")
        seen.add(v["name"])
        ordering = v.get("ordering", doc["ordering"])
        exog = v.get("exog", doc["exog"])
        check_columns(ordering, f"{where}.ordering")
        check_columns(exog, f"{where}.exog")
        vp = _parse_var_policy(v["var"], f"{where}.var") if "var" in v else var_policy
        horizon = v.get("horizon", irf_cfg["horizon"])
        n_draws = v.get("n_draws", irf_cfg["n_draws"])
        if horizon < 1 or n_draws < 2:
            raise ConfigError(f"{where}: horizon must be >= 1 and n_draws >= 2")
        variants.append(Variant(v["name"], tuple(ordering), tuple(exog), vp,
                                int(horizon), int(n_draws)))
    if not variants:
        raise ConfigError("config.variants must not be empty")

    simulate = n_days = sim_start = None
    if "simulate" in doc:
        sim = dict(doc["simulate"])
        _expect_keys(sim, "config.simulate", {"n_days": int},
                     {"start": str, "dgp": dict})
        n_days = sim["n_days"]
        sim_start = _parse_date(sim.get("start", "2020-02-25"), "config.simulate.start")
        try:
            simulate = StudyDgp.from_dict(sim.get("dgp", {}))
            simulate.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config.simulate.dgp: {exc}") from None

    cfg = StudyConfig(
        seed=doc["seed"],
        dataset_range=ds_range,
        estimation_range=est_range,
        series=tuple(series),
        dummy_name=dummy_name,
        dummy_dates=dummy_dates,
        vol_source=vol_source,
        vol_output=vol_output,
        vol_log=bool(vol.get("log", True)),
        ar_lags=ar_lags,
        arch_order=int(arch_order),
        garch_order=int(garch_order),
        order_convention=convention,
        adf_default=adf_default,
        adf_overrides=adf_overrides,
        var=var_policy,
        ordering=tuple(doc["ordering"]),
        exog=tuple(doc["exog"]),
        horizon=int(irf_cfg["horizon"]),
        n_draws=int(irf_cfg["n_draws"]),
        variants=tuple(variants),
        simulate=simulate,
        simulate_n_days=n_days,
        simulate_start=sim_start,
    )
    object.__setattr__(cfg, "resolved", _echo_dict(cfg))
    return cfg


def load_config(path) -> StudyConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(doc)


def _var_policy_dict(vp: VarPolicy) -> dict:
    if vp.policy == "fixed":
        return {"policy": "fixed", "p": vp.p, "whiteness_lags": vp.whiteness_lags}
    return {"policy": "select", "p_min": vp.p_min, "p_max": vp.p_max,
            "alpha": vp.alpha, "whiteness_lags": vp.whiteness_lags}


def _echo_dict(cfg: StudyConfig) -> dict:
    """Fully resolved config, sufficient to re-run the study exactly."""
    order = [cfg.arch_order, cfg.garch_order]
    if cfg.order_convention == "variance_first":
        order = order[::-1]
    out = {
        "seed": cfg.seed,
        "data": {
            "dataset_range": {"start": cfg.dataset_range[0].isoformat(),
                              "end": cfg.dataset_range[1].isoformat()},
            "estimation_range": {"start": cfg.estimation_range[0].isoformat(),
                                 "end": cfg.estimation_range[1].isoformat()},
            "series": {s.name: {"file": s.file, "column": s.column, "log": s.log}
                       for s in cfg.series},
            "dummy": {"name": cfg.dummy_name,
                      "dates": [d.isoformat() for d in cfg.dummy_dates]},
        },
        "volatility": {"source": cfg.vol_source, "output": cfg.vol_output,
                       "ar_lags": list(cfg.ar_lags), "garch_order": order,
                       "order_convention": cfg.order_convention, "log": cfg.vol_log},
        "adf": {"default": {"spec": cfg.adf_default.spec, "lags": cfg.adf_default.lags},
                "overrides": {k: {"spec": v.spec, "lags": v.lags}
                              for k, v in sorted(cfg.adf_overrides.items())}},
        "var": _var_policy_dict(cfg.var),
        "ordering": list(cfg.ordering),
        "exog": list(cfg.exog),
        "irf": {"horizon": cfg.horizon, "n_draws": cfg.n_draws},
        "variants": [
            {"name": v.name, "ordering": list(v.ordering), "exog": list(v.exog),
             "var": _var_policy_dict(v.var), "horizon": v.horizon, "n_draws": v.n_draws}
            for v in cfg.variants
        ],
    }
    if cfg.simulate is not None:
        out["simulate"] = {"n_days": cfg.simulate_n_days,
                           "start": cfg.simulate_start.isoformat(),
                           "dgp": cfg.simulate.to_dict()}
    return out


@dataclass
class VariantResult:
    name: str
    ordering: tuple[str, ...]
    exog: tuple[str, ...]
    error: str | None = None
    p: int | None = None
    nobs: int | None = None
    fit: VarModel | None = None
    whiteness: list[LjungBoxResult] | None = None
    stability: StabilityResult | None = None
    irf: IrfResult | None = None
    lag_table: dict | None = None


@dataclass
class VolatilitySummary:
    source: str
    output: str
    ar_lags: tuple[int, ...]
    ar_intercept: float
    ar_coefs: tuple[float, ...]
    arch_order: int
    garch_order: int
    omega: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    loglik: float
    converged: bool
    lb_resid: LjungBoxResult | None
    lb_z2: LjungBoxResult | None
    n_obs: int


@dataclass
class StudyReport:
    config: dict                      # resolved echo
    seed: int
    adf: dict[str, AdfResult]
    volatility: VolatilitySummary
    variants: list[VariantResult]
    warnings: list[str]

    @property
    def n_failed(self) -> int:
        return sum(1 for v in self.variants if v.error is not None)

    def variant(self, name: str) -> VariantResult:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(f"no variant named {name!r}")


def _load_columns(cfg: StudyConfig, data_dir) -> dict[str, TimeSeries]:
    """Parse, align, and transform every declared series over the dataset range."""
    data_dir = Path(data_dir)
    start, end = cfg.dataset_range
    parsed_files: dict[str, dict] = {}
    columns: dict[str, TimeSeries] = {}
    for spec in cfg.series:
        if spec.file not in parsed_files:
            path = data_dir / spec.file
            if not path.is_file():
                raise ConfigError(f"data file not found: {path}")
            parsed_files[spec.file] = parse_csv(path.read_text())
        raw_map = parsed_files[spec.file]
        if spec.column not in raw_map:
            raise ConfigError(
                f"series {spec.name!r}: column {spec.column!r} not in {spec.file} "
                f"(has {sorted(raw_map)})"
            )
        ts = align_daily(raw_map[spec.column], start, end).rename(spec.name)
        if spec.log:
            ts = log_transform(ts)
        columns[spec.name] = ts
    columns[cfg.dummy_name] = make_dummy(start, end, cfg.dummy_dates, name=cfg.dummy_name)
    return columns


def run_study(cfg: StudyConfig, data_dir) -> StudyReport:
    """Execute the full pipeline for every variant and assemble the report."""
    warnings: list[str] = []
    columns = _load_columns(cfg, data_dir)

    # conditional-volatility extraction over the full dataset range
    extractor = VolatilityExtractor(
        ar_lags=cfg.ar_lags, arch_order=cfg.arch_order,
        garch_order=cfg.garch_order, output_name=cfg.vol_output,
    ).fit(columns[cfg.vol_source])
    smv = extractor.smv_
    if cfg.vol_log:
        smv = log_transform(smv)
    columns[cfg.vol_output] = smv
    if not extractor.converged_:
        warnings.append("volatility: GARCH estimation did not converge")
    g, a = extractor.garch_, extractor.ar_
    vol_summary = VolatilitySummary(
        source=cfg.vol_source, output=cfg.vol_output,
        ar_lags=a.lags_, ar_intercept=a.intercept_, ar_coefs=tuple(a.coef_),
        arch_order=cfg.arch_order, garch_order=cfg.garch_order,
        omega=g.omega_, alpha=tuple(g.alpha_), beta=tuple(g.beta_),
        loglik=g.loglik_, converged=g.converged_,
        lb_resid=extractor.lb_resid_, lb_z2=g.lb_z2_, n_obs=g.nobs_,
    )

    est_start, est_end = cfg.estimation_range

    # unit-root screen on every variable any variant models (report-only)
    screened: list[str] = []
    for v in cfg.variants:
        for nm in v.ordering:
            if nm not in screened:
                screened.append(nm)
    adf_results: dict[str, AdfResult] = {}
    for nm in screened:
        choice = cfg.adf_overrides.get(nm, cfg.adf_default)
        values = columns[nm].slice(est_start, est_end).values
        try:
            adf_results[nm] = adf_test(values, spec=choice.spec, lags=choice.lags)
        except Exception as exc:  # screen failures must not kill the study
            warnings.append(f"adf screen failed for {nm}: {exc}")

    log_flags = {s.name: s.log for s in cfg.series}
    log_flags[cfg.vol_output] = cfg.vol_log
    log_flags[cfg.dummy_name] = False

    results: list[VariantResult] = []
    for v in cfg.variants:
        res = VariantResult(v.name, v.ordering, v.exog)
        try:
            ds = assemble_dataset(columns, list(v.ordering), est_start, est_end,
                                  exog=list(v.exog),
                                  transform_log={nm: log_flags[nm]
                                                 for nm in (*v.ordering, *v.exog)})
            if v.var.policy == "fixed":
                fit = fit_var(ds, v.var.p)
                res.p = v.var.p
            else:
                try:
                    p, table = select_lag(ds, v.var.p_min, v.var.p_max,
                                          alpha=v.var.alpha, h=v.var.whiteness_lags)
                except LagSelectionError as exc:
                    res.lag_table = exc.pvalues
                    raise
                res.p, res.lag_table = p, table
                fit = fit_var(ds, p)
            res.fit = fit
            res.nobs = fit.nobs_
            res.whiteness = residual_whiteness(fit, h=v.var.whiteness_lags)
            res.stability = fit.stability()
            res.irf = irf_bands(fit, ordering=list(v.ordering), horizon=v.horizon,
                                n_draws=v.n_draws, seed=cfg.seed)
            if res.irf.unreliable:
                warnings.append(
                    f"variant {v.name}: {res.irf.n_explosive}/{v.n_draws} explosive "
                    "draws, bands flagged unreliable"
                )
            if res.irf.n_nonfinite:
                warnings.append(
                    f"variant {v.name}: {res.irf.n_nonfinite} non-finite draws rejected"
                )
            if not res.stability.stable:
                warnings.append(
                    f"variant {v.name}: point estimate unstable "
                    f"(spectral radius {res.stability.max_eigenvalue_modulus:.4f})"
                )
        except Exception as exc:
            res.error = f"{type(exc).__name__}: {exc}"
            warnings.append(f"variant {v.name} failed: {res.error}")
        results.append(res)

    return StudyReport(
        config=cfg.resolved, seed=cfg.seed, adf=adf_results,
        volatility=vol_summary, variants=results, warnings=warnings,
    )
