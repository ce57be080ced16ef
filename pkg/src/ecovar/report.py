"""Deterministic study outputs: plain-text report, CSV tables, SVG panels.

Identical report objects produce byte-identical files: floats are printed with
10 significant digits, line endings are LF, and no timestamps or absolute
paths enter any artifact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .irf import IrfResult
from .study import StudyReport, VariantResult


def _f(x) -> str:
    return "%.10g" % float(x)


def _yesno(flag: bool) -> str:
    return "yes" if flag else "no"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, newline="")


# --- CSV tables ---------------------------------------------------------------


def adf_table(report: StudyReport) -> str:
    lines = ["variable,spec,lags,nobs,tau,crit_1,crit_5,crit_10,reject_unit_root_5pct"]
    for name, r in report.adf.items():
        lines.append(
            f"{name},{r.spec},{r.lags},{r.nobs},{_f(r.statistic)},"
            f"{_f(r.crit_1)},{_f(r.crit_5)},{_f(r.crit_10)},{int(r.reject_unit_root_5pct)}"
        )
    return "\n".join(lines) + "\n"


def garch_table(report: StudyReport) -> str:
    v = report.volatility
    rows: list[tuple[str, str]] = [
        ("source", v.source),
        ("output", v.output),
        ("n_obs", str(v.n_obs)),
        ("ar_intercept", _f(v.ar_intercept)),
    ]
    for lag, c in zip(v.ar_lags, v.ar_coefs):
        rows.append((f"ar_lag{lag}", _f(c)))
    rows += [
        ("arch_order", str(v.arch_order)),
        ("garch_order", str(v.garch_order)),
        ("omega", _f(v.omega)),
    ]
    rows += [(f"alpha{i + 1}", _f(a)) for i, a in enumerate(v.alpha)]
    rows += [(f"beta{i + 1}", _f(b)) for i, b in enumerate(v.beta)]
    rows += [
        ("loglik", _f(v.loglik)),
        ("converged", str(int(v.converged))),
    ]
    if v.lb_resid is not None:
        rows += [("lb_resid_stat", _f(v.lb_resid.statistic)),
                 ("lb_resid_p", _f(v.lb_resid.p_value))]
    if v.lb_z2 is not None:
        rows += [("lb_z2_stat", _f(v.lb_z2.statistic)),
                 ("lb_z2_p", _f(v.lb_z2.p_value))]
    return "name,value\n" + "\n".join(f"{k},{val}" for k, val in rows) + "\n"


def var_summary_table(report: StudyReport) -> str:
    lines = ["variant,p,nobs,n_equations,max_eig_modulus,stable,"
             "explosive_draws,nonfinite_draws,unreliable,error"]
    for v in report.variants:
        if v.error is not None:
            err = v.error.replace(",", ";").replace("\n", " ")
            lines.append(f"{v.name},,,,,,,,,{err}")
            continue
        lines.append(
            f"{v.name},{v.p},{v.nobs},{len(v.ordering)},"
            f"{_f(v.stability.max_eigenvalue_modulus)},{int(v.stability.stable)},"
            f"{v.irf.n_explosive},{v.irf.n_nonfinite},{int(v.irf.unreliable)},"
        )
    return "\n".join(lines) + "\n"


def whiteness_table(report: StudyReport) -> str:
    lines = ["variant,equation,statistic,h,dof,p_value"]
    for v in report.variants:
        if v.whiteness is None:
            continue
        for name, r in zip(v.ordering, v.whiteness):
            lines.append(f"{v.name},{name},{_f(r.statistic)},{r.h},{r.dof},{_f(r.p_value)}")
    return "\n".join(lines) + "\n"


def irf_table(irf: IrfResult) -> str:
    """Point responses and bands, one row per (horizon, response, impulse)."""
    lines = ["h,impulse,response,theta,mean,lower,upper,significant"]
    names = irf.var_names
    sig = irf.significant_mask()
    for h in range(irf.horizon + 1):
        for i, resp in enumerate(names):
            for j, imp in enumerate(names):
                flag = int(sig[h, i, j]) if h >= 1 else 0
                lines.append(
                    f"{h},{imp},{resp},{_f(irf.theta[h, i, j])},{_f(irf.mean[h, i, j])},"
                    f"{_f(irf.lower[h, i, j])},{_f(irf.upper[h, i, j])},{flag}"
                )
    return "\n".join(lines) + "\n"


def load_irf_table(path) -> dict:
    """Parse an IRF CSV back into arrays (inverse of ``irf_table`` to 10 digits)."""
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    expected = ["h", "impulse", "response", "theta", "mean", "lower", "upper", "significant"]
    if header != expected:
        raise ValueError(f"unexpected IRF table header {header}")
    names: list[str] = []
    rows = []
    for ln in lines[1:]:
        h, imp, resp, theta, mean, lower, upper, sig = ln.split(",")
        if imp not in names:
            names.append(imp)
        rows.append((int(h), imp, resp, float(theta), float(mean),
                     float(lower), float(upper), int(sig)))
    k = len(names)
    horizon = max(r[0] for r in rows)
    if len(rows) != (horizon + 1) * k * k:
        raise ValueError(f"IRF table has {len(rows)} rows, expected {(horizon + 1) * k * k}")
    idx = {nm: i for i, nm in enumerate(names)}
    shape = (horizon + 1, k, k)
    out = {key: np.zeros(shape) for key in ("theta", "mean", "lower", "upper")}
    sig = np.zeros(shape, dtype=bool)
    for h, imp, resp, th, me, lo, up, sg in rows:
        i, j = idx[resp], idx[imp]
        out["theta"][h, i, j] = th
        out["mean"][h, i, j] = me
        out["lower"][h, i, j] = lo
        out["upper"][h, i, j] = up
        sig[h, i, j] = bool(sg)
    return {"var_names": names, "horizon": horizon, "significant": sig, **out}


# --- SVG panel ----------------------------------------------------------------

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60.0, 20.0, 40.0, 50.0


def render_irf_svg(theta, lower, upper, impulse: str, response: str) -> str:
    """One panel: solid point response, dotted band edges, horizontal zero line."""
    theta = np.asarray(theta, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not theta.shape == lower.shape == upper.shape or theta.ndim != 1:
        raise ValueError("theta, lower, upper must be 1-D arrays of equal length")
    horizon = len(theta) - 1
    ymin = min(float(np.min(lower)), float(np.min(theta)), 0.0)
    ymax = max(float(np.max(upper)), float(np.max(theta)), 0.0)
    if ymax == ymin:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def x(h):
        return _ML + (h / max(horizon, 1)) * (_W - _ML - _MR)

    def y(v):
        return _MT + (ymax - v) / (ymax - ymin) * (_H - _MT - _MB)

    def poly(vals):
        return " ".join(f"{x(h):.2f},{y(v):.2f}" for h, v in enumerate(vals))

    x0, x1 = x(0), x(horizon)
    y_axis_bottom = _H - _MB
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<text x="{_W / 2:.2f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">response of {response} to {impulse} shock</text>',
        f'<line x1="{_ML:.2f}" y1="{_MT:.2f}" x2="{_ML:.2f}" y2="{y_axis_bottom:.2f}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{x0:.2f}" y1="{y_axis_bottom:.2f}" x2="{x1:.2f}" '
        f'y2="{y_axis_bottom:.2f}" stroke="black" stroke-width="1"/>',
        f'<line id="zero-line" x1="{x0:.2f}" y1="{y(0.0):.2f}" x2="{x1:.2f}" '
        f'y2="{y(0.0):.2f}" stroke="#888888" stroke-width="1"/>',
        f'<polyline points="{poly(lower)}" fill="none" stroke="black" '
        'stroke-width="1" stroke-dasharray="2,3"/>',
        f'<polyline points="{poly(upper)}" fill="none" stroke="black" '
        'stroke-width="1" stroke-dasharray="2,3"/>',
        f'<polyline points="{poly(theta)}" fill="none" stroke="black" '
        'stroke-width="1.5"/>',
        f'<text x="{(_ML + _W - _MR) / 2:.2f}" y="{_H - 12:.2f}" text-anchor="middle" '
        'font-size="12" font-family="sans-serif">horizon (days)</text>',
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.2f}" text-anchor="middle" '
        'font-size="12" font-family="sans-serif" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.2f})">{response}</text>',
        f'<text x="{x0:.2f}" y="{y_axis_bottom + 16:.2f}" text-anchor="middle" '
        'font-size="10" font-family="sans-serif">0</text>',
        f'<text x="{x1:.2f}" y="{y_axis_bottom + 16:.2f}" text-anchor="middle" '
        f'font-size="10" font-family="sans-serif">{horizon}</text>',
        f'<text x="{_ML - 6:.2f}" y="{y(ymax - pad) + 4:.2f}" text-anchor="end" '
        f'font-size="10" font-family="sans-serif">{_f(ymax - pad)}</text>',
        f'<text x="{_ML - 6:.2f}" y="{y(ymin + pad) + 4:.2f}" text-anchor="end" '
        f'font-size="10" font-family="sans-serif">{_f(ymin + pad)}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def emit_plot(irf: IrfResult, impulse: str, response: str, path) -> None:
    data = irf.response(impulse, response)
    svg = render_irf_svg(data["theta"], data["lower"], data["upper"], impulse, response)
    _write(Path(path), svg)


def headline_pair(variant: VariantResult, vol_output: str) -> tuple[str, str] | None:
    """(impulse, response) plotted by default: first non-volatility variable
    shocking the volatility column, when both are present."""
    if vol_output not in variant.ordering:
        return None
    for name in variant.ordering:
        if name != vol_output:
            return name, vol_output
    return None


# --- plain-text report ----------------------------------------------------------


def _format_sig_horizons(horizons: tuple[int, ...]) -> str:
    if not horizons:
        return "none"
    runs, start, prev = [], horizons[0], horizons[0]
    for h in horizons[1:]:
        if h == prev + 1:
            prev = h
            continue
        runs.append((start, prev))
        start = prev = h
    runs.append((start, prev))
    return ", ".join(f"{a}" if a == b else f"{a}-{b}" for a, b in runs)


def report_text(report: StudyReport, vol_output: str) -> str:
    cfg = report.config
    out = [
        "ecovar study report",
        "===================",
        f"seed: {report.seed}",
        f"dataset range: {cfg['data']['dataset_range']['start']} .. "
        f"{cfg['data']['dataset_range']['end']}",
        f"estimation range: {cfg['data']['estimation_range']['start']} .. "
        f"{cfg['data']['estimation_range']['end']}",
        "config echo: config_echo.json",
        "",
        "unit-root screen (ADF, informational)",
        "-------------------------------------",
    ]
    if report.adf:
        for name, r in report.adf.items():
            out.append(
                f"{name}: spec={r.spec} lags={r.lags} nobs={r.nobs} tau={_f(r.statistic)} "
                f"crit5={_f(r.crit_5)} reject_unit_root_5pct={_yesno(r.reject_unit_root_5pct)}"
            )
    else:
        out.append("(no results)")
    v = report.volatility
    out += [
        "",
        f"volatility model ({v.source} -> {v.output})",
        "--------------------------------",
        f"mean model lags: {', '.join(str(k) for k in v.ar_lags)}",
        "  intercept: " + _f(v.ar_intercept) + "; coefficients: "
        + ", ".join(f"lag{k}={_f(c)}" for k, c in zip(v.ar_lags, v.ar_coefs)),
        f"variance model: {v.arch_order} squared-shock lag(s), {v.garch_order} variance lag(s)",
        "  omega=" + _f(v.omega)
        + "".join(f" alpha{i + 1}={_f(a)}" for i, a in enumerate(v.alpha))
        + "".join(f" beta{i + 1}={_f(b)}" for i, b in enumerate(v.beta)),
        f"  loglik={_f(v.loglik)} converged={_yesno(v.converged)} n_obs={v.n_obs}",
    ]
    if v.lb_resid is not None:
        out.append(f"  Ljung-Box mean residuals: Q={_f(v.lb_resid.statistic)} "
                   f"p={_f(v.lb_resid.p_value)}")
    if v.lb_z2 is not None:
        out.append(f"  Ljung-Box squared standardized residuals: Q={_f(v.lb_z2.statistic)} "
                   f"p={_f(v.lb_z2.p_value)}")
    for res in report.variants:
        out += ["", f"variant {res.name}", "-" * (8 + len(res.name))]
        out.append("ordering: " + ", ".join(res.ordering)
                   + ("; exog: " + ", ".join(res.exog) if res.exog else "; exog: none"))
        if res.error is not None:
            out.append(f"FAILED: {res.error}")
            continue
        out.append(
            f"p={res.p} nobs={res.nobs} stable={_yesno(res.stability.stable)} "
            f"(max |eigenvalue| {_f(res.stability.max_eigenvalue_modulus)})"
        )
        out.append("whiteness p-values: " + " ".join(
            f"{nm}={_f(r.p_value)}" for nm, r in zip(res.ordering, res.whiteness)))
        irf = res.irf
        out.append(
            f"irf: horizon={irf.horizon} draws={irf.n_draws} explosive={irf.n_explosive} "
            f"nonfinite={irf.n_nonfinite} unreliable={_yesno(irf.unreliable)} "
            "band=draw mean +/- 2 sd"
        )
        pair = headline_pair(res, vol_output)
        if pair is not None:
            imp, resp = pair
            horizons = irf.sig_horizons(imp, resp)
            positive = tuple(h for h in horizons
                             if irf.lower[h, irf.var_names.index(resp),
                                          irf.var_names.index(imp)] > 0.0)
            out.append(f"significant horizons ({resp} <- {imp} shock): "
                       f"{_format_sig_horizons(horizons)}"
                       + (f"; positive at {_format_sig_horizons(positive)}"
                          if horizons else ""))
    out += ["", "warnings", "--------"]
    if report.warnings:
        out += [f"- {w}" for w in report.warnings]
    else:
        out.append("none")
    return "\n".join(out) + "\n"


# --- top-level writer -----------------------------------------------------------


def write_report(report: StudyReport, out_dir) -> None:
    """Write report.txt, config_echo.json, all CSV tables, and headline plots."""
    out = Path(out_dir)
    vol_output = report.volatility.output
    _write(out / "config_echo.json",
           json.dumps(report.config, indent=2, sort_keys=True) + "\n")
    _write(out / "report.txt", report_text(report, vol_output))
    tables = out / "tables"
    _write(tables / "adf.csv", adf_table(report))
    _write(tables / "garch.csv", garch_table(report))
    _write(tables / "var_summary.csv", var_summary_table(report))
    _write(tables / "whiteness.csv", whiteness_table(report))
    for res in report.variants:
        if res.irf is None:
            continue
        _write(tables / f"irf_{res.name}.csv", irf_table(res.irf))
        pair = headline_pair(res, vol_output)
        if pair is not None:
            imp, resp = pair
            emit_plot(res.irf, imp, resp,
                      out / "plots" / f"{res.name}_{resp}_from_{imp}.svg")
