"""Built-in benchmark: seeded scenarios, files on disk, a pass/fail row each.

Every output file depends only on the packaged scenario files and seeds, so
two runs produce identical bytes. Wall-clock timings are printed but never
written.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .. import analysis
from ..soil import PROTOTYPE_SHAPE, mu_of_s
from . import checks, pipeline
from .config import estimator_config_from_dict, load_estimator_config, load_scenario
from .io import ESTIMATE_COLUMNS, Table, read_csv, table_to_csv_text, write_csv
from .replay import replay
from .simulate import simulate

SWEEP_SOILS = ("hard", "fine", "wet", "coarse", "grass")
# Early samples are dominated by the filter's initial guess.
WARMUP = 10.0
FIT_TOLERANCE = 0.05
NOISELESS_TOLERANCE = 1e-10
CONVERGENCE_BAND = 0.05
CONVERGENCE_HORIZON = 1000
VARIANCE_RATIO = 1.5
# Soil pairs whose switch is not required to be detected.
INDISTINCT = {frozenset(("fine", "wet"))}


@dataclass(frozen=True)
class Row:
    criterion: int
    name: str
    passed: bool
    detail: str


def scenario_path(name):
    return resources.files("tractionid") / "scenarios" / f"{name}.yaml"


def _load(name):
    with resources.as_file(scenario_path(name)) as path:
        return load_scenario(path)


def _estimates(out_dir, sub, log, config, name="estimates"):
    result = replay(log, config, source=f"{sub}/sensor.csv")
    table = result.table
    extra = [n for n in table.names if n not in ESTIMATE_COLUMNS]
    write_csv(out_dir / sub / f"{name}.csv", table, ESTIMATE_COLUMNS + extra)
    return result


def _simulate(out_dir, name):
    scenario = _load(name)
    log = simulate(scenario)
    write_csv(out_dir / name / "sensor.csv", log)
    return scenario, log


def _zone_mask(t, exclude, t_min=0.0):
    keep = t >= t_min
    for lo, hi in exclude:
        keep &= ~((t >= lo) & (t < hi))
    return keep


def tracking_fidelity(out_dir) -> tuple[Row, Row]:
    """Criteria 1 and 8 on the long multi-soil drive."""
    scenario, log = _simulate(out_dir, "multi2")
    res = _estimates(out_dir, "multi2", log, None)
    est = res.table
    w = pipeline.INSTRUMENTED_WHEEL
    stats, exclude, table = pipeline.section_report(est, scenario, w)
    write_csv(out_dir / "multi2" / "sections.csv", table, pipeline.SECTION_COLUMNS)
    keep = _zone_mask(est["timestamp"], exclude)
    nrmse, r2 = analysis.goodness(est[f"truth_mu{w}"][keep], est[f"mu{w}"][keep])
    ok1 = not res.failed and r2 >= 0.80 and nrmse <= 0.10
    row1 = Row(1, "tracking fidelity", ok1,
               f"R2={r2:.4f} (>=0.80) NRMSE={nrmse:.4f} (<=0.10) skipped={res.skipped}")

    n = len(stats) // 2
    estimated, true = stats[:n], stats[n:]
    grass = [s for s in estimated if s.label == "grass" and s.defined]
    hard = [s for s in estimated if s.label == "hard" and s.defined]
    upper = max(s.mean_mu + s.sd_mu for s in grass)
    lower = min(s.mean_mu - s.sd_mu for s in hard)
    errors = [abs(e.mean_mu - t.mean_mu) / abs(t.mean_mu)
              for e, t in zip(estimated, true) if e.defined]
    worst = max(errors)
    ok8 = bool(grass and hard) and upper < lower and worst < 0.10
    row8 = Row(8, "section separation", ok8,
               f"grass mean+SD={upper:.4f} < hard mean-SD={lower:.4f}; "
               f"worst section mean error={worst:.2%} (<10%)")
    return row1, row8


def noiseless_fit(soil):
    """Adhesion samples placed on the bin midpoints of the default grid."""
    s_max = analysis.GRASS_S_MAX if soil.name == "grass" else analysis.DEFAULT_S_MAX
    edges = analysis.bin_data([], [], analysis.DEFAULT_BIN_WIDTH, analysis.DEFAULT_S_MIN, s_max)
    s = np.repeat([b.s_mid for b in edges], 3)
    return analysis.fit_scale(
        analysis.bin_data(s, mu_of_s(soil, s), analysis.DEFAULT_BIN_WIDTH,
                          analysis.DEFAULT_S_MIN, s_max), soil.shape)


def curve_fits(out_dir) -> Row:
    """Criterion 2: fitted curve scale per soil from a simulated sweep."""
    rows = {k: [] for k in ("soil", "a_true", "a_fit", "rel_error", "nrmse", "r2", "n_bins",
                            "a_noiseless", "noiseless_error")}
    failures = []
    parts = []
    for name in SWEEP_SOILS:
        sub = f"sweep_{name}"
        scenario, log = _simulate(out_dir, sub)
        res = _estimates(out_dir, sub, log, None)
        soil = scenario.catalog[name]
        s_max = analysis.GRASS_S_MAX if name == "grass" else analysis.DEFAULT_S_MAX
        s, mu = pipeline.pooled_slip_adhesion(res.table, WARMUP)
        fit, bins, _ = pipeline.fit_curve(s, mu, PROTOTYPE_SHAPE, analysis.DEFAULT_BIN_WIDTH,
                                          analysis.DEFAULT_S_MIN, s_max)
        write_csv(out_dir / sub / "bins.csv", bins, pipeline.BIN_COLUMNS)
        exact = noiseless_fit(soil)
        rel = fit.a / soil.a - 1.0
        exact_err = abs(exact.a - soil.a)
        for key, val in zip(rows, (name, soil.a, fit.a, rel, fit.nrmse, fit.r2, fit.n_bins,
                                   exact.a, exact_err)):
            rows[key].append(val)
        if res.failed or abs(rel) > FIT_TOLERANCE or exact_err > NOISELESS_TOLERANCE:
            failures.append(name)
        parts.append(f"{name} {rel:+.2%}")
    table = Table()
    table.columns["soil"] = rows.pop("soil")
    for key, vals in rows.items():
        table.columns[key] = np.asarray(vals, dtype=float)
    write_csv(out_dir / "fits.csv", table)
    worst_exact = float(np.max(table["noiseless_error"]))
    detail = ", ".join(parts) + f" (<=5%); noiseless max |da|={worst_exact:.1e}"
    if failures:
        detail += f"; failed: {', '.join(failures)}"
    return Row(2, "curve-fit round trip", not failures, detail)


def convergence_steps(est: Table, switch_index, wheel=pipeline.INSTRUMENTED_WHEEL):
    """Steps after the switch until the estimate stays within the band."""
    err = np.abs(est[f"mu{wheel}"] - est[f"truth_mu{wheel}"])
    window = err[switch_index:switch_index + CONVERGENCE_HORIZON]
    outside = np.flatnonzero(window > CONVERGENCE_BAND)
    return int(outside[-1]) + 1 if outside.size else 0


def adaptation_behaviour(out_dir) -> Row:
    """Criterion 6: adaptive against plain filter on a soil step and a steady drive."""
    with resources.as_file(scenario_path("adaptation")) as path:
        adaptive = load_estimator_config(path)
    plain = estimator_config_from_dict({"adaptation": {"enabled": False},
                                        "process_noise": {"speed": adaptive.q_speed,
                                                          "mu": adaptive.q_mu,
                                                          "rho_s": adaptive.q_rho_s}})
    _, log = _simulate(out_dir, "step")
    soils = log["truth_soil"]
    switch = next(k for k in range(1, len(soils)) if soils[k] != soils[k - 1])
    a = _estimates(out_dir, "step", log, adaptive, "estimates_adaptive")
    p = _estimates(out_dir, "step", log, plain, "estimates_plain")
    n_a = convergence_steps(a.table, switch)
    n_p = convergence_steps(p.table, switch)

    _, log = _simulate(out_dir, "stationary")
    va = _estimates(out_dir, "stationary", log, adaptive, "estimates_adaptive")
    vp = _estimates(out_dir, "stationary", log, plain, "estimates_plain")
    w = pipeline.INSTRUMENTED_WHEEL
    keep = va.table["timestamp"] >= WARMUP
    var_a = float(np.var(va.table[f"mu{w}"][keep], ddof=1))
    var_p = float(np.var(vp.table[f"mu{w}"][keep], ddof=1))
    ratio = var_a / var_p
    failed = any(r.failed for r in (a, p, va, vp))
    ok = not failed and n_a < n_p and ratio <= VARIANCE_RATIO
    return Row(6, "adaptation behaviour", ok,
               f"re-convergence adaptive={n_a} plain={n_p} steps; "
               f"steady variance ratio={ratio:.4f} (<=1.5)")


def switch_times(log: Table):
    soils = log["truth_soil"]
    t = log["timestamp"]
    return [(float(t[k]), soils[k - 1], soils[k]) for k in range(1, len(soils))
            if soils[k] != soils[k - 1]]


def score_detection(events, switches, tolerance):
    """Match events to switches; returns (ok, per-switch counts, stray events)."""
    counts = []
    used = set()
    ok = True
    for t_sw, before, after in switches:
        near = [i for i, e in enumerate(events) if abs(e - t_sw) <= tolerance]
        used.update(near)
        if frozenset((before, after)) in INDISTINCT:
            counts.append(None)
            continue
        counts.append(len(near))
        ok &= len(near) == 1
    stray = [e for i, e in enumerate(events) if i not in used]
    return ok and not stray, counts, stray


def detection(out_dir) -> Row:
    """Criterion 7: change events on the short multi-soil drive and the control log."""
    _, log = _simulate(out_dir, "multi1")
    res = _estimates(out_dir, "multi1", log, None)
    window = analysis.DEFAULT_DETECT_WINDOW
    events = pipeline.detect_events(res.table, window)
    write_csv(out_dir / "multi1" / "events.csv", pipeline.events_table(events))
    dt = float(log["timestamp"][1] - log["timestamp"][0])
    ok, counts, stray = score_detection(events, switch_times(log), 2 * window * dt)

    control = replay(read_csv(out_dir / "stationary" / "sensor.csv"), None)
    write_csv(out_dir / "stationary" / "estimates.csv", control.table)
    quiet = pipeline.detect_events(control.table, window)
    write_csv(out_dir / "stationary" / "events.csv", pipeline.events_table(quiet))
    shown = ",".join("-" if c is None else str(c) for c in counts)
    ok = ok and not quiet and not res.failed and not control.failed
    return Row(7, "ground-change detection", ok,
               f"events per switch [{shown}] (need 1 each), stray={len(stray)}, "
               f"control log events={len(quiet)} over {len(control.table)} steps")


def property_rows() -> list[Row]:
    kf = checks.kf_equivalence()
    ut = checks.transform_exactness()
    slip = checks.slip_properties()
    return [
        Row(3, "UKF/KF equivalence", kf <= 1e-8, f"max relative error={kf:.2e} (<=1e-8)"),
        Row(4, "unscented transform exactness", ut <= 1e-10,
            f"max relative error={ut:.2e} (<=1e-10)"),
        Row(5, "slip-ratio properties", slip == 0, f"violations={slip} over 10000 samples"),
    ]


def determinism(out_dir) -> Row:
    """Criterion 9 within one run: regenerate one scenario and compare bytes."""
    scenario = _load("step")
    log = simulate(scenario)
    same_log = table_to_csv_text(log) == (out_dir / "step" / "sensor.csv").read_text(encoding="utf-8")
    with resources.as_file(scenario_path("adaptation")) as path:
        cfg = load_estimator_config(path)
    est = replay(log, cfg).table
    names = ESTIMATE_COLUMNS + [n for n in est.names if n not in ESTIMATE_COLUMNS]
    same_est = table_to_csv_text(est, names) == (
        out_dir / "step" / "estimates_adaptive.csv").read_text(encoding="utf-8")
    ok = same_log and same_est
    return Row(9, "determinism", ok,
               "regenerated step sensor and estimate logs are byte-identical" if ok
               else "regenerated step logs differ")


def run_bench(out_dir, report=None) -> list[Row]:
    """Run every benchmark stage into ``out_dir``; ``report(row)`` is called per row."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []

    def emit(new):
        for row in new:
            rows.append(row)
            if report:
                report(row)

    emit(tracking_fidelity(out_dir))
    emit([curve_fits(out_dir)])
    emit(property_rows())
    emit([adaptation_behaviour(out_dir)])
    emit([detection(out_dir)])
    emit([determinism(out_dir)])
    rows.sort(key=lambda r: r.criterion)
    summary = Table({
        "criterion": [r.criterion for r in rows],
        "name": [r.name for r in rows],
        "passed": [float(r.passed) for r in rows],
        "detail": [r.detail for r in rows],
    })
    write_csv(out_dir / "summary.csv", summary)
    return rows


def format_row(row: Row) -> str:
    return f"[{'PASS' if row.passed else 'FAIL'}] {row.criterion}. {row.name}: {row.detail}"

