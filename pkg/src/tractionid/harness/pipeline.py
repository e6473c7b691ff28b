"""Analysis steps shared by the CLI and the bench, on log tables."""
from __future__ import annotations

import numpy as np

from .. import analysis
from ..errors import DataError
from ..soil import shape_function
from .config import Scenario
from .io import Table

WHEELS = (1, 2, 3, 4)
# The wheel whose estimates are scored against truth in single-wheel reports.
INSTRUMENTED_WHEEL = 4

BIN_COLUMNS = ["s_lo", "s_hi", "s_mid", "count", "mean", "sd", "model"]
FIT_COLUMNS = ["a", "p", "alpha1", "alpha2", "nrmse", "r2", "n_bins"]
SECTION_COLUMNS = ["label", "t_start", "t_end", "count", "mean_s", "sd_s", "mean_mu", "sd_mu", "source"]
EVENT_COLUMNS = ["timestamp"]


def _require(table: Table, names, source):
    missing = [n for n in names if n not in table]
    if missing:
        raise DataError(f"{source}:1: missing columns: {', '.join(missing)}")


def pooled_slip_adhesion(table: Table, t_min=0.0, wheels=WHEELS, prefix="", source="<estimates>"):
    """Concatenate (s, mu) samples of the chosen wheels from ``t >= t_min``."""
    names = [f"{prefix}s{i}" for i in wheels] + [f"{prefix}mu{i}" for i in wheels]
    _require(table, ["timestamp"] + names, source)
    keep = table["timestamp"] >= t_min
    s = np.concatenate([table[f"{prefix}s{i}"][keep] for i in wheels])
    mu = np.concatenate([table[f"{prefix}mu{i}"][keep] for i in wheels])
    return s, mu


def fit_curve(s, mu, shape, bin_width, s_min, s_max, weighted=False):
    """Bin, fit and tabulate; returns ``(FitResult, bin table, fit table)``."""
    bins = analysis.bin_data(s, mu, bin_width, s_min, s_max)
    fit = analysis.fit_scale(bins, shape, weighted=weighted)
    p, a1, a2 = shape
    mids = np.array([b.s_mid for b in bins])
    bin_table = Table({
        "s_lo": [b.s_lo for b in bins],
        "s_hi": [b.s_hi for b in bins],
        "s_mid": mids,
        "count": [b.count for b in bins],
        "mean": [b.mean for b in bins],
        "sd": [b.sd for b in bins],
        "model": fit.a * shape_function(mids, p, a1, a2),
    })
    fit_table = Table({"a": [fit.a], "p": [p], "alpha1": [a1], "alpha2": [a2],
                       "nrmse": [fit.nrmse], "r2": [fit.r2], "n_bins": [fit.n_bins]})
    return fit, bin_table, fit_table


def path_position(table: Table):
    """Travelled distance: the logged truth when present, else integrated speed."""
    if "truth_position" in table:
        return np.asarray(table["truth_position"])
    t, v = table["timestamp"], table["v"]
    if len(t) == 0:
        return np.zeros(0)
    steps = 0.5 * (v[1:] + v[:-1]) * np.diff(t)
    return np.concatenate([[0.0], np.cumsum(steps)])


def section_report(table: Table, scenario: Scenario, wheel=INSTRUMENTED_WHEEL, source="<estimates>"):
    """Per-soil section statistics, estimated and (when logged) true."""
    _require(table, ["timestamp", f"s{wheel}", f"mu{wheel}"], source)
    if "truth_position" not in table:
        _require(table, ["v"], source)
    t = table["timestamp"]
    sections, exclude = analysis.sections_from_path(
        t, path_position(table), scenario.soil_map.segments(), scenario.transition_half_width)
    stats = analysis.section_stats(t, table[f"s{wheel}"], table[f"mu{wheel}"],
                                   sections, exclude, "estimated")
    if f"truth_s{wheel}" in table and f"truth_mu{wheel}" in table:
        stats += analysis.section_stats(t, table[f"truth_s{wheel}"], table[f"truth_mu{wheel}"],
                                        sections, exclude, "true")
    out = Table({name: [getattr(st, name) for st in stats] for name in SECTION_COLUMNS})
    return stats, exclude, out


def detection_signal(table: Table, source="<estimates>"):
    """Mean estimated adhesion over the wheels."""
    names = [f"mu{i}" for i in WHEELS]
    _require(table, names, source)
    return np.mean([table[n] for n in names], axis=0)


def detect_events(table: Table, window=analysis.DEFAULT_DETECT_WINDOW,
                  threshold=analysis.DEFAULT_DETECT_THRESHOLD, source="<estimates>"):
    _require(table, ["timestamp"], source)
    if len(table) == 0:
        return []
    return analysis.detect_ground_change(table["timestamp"], detection_signal(table, source),
                                         window, threshold)


def events_table(events):
    return Table({"timestamp": np.asarray(events, dtype=float)})
