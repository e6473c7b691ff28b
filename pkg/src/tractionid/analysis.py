"""Offline analysis of estimate and sensor logs.

Slip binning and least-squares fitting of the adhesion-curve scale, fit
metrics, per-section statistics and a two-window ground-change detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, UndefinedMetricError
from .soil import shape_function

DEFAULT_BIN_WIDTH = 0.01
DEFAULT_S_MIN = 0.05
DEFAULT_S_MAX = 0.60
GRASS_S_MAX = 0.40
# Detector defaults, tuned on the seeded benchmark logs at dt = 0.01 s.
DEFAULT_DETECT_WINDOW = 100
DEFAULT_DETECT_THRESHOLD = 3.0


@dataclass(frozen=True)
class SlipBin:
    s_lo: float
    s_hi: float
    count: int
    mean: float  # nan when empty
    sd: float  # sample SD; nan when count < 2

    @property
    def s_mid(self):
        return 0.5 * (self.s_lo + self.s_hi)


@dataclass(frozen=True)
class FitResult:
    a: float
    shape: tuple
    nrmse: float
    r2: float
    n_bins: int


@dataclass(frozen=True)
class SectionStats:
    label: str
    t_start: float
    t_end: float
    count: int
    mean_s: float
    sd_s: float
    mean_mu: float
    sd_mu: float
    source: str

    @property
    def defined(self):
        return self.count > 0


def _edges(width, s_min, s_max):
    n = int(math.ceil((s_max - s_min) / width - 1e-9))
    edges = s_min + width * np.arange(n + 1)
    edges[-1] = s_max
    return edges


def bin_data(s, mu, bin_width=DEFAULT_BIN_WIDTH, s_min=DEFAULT_S_MIN, s_max=DEFAULT_S_MAX):
    """Group (slip, adhesion) samples into uniform slip bins on [s_min, s_max).

    Samples outside the range are dropped; empty bins are kept with count 0.
    """
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    if not s_min < s_max:
        raise ValueError("need s_min < s_max")
    s = np.asarray(s, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    if s.shape != mu.shape:
        raise ValueError("slip and adhesion samples differ in length")
    edges = _edges(bin_width, s_min, s_max)
    keep = (s >= s_min) & (s < s_max)
    idx = np.searchsorted(edges, s[keep], side="right") - 1
    idx = np.clip(idx, 0, len(edges) - 2)
    vals = mu[keep]
    bins = []
    for b in range(len(edges) - 1):
        sel = vals[idx == b]
        n = int(sel.size)
        mean = float(sel.mean()) if n else math.nan
        sd = float(sel.std(ddof=1)) if n >= 2 else math.nan
        bins.append(SlipBin(float(edges[b]), float(edges[b + 1]), n, mean, sd))
    return bins


def goodness(observed, predicted):
    """(NRMSE, R^2); the RMSE is normalized by the observed range."""
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.shape != pred.shape or obs.size == 0:
        raise ValueError("observed and predicted must be non-empty and equally long")
    resid = obs - pred
    span = obs.max() - obs.min()
    if span == 0:
        err = UndefinedMetricError("observed values are constant; NRMSE and R^2 undefined")
        err.nrmse = err.r2 = math.nan
        raise err
    # Work in units of the observed range so tiny values cannot underflow.
    r = resid / span
    d = (obs - obs.mean()) / span
    nrmse = math.sqrt(float(np.mean(r * r)))
    r2 = 1.0 - float(np.sum(r * r)) / float(np.sum(d * d))
    return nrmse, r2


def fit_scale(bins, shape, weighted=False) -> FitResult:
    """Closed-form least-squares scale of the adhesion curve to bin means.

    Every non-empty bin counts once unless ``weighted``, in which case bins
    are weighted by their sample count.
    """
    used = [b for b in bins if b.count > 0]
    if not used:
        raise DegenerateFitError("no non-empty bins to fit")
    p, a1, a2 = shape
    g = shape_function(np.array([b.s_mid for b in used]), p, a1, a2)
    y = np.array([b.mean for b in used])
    w = np.array([b.count for b in used], dtype=float) if weighted else np.ones(len(used))
    denom = float(np.sum(w * g * g))
    if denom == 0:
        raise DegenerateFitError("model shape is zero at every bin midpoint")
    a = float(np.sum(w * g * y)) / denom
    try:
        nrmse, r2 = goodness(y, a * g)
    except UndefinedMetricError:
        nrmse = r2 = math.nan
    return FitResult(a, tuple(shape), nrmse, r2, len(used))


def _stats(x):
    n = x.size
    mean = float(x.mean()) if n else math.nan
    sd = float(x.std(ddof=1)) if n >= 2 else (0.0 if n == 1 else math.nan)
    return mean, sd


def section_stats(t, s, mu, sections, exclude=(), source="estimated"):
    """Mean and SD of slip and adhesion within labelled time sections.

    ``sections`` holds ``(label, t_start, t_end)`` half-open intervals;
    samples inside any ``exclude`` interval (transition zones) are dropped.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    mu = np.asarray(mu, dtype=float)
    keep = np.ones(t.size, dtype=bool)
    for lo, hi in exclude:
        keep &= ~((t >= lo) & (t < hi))
    ordered = sorted(sections, key=lambda sec: sec[1])
    for (_, _, e0), (_, s1, _) in zip(ordered, ordered[1:]):
        if s1 < e0:
            raise ValueError("sections overlap")
    out = []
    for label, t0, t1 in sections:
        sel = keep & (t >= t0) & (t < t1)
        ms, ss = _stats(s[sel])
        mm, sm = _stats(mu[sel])
        out.append(SectionStats(label, float(t0), float(t1), int(sel.sum()), ms, ss, mm, sm, source))
    return out


def sections_from_path(t, position, segments, half_width):
    """Time sections and transition-zone exclusions from a monotone drive path.

    ``segments`` are ``(x_start, x_end, label)``; each interior boundary gets a
    zone of ``half_width`` metres either side. Returns ``(sections, exclude)``
    as time intervals for :func:`section_stats`.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(position, dtype=float)
    if t.size == 0:
        return [], []
    t_end = t[-1] + (t[-1] - t[-2] if t.size > 1 else 1.0)

    def time_at(pos):
        i = int(np.searchsorted(x, pos, side="left"))
        return float(t[i]) if i < t.size else t_end

    if np.any(np.diff(x) < 0):
        # Non-monotone paths: use the running maximum so a section is the
        # span between first arrivals.
        x = np.maximum.accumulate(x)
    sections = []
    exclude = []
    for k, (x0, x1, label) in enumerate(segments):
        t0 = time_at(x0) if k else float(t[0])
        t1 = time_at(x1) if math.isfinite(x1) else t_end
        if t1 > t0:
            sections.append((label, t0, t1))
        if k:
            exclude.append((time_at(x0 - half_width), time_at(x0 + half_width)))
    return sections, exclude


def window_shift_statistic(x, window):
    """Two-window mean-shift statistic at every split index.

    Entry ``k`` compares ``x[k-window:k]`` with ``x[k:k+window]``:
    ``|mean_right - mean_left| / pooled_sd``. Undefined splits are nan.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    stat = np.full(n, math.nan)
    if n < 2 * window:
        return stat
    # Centre before the running sums to limit cancellation.
    xc = x - x.mean()
    c1 = np.concatenate([[0.0], np.cumsum(xc)])
    c2 = np.concatenate([[0.0], np.cumsum(xc * xc)])
    k = np.arange(window, n - window + 1)
    s_l = c1[k] - c1[k - window]
    s_r = c1[k + window] - c1[k]
    q_l = c2[k] - c2[k - window]
    q_r = c2[k + window] - c2[k]
    m_l, m_r = s_l / window, s_r / window
    var_l = np.maximum(q_l - window * m_l**2, 0.0) / (window - 1)
    var_r = np.maximum(q_r - window * m_r**2, 0.0) / (window - 1)
    pooled = np.sqrt(0.5 * (var_l + var_r))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(m_r - m_l) / pooled
    z[(pooled == 0) & (m_r == m_l)] = 0.0
    stat[k] = z
    return stat


def detect_ground_change(t, mu, window=DEFAULT_DETECT_WINDOW, threshold=DEFAULT_DETECT_THRESHOLD):
    """Timestamps where the windowed mean of ``mu`` shifts significantly.

    A run of consecutive split points whose statistic exceeds ``threshold``
    yields one event at its peak; events closer than one window to the
    previous event are dropped.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    t = np.asarray(t, dtype=float)
    stat = window_shift_statistic(mu, window)
    above = np.nan_to_num(stat, nan=-np.inf) > threshold
    events = []
    last = None
    k = 0
    n = above.size
    while k < n:
        if not above[k]:
            k += 1
            continue
        j = k
        while j < n and above[j]:
            j += 1
        peak = k + int(np.argmax(stat[k:j]))
        if last is None or peak - last >= window:
            events.append(float(t[peak]))
            last = peak
        k = j
    return events
