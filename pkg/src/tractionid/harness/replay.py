"""Stream a sensor log through the estimator."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import TractionError
from ..estimator import EstimatorConfig, TractionEstimator
from .io import ESTIMATE_COLUMNS, Table, sensor_records

log = logging.getLogger(__name__)

MAX_SKIPPED_FRACTION = 0.01


@dataclass
class ReplayResult:
    table: Table
    skipped: int
    total: int

    @property
    def failed(self):
        return self.total > 0 and self.skipped > MAX_SKIPPED_FRACTION * self.total


def replay(log_table: Table, config: EstimatorConfig | None = None, source="<log>") -> ReplayResult:
    """Run the estimator over every record; failed steps are skipped.

    Truth columns of the input are copied through to the output untouched for
    rows that produced an estimate; the estimator never sees them.
    """
    records = sensor_records(log_table, source)
    est = TractionEstimator(config)
    rows = []
    kept = []
    skipped = 0
    for k, rec in enumerate(records):
        try:
            out = est.step(rec)
        except TractionError as exc:
            skipped += 1
            log.warning("%s: record %d (t=%g) skipped: %s", source, k, rec.timestamp, exc)
            continue
        rows.append(np.concatenate([[out.timestamp], out.mean, out.variance, out.slip,
                                    [out.supervisor, out.adaptation]]))
        kept.append(k)
    data = np.array(rows).reshape(len(rows), len(ESTIMATE_COLUMNS))
    table = Table()
    for j, name in enumerate(ESTIMATE_COLUMNS):
        table.columns[name] = data[:, j]
    for name in log_table.names:
        if name.startswith("truth_"):
            col = log_table[name]
            table.columns[name] = [col[k] for k in kept] if isinstance(col, list) else col[kept]
    return ReplayResult(table, skipped, len(records))

