"""mufasa.metrics
   ==============

   Ranking metrics and metric reports.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from mufasa.errors import MetricError


def hr_at_k(rank, k):
    """1 when the 1-based ``rank`` is within the top ``k``."""
    if rank < 1:
        raise MetricError(f'Ranks are 1-based, got {rank}')
    return 1.0 if rank <= k else 0.0


def ndcg_at_k(rank, k):
    """Single-target NDCG: 1 / log2(rank + 1) within the top ``k``."""
    if rank < 1:
        raise MetricError(f'Ranks are 1-based, got {rank}')
    return 1.0 / np.log2(rank + 1) if rank <= k else 0.0


def recall_at_k(targets, top_k):
    """Fraction of ``targets`` present in ``top_k``."""
    targets = list(targets)
    if not targets:
        raise MetricError('Recall needs at least one target')
    top_k = set(top_k)
    return sum(1 for target in targets if target in top_k) / len(targets)


def mean_hr(ranks, k):
    """Mean HR@k over users; 0 without users."""
    if len(ranks) == 0:
        return 0.0
    return float(np.mean([hr_at_k(rank, k) for rank in ranks]))


def mean_ndcg(ranks, k):
    if len(ranks) == 0:
        return 0.0
    return float(np.mean([ndcg_at_k(rank, k) for rank in ranks]))


@dataclass
class MetricEntry:
    name: str
    k: Optional[int]
    value: float

    @property
    def label(self):
        return self.name if self.k is None else f'{self.name}@{self.k}'


@dataclass
class MetricReport:
    """Metric values with the user count and the run fingerprint."""

    users: int
    seed: int
    fingerprint: Dict = field(default_factory=dict)
    entries: List[MetricEntry] = field(default_factory=list)

    def add(self, name, k, value):
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise MetricError(f'{name}@{k} = {value} lies outside [0, 1]')
        self.entries.append(MetricEntry(name, k, value))

    def get(self, name, k=None):
        for entry in self.entries:
            if entry.name == name and entry.k == k:
                return entry.value
        raise KeyError(f'{name}@{k}')

    def as_dict(self):
        return {entry.label: entry.value for entry in self.entries}

    def to_records(self):
        return [{
            'metric': entry.name,
            'k': entry.k,
            'value': entry.value,
            'users': self.users,
            'seed': self.seed,
            **self.fingerprint,
        } for entry in self.entries]


def format_table(header, rows):
    """Aligned plain-text table; numbers are printed with 4 decimals."""
    def cell(value):
        if isinstance(value, float):
            return f'{value:.4f}'
        return str(value)

    text_rows = [[cell(v) for v in row] for row in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in text_rows))
              if text_rows else len(str(h))
              for i, h in enumerate(header)]
    lines = ['  '.join(str(h).rjust(w) for h, w in zip(header, widths)),
             '  '.join('-' * w for w in widths)]
    for row in text_rows:
        lines.append('  '.join(v.rjust(w) for v, w in zip(row, widths)))
    return '\n'.join(lines)


def report_table(report):
    return format_table(['metric', 'value'],
                        [[entry.label, entry.value]
                         for entry in report.entries])
