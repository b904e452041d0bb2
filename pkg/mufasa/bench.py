"""mufasa.bench
   ============

   Attention cost sweep: score-pair counts and wall time of dense versus
   sparse single-query attention over growing history lengths.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import asdict, dataclass
import time

import numpy as np

from mufasa.sal import (
    AttentionHead,
    PairCounter,
    SALConfig,
    SparseAttentionLayer,
    attention_cost,
)


@dataclass
class BenchRow:
    L: int
    full_pairs: int
    sparse_pairs: int
    formula_pairs: int
    ratio: float
    full_seconds: float
    sparse_seconds: float

    @property
    def consistent(self):
        return self.sparse_pairs == self.formula_pairs

    def to_record(self):
        record = asdict(self)
        record['consistent'] = self.consistent
        return record


def _best_time(func, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def bench_length(L, P=8, W=8, k=2, d=32, repeats=3, seed=0):
    cost = attention_cost(L, P, W, k, d=d, seed=seed)

    rng = np.random.default_rng(seed)
    config = SALConfig(P=P, k=k, window_long=W, window_short=W,
                       window_threshold=0)
    layer = SparseAttentionLayer(d, config, rng)
    dense = AttentionHead(d, rng, 'attention.dense')
    H = rng.normal(size=(L, d))

    def full_pass():
        counter = PairCounter()
        dense(H[-1], H, counter=counter)
        return counter.pairs

    full_pairs = full_pass()
    return BenchRow(
        L=L,
        full_pairs=full_pairs,
        sparse_pairs=cost.sparse,
        formula_pairs=cost.formula,
        ratio=cost.sparse / full_pairs,
        full_seconds=_best_time(full_pass, repeats),
        sparse_seconds=_best_time(lambda: layer.user_embedding(H), repeats),
    )


def run_bench(lengths, P=8, W=8, k=2, d=32, repeats=3, seed=0):
    return [bench_length(L, P, W, k, d, repeats, seed) for L in lengths]
