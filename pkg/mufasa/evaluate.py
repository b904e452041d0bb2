"""mufasa.evaluate
   ===============

   Full-catalog ranking and the leave-one-out and zero-shot evaluation
   protocols.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from mufasa.metrics import MetricReport, mean_hr, mean_ndcg, recall_at_k
from mufasa.split import LEAVE_ONE_OUT

DEFAULT_HR_KS = (10, 20)
DEFAULT_RECALL_KS = (5, 10, 20, 50, 100)


@dataclass
class RankedList:
    user_id: Optional[str]
    item_ids: List[str]
    scores: np.ndarray

    def rank_of(self, item_id):
        """1-based rank of ``item_id``."""
        return self.item_ids.index(item_id) + 1

    def top(self, k):
        return self.item_ids[:k]


def item_matrix(model, catalog):
    """Fused embeddings of every catalog item, in catalog order."""
    return model.fuse_items(catalog.features()).numpy()


def history(context, catalog, items, max_history=None):
    positions = catalog.positions(context)
    if max_history is not None:
        positions = positions[-max_history:]
    return items[positions]


def rank_all(context, model, catalog, items=None, max_history=None,
             user_id=None):
    """Rank the whole catalog for a user with history ``context``.

    Equal scores are ordered by ascending item_id.
    """
    if items is None:
        items = item_matrix(model, catalog)
    scores = model.score_all(history(context, catalog, items, max_history),
                             items)
    # Catalog positions follow ascending item_id
    order = np.lexsort((np.arange(len(scores)), -scores))
    ids = catalog.ids
    return RankedList(user_id, [ids[i] for i in order], scores[order])


@dataclass
class EvalSettings:
    hr_ks: tuple = DEFAULT_HR_KS
    recall_ks: tuple = DEFAULT_RECALL_KS
    max_history: Optional[int] = None
    cold_start_k: int = 10
    fingerprint: dict = field(default_factory=dict)


def evaluate(model, catalog, split, settings=None, seed=0):
    """Score every evaluation case of ``split``.

    Leave-one-out reports HR@k and NDCG@k, zero-shot reports R@k.
    """
    settings = EvalSettings() if settings is None else settings
    items = item_matrix(model, catalog)
    report = MetricReport(users=len(split.test), seed=seed,
                          fingerprint=dict(settings.fingerprint))
    rankings = [rank_all(case.context, model, catalog, items,
                         settings.max_history, case.user_id)
                for case in split.test]

    if split.spec.mode == LEAVE_ONE_OUT:
        ranks = [ranking.rank_of(case.targets[0])
                 for ranking, case in zip(rankings, split.test)]
        for k in settings.hr_ks:
            report.add('HR', k, mean_hr(ranks, k))
        for k in settings.hr_ks:
            report.add('NDCG', k, mean_ndcg(ranks, k))
    else:
        for k in settings.recall_ks:
            values = [recall_at_k(case.targets, ranking.top(k))
                      for ranking, case in zip(rankings, split.test)]
            report.add('R', k, np.mean(values) if values else 0.0)

    hit = cold_start_genre_hit(catalog, items, settings.cold_start_k)
    if hit is not None:
        report.add('cold_start_genre_hit', settings.cold_start_k, hit)
    return report


def cold_start_genre_hit(catalog, items, k=10):
    """Fraction of cold-start items with a same-genre item among their k
    nearest fused neighbours (cosine). None without cold items or genre
    labels."""
    cold = [catalog.position(item_id) for item_id in catalog.cold_start_ids()]
    if not cold or not catalog.has_genres():
        return None
    genres = catalog.genres()
    norms = np.linalg.norm(items, axis=1)
    norms[norms == 0.0] = 1.0
    unit = items / norms[:, None]
    hits = 0
    for position in cold:
        sims = unit @ unit[position]
        sims[position] = -np.inf
        neighbours = np.argsort(-sims, kind='stable')[:k]
        hits += int(np.any(genres[neighbours] == genres[position]))
    return hits / len(cold)
