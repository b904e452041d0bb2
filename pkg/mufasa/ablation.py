"""mufasa.ablation
   ===============

   Train and evaluate model variants on shared data and seeds.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from mufasa.dataset import load_dataset
from mufasa.evaluate import evaluate
from mufasa.experiment import Experiment
from mufasa.metrics import format_table
from mufasa.split import LEAVE_ONE_OUT, ZERO_SHOT, split


def training_users(splits):
    """Training sequences compatible with every split: leave-one-out
    prefixes of users no zero-shot split holds out."""
    by_mode = {s.spec.mode: s for s in splits}
    if LEAVE_ONE_OUT not in by_mode:
        return by_mode[ZERO_SHOT].train
    train = by_mode[LEAVE_ONE_OUT].train
    if ZERO_SHOT in by_mode:
        held = {case.user_id for case in by_mode[ZERO_SHOT].test}
        train = [user for user in train if user.user_id not in held]
    return train


def make_splits(config, users):
    return [split(users, spec) for spec in config.split_specs()]


def evaluate_all(model, catalog, splits, config, max_history=None):
    """Evaluate on every split; returns ``{protocol: MetricReport}``."""
    settings = config.eval_settings(model.parameter_count())
    if max_history is not None:
        settings.max_history = max_history
    return {s.spec.mode: evaluate(model, catalog, s, settings, config.seed)
            for s in splits}


def run_ablation(variant, dataset, config, history_lengths=(None,)):
    """Train ``variant`` and evaluate it at each history length.

    Returns the trained experiment and ``{history_length: {protocol:
    MetricReport}}``.
    """
    splits = make_splits(config, dataset.users)
    experiment = Experiment(config, dataset.catalog, training_users(splits),
                            variant=variant)
    experiment.train()
    results = {}
    for length in history_lengths:
        results[length] = evaluate_all(experiment.model, dataset.catalog,
                                       splits, config, max_history=length)
        for reports in results[length].values():
            reports.fingerprint['variant'] = variant
    return experiment, results


@dataclass
class AblationRow:
    seed: int
    history: Optional[int]
    variant: str
    metrics: Dict[str, float] = field(default_factory=dict)

    def to_record(self):
        return {'seed': self.seed, 'history': self.history,
                'variant': self.variant, **self.metrics}


def run_sweep(config):
    """Run every configured variant for every seed.

    Each seed gets its own corpus (when generated) and its own model
    initialisation; variants within a seed share both.
    """
    ablate = config['ablate']
    overrides = {'eval.protocol': ablate['protocol']}
    rows = []
    for seed in ablate['seeds']:
        seed_config = config.with_overrides(seed=seed, **overrides)
        dataset = load_dataset(seed_config)
        for variant in ablate['variants']:
            _, results = run_ablation(variant, dataset, seed_config,
                                      ablate['history_lengths'])
            for length, reports in results.items():
                metrics = {}
                for report in reports.values():
                    metrics.update(report.as_dict())
                rows.append(AblationRow(seed, length, variant, metrics))
    return rows


def summarize(rows, metric, reference='full'):
    """Per variant and history length: mean of ``metric`` over seeds and
    the number of seeds where ``reference`` scores at least as high."""
    summary = []
    keys = sorted({(row.history or 0, row.variant) for row in rows})
    for history, variant in keys:
        chosen = [row for row in rows
                  if (row.history or 0) == history and row.variant == variant]
        wins = directional_wins(rows, metric, variant, reference,
                                chosen[0].history)
        summary.append({
            'history': history or None,
            'variant': variant,
            'seeds': len(chosen),
            'mean': float(np.mean([row.metrics[metric] for row in chosen])),
            'values': [row.metrics[metric] for row in chosen],
            f'{reference}_wins': wins,
        })
    return summary


def sweep_table(summary, metric, reference='full'):
    header = ['history', 'variant', 'seeds', f'mean {metric}',
              f'{reference} >=']
    rows = [[entry['history'] or 'all', entry['variant'], entry['seeds'],
             entry['mean'], f"{entry[f'{reference}_wins']}/{entry['seeds']}"]
            for entry in summary]
    return format_table(header, rows)


def directional_wins(rows: List[AblationRow], metric, variant,
                     reference='full', history=None):
    """Number of seeds where ``reference`` >= ``variant`` on ``metric``."""
    wins = 0
    for row in rows:
        if row.variant != variant or row.history != history:
            continue
        ref = [r for r in rows if r.seed == row.seed and r.history == history
               and r.variant == reference]
        if ref and ref[0].metrics[metric] >= row.metrics[metric]:
            wins += 1
    return wins
