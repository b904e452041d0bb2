"""Training runs on the default generated corpus (2000 users, 400 items)
for three seeds. Slow: deselect with ``-m "not slow"``."""

import numpy as np
import pytest

from mufasa.ablation import evaluate_all, make_splits, training_users
from mufasa.config import RunConfig
from mufasa.dataset import generate_dataset
from mufasa.evaluate import evaluate
from mufasa.experiment import Experiment, init_model
from mufasa.split import LEAVE_ONE_OUT, ZERO_SHOT, Split

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2)
VARIANTS = ('full', 'no_mfl', 'no_sal', 'full_attention')
LONG_CONTEXT = 150


class SeedRun(object):
    """Corpus, splits, trained variants and their reports for one seed"""

    def __init__(self, config):
        self.config = config
        self.dataset = generate_dataset(config)
        self.splits = {s.spec.mode: s
                       for s in make_splits(config, self.dataset.users)}
        train = training_users(list(self.splits.values()))
        self.experiments = {}
        self.reports = {}
        for variant in VARIANTS:
            expt = Experiment(config, self.dataset.catalog, train,
                              variant=variant)
            expt.train()
            self.experiments[variant] = expt
            self.reports[variant] = evaluate_all(
                expt.model, self.dataset.catalog,
                list(self.splits.values()), config
            )

    def metric(self, variant, mode, name, k):
        return self.reports[variant][mode].get(name, k)


@pytest.fixture(scope='module')
def base_config(tmp_path_factory):
    output = tmp_path_factory.mktemp('default_corpus')
    return RunConfig({'output': str(output), 'eval': {'protocol': 'both'}})


@pytest.fixture(scope='module')
def runs(base_config):
    return {seed: SeedRun(base_config.with_overrides(seed=seed))
            for seed in SEEDS}


def wins(runs, score, variant):
    """Seeds where the full model scores at least as high as ``variant``"""
    return sum(score(run, 'full') >= score(run, variant)
               for run in runs.values())


def test_full_model_beats_random_ranking(runs):
    chance = 10 / len(runs[0].dataset.catalog)
    hr10 = np.mean([run.metric('full', LEAVE_ONE_OUT, 'HR', 10)
                    for run in runs.values()])
    assert hr10 >= 5 * chance


@pytest.mark.parametrize('variant', ['no_mfl', 'no_sal'])
def test_full_model_wins_ablation(runs, variant):
    def recall20(run, name):
        return run.metric(name, ZERO_SHOT, 'R', 20)

    assert wins(runs, recall20, variant) >= 2


def test_full_model_wins_dense_attention_on_long_contexts(runs):
    # With one held-out target R@20 equals HR@20
    def recall20(run, name):
        loo = run.splits[LEAVE_ONE_OUT]
        long_cases = Split(loo.spec, test=[case for case in loo.test
                                           if len(case.context)
                                           >= LONG_CONTEXT])
        assert long_cases.test
        report = evaluate(run.experiments[name].model, run.dataset.catalog,
                          long_cases, run.config.eval_settings(),
                          run.config.seed)
        return report.get('HR', 20)

    assert wins(runs, recall20, 'full_attention') >= 2


def test_stage1_loss_halves(runs):
    records = [r for r in runs[0].experiments['full'].loss_records
               if r['stage'] == 'mfl' and r['component'] == 'total']
    assert len(records) == 20
    assert records[-1]['value'] <= 0.5 * records[0]['value']


def test_untrained_model_ranks_at_chance(base_config):
    config = base_config.with_overrides(seed=0)
    dataset = generate_dataset(config)
    loo = next(s for s in make_splits(config, dataset.users)
               if s.spec.mode == LEAVE_ONE_OUT)
    assert len(loo.test) >= 2000

    model = init_model('full', config.d, dataset.catalog.M, config)
    k = 10
    report = evaluate(model, dataset.catalog, loo, config.eval_settings(),
                      config.seed)
    expected = k / len(dataset.catalog)
    standard_error = np.sqrt(expected * (1 - expected) / len(loo.test))
    assert abs(report.get('HR', k) - expected) <= 3 * standard_error
