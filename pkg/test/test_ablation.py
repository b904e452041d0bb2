import pytest

from mufasa.ablation import (
    AblationRow,
    directional_wins,
    summarize,
    sweep_table,
    training_users,
)
from mufasa.catalog import UserRecord
from mufasa.split import LEAVE_ONE_OUT, ZERO_SHOT, SplitSpec, split


def rows_of(values):
    """``values`` maps (seed, variant) to R@20."""
    return [AblationRow(seed, None, variant, {'R@20': value})
            for (seed, variant), value in values.items()]


def test_directional_wins():
    rows = rows_of({
        (0, 'full'): 0.30, (0, 'no_sal'): 0.20,
        (1, 'full'): 0.25, (1, 'no_sal'): 0.25,
        (2, 'full'): 0.10, (2, 'no_sal'): 0.15,
    })
    assert directional_wins(rows, 'R@20', 'no_sal') == 2
    assert directional_wins(rows, 'R@20', 'full') == 3


def test_summarize():
    rows = rows_of({
        (0, 'full'): 0.3, (0, 'no_mfl'): 0.1,
        (1, 'full'): 0.5, (1, 'no_mfl'): 0.6,
    })
    summary = {entry['variant']: entry for entry in summarize(rows, 'R@20')}
    assert summary['full']['mean'] == pytest.approx(0.4)
    assert summary['no_mfl']['mean'] == pytest.approx(0.35)
    assert summary['no_mfl']['values'] == [0.1, 0.6]
    assert summary['no_mfl']['full_wins'] == 1
    assert summary['full']['seeds'] == 2

    table = sweep_table(summarize(rows, 'R@20'), 'R@20')
    assert 'mean R@20' in table
    assert '1/2' in table


def test_summarize_by_history_length():
    rows = [AblationRow(0, 10, 'full', {'HR@10': 0.2}),
            AblationRow(0, None, 'full', {'HR@10': 0.4})]
    summary = summarize(rows, 'HR@10')
    assert [(e['history'], e['mean']) for e in summary] == \
        [(None, 0.4), (10, 0.2)]


def test_training_users_combines_protocols():
    users = [UserRecord(f'u{u}', [f'i{t}' for t in range(6)])
             for u in range(6)]
    loo = split(users, SplitSpec(LEAVE_ONE_OUT))
    zero = split(users, SplitSpec(ZERO_SHOT, holdout_users=2))
    held = {case.user_id for case in zero.test}

    train = training_users([loo, zero])
    assert len(train) == 4
    assert held.isdisjoint(user.user_id for user in train)
    assert all(len(user) == 5 for user in train)

    assert training_users([zero]) == zero.train
    assert training_users([loo]) == loo.train
