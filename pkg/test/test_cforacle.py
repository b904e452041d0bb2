import numpy as np
import numpy.testing as npt
import pytest

from mufasa.catalog import UserRecord
from mufasa.cforacle import CFConfig, attach_cf, cf_oracle
from mufasa.errors import ColdStartWarning, ConfigError, EmptySampleError

from test.common import make_catalog


def two_communities(catalog, n_users=20, length=12, seed=0):
    """Even users see even items, odd users odd items."""
    rng = np.random.default_rng(seed)
    ids = catalog.ids
    users = []
    for u in range(n_users):
        pool = ids[u % 2::2]
        users.append(UserRecord(f'u{u:03d}',
                                list(rng.choice(pool, size=length))))
    return users


def test_oracle_shapes_and_determinism():
    catalog = make_catalog(10)
    users = two_communities(catalog)
    config = CFConfig(rank=4, epochs=3, seed=1)
    first = cf_oracle(users, catalog, config)
    second = cf_oracle(users, catalog, config)
    assert first.item_factors.shape == (10, 4)
    assert first.user_factors.shape == (20, 4)
    npt.assert_array_equal(first.item_factors, second.item_factors)
    npt.assert_array_equal(first.user_factor('u003'), first.user_factors[3])


def test_oracle_separates_communities():
    catalog = make_catalog(10)
    users = two_communities(catalog, n_users=40)
    result = cf_oracle(users, catalog, CFConfig(rank=4, epochs=60, batch_size=16,
                                                learning_rate=0.1))
    user = result.user_factor('u000')
    scores = result.item_factors @ user
    assert scores[0::2].mean() > scores[1::2].mean()


def test_items_without_interactions_are_cold():
    catalog = make_catalog(6)
    users = [UserRecord('u0', ['i000', 'i001', 'i002'])]
    with pytest.warns(ColdStartWarning):
        result = cf_oracle(users, catalog, CFConfig(rank=3, epochs=1))
    assert list(result.cold) == [False] * 3 + [True] * 3
    npt.assert_array_equal(result.item_factors[3:], 0.0)

    attach_cf(catalog, result)
    assert catalog.cold_start_ids() == ['i003', 'i004', 'i005']
    npt.assert_array_equal(catalog['i000'].cf_emb, result.item_factors[0])


def test_oracle_needs_interactions():
    with pytest.raises(EmptySampleError):
        cf_oracle([], make_catalog(3), CFConfig(rank=2))


@pytest.mark.parametrize('kwargs', [
    {'rank': 0},
    {'epochs': -1},
    {'negatives': 0},
    {'learning_rate': 0.0},
    {'batch_size': 0},
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        CFConfig(**kwargs)


def test_identical_histories_give_aligned_users():
    catalog = make_catalog(10)
    users = two_communities(catalog, n_users=20)
    users.append(UserRecord('twin', list(users[0].items)))
    result = cf_oracle(users, catalog, CFConfig(rank=4, epochs=60,
                                                learning_rate=0.1,
                                                batch_size=16))
    a = result.user_factor('u000')
    b = result.user_factor('twin')
    cosine = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    assert cosine > 0.9


def test_observed_pairs_outscore_unobserved():
    catalog = make_catalog(10)
    users = two_communities(catalog, n_users=20)
    result = cf_oracle(users, catalog, CFConfig(rank=4, epochs=30,
                                                batch_size=16))
    scores = result.user_factors @ result.item_factors.T
    observed = np.zeros_like(scores, dtype=bool)
    for u, user in enumerate(users):
        observed[u, catalog.positions(user.items)] = True
    assert scores[observed].mean() > scores[~observed].mean()
