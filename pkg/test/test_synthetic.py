import numpy as np
import numpy.testing as npt
import pytest

from mufasa.errors import ConfigError
from mufasa.mfl import MODALITIES, filter_title_quality
from mufasa.synthetic import (
    SyntheticConfig,
    generate_synthetic,
    genre_prototypes,
    item_id_for,
    title_genre_agreement,
    user_id_for,
)

small = dict(num_genres=4, d=8, items_per_genre=5, num_users=20,
             length_min=6, length_max=15)


def test_generation_is_deterministic():
    first_catalog, first_users = generate_synthetic(SyntheticConfig(**small))
    second_catalog, second_users = generate_synthetic(SyntheticConfig(**small))
    npt.assert_array_equal(first_catalog.features(),
                           second_catalog.features())
    assert [u.items for u in first_users] == [u.items for u in second_users]

    _, other_users = generate_synthetic(SyntheticConfig(seed=1, **small))
    assert [u.items for u in other_users] != [u.items for u in first_users]


def test_sizes_and_ids():
    config = SyntheticConfig(**small)
    catalog, users = generate_synthetic(config)
    assert len(catalog) == 20
    assert catalog.M == len(MODALITIES) and catalog.d == 8
    assert catalog.ids[0] == item_id_for(0) == 'i00000'
    assert [u.user_id for u in users] == [user_id_for(i) for i in range(20)]
    for user in users:
        assert config.length_min <= len(user) <= config.length_max
        assert user.timestamps == list(range(len(user)))
        assert all(item_id in catalog for item_id in user.items)


def test_last_interaction_continues_final_run():
    catalog, users = generate_synthetic(SyntheticConfig(**small))
    for user in users:
        assert catalog[user.items[-1]].genre_label == \
            catalog[user.items[-2]].genre_label


def test_runs_are_planted():
    config = SyntheticConfig(run_min=3, run_max=3, **small)
    catalog, users = generate_synthetic(config)
    for user in users:
        genres = [catalog[i].genre_label for i in user.items[:-1]]
        # Every complete run of three shares one genre
        for start in range(0, len(genres) - 3, 3):
            assert len(set(genres[start:start + 3])) == 1


def test_title_modality_is_title_embedding():
    catalog, _ = generate_synthetic(SyntheticConfig(**small))
    for item in catalog:
        npt.assert_array_equal(item.modalities[0], item.title_emb)
        assert item.cf_emb.shape == (8,)


def test_prototypes_orthonormal():
    prototypes = genre_prototypes(5, 8, np.random.default_rng(0))
    npt.assert_allclose(prototypes @ prototypes.T, np.eye(5), atol=1e-12)
    with pytest.raises(ConfigError):
        genre_prototypes(9, 8, np.random.default_rng(0))


def test_titles_identify_genres():
    config = SyntheticConfig(num_genres=8, d=32, items_per_genre=20,
                             num_users=0, degraded_title_fraction=0.0)
    catalog, _ = generate_synthetic(config)
    prototypes = genre_prototypes(8, 32, np.random.default_rng(config.seed))
    assert title_genre_agreement(catalog, prototypes) >= 0.9


def test_degraded_titles_fail_quality_filter():
    catalog, _ = generate_synthetic(
        SyntheticConfig(degraded_title_fraction=1.0, **small))
    assert filter_title_quality(catalog, 3) == set()

    catalog, _ = generate_synthetic(
        SyntheticConfig(degraded_title_fraction=0.0, **small))
    assert len(filter_title_quality(catalog, 3)) == len(catalog)


@pytest.mark.parametrize('kwargs', [
    {'num_genres': 1},
    {'num_genres': 9, 'd': 8},
    {'run_min': 5, 'run_max': 4},
    {'length_min': 1},
    {'length_min': 30, 'length_max': 20},
    {'modality_noise': -1.0},
    {'degraded_title_fraction': 1.5},
    {'style_count': 0},
    {'taste_strength': -1.0},
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        SyntheticConfig(**kwargs)


def test_noiseless_titles_equal_prototypes():
    config = SyntheticConfig(title_noise=0.0, degraded_title_fraction=0.0,
                             **small)
    catalog, _ = generate_synthetic(config)
    prototypes = genre_prototypes(4, 8, np.random.default_rng(config.seed))
    for item in catalog:
        npt.assert_array_equal(item.title_emb, prototypes[item.genre_label])


def test_title_cosine_within_and_across_genres():
    config = SyntheticConfig(num_genres=8, d=32, items_per_genre=20,
                             num_users=0, degraded_title_fraction=0.0)
    catalog, _ = generate_synthetic(config)
    titles = catalog.titles()
    unit = titles / np.linalg.norm(titles, axis=1, keepdims=True)
    sims = unit @ unit.T
    genres = catalog.genres()
    same = genres[:, None] == genres[None, :]
    off_diagonal = ~np.eye(len(genres), dtype=bool)
    within = sims[same & off_diagonal].mean()
    across = sims[~same].mean()
    assert within - across >= 0.3


def mean_distinct_items(users):
    return np.mean([len(set(user.items)) / len(user) for user in users])


def test_taste_concentrates_choices_within_genre():
    shared = dict(num_genres=4, d=8, items_per_genre=20, num_users=40,
                  length_min=100, length_max=100)
    _, uniform = generate_synthetic(
        SyntheticConfig(taste_strength=0.0, **shared))
    _, picky = generate_synthetic(
        SyntheticConfig(taste_strength=200.0, **shared))
    assert mean_distinct_items(picky) < 0.5 * mean_distinct_items(uniform)


def test_picks_follow_a_stable_taste():
    # Both halves of one sequence lean the same way; two users do not
    config = SyntheticConfig(num_genres=2, d=16, items_per_genre=40,
                             num_users=30, length_min=60, length_max=60,
                             degraded_title_fraction=0.0)
    catalog, users = generate_synthetic(config)
    prototypes = genre_prototypes(2, 16, np.random.default_rng(config.seed))

    def lean(items, genre):
        rows = [catalog[i].title_emb - prototypes[genre] for i in items
                if catalog[i].genre_label == genre]
        return np.mean(rows, axis=0) if rows else None

    def agreement(pairs):
        values = []
        for first, second in pairs:
            for genre in range(2):
                a, b = lean(first, genre), lean(second, genre)
                if a is not None and b is not None:
                    values.append(a @ b)
        return np.mean(values)

    halves = [(u.items[:30], u.items[30:]) for u in users]
    strangers = [(a.items, b.items) for a, b in zip(users[::2], users[1::2])]
    assert agreement(halves) > agreement(strangers)
