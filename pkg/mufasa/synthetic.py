"""mufasa.synthetic
   ================

   Synthetic catalogs and behaviour sequences with planted interest blocks.

   Every genre has a unit prototype; prototypes are mutually orthogonal.
   Items carry noisy copies of their genre prototype in every modality, with
   a genre-independent style vector added to the non-title modalities so a
   plain average of modalities is a poor item representation. The title
   noise is the item's own semantics: each user has a taste direction and
   picks items within a genre with probability growing with the agreement
   between taste and semantics. Users move through runs of consecutive
   same-genre interactions, and the last interaction of every user comes
   from the genre of its final run.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass

import numpy as np

from mufasa.catalog import Catalog, ItemRecord, UserRecord
from mufasa.errors import ConfigError
from mufasa.mfl import MODALITIES


@dataclass
class SyntheticConfig:
    num_genres: int = 8
    d: int = 32
    items_per_genre: int = 50
    num_users: int = 2000
    run_min: int = 4
    run_max: int = 12
    length_min: int = 40
    length_max: int = 200
    modality_noise: float = 0.3
    title_noise: float = 0.1
    style_count: int = 4
    style_scale: float = 1.0
    degraded_title_fraction: float = 0.05
    preference_concentration: float = 0.5
    taste_strength: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.num_genres < 2:
            raise ConfigError(
                f'num_genres must be >= 2, got {self.num_genres}'
            )
        if self.num_genres > self.d:
            raise ConfigError(
                f'Cannot orthogonalise {self.num_genres} genre prototypes '
                f'in dimension {self.d}'
            )
        if self.items_per_genre < 1 or self.num_users < 0:
            raise ConfigError('items_per_genre must be >= 1 and num_users '
                              '>= 0')
        if not 1 <= self.run_min <= self.run_max:
            raise ConfigError(
                f'Run lengths need 1 <= run_min <= run_max, got '
                f'{self.run_min}, {self.run_max}'
            )
        if not 2 <= self.length_min <= self.length_max:
            raise ConfigError(
                f'Sequence lengths need 2 <= length_min <= length_max, got '
                f'{self.length_min}, {self.length_max}'
            )
        for name in ('modality_noise', 'title_noise', 'style_scale',
                     'taste_strength'):
            if getattr(self, name) < 0:
                raise ConfigError(f'{name} must be >= 0')
        if not 0.0 <= self.degraded_title_fraction <= 1.0:
            raise ConfigError('degraded_title_fraction must lie in [0, 1]')
        if self.style_count < 1 or self.preference_concentration <= 0:
            raise ConfigError('style_count must be >= 1 and '
                              'preference_concentration > 0')


def genre_prototypes(num_genres, d, rng):
    """Mutually orthogonal unit prototypes, one row per genre."""
    if num_genres > d:
        raise ConfigError(
            f'Cannot orthogonalise {num_genres} genre prototypes in '
            f'dimension {d}'
        )
    q, _ = np.linalg.qr(rng.normal(size=(d, num_genres)))
    return q.T.copy()


def item_id_for(index):
    return f'i{index:05d}'


def user_id_for(index):
    return f'u{index:05d}'


def _generate_items(config, prototypes, rng):
    """Items and their N x d semantic offsets (title minus prototype)."""
    M, d = len(MODALITIES), config.d
    styles = rng.normal(size=(config.style_count, d))
    styles *= config.style_scale / np.linalg.norm(styles, axis=1,
                                                  keepdims=True)
    n_items = config.num_genres * config.items_per_genre
    degraded = rng.random(n_items) < config.degraded_title_fraction
    semantics = np.zeros((n_items, d))

    items = []
    for index in range(n_items):
        genre = index // config.items_per_genre
        prototype = prototypes[genre]
        semantics[index] = rng.normal(0.0, config.title_noise, d)
        title = prototype + semantics[index]
        tokens = int(rng.integers(4, 13))
        if degraded[index]:
            # Half the degraded titles are missing, half are too short
            if rng.random() < 0.5:
                title = np.zeros(d)
                tokens = 0
            else:
                tokens = int(rng.integers(1, 3))

        modalities = prototype + rng.normal(0.0, config.modality_noise,
                                            (M, d))
        modalities[0] = title
        style = styles[rng.integers(config.style_count)]
        modalities[1:] += style
        items.append(ItemRecord(
            item_id=item_id_for(index),
            modalities=modalities,
            title_emb=title,
            cf_emb=np.zeros(d),
            title_token_count=tokens,
            genre_label=genre,
        ))
    return items, semantics


def _choice_weights(config, genre_pools, semantics, rng):
    """Per genre, the probability of each pooled item under a fresh taste
    direction."""
    taste = rng.normal(size=config.d)
    taste /= np.linalg.norm(taste)
    affinity = config.taste_strength * (semantics @ taste)
    weights = []
    for pool in genre_pools:
        logits = affinity[pool]
        w = np.exp(logits - logits.max())
        weights.append(w / w.sum())
    return weights


def _generate_user(config, genre_pools, semantics, rng):
    """Catalog positions of one user's interactions."""
    G = config.num_genres
    preference = rng.dirichlet(np.full(G, config.preference_concentration))
    length = int(rng.integers(config.length_min, config.length_max + 1))
    weights = _choice_weights(config, genre_pools, semantics, rng)

    def draw(genre, count):
        pool = genre_pools[genre]
        return pool[rng.choice(len(pool), size=count, p=weights[genre])]

    positions, genres = [], []
    while len(positions) < length - 1:
        genre = int(rng.choice(G, p=preference))
        run = int(rng.integers(config.run_min, config.run_max + 1))
        positions.extend(draw(genre, run).tolist())
        genres.extend([genre] * run)
    positions = positions[:length - 1]

    positions.extend(draw(genres[length - 2], 1).tolist())
    return positions


def generate_synthetic(config):
    """Generate a catalog and user sequences, deterministically by seed.

    CF embeddings are left at zero; fill them with the CF oracle.
    """
    rng = np.random.default_rng(config.seed)
    prototypes = genre_prototypes(config.num_genres, config.d, rng)
    items, semantics = _generate_items(config, prototypes, rng)

    labels = np.array([item.genre_label for item in items])
    genre_pools = [np.flatnonzero(labels == genre)
                   for genre in range(config.num_genres)]

    users = []
    for index in range(config.num_users):
        positions = _generate_user(config, genre_pools, semantics, rng)
        users.append(UserRecord(user_id_for(index),
                                [items[p].item_id for p in positions],
                                list(range(len(positions)))))
    return Catalog(items), users


def title_genre_agreement(catalog, prototypes):
    """Fraction of titled items whose closest prototype is their genre."""
    hits, total = 0, 0
    for item in catalog:
        norm = np.linalg.norm(item.title_emb)
        if norm == 0.0:
            continue
        total += 1
        hits += int(np.argmax(prototypes @ item.title_emb / norm)
                    == item.genre_label)
    return hits / total if total else 0.0
