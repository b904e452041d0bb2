"""mufasa.cforacle
   ================

   Collaborative-filtering item embeddings from implicit feedback.

   Logistic matrix factorisation trained with mini-batch gradient descent on
   observed (user, item) pairs, each paired with uniformly drawn unobserved
   items as negatives.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass
import warnings

import numpy as np

from mufasa.errors import ColdStartWarning, ConfigError, EmptySampleError


@dataclass
class CFConfig:
    rank: int = 32
    epochs: int = 20
    learning_rate: float = 0.05
    negatives: int = 4
    regularization: float = 1e-4
    batch_size: int = 1024
    init_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1 or self.epochs < 0 or self.negatives < 1:
            raise ConfigError('CF oracle needs rank >= 1, epochs >= 0 and '
                              'negatives >= 1')
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ConfigError('CF oracle needs a positive learning rate and '
                              'batch size')


@dataclass
class CFResult:
    item_factors: np.ndarray
    user_factors: np.ndarray
    cold: np.ndarray
    user_ids: list

    def user_factor(self, user_id):
        return self.user_factors[self.user_ids.index(user_id)]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def cf_oracle(users, catalog, config=None):
    """Train item factors, in catalog order, from the sequences of ``users``.

    Items without interactions get a zero vector and are flagged cold.
    """
    config = CFConfig() if config is None else config
    rng = np.random.default_rng(config.seed)
    n_items = len(catalog)

    user_idx, item_idx = [], []
    for u, user in enumerate(users):
        for item_id in user.items:
            user_idx.append(u)
            item_idx.append(catalog.position(item_id))
    if not item_idx:
        raise EmptySampleError('CF oracle needs at least one interaction')
    user_idx = np.array(user_idx)
    item_idx = np.array(item_idx)

    P = rng.normal(0.0, config.init_std, (len(users), config.rank))
    Q = rng.normal(0.0, config.init_std, (n_items, config.rank))
    lr, reg = config.learning_rate, config.regularization

    for _ in range(config.epochs):
        order = rng.permutation(len(item_idx))
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            u, i = user_idx[batch], item_idx[batch]
            j = rng.integers(0, n_items, size=(len(batch), config.negatives))
            pu, qi, qj = P[u], Q[i], Q[j]

            # d/ds of -log sigmoid(s) and of -log sigmoid(-s)
            g_pos = _sigmoid((pu * qi).sum(axis=1)) - 1.0
            g_neg = _sigmoid(np.einsum('bd,bkd->bk', pu, qj))

            grad_p = g_pos[:, None] * qi + np.einsum('bk,bkd->bd', g_neg, qj)
            grad_qi = g_pos[:, None] * pu
            grad_qj = g_neg[:, :, None] * pu[:, None, :]

            np.add.at(P, u, -lr * (grad_p + reg * pu))
            np.add.at(Q, i, -lr * (grad_qi + reg * qi))
            np.add.at(Q, j.reshape(-1), -lr * (grad_qj.reshape(-1, config.rank)
                                              + reg * qj.reshape(-1,
                                                                 config.rank)))

    cold = np.ones(n_items, dtype=bool)
    cold[item_idx] = False
    Q[cold] = 0.0
    if cold.any():
        warnings.warn(f'{int(cold.sum())} items have no interactions; '
                      'their CF embeddings are zero', ColdStartWarning)
    return CFResult(item_factors=Q, user_factors=P, cold=cold,
                    user_ids=[user.user_id for user in users])


def attach_cf(catalog, result):
    """Store the oracle's item factors and cold-start flags on the catalog.
    """
    for position, item in enumerate(catalog):
        item.cf_emb = result.item_factors[position].copy()
        item.cold_start = bool(result.cold[position])
    return catalog
