"""Generic recommender interface, inherited by every ablation variant.

:license: Apache License, Version 2.0, see LICENSE for details
"""

import numpy as np

from mufasa.errors import CheckpointError
from mufasa.mfl import FusionNetwork, MFLConfig
from mufasa.sal import SALConfig, SparseAttentionLayer, score_items
from mufasa.tensor import lift

# Random stream ids. Each component draws its initial values from its own
# stream so variants built from the same seed share component weights.
MFL_STREAM = 1
SAL_STREAM = 2


def component_rng(seed, stream):
    return np.random.default_rng([seed, stream])


class Model(object):
    """Abstract recommender model.

    Parameters
    ----------
    d : int
        Embedding dimension.
    M : int
        Number of modalities per item.
    mfl_config : MFLConfig, optional
    sal_config : SALConfig, optional
    seed : int
        Seed of the per-component initialisation streams.
    """

    name = None
    # Whether stage 1 trains a fusion network
    uses_mfl = True

    def __init__(self, d, M, mfl_config=None, sal_config=None, seed=0):
        self.d = d
        self.M = M
        self.seed = seed
        self.mfl_config = MFLConfig() if mfl_config is None else mfl_config
        self.sal_config = SALConfig() if sal_config is None else sal_config

        self.mfl = None
        if self.uses_mfl:
            self.mfl = FusionNetwork(M, d, component_rng(seed, MFL_STREAM))
        self.sal = SparseAttentionLayer(d, self.sal_config,
                                        component_rng(seed, SAL_STREAM))

    def fuse_items(self, features):
        """Fused N x d item embeddings of an N x M x d modality batch."""
        if self.mfl is None:
            return lift(features).mean(axis=1)
        return self.mfl(features)

    def user_embedding(self, H, counter=None):
        """User embedding of an L x d history of fused embeddings."""
        raise NotImplementedError

    def project_items(self, items):
        return self.sal.item_projection(items)

    def mfl_parameters(self):
        return [] if self.mfl is None else self.mfl.parameters()

    def user_parameters(self):
        """Parameters trained by the user/item contrastive stage."""
        raise NotImplementedError

    def parameters(self):
        return self.mfl_parameters() + self.user_parameters()

    def parameter_count(self):
        return int(sum(param.size for param in self.parameters()))

    def score_all(self, H, items):
        """Scores of the user with history ``H`` against every row of the
        fused item matrix ``items``."""
        u = self.user_embedding(H)
        return score_items(u, items, self.sal.item_projection).numpy()

    def state_dict(self):
        return {param.name: param.data.copy() for param in self.parameters()}

    def load_state_dict(self, state):
        params = {param.name: param for param in self.parameters()}
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise CheckpointError(
                f'Checkpoint does not match variant {self.name}: missing '
                f'{missing or "none"}, unexpected {unexpected or "none"}'
            )
        for name, param in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise CheckpointError(
                    f'Checkpoint entry {name} has shape {value.shape}, '
                    f'expected {param.shape}'
                )
            param.data = value.copy()
