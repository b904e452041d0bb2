"""Ablation replacing the three sparse heads with one dense single-query
attention over the whole history.

:license: Apache License, Version 2.0, see LICENSE for details
"""

from mufasa.models.model import Model, SAL_STREAM, component_rng
from mufasa.sal import AttentionHead
from mufasa.tensor import lift

# Offset keeping the dense head's stream apart from the sparse layer's
DENSE_STREAM = SAL_STREAM + 100


class FullAttention(Model):

    name = 'full_attention'

    def __init__(self, d, M, mfl_config=None, sal_config=None, seed=0):
        super(FullAttention, self).__init__(d, M, mfl_config, sal_config,
                                            seed)
        self.head = AttentionHead(d, component_rng(seed, DENSE_STREAM),
                                  'attention.dense')

    def user_embedding(self, H, counter=None):
        H = lift(H)
        u, _ = self.head(H[H.shape[0] - 1], H, counter=counter)
        return u

    def user_parameters(self):
        return (self.head.parameters()
                + self.sal.item_projection.parameters())
