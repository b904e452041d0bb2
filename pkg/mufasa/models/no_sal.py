"""Ablation without the sparse attention layer: the user embedding is the
mean of the fused history.

:license: Apache License, Version 2.0, see LICENSE for details
"""

from mufasa.models.model import Model
from mufasa.tensor import lift


class NoSal(Model):

    name = 'no_sal'

    def user_embedding(self, H, counter=None):
        H = lift(H)
        if counter is not None:
            counter.add('mean_pool', H.shape[0])
        return H.mean(axis=0)

    def user_parameters(self):
        return self.sal.item_projection.parameters()
