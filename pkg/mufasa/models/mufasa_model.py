"""The complete model: fusion network plus sparse attention layer.

:license: Apache License, Version 2.0, see LICENSE for details
"""

from mufasa.models.model import Model


class Mufasa(Model):

    name = 'full'

    def user_embedding(self, H, counter=None):
        u, _ = self.sal.user_embedding(H, counter=counter)
        return u

    def user_parameters(self):
        return self.sal.parameters()
