"""Generic interface for parameter updates.

:license: Apache License, Version 2.0, see LICENSE for details
"""

import numpy as np

from mufasa.errors import ConfigError, UnpopulatedGradientError
from mufasa.tensor import zero_grads


class Optimizer(object):
    """Abstract optimizer class.

    Parameters
    ----------
    params : list of Parameter
        Parameters updated by ``step``.
    lr : float
        Learning rate, must be positive.
    """

    def __init__(self, params, lr):
        if lr <= 0:
            raise ConfigError(f'Learning rate must be positive, got {lr}')
        self.params = list(params)
        self.lr = float(lr)

    def zero_grads(self):
        zero_grads(self.params)

    def gradients(self):
        """Return the gradient of every parameter, failing on any that has
        not been populated by a backward pass or ``zero_grads``."""
        grads = []
        for param in self.params:
            if param.grad is None:
                raise UnpopulatedGradientError(
                    f'Parameter {param.name!r} has no gradient; run backward '
                    'or zero_grads before stepping'
                )
            grads.append(np.asarray(param.grad))
        return grads

    def step(self):
        raise NotImplementedError
