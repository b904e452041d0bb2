"""Plain gradient descent.

:license: Apache License, Version 2.0, see LICENSE for details
"""

from mufasa.optimizers.optimizer import Optimizer


class SGD(Optimizer):
    """p <- p - lr * g"""

    def step(self):
        for param, grad in zip(self.params, self.gradients()):
            param.data = param.data - self.lr * grad
