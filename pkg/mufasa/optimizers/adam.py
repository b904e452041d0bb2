"""Adaptive moment estimation.

:license: Apache License, Version 2.0, see LICENSE for details
"""

import numpy as np

from mufasa.optimizers.optimizer import Optimizer


class Adam(Optimizer):

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        super(Adam, self).__init__(params, lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.moments = [np.zeros_like(p.data) for p in self.params]
        self.velocities = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        grads = self.gradients()
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t

        for i, (param, grad) in enumerate(zip(self.params, grads)):
            self.moments[i] = (self.beta1 * self.moments[i]
                               + (1.0 - self.beta1) * grad)
            self.velocities[i] = (self.beta2 * self.velocities[i]
                                  + (1.0 - self.beta2) * grad ** 2)
            m_hat = self.moments[i] / bias1
            v_hat = self.velocities[i] / bias2
            param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat)
                                                         + self.eps)
