"""mufasa.gradcheck
   ================

   Central finite-difference gradient oracle and the gradient check suite
   run by ``mufasa gradcheck``.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import asdict, dataclass

import numpy as np

from mufasa import mfl, sal
from mufasa.errors import ConfigError
from mufasa.tensor import Tape, Tensor, backward, stack, zero_grads

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4

# Scale applied to analytic gradients of a component named by the corrupt
# hook; a correct checker must then report a failure
CORRUPTION = 1.5


def _evaluate(f):
    value = f()
    return value.item() if isinstance(value, Tensor) else float(value)


def fd_gradient(f, param, h=DEFAULT_STEP):
    """Estimate d f / d param coordinate by coordinate.

    Parameters
    ----------
    f : callable
        Evaluates a scalar from the current parameter values.
    param : Parameter
        Perturbed in place and restored afterwards.
    h : float
        Step size, must be positive.

    Returns
    -------
    Tensor
        ``(f(p + h e) - f(p - h e)) / 2h`` for every coordinate.
    """
    if h <= 0:
        raise ConfigError(f'Finite-difference step must be positive, got {h}')
    estimate = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = _evaluate(f)
        flat[i] = original - h
        lower = _evaluate(f)
        flat[i] = original
        estimate.reshape(-1)[i] = (upper - lower) / (2.0 * h)
    return Tensor(estimate)


def relative_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-7)
    return float(np.linalg.norm(analytic - numeric) / scale)


def analytic_gradients(f, params):
    """Gradients of ``f`` w.r.t. ``params`` from one backward pass."""
    zero_grads(params)
    with Tape():
        loss = f()
    backward(loss)
    return [param.grad.copy() for param in params]


@dataclass
class GradcheckResult:
    component: str
    max_rel_err: float
    tol: float
    worst_param: str

    @property
    def passed(self):
        return self.max_rel_err <= self.tol

    def to_record(self):
        record = asdict(self)
        record['passed'] = self.passed
        return record


def check_gradients(component, f, params, h=DEFAULT_STEP,
                    tol=DEFAULT_TOLERANCE, scale=1.0):
    """Compare backward gradients against finite differences for every
    parameter and keep the worst relative error."""
    worst, worst_name = 0.0, ''
    for param, grad in zip(params, analytic_gradients(f, params)):
        err = relative_error(grad * scale, fd_gradient(f, param, h).data)
        if err >= worst:
            worst, worst_name = err, param.name
    return GradcheckResult(component, worst, tol, worst_name)


def _mfl_cases(d, N, rng, tau):
    M = len(mfl.MODALITIES)
    net = mfl.FusionNetwork(M, d, rng)
    # Nonzero biases so their gradients are exercised away from zero
    net.b1.data = rng.normal(0.0, 0.1, net.b1.shape)
    net.b2.data = rng.normal(0.0, 0.1, net.b2.shape)
    features = rng.normal(size=(N, M, d))
    titles = rng.normal(size=(N, d))
    cf = rng.normal(size=(N, d))
    pairs = mfl.sample_pairs(N)

    def fus_cl():
        return mfl.loss_fus_cl(net(features), sigma=0.05, tau=tau,
                               rng=np.random.default_rng(7))

    losses = {
        'loss_title': lambda: mfl.loss_title(net(features), titles, tau),
        'loss_cf': lambda: mfl.loss_cf(net(features), cf),
        'loss_cons': lambda: mfl.loss_cons(net(features), titles, pairs),
        'loss_fus_cl': fus_cl,
    }

    def total():
        z = net(features)
        return mfl.loss_total({
            'title': mfl.loss_title(z, titles, tau),
            'cf': mfl.loss_cf(z, cf),
            'cons': mfl.loss_cons(z, titles, pairs),
            'fus_cl': mfl.loss_fus_cl(z, 0.05, tau,
                                      rng=np.random.default_rng(7)),
        }, mfl.DEFAULT_ALPHA)

    losses['loss_total'] = total
    return [(name, f, net.parameters()) for name, f in losses.items()]


def _sal_cases(d, L, N, rng, tau):
    config = sal.SALConfig(P=3, k=2, tau=tau)
    layer = sal.SparseAttentionLayer(d, config, rng)
    layer.gate.weight.data = rng.normal(0.0, 0.1, layer.gate.weight.shape)
    H = rng.normal(size=(L, d))
    direction = rng.normal(size=d)
    partition = sal.partition_blocks(L, config.P)
    selected = np.array([0, partition.B - 1])
    H_s = sal.gather_core_items(H, partition, selected)
    W = layer.window_size(L)

    def window():
        z = sal.window_attention(H, W, layer.window_head)
        return (z * direction).sum()

    def block():
        z, _ = sal.block_attention(H, partition, layer.block_head,
                                   layer.aggregator)
        return (z * direction).sum()

    def selective():
        return (sal.selective_attention(H, H_s, layer.selective_head)
                * direction).sum()

    z_fixed = [Tensor(rng.normal(size=d)) for _ in range(3)]

    def gate():
        u, _ = sal.gate_fuse(*z_fixed, layer.gate)
        return (u * direction).sum()

    histories = [rng.normal(size=(L, d)) for _ in range(N)]
    targets = rng.normal(size=(N, d))

    def contrastive():
        users = stack([layer.user_embedding(h)[0] for h in histories])
        return sal.sal_contrastive_loss(users, layer.item_projection(targets),
                                        tau)

    return [
        ('window_head', window, layer.window_head.parameters()),
        ('block_head', block, layer.block_head.parameters()),
        ('selective_head', selective, layer.selective_head.parameters()),
        ('aggregation', block, layer.aggregator.parameters()),
        ('gate', gate, layer.gate.parameters()),
        ('sal_contrastive', contrastive, layer.parameters()),
    ]


COMPONENTS = ('loss_title', 'loss_cf', 'loss_cons', 'loss_fus_cl',
              'loss_total', 'window_head', 'block_head', 'selective_head',
              'aggregation', 'gate', 'sal_contrastive')


def run_gradcheck(d=6, L=10, N=4, seed=0, tau=0.2, h=DEFAULT_STEP,
                  tol=DEFAULT_TOLERANCE, corrupt=None):
    """Run the gradient check over every loss, head, the block aggregator
    and the gate.

    ``corrupt`` names a component whose analytic gradient is deliberately
    scaled before comparison.
    """
    if corrupt is not None and corrupt not in COMPONENTS:
        raise ConfigError(f"Unknown gradcheck component '{corrupt}'")
    rng = np.random.default_rng(seed)
    cases = _mfl_cases(d, N, rng, tau) + _sal_cases(d, L, N, rng, tau)
    results = []
    for name, f, params in cases:
        scale = CORRUPTION if name == corrupt else 1.0
        results.append(check_gradients(name, f, params, h=h, tol=tol,
                                       scale=scale))
    return results
