"""mufasa.mfl
   ==========

   Multimodal fusion layer: fuse per-item modality stacks into one vector
   and score the fused vectors with the four-term joint objective (title
   contrast, CF regression, title consistency, perturbation contrast).

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
import itertools
import math
from typing import Optional, Sequence
import warnings

import numpy as np

from mufasa.errors import (
    ConfigError,
    DegenerateBatchWarning,
    DimensionError,
    EmptySampleError,
    InsufficientNegativesError,
    InvalidPairError,
    NonFiniteError,
    NonFiniteLossError,
)
from mufasa.tensor import (
    Parameter,
    concat,
    cosine_matrix,
    l2_normalize,
    lift,
    log_softmax,
    reshape,
    tanh,
)

# Fixed modality order shared by every catalog
MODALITIES = ('title', 'category', 'visual', 'audio')

# Loss component names, in the order of the weight vector
LOSS_NAMES = ('title', 'cf', 'cons', 'fus_cl')

DEFAULT_ALPHA = (0.5, 0.25, 0.15, 0.1)


@dataclass
class ModalityBundle:
    """The M x d modality stack of a single item."""

    item_id: str
    features: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DimensionError(
                f'Item {self.item_id}: modality stack must be M x d, got '
                f'shape {self.features.shape}'
            )

    @property
    def M(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]


def stack_bundles(bundles):
    """Stack bundles into an N x M x d array, checking every shape."""
    bundles = list(bundles)
    if not bundles:
        raise EmptySampleError('Cannot stack an empty list of bundles')
    shape = bundles[0].features.shape
    for bundle in bundles:
        if bundle.features.shape != shape:
            raise DimensionError(
                f'Item {bundle.item_id}: modality stack has shape '
                f'{bundle.features.shape}, expected {shape}'
            )
    return np.stack([bundle.features for bundle in bundles])


@dataclass
class MFLConfig:
    alpha: Sequence[float] = DEFAULT_ALPHA
    tau_title: float = 0.07
    tau_fus: float = 0.07
    sigma: float = 0.05
    # None means every other in-batch item
    negatives_K: Optional[int] = None
    # None means 4N sampled pairs once a batch exceeds exact_pairs_limit
    pair_budget: Optional[int] = None
    exact_pairs_limit: int = 32
    min_title_tokens: int = 3

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in self.alpha)
        if len(self.alpha) != len(LOSS_NAMES):
            raise ConfigError(
                f'alpha needs {len(LOSS_NAMES)} weights, got {self.alpha}'
            )
        if any(a < 0 for a in self.alpha):
            raise ConfigError(f'alpha weights must be >= 0: {self.alpha}')
        if self.tau_title <= 0 or self.tau_fus <= 0:
            raise ConfigError('Temperatures must be positive')
        if self.sigma < 0:
            raise ConfigError(f'sigma must be >= 0, got {self.sigma}')
        if self.negatives_K is not None and self.negatives_K < 1:
            raise ConfigError(
                f'negatives_K must be >= 1, got {self.negatives_K}'
            )
        if self.pair_budget is not None and self.pair_budget < 1:
            raise ConfigError(
                f'pair_budget must be >= 1, got {self.pair_budget}'
            )


class FusionNetwork(object):
    """Two-layer feed-forward fusion map.

    The flattened M*d modality concatenation passes through a tanh hidden
    layer of width 2d and a linear output layer of width d. Biases start at
    zero.
    """

    def __init__(self, M, d, rng=None):
        rng = np.random.default_rng(0) if rng is None else rng
        self.M = M
        self.d = d
        hidden = 2 * d
        self.w1 = Parameter(
            rng.normal(0.0, 1.0 / math.sqrt(M * d), (M * d, hidden)),
            'mfl.fusion.w1'
        )
        self.b1 = Parameter(np.zeros(hidden), 'mfl.fusion.b1')
        self.w2 = Parameter(
            rng.normal(0.0, 1.0 / math.sqrt(hidden), (hidden, d)),
            'mfl.fusion.w2'
        )
        self.b2 = Parameter(np.zeros(d), 'mfl.fusion.b2')

    def parameters(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def __call__(self, features):
        """Fuse an M x d stack into a d-vector, or an N x M x d batch into
        an N x d matrix."""
        x = lift(features)
        if x.shape[-2:] != (self.M, self.d) or x.ndim not in (2, 3):
            raise DimensionError(
                f'Fusion network expects (..., {self.M}, {self.d}) '
                f'modality stacks, got shape {x.shape}'
            )
        single = x.ndim == 2
        rows = 1 if single else x.shape[0]
        flat = reshape(x, (rows, self.M * self.d))
        hidden = tanh(flat @ self.w1 + self.b1)
        z = hidden @ self.w2 + self.b2
        return z[0] if single else z


def fuse(bundle, net):
    """Return the fused d-vector of one item."""
    if bundle.features.shape != (net.M, net.d):
        raise DimensionError(
            f'Item {bundle.item_id}: modality stack has shape '
            f'{bundle.features.shape}, fusion network expects '
            f'({net.M}, {net.d})'
        )
    return net(bundle.features)


def _diagonal(matrix):
    rows = np.arange(matrix.shape[0])
    return matrix[(rows, rows)]


def loss_title(z, t, tau):
    """In-batch InfoNCE between fused vectors and their title anchors.

    The title of every other item in the batch is a negative.
    """
    z, t = lift(z), lift(t)
    if z.shape != t.shape or z.ndim != 2:
        raise DimensionError(
            f'Title loss needs matching N x d batches, got {z.shape} '
            f'and {t.shape}'
        )
    if z.shape[0] < 2:
        raise InsufficientNegativesError(
            f'Title loss needs at least 2 items per batch, got {z.shape[0]}'
        )
    logits = cosine_matrix(z, t) / tau
    return -_diagonal(log_softmax(logits, axis=1)).mean()


def loss_cf(z, c):
    """Mean squared Euclidean distance between fused and CF vectors."""
    z, c = lift(z), lift(c)
    if z.shape != c.shape or z.ndim != 2:
        raise DimensionError(
            f'CF loss needs matching N x d batches, got {z.shape} and '
            f'{c.shape}'
        )
    return ((z - c) ** 2).sum(axis=1).mean()


def sample_pairs(n, rng=None, exact_limit=32, budget=None):
    """Item pairs for the consistency loss.

    Every unordered pair when ``n <= exact_limit``, otherwise ``budget``
    (default 4n) uniformly drawn pairs of distinct items.
    """
    if n < 2:
        return []
    if n <= exact_limit:
        return list(itertools.combinations(range(n), 2))
    rng = np.random.default_rng(0) if rng is None else rng
    budget = 4 * n if budget is None else budget
    first = rng.integers(0, n, size=budget)
    second = (first + rng.integers(1, n, size=budget)) % n
    return list(zip(first.tolist(), second.tolist()))


def loss_cons(z, t, pairs):
    """Squared gap between fused and title cosine similarities, averaged
    over ``pairs``."""
    z, t = lift(z), lift(t)
    if z.shape != t.shape:
        raise DimensionError(
            f'Consistency loss needs matching batches, got {z.shape} and '
            f'{t.shape}'
        )
    pairs = list(pairs)
    if not pairs:
        raise EmptySampleError('Consistency loss needs at least one pair')
    first = np.array([i for i, _ in pairs])
    second = np.array([j for _, j in pairs])
    if np.any(first == second):
        raise InvalidPairError(
            'Consistency pairs must join two distinct items'
        )

    z_unit = l2_normalize(z)
    t_unit = l2_normalize(t)
    fused_sim = (z_unit[first] * z_unit[second]).sum(axis=1)
    title_sim = (t_unit[first] * t_unit[second]).sum(axis=1)
    return ((fused_sim - title_sim) ** 2).mean()


def _negative_indices(n, K, rng):
    if K == n - 1:
        return np.array([[k for k in range(n) if k != i] for i in range(n)])
    rows = []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        rows.append(rng.choice(others, size=K, replace=False))
    return np.array(rows)


def loss_fus_cl(z, sigma, tau, K=None, rng=None):
    """Contrast each fused vector with a Gaussian-perturbed copy of itself
    against K perturbed copies of other in-batch items.

    Every negative draws its own perturbation. The result is a pure
    function of the inputs and the state of ``rng``.
    """
    z = lift(z)
    if z.ndim != 2:
        raise DimensionError(f'Expected an N x d batch, got {z.shape}')
    n, d = z.shape
    K = n - 1 if K is None else K
    if K < 1 or K > n - 1:
        raise InsufficientNegativesError(
            f'Perturbation contrast needs 1 <= K <= N-1, got K={K} with '
            f'N={n}'
        )
    rng = np.random.default_rng(0) if rng is None else rng

    positive = z + rng.normal(0.0, sigma, size=(n, d))
    negative_idx = _negative_indices(n, K, rng)
    negatives = z[negative_idx] + rng.normal(0.0, sigma, size=(n, K, d))

    z_unit = l2_normalize(z)
    positive_sim = (z_unit * l2_normalize(positive)).sum(axis=1)
    negative_sim = (reshape(z_unit, (n, 1, d))
                    * l2_normalize(negatives)).sum(axis=2)
    logits = concat([reshape(positive_sim, (n, 1)), negative_sim],
                    axis=1) / tau
    return -log_softmax(logits, axis=1)[:, 0].mean()


def _value(component):
    if hasattr(component, 'item'):
        return component.item()
    return float(component)


def loss_total(components, alpha=DEFAULT_ALPHA):
    """Weighted sum of the four component losses.

    ``components`` is a mapping keyed by ``LOSS_NAMES`` or a 4-sequence in
    that order.
    """
    if not isinstance(components, dict):
        components = dict(zip(LOSS_NAMES, components))
    total = None
    for name, weight in zip(LOSS_NAMES, alpha):
        component = components[name]
        value = _value(component)
        if not math.isfinite(value):
            raise NonFiniteLossError(name, value)
        term = lift(component) * weight
        total = term if total is None else total + term
    return total


@contextmanager
def finite_component(name):
    """Report a non-finite tensor produced inside the block as a loss error
    naming ``name``."""
    try:
        yield
    except NonFiniteError as exc:
        raise NonFiniteLossError(name, detail=str(exc)) from exc


def renormalized_alpha(alpha, present):
    """Zero the weights of absent components and rescale the rest so the
    total weight is unchanged."""
    kept = sum(a for a, name in zip(alpha, LOSS_NAMES) if name in present)
    if kept == 0:
        return tuple(0.0 for _ in alpha)
    scale = sum(alpha) / kept
    return tuple(a * scale if name in present else 0.0
                 for a, name in zip(alpha, LOSS_NAMES))


def filter_title_quality(items, min_tokens=3):
    """Return the ids of items whose titles may anchor contrastive terms.

    A title is admitted when its embedding exists, has nonzero norm, and
    the recorded title length is at least ``min_tokens``.
    """
    admitted = set()
    for item in items:
        title = item.title_emb
        if title is None:
            continue
        if not np.any(np.asarray(title) != 0.0):
            continue
        if item.title_token_count < min_tokens:
            continue
        admitted.add(item.item_id)
    return admitted


@dataclass
class MFLBatch:
    """Arrays for one objective evaluation over N items."""

    features: np.ndarray
    titles: np.ndarray
    cf: np.ndarray
    admitted: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.admitted is None:
            self.admitted = np.ones(len(self.features), dtype=bool)

    def __len__(self):
        return len(self.features)


def mfl_objective(net, batch, config, rng=None):
    """Evaluate the joint fusion objective on one batch.

    Title and consistency terms only see admitted items. Terms that cannot
    be formed on this batch are dropped and the remaining weights are
    rescaled. A non-finite value raises ``NonFiniteLossError`` naming the
    fusion forward pass, the component or the total.

    Returns
    -------
    (Tensor, dict)
        The weighted total and the value of every evaluated component.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    with finite_component('fusion'):
        z = net(batch.features)
    n = len(batch)
    components = {}
    with finite_component('cf'):
        components['cf'] = loss_cf(z, batch.cf)

    if n >= 2:
        K = config.negatives_K
        if K is not None and K > n - 1:
            K = n - 1
        with finite_component('fus_cl'):
            components['fus_cl'] = loss_fus_cl(z, config.sigma,
                                               config.tau_fus, K=K, rng=rng)

    admitted = np.flatnonzero(batch.admitted)
    if len(admitted) >= 2:
        z_admitted = z[admitted]
        titles = batch.titles[admitted]
        with finite_component('title'):
            components['title'] = loss_title(z_admitted, titles,
                                             config.tau_title)
        pairs = sample_pairs(len(admitted), rng,
                             exact_limit=config.exact_pairs_limit,
                             budget=config.pair_budget)
        with finite_component('cons'):
            components['cons'] = loss_cons(z_admitted, titles, pairs)

    missing = [name for name in LOSS_NAMES if name not in components]
    if missing:
        warnings.warn(
            'Batch too small for contrastive terms; skipping '
            + ', '.join(missing), DegenerateBatchWarning
        )
    alpha = renormalized_alpha(config.alpha, components)
    full = {name: components.get(name, 0.0) for name in LOSS_NAMES}
    with finite_component('total'):
        total = loss_total(full, alpha)
    return total, {name: _value(value) for name, value in components.items()}
