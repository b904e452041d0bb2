"""mufasa.sal
   ==========

   Sparse attention alignment layer.

   A user's fused interaction history ``H`` (L x d, oldest first) is read by
   three single-query attention heads, all queried by the newest row:

   * the window head attends to the most recent W interactions,
   * the block head attends to aggregated embeddings of consecutive
     interest blocks of P interactions,
   * the selective head attends to the items of the k most attended blocks.

   A softmax gate mixes the three interest vectors into the user embedding.
   Every head can report how many query/key score pairs it evaluated so the
   sparse cost can be compared with dense attention.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass
import math
from typing import Optional
import warnings

import numpy as np

from mufasa.errors import (
    ConfigError,
    DimensionError,
    EmptyBlockError,
    EmptySelectionError,
    InsufficientNegativesError,
    TopKClampWarning,
)
from mufasa.tensor import (
    Parameter,
    Tensor,
    concat,
    cosine_matrix,
    cosine_sim,
    lift,
    log_softmax,
    masked_softmax,
    reshape,
    stack,
)

AGGREGATORS = ('linear', 'mean')


@dataclass
class SALConfig:
    P: int = 8
    k: int = 2
    tau: float = 0.07
    aggregator: str = 'linear'
    window_inclusive: bool = False
    window_threshold: int = 30
    window_long: int = 8
    window_short: int = 4

    def __post_init__(self):
        if self.P < 1:
            raise ConfigError(f'Block size P must be >= 1, got {self.P}')
        if self.k < 1:
            raise ConfigError(f'Core block count k must be >= 1, got {self.k}')
        if self.tau <= 0:
            raise ConfigError(f'SAL temperature must be positive, got '
                              f'{self.tau}')
        if self.aggregator not in AGGREGATORS:
            raise ConfigError(
                f"Unknown block aggregator '{self.aggregator}', expected "
                f"one of {', '.join(AGGREGATORS)}"
            )
        if self.window_long < 1 or self.window_short < 1:
            raise ConfigError('Window sizes must be >= 1')


class PairCounter(object):
    """Tally of query/key score pairs evaluated by attention heads."""

    def __init__(self):
        self.pairs = 0
        self.by_head = {}

    def add(self, head, count):
        self.pairs += count
        self.by_head[head] = self.by_head.get(head, 0) + count


@dataclass
class BlockPartition:
    """Consecutive half-open ``(start, stop)`` position ranges."""

    block_size: int
    blocks: list

    @property
    def B(self):
        return len(self.blocks)

    def sizes(self, selected=None):
        chosen = range(self.B) if selected is None else selected
        return [self.blocks[i][1] - self.blocks[i][0] for i in chosen]


@dataclass
class InterestVectors:
    z_short: Optional[Tensor]
    z_long: Tensor
    z_core: Tensor
    a_block: np.ndarray
    selected: np.ndarray
    gate_weights: Optional[np.ndarray] = None


def window_size_for(L, threshold=30, long=8, short=4):
    """Window size: ``long`` for histories longer than ``threshold``,
    ``short`` otherwise, never more than L."""
    W = long if L > threshold else short
    return min(W, L)


def window_positions(L, W, inclusive=False):
    """0-based key positions of the window for a history of length L.

    Exclusive windows hold the W interactions preceding the query. The
    inclusive window also holds the query row itself.
    """
    if inclusive:
        return np.arange(max(0, L - W - 1), L)
    return np.arange(max(0, L - 1 - W), L - 1)


def window_mask(L, W, inclusive=True):
    """Additive 1 x L mask: 0 inside the window, -inf outside."""
    mask = np.full((1, L), -np.inf)
    mask[0, window_positions(L, W, inclusive)] = 0.0
    return mask


def _projection(rng, d, name):
    return Parameter(rng.normal(0.0, 1.0 / math.sqrt(d), (d, d)), name)


class AttentionHead(object):
    """Single-query scaled dot-product attention with its own Q/K/V maps."""

    def __init__(self, d, rng, name):
        self.d = d
        self.name = name
        self.wq = _projection(rng, d, f'{name}.wq')
        self.wk = _projection(rng, d, f'{name}.wk')
        self.wv = _projection(rng, d, f'{name}.wv')

    def parameters(self):
        return [self.wq, self.wk, self.wv]

    def __call__(self, query, keys, mask=None, counter=None):
        """Attend from the ``query`` row over the rows of ``keys``.

        Returns the attended d-vector and the attention weights.
        """
        query, keys = lift(query), lift(keys)
        if query.shape != (self.d,) or keys.ndim != 2 \
                or keys.shape[1] != self.d:
            raise DimensionError(
                f'{self.name}: query {query.shape} and keys {keys.shape} '
                f'do not match dimension {self.d}'
            )
        n = keys.shape[0]
        q = reshape(query, (1, self.d)) @ self.wq
        k = keys @ self.wk
        v = keys @ self.wv
        scores = (q @ k.T) / math.sqrt(self.d)
        weights = masked_softmax(scores, mask)
        if counter is not None:
            kept = n if mask is None else int(np.isfinite(mask).sum())
            counter.add(self.name, kept)
        out = weights @ v
        return reshape(out, (self.d,)), reshape(weights, (n,))


def window_attention(H, W, head, inclusive=False, counter=None):
    """Short-term interest: attention restricted to the recent window."""
    H = lift(H)
    if W < 1:
        raise ConfigError(f'Window size must be >= 1, got {W}')
    L = H.shape[0]
    mask = window_mask(L, W, inclusive=True)
    if not inclusive:
        mask[0, L - 1] = -np.inf
    z_short, _ = head(H[L - 1], H, mask=mask, counter=counter)
    return z_short


def partition_blocks(L, P):
    """Split positions 0..L-1 into consecutive blocks of P; the final block
    keeps whatever remains."""
    if P < 1:
        raise ConfigError(f'Block size P must be >= 1, got {P}')
    blocks = [(start, min(start + P, L)) for start in range(0, L, P)]
    return BlockPartition(block_size=P, blocks=blocks)


class BlockAggregator(object):
    """Maps the rows of one block onto a single block embedding."""

    def __init__(self, d, rng, mode='linear', name='sal.phi'):
        if mode not in AGGREGATORS:
            raise ConfigError(f"Unknown block aggregator '{mode}'")
        self.mode = mode
        self.weight = _projection(rng, d, f'{name}.w')

    def parameters(self):
        return [self.weight] if self.mode == 'linear' else []

    def __call__(self, rows):
        return aggregate_block(rows, self.weight, self.mode)


def _rows_shape(rows):
    return rows.shape if isinstance(rows, Tensor) else np.shape(rows)


def aggregate_block(rows, weight=None, mode='linear'):
    shape = _rows_shape(rows)
    if len(shape) != 2 or shape[0] == 0:
        raise EmptyBlockError('Cannot aggregate an empty block')
    rows = lift(rows)
    pooled = rows.mean(axis=0)
    if mode == 'mean':
        return pooled
    d = rows.shape[1]
    return reshape(reshape(pooled, (1, d)) @ weight, (d,))


def block_embeddings(H, partition, aggregator):
    H = lift(H)
    return stack([aggregator(H[start:stop])
                  for start, stop in partition.blocks])


def block_attention(H, partition, head, aggregator, counter=None):
    """Long-term interest: attention over aggregated block embeddings.

    Returns ``z_long`` and the block attention weights as an array.
    """
    H = lift(H)
    blocks = block_embeddings(H, partition, aggregator)
    z_long, weights = head(H[H.shape[0] - 1], blocks, counter=counter)
    return z_long, weights


def top_k_blocks(a_block, k):
    """Indices of the k most attended blocks, ascending.

    Equal weights favour the older block. ``k`` larger than the block count
    is clamped.
    """
    a_block = np.asarray(a_block.data if isinstance(a_block, Tensor)
                         else a_block, dtype=np.float64)
    if k < 1:
        raise ConfigError(f'Core block count k must be >= 1, got {k}')
    B = len(a_block)
    if k > B:
        warnings.warn('Requested more core blocks than available; '
                      'selecting every block', TopKClampWarning)
        k = B
    order = np.argsort(-a_block, kind='stable')[:k]
    return np.sort(order)


def core_positions(partition, selected):
    positions = []
    for index in sorted(selected):
        start, stop = partition.blocks[index]
        positions.extend(range(start, stop))
    return np.array(positions, dtype=int)


def gather_core_items(H, partition, selected):
    """Rows of every selected block, in block then chronological order."""
    H = lift(H)
    positions = core_positions(partition, selected)
    if len(positions) == 0:
        raise EmptySelectionError('No core blocks were selected')
    return H[positions]


def selective_attention(H, H_s, head, counter=None):
    """Core interest: attention over the items of the selected blocks."""
    shape = _rows_shape(H_s)
    if len(shape) != 2 or shape[0] == 0:
        raise EmptySelectionError('Selective attention needs core items')
    H, H_s = lift(H), lift(H_s)
    z_core, _ = head(H[H.shape[0] - 1], H_s, counter=counter)
    return z_core


class Gate(object):
    """Softmax gate over the three interest vectors. Starts at zero."""

    def __init__(self, d, name='sal.gate'):
        self.d = d
        self.weight = Parameter(np.zeros((3 * d, 3)), f'{name}.w')
        self.bias = Parameter(np.zeros(3), f'{name}.b')

    def parameters(self):
        return [self.weight, self.bias]

    def __call__(self, z_short, z_long, z_core):
        return gate_fuse(z_short, z_long, z_core, self)


def gate_fuse(z_short, z_long, z_core, gate):
    """Mix the interest vectors with softmax gate weights.

    A missing ``z_short`` (history of one item with an exclusive window)
    contributes a zero vector and its gate logit is masked out.

    Returns the user embedding and the gate weights.
    """
    d = gate.d
    mask = None
    if z_short is None:
        z_short = Tensor(np.zeros(d))
        mask = np.array([[-np.inf, 0.0, 0.0]])
    heads = [lift(z_short), lift(z_long), lift(z_core)]
    for z in heads:
        if z.shape != (d,):
            raise DimensionError(
                f'Gate expects {d}-vectors, got shape {z.shape}'
            )
    features = reshape(concat(heads), (1, 3 * d))
    logits = features @ gate.weight + gate.bias
    weights = masked_softmax(logits, mask)
    u = weights @ stack(heads)
    return reshape(u, (d,)), reshape(weights, (3,))


class ItemProjection(object):
    """Learned d x d map applied to fused item embeddings before scoring."""

    def __init__(self, d, rng, name='sal.item_proj'):
        self.weight = _projection(rng, d, name)

    def parameters(self):
        return [self.weight]

    def __call__(self, items):
        return lift(items) @ self.weight


def score(u, item, projection):
    """Cosine similarity between a user and one projected item."""
    item = lift(item)
    projected = reshape(projection(reshape(item, (1, item.shape[0]))),
                        (item.shape[0],))
    return cosine_sim(u, projected)


def score_items(u, items, projection):
    """Scores of ``u`` against every row of ``items``."""
    u = lift(u)
    return reshape(cosine_matrix(reshape(u, (1, u.shape[0])),
                                 projection(items)), (len(items),))


def sal_contrastive_loss(users, targets, tau):
    """In-batch InfoNCE between users and their projected target items;
    the targets of the other users are negatives."""
    users, targets = lift(users), lift(targets)
    if users.shape != targets.shape or users.ndim != 2:
        raise DimensionError(
            f'Users {users.shape} and targets {targets.shape} must be '
            f'matching N x d batches'
        )
    n = users.shape[0]
    if n < 2:
        raise InsufficientNegativesError(
            f'User/item contrast needs a batch of at least 2, got {n}'
        )
    rows = np.arange(n)
    logits = cosine_matrix(users, targets) / tau
    return -log_softmax(logits, axis=1)[(rows, rows)].mean()


class SparseAttentionLayer(object):
    """The three attention heads, block aggregator, gate and item projection.
    """

    def __init__(self, d, config=None, rng=None):
        self.d = d
        self.config = SALConfig() if config is None else config
        rng = np.random.default_rng(0) if rng is None else rng
        self.window_head = AttentionHead(d, rng, 'sal.window')
        self.block_head = AttentionHead(d, rng, 'sal.block')
        self.selective_head = AttentionHead(d, rng, 'sal.selective')
        self.aggregator = BlockAggregator(d, rng, self.config.aggregator)
        self.gate = Gate(d)
        self.item_projection = ItemProjection(d, rng)

    def parameters(self):
        return (self.window_head.parameters()
                + self.block_head.parameters()
                + self.selective_head.parameters()
                + self.aggregator.parameters()
                + self.gate.parameters()
                + self.item_projection.parameters())

    def window_size(self, L):
        cfg = self.config
        return window_size_for(L, cfg.window_threshold, cfg.window_long,
                               cfg.window_short)

    def interests(self, H, counter=None):
        """Compute the three interest vectors for one history."""
        H = lift(H)
        if H.ndim != 2 or H.shape[1] != self.d or H.shape[0] < 1:
            raise DimensionError(
                f'History must be L x {self.d} with L >= 1, got {H.shape}'
            )
        L = H.shape[0]
        cfg = self.config

        z_short = None
        if L > 1 or cfg.window_inclusive:
            z_short = window_attention(H, self.window_size(L),
                                       self.window_head,
                                       inclusive=cfg.window_inclusive,
                                       counter=counter)

        partition = partition_blocks(L, cfg.P)
        z_long, a_block = block_attention(H, partition, self.block_head,
                                          self.aggregator, counter=counter)
        with warnings.catch_warnings():
            # Short histories routinely have fewer than k blocks
            warnings.simplefilter('ignore', TopKClampWarning)
            selected = top_k_blocks(a_block, cfg.k)
        H_s = gather_core_items(H, partition, selected)
        z_core = selective_attention(H, H_s, self.selective_head,
                                     counter=counter)
        return InterestVectors(z_short=z_short, z_long=z_long, z_core=z_core,
                               a_block=a_block.numpy(), selected=selected)

    def user_embedding(self, H, counter=None):
        """Gated user embedding and its interest vectors."""
        interests = self.interests(H, counter=counter)
        u, weights = gate_fuse(interests.z_short, interests.z_long,
                               interests.z_core, self.gate)
        interests.gate_weights = weights.numpy()
        return u, interests


def effective_window(L, W, inclusive=False):
    return len(window_positions(L, W, inclusive))


@dataclass
class AttentionCost:
    full: int
    sparse: int
    formula: int
    by_head: dict


def attention_cost(L, P, W, k, d=8, seed=0, inclusive=False):
    """Count score pairs of one instrumented sparse forward pass.

    ``full`` is the dense single-query cost (L). ``formula`` is the closed
    form: effective window size + block count + core item count.
    """
    rng = np.random.default_rng(seed)
    config = SALConfig(P=P, k=k, window_inclusive=inclusive,
                       window_long=W, window_short=W, window_threshold=0)
    layer = SparseAttentionLayer(d, config, rng)
    H = rng.normal(size=(L, d))
    counter = PairCounter()
    interests = layer.interests(H, counter=counter)
    partition = partition_blocks(L, P)
    W_eff = min(W, L)
    formula = (effective_window(L, W_eff, inclusive) + partition.B
               + sum(partition.sizes(interests.selected)))
    return AttentionCost(full=L, sparse=counter.pairs, formula=formula,
                         by_head=dict(counter.by_head))
