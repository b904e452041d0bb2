"""mufasa.tensor
   =============

   Dense float64 tensors with tape-based reverse-mode differentiation.

   Primitive operations record themselves on the tape that is active on the
   current thread (``with Tape(): ...``). Tensors built outside of a tape are
   constants as far as differentiation is concerned, so inference code needs
   no special handling.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

import threading

import numpy as np

from mufasa.errors import (
    DegenerateRowError,
    DimensionError,
    NonFiniteError,
    RankError,
    TapeError,
    ZeroNormError,
)

DTYPE = np.float64


class _TapeStack(threading.local):
    def __init__(self):
        self.stack = []


_tapes = _TapeStack()


class Record(object):
    """A single executed primitive and its vector-Jacobian product."""

    __slots__ = ('output', 'inputs', 'backward')

    def __init__(self, output, inputs, backward):
        self.output = output
        self.inputs = inputs
        self.backward = backward


class Tape(object):
    """Ordered record of the primitive operations executed in a ``with``
    block on this thread.

    An operation is recorded only when at least one of its inputs requires a
    gradient. Tapes nest; the innermost one is active. Use one tape per
    thread.
    """

    def __init__(self):
        self.records = []
        # Record positions visited by the latest backward pass
        self.replayed = []

    def __enter__(self):
        _tapes.stack.append(self)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        _tapes.stack.pop()
        return False

    def __len__(self):
        return len(self.records)

    @staticmethod
    def active():
        """Return the innermost tape of the current thread, if any."""
        return _tapes.stack[-1] if _tapes.stack else None

    def record(self, output, inputs, backward):
        output._tape = self
        output._position = len(self.records)
        self.records.append(Record(output, inputs, backward))

    def backward(self, loss):
        """Replay the tape in reverse from ``loss`` and accumulate gradients
        into every leaf tensor that requires one.

        Each record is visited at most once, in reverse execution order.
        """
        grads = {id(loss): np.ones_like(loss.data)}
        leaves = {}
        self.replayed = []

        for position in range(loss._position, -1, -1):
            record = self.records[position]
            grad = grads.pop(id(record.output), None)
            if grad is None:
                continue
            self.replayed.append(position)

            input_grads = record.backward(grad)
            for tensor, input_grad in zip(record.inputs, input_grads):
                if input_grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if tensor._tape is self:
                    if key in grads:
                        grads[key] = grads[key] + input_grad
                    else:
                        grads[key] = input_grad
                elif key in leaves:
                    leaves[key] = (tensor, leaves[key][1] + input_grad)
                else:
                    leaves[key] = (tensor, input_grad)

        for tensor, grad in leaves.values():
            if tensor.grad is None:
                tensor.grad = np.array(grad, dtype=DTYPE)
            else:
                tensor.grad = tensor.grad + grad


class Tensor(object):
    """Dense row-major array of 64-bit floats.

    Parameters
    ----------
    data : array_like
        Values; copied on construction.
    requires_grad : bool, default False
        Accumulate gradients into ``grad`` during backward passes.
    """

    # Let ndarray operands defer to Tensor operators
    __array_ufunc__ = None

    def __init__(self, data, requires_grad=False):
        self._set(np.array(data, dtype=DTYPE), requires_grad)

    @classmethod
    def _wrap(cls, data, requires_grad=False):
        tensor = cls.__new__(cls)
        tensor._set(np.asarray(data, dtype=DTYPE), requires_grad)
        return tensor

    def _set(self, data, requires_grad):
        if data.size == 0:
            raise DimensionError(f'Tensors cannot be empty: shape {data.shape}')
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(
                f'Tensor of shape {data.shape} holds non-finite values'
            )
        self.data = data
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._tape = None
        self._position = None

    def __repr__(self):
        return (f'{type(self).__name__}(shape={self.shape}, '
                f'requires_grad={self.requires_grad})')

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def T(self):
        return transpose(self)

    def item(self):
        if self.size != 1:
            raise RankError(f'Expected a scalar, got shape {self.shape}')
        return float(self.data.reshape(()))

    def numpy(self):
        return self.data.copy()

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __getitem__(self, index):
        return take(self, index)


class Parameter(Tensor):
    """A named learnable tensor. Only optimizers update its values."""

    def __init__(self, data, name):
        super().__init__(data, requires_grad=True)
        self.name = name

    def __repr__(self):
        return f'Parameter(name={self.name!r}, shape={self.shape})'


def lift(value):
    """Return ``value`` as a Tensor, wrapping plain arrays as constants."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _result(data, inputs, backward):
    tape = Tape.active()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(data, requires_grad=track)
    if track:
        tape.record(out, inputs, backward)
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a, b, opname):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(
            f'Cannot {opname} shapes {a.shape} and {b.shape}'
        ) from None


def add(a, b):
    a, b = lift(a), lift(b)
    _broadcast_shape(a, b, 'add')

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return _result(a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = lift(a), lift(b)
    _broadcast_shape(a, b, 'subtract')

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return _result(a.data - b.data, (a, b), backward)


def mul(a, b):
    a, b = lift(a), lift(b)
    _broadcast_shape(a, b, 'multiply')

    def backward(grad):
        return (_unbroadcast(grad * b.data, a.shape),
                _unbroadcast(grad * a.data, b.shape))

    return _result(a.data * b.data, (a, b), backward)


def div(a, b):
    a, b = lift(a), lift(b)
    _broadcast_shape(a, b, 'divide')

    def backward(grad):
        return (_unbroadcast(grad / b.data, a.shape),
                _unbroadcast(-grad * a.data / b.data ** 2, b.shape))

    return _result(a.data / b.data, (a, b), backward)


def neg(a):
    a = lift(a)
    return _result(-a.data, (a,), lambda grad: (-grad,))


def matmul(a, b):
    """Matrix product of two rank-2 tensors."""
    a, b = lift(a), lift(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f'Cannot multiply shapes {a.shape} and {b.shape}'
        )

    def backward(grad):
        return grad @ b.data.T, a.data.T @ grad

    return _result(a.data @ b.data, (a, b), backward)


def transpose(a):
    a = lift(a)
    return _result(a.data.T, (a,), lambda grad: (grad.T,))


def reshape(a, shape):
    a = lift(a)
    return _result(a.data.reshape(shape), (a,),
                   lambda grad: (grad.reshape(a.shape),))


def sum_(a, axis=None, keepdims=False):
    a = lift(a)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, a.shape).copy(),)

    return _result(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = lift(a)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return sum_(a, axis=axis, keepdims=keepdims) / float(count)


def exp(a):
    a = lift(a)
    out = np.exp(a.data)
    return _result(out, (a,), lambda grad: (grad * out,))


def log(a):
    a = lift(a)
    return _result(np.log(a.data), (a,), lambda grad: (grad / a.data,))


def tanh(a):
    a = lift(a)
    out = np.tanh(a.data)
    return _result(out, (a,), lambda grad: (grad * (1.0 - out ** 2),))


def sqrt(a):
    a = lift(a)
    out = np.sqrt(a.data)
    return _result(out, (a,), lambda grad: (0.5 * grad / out,))


def power(a, exponent):
    a = lift(a)
    exponent = float(exponent)
    return _result(
        a.data ** exponent, (a,),
        lambda grad: (grad * exponent * a.data ** (exponent - 1.0),)
    )


def _is_fancy(index):
    parts = index if isinstance(index, tuple) else (index,)
    return any(isinstance(part, (list, np.ndarray)) for part in parts)


def take(a, index):
    """Index ``a`` with numpy semantics; repeated indices accumulate."""
    a = lift(a)
    fancy = _is_fancy(index)

    def backward(grad):
        full = np.zeros_like(a.data)
        if fancy:
            np.add.at(full, index, grad)
        else:
            full[index] += grad
        return (full,)

    return _result(a.data[index], (a,), backward)


def concat(tensors, axis=0):
    tensors = [lift(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError(
            'Cannot concatenate shapes '
            + ', '.join(str(t.shape) for t in tensors)
        ) from None
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, splits, axis=axis))

    return _result(data, tuple(tensors), backward)


def stack(tensors, axis=0):
    tensors = [lift(t) for t in tensors]
    try:
        data = np.stack([t.data for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError(
            'Cannot stack shapes ' + ', '.join(str(t.shape) for t in tensors)
        ) from None

    def backward(grad):
        return tuple(np.take(grad, i, axis=axis) for i in range(len(tensors)))

    return _result(data, tuple(tensors), backward)


def log_softmax(a, axis=-1):
    a = lift(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(grad):
        return (grad - np.exp(out) * grad.sum(axis=axis, keepdims=True),)

    return _result(out, (a,), backward)


def masked_softmax(scores, mask=None):
    """Row-wise softmax of ``scores + mask`` along the last axis.

    ``mask`` is additive and constant (0 keeps a position, -inf drops it).
    Dropped positions receive a weight of exactly 0. A row with every
    position dropped raises ``DegenerateRowError``.
    """
    scores = lift(scores)
    if mask is None:
        total = scores.data
    else:
        mask = mask.data if isinstance(mask, Tensor) else mask
        mask = np.asarray(mask, dtype=DTYPE)
        try:
            total = scores.data + np.broadcast_to(mask, scores.shape)
        except ValueError:
            raise DimensionError(
                f'Mask of shape {mask.shape} does not fit scores of shape '
                f'{scores.shape}'
            ) from None

    kept = np.isfinite(total)
    if not np.all(kept.any(axis=-1)):
        raise DegenerateRowError(
            'Softmax row has every position masked out'
        )
    row_max = np.where(kept, total, -np.inf).max(axis=-1, keepdims=True)
    weights = np.where(kept, np.exp(np.where(kept, total - row_max, 0.0)), 0.0)
    out = weights / weights.sum(axis=-1, keepdims=True)

    def backward(grad):
        return (out * (grad - (grad * out).sum(axis=-1, keepdims=True)),)

    return _result(out, (scores,), backward)


def softmax(scores):
    return masked_softmax(scores, None)


def norm(a, axis=-1, keepdims=True):
    a = lift(a)
    return sqrt(sum_(a * a, axis=axis, keepdims=keepdims))


def l2_normalize(a, axis=-1):
    """Scale each vector along ``axis`` to unit Euclidean length."""
    a = lift(a)
    if np.any((a.data ** 2).sum(axis=axis) == 0.0):
        raise ZeroNormError('Cannot normalise a zero-norm vector')
    return a / norm(a, axis=axis, keepdims=True)


def cosine_sim(a, b):
    """Cosine similarity of two vectors of equal length."""
    a, b = lift(a), lift(b)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(
            f'Cosine similarity needs two equal-length vectors, got '
            f'{a.shape} and {b.shape}'
        )
    return sum_(l2_normalize(a) * l2_normalize(b))


def cosine_matrix(a, b):
    """Pairwise cosine similarities between the rows of ``a`` and ``b``."""
    a, b = lift(a), lift(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimensionError(
            f'Cannot compare rows of shapes {a.shape} and {b.shape}'
        )
    return matmul(l2_normalize(a), transpose(l2_normalize(b)))


def zero_grads(params):
    """Reset the gradients of ``params`` to zero."""
    for param in params:
        param.grad = np.zeros_like(param.data)


def backward(loss):
    """Populate ``grad`` of every leaf that ``loss`` depends on.

    Gradients accumulate across calls; reset them with ``zero_grads``.
    """
    if not isinstance(loss, Tensor) or loss.size != 1:
        shape = getattr(loss, 'shape', None)
        raise RankError(f'Backward needs a scalar loss, got shape {shape}')
    if loss._tape is None:
        raise TapeError(
            'Loss was not produced by taped operations; '
            'evaluate it inside a `with Tape():` block'
        )
    loss._tape.backward(loss)
