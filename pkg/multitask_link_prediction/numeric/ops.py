""" Differentiable tensor operations.

Every operation accepts tensors or array-likes (treated as constants),
computes its forward value with numpy and, if any input is recorded on a
tape, records the exact reverse rule.
"""
import numpy as np
from scipy import special

from multitask_link_prediction.errors import (
    ContractViolation,
    DomainError,
    ShapeError,
)
from multitask_link_prediction.numeric.tape import Tensor


def as_tensor(x):
    """ Wrap a value as a constant tensor unless it already is a tensor. """
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def _tape_of(*tensors):
    """ Get the tape shared by the inputs, if any. """
    tapes = {id(t.tape): t.tape for t in tensors if t.tape is not None}
    if len(tapes) > 1:
        raise ContractViolation("Inputs are recorded on different tapes")

    return next(iter(tapes.values()), None)


def _result(value, inputs, vjp):
    """ Create the output tensor, recording it if needed. """
    tape = _tape_of(*inputs)
    if tape is None:
        return Tensor(value)
    return tape.record(value, inputs, vjp)


def _broadcast_shape(*shapes):
    """ Shape of the broadcast result, raising ShapeError on mismatch. """
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError:
        raise ShapeError(f"Shapes {shapes} cannot be broadcast together")


def _unbroadcast(grad, shape):
    """ Sum a gradient down to the shape of a broadcast input. """
    if grad.shape == shape:
        return grad

    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))

    axes = tuple(
        axis
        for axis, (g, s) in enumerate(zip(grad.shape, shape))
        if s == 1 and g != 1
    )
    if len(axes) > 0:
        grad = grad.sum(axis=axes, keepdims=True)

    return grad.reshape(shape)


def add(a, b):
    """ Elementwise sum with broadcasting. """
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), vjp)


def subtract(a, b):
    """ Elementwise difference with broadcasting. """
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), vjp)


def negative(a):
    """ Elementwise negation. """
    a = as_tensor(a)

    return _result(-a.data, (a,), lambda g: (-g,))


def multiply(a, b):
    """ Elementwise product with broadcasting. """
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return (
            _unbroadcast(g * b.data, a.shape),
            _unbroadcast(g * a.data, b.shape),
        )

    return _result(a.data * b.data, (a, b), vjp)


def divide(a, b):
    """ Elementwise quotient with broadcasting. """
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape)
    value = a.data / b.data

    def vjp(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * value / b.data, b.shape),
        )

    return _result(value, (a, b), vjp)


def matmul(a, b):
    """ Matrix product of two 2-d tensors. """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"Cannot multiply {a.shape} by {b.shape}")

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), vjp)


def propagate(matrix, x):
    """ Product of a constant (sparse or dense) matrix with a 2-d tensor.

    Parameters
    ----------
    matrix : scipy.sparse matrix or numpy.ndarray
        Constant matrix of shape (m, n), e.g. a mean-aggregation operator.

    x : Tensor
        Tensor of shape (n, d).

    Returns
    -------
    Tensor
        Tensor of shape (m, d).
    """
    x = as_tensor(x)
    if x.ndim != 2 or matrix.shape[1] != x.shape[0]:
        raise ShapeError(f"Cannot propagate {x.shape} with {matrix.shape}")

    def vjp(g):
        return (np.asarray(matrix.T @ g),)

    return _result(np.asarray(matrix @ x.data), (x,), vjp)


def concat(tensors, axis=0):
    """ Concatenate tensors along an axis. """
    tensors = [as_tensor(t) for t in tensors]
    if len(tensors) == 0:
        raise ContractViolation("Nothing to concatenate")
    try:
        value = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeError(str(e))

    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g):
        return np.split(g, splits, axis=axis)

    return _result(value, tensors, vjp)


def repeat(x, shape):
    """ Broadcast a tensor to a larger shape, copying its values. """
    x = as_tensor(x)
    shape = tuple(shape)
    if _broadcast_shape(x.shape, shape) != shape:
        raise ShapeError(f"Cannot repeat {x.shape} to {shape}")

    def vjp(g):
        return (_unbroadcast(g, x.shape),)

    return _result(np.broadcast_to(x.data, shape).copy(), (x,), vjp)


def reshape(x, shape):
    """ Reshape a tensor. """
    x = as_tensor(x)
    try:
        value = x.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(str(e))

    return _result(value, (x,), lambda g: (g.reshape(x.shape),))


def take(x, indices, axis=0):
    """ Select entries along an axis by integer indices. """
    x = as_tensor(x)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size > 0 and (
        indices.min() < -x.shape[axis] or indices.max() >= x.shape[axis]
    ):
        raise ContractViolation(
            f"Index out of range for axis {axis} of size {x.shape[axis]}"
        )

    def vjp(g):
        grad = np.zeros(x.shape)
        moved = np.moveaxis(grad, axis, 0)
        np.add.at(moved, indices, np.moveaxis(g, axis, 0))
        return (grad,)

    return _result(np.take(x.data, indices, axis=axis), (x,), vjp)


def relu(x):
    """ Rectified linear unit. """
    x = as_tensor(x)
    mask = x.data > 0

    return _result(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def sigmoid(x):
    """ Logistic sigmoid. """
    x = as_tensor(x)
    value = special.expit(x.data)

    return _result(value, (x,), lambda g: (g * value * (1.0 - value),))


def log(x):
    """ Natural logarithm of a strictly positive tensor. """
    x = as_tensor(x)
    if np.any(x.data <= 0):
        raise DomainError("log requires strictly positive arguments")

    return _result(np.log(x.data), (x,), lambda g: (g / x.data,))


def exp(x):
    """ Exponential. """
    x = as_tensor(x)
    value = np.exp(x.data)

    return _result(value, (x,), lambda g: (g * value,))


def softmax(x, axis=-1):
    """ Softmax along an axis (rows by default). """
    x = as_tensor(x)
    value = special.softmax(x.data, axis=axis)

    def vjp(g):
        return (value * (g - np.sum(g * value, axis=axis, keepdims=True)),)

    return _result(value, (x,), vjp)


def sum(x, axis=None, keepdims=False):
    """ Sum over one or more axes or over all entries. """
    x = as_tensor(x)
    value = np.sum(x.data, axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape),)

    return _result(value, (x,), vjp)


def mean(x, axis=None, keepdims=False):
    """ Mean over one or more axes or over all entries. """
    x = as_tensor(x)
    if axis is None:
        count = x.size
    else:
        axes = np.atleast_1d(axis)
        count = int(np.prod([x.shape[a] for a in axes]))

    return multiply(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def lgamma(x):
    """ Logarithm of the gamma function of a strictly positive tensor. """
    x = as_tensor(x)
    if np.any(x.data <= 0):
        raise DomainError("lgamma requires strictly positive arguments")

    def vjp(g):
        return (g * special.digamma(x.data),)

    return _result(special.gammaln(x.data), (x,), vjp)


def xlogx(x):
    """ ``x * log(x)`` for non-negative tensors with ``0 * log(0) = 0``. """
    x = as_tensor(x)
    if np.any(x.data < 0):
        raise DomainError("xlogx requires non-negative arguments")

    def vjp(g):
        positive = x.data > 0
        safe = np.where(positive, x.data, 1.0)
        return (np.where(positive, g * (np.log(safe) + 1.0), 0.0),)

    return _result(special.xlogy(x.data, x.data), (x,), vjp)


def clip(x, lower=None, upper=None):
    """ Clip values to an interval; the gradient is zero outside of it. """
    x = as_tensor(x)
    lower = -np.inf if lower is None else lower
    upper = np.inf if upper is None else upper
    inside = (x.data >= lower) & (x.data <= upper)

    return _result(
        np.clip(x.data, lower, upper), (x,), lambda g: (g * inside,)
    )


def transpose(x, axes=None):
    """ Permute the axes of a tensor, reversing them by default. """
    x = as_tensor(x)
    if axes is None:
        axes = tuple(range(x.ndim))[::-1]
    inverse = tuple(np.argsort(axes))

    return _result(
        np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),)
    )
