"""Dense float64 tensors with a define-by-run reverse-mode tape.

Operations record themselves on the innermost active :class:`Tape`. Outside
any tape nothing is recorded, which is how evaluation runs without autodiff
overhead::

    with Tape() as tape:
        loss = sum_(mul(x, x))
    tape.backward(loss)
"""
import os

import numpy as np

from ..errors import ContractError, DegenerateInputError, DimensionError, EmptyPoolError, NumericalError
from . import kernels

NORM_EPS = 1e-12
DEBUG = os.environ.get("BINDCORE_DEBUG", "") in ("1", "true", "yes")

_TAPES = []


def set_debug(flag):
    global DEBUG
    DEBUG = bool(flag)


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "node_id", "tape", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.node_id = None
        self.tape = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def is_leaf(self):
        return self.node_id is None

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self):
        self.grad = None if self.grad is None else np.zeros_like(self.data)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, requires_grad={self.requires_grad})"

    __add__ = lambda self, o: add(self, o)
    __radd__ = lambda self, o: add(o, self)
    __sub__ = lambda self, o: sub(self, o)
    __rsub__ = lambda self, o: sub(o, self)
    __mul__ = lambda self, o: mul(self, o)
    __rmul__ = lambda self, o: mul(o, self)
    __matmul__ = lambda self, o: matmul(self, o)
    __neg__ = lambda self: scale(self, -1.0)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Ordered record of operations; replay in reverse gives gradients."""

    def __init__(self):
        self.nodes = []
        self.leaves = {}

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _TAPES.remove(self)
        return False

    def __len__(self):
        return len(self.nodes)

    def record(self, inputs, out, backward_fn):
        for t in inputs:
            if t.requires_grad and t.node_id is None:
                self.leaves[id(t)] = t
            elif t.node_id is not None and t.tape is not self:
                raise ContractError("tensor from a different tape used as an input")
        out.node_id = len(self.nodes)
        out.tape = self
        self.nodes.append((inputs, backward_fn))

    def backward(self, loss, grad=None):
        """Accumulate d(loss)/d(leaf) into ``leaf.grad`` for every recorded leaf."""
        if loss.data.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        # leaves without a path to the loss still get an (all-zero) gradient
        for leaf in self.leaves.values():
            if leaf.grad is None:
                leaf.grad = np.zeros_like(leaf.data)
        if loss.node_id is None:
            if loss.requires_grad:
                loss.grad = (0.0 if loss.grad is None else loss.grad) + np.ones_like(loss.data)
            return
        if loss.tape is not self:
            raise ContractError("loss was not produced on this tape")
        pending = {loss.node_id: np.ones_like(loss.data) if grad is None else np.asarray(grad, np.float64)}
        for nid in range(loss.node_id, -1, -1):
            g = pending.pop(nid, None)
            if g is None:
                continue
            inputs, fn = self.nodes[nid]
            for t, gi in zip(inputs, fn(g)):
                if gi is None or not t.requires_grad:
                    continue
                if t.node_id is None:
                    t.grad = gi.copy() if t.grad is None else t.grad + gi
                elif t.node_id in pending:
                    pending[t.node_id] = pending[t.node_id] + gi
                else:
                    pending[t.node_id] = gi


def backward(loss, tape=None):
    """Populate gradients of every requires_grad leaf reachable on ``loss``'s tape."""
    tape = tape or loss.tape
    if tape is None:
        raise ContractError("loss was not recorded on any tape")
    tape.backward(loss)


def current_tape():
    return _TAPES[-1] if _TAPES else None


def _make(data, inputs, backward_fn):
    out = Tensor(data)
    if DEBUG and not np.all(np.isfinite(out.data)):
        if all(np.all(np.isfinite(t.data)) for t in inputs):
            raise NumericalError("non-finite output from finite inputs")
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(inputs, out, backward_fn)
    return out


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _check_broadcast(a, b, opname):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{opname}: incompatible shapes {a.shape} and {b.shape}") from None


# -- elementwise ---------------------------------------------------------------------------


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")
    return _make(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")
    return _make(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")
    return _make(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def scale(a, s):
    a = as_tensor(a)
    s = float(s)
    return _make(a.data * s, (a,), lambda g: (g * s,))


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return _make(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def exp(a):
    a = as_tensor(a)
    y = np.exp(a.data)
    return _make(y, (a,), lambda g: (g * y,))


def log(a):
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise ContractError("log of a non-positive value")
    return _make(np.log(a.data), (a,), lambda g: (g / a.data,))


# -- reductions and shape ------------------------------------------------------------------


def sum_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    y = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(y, (a,), bw)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else np.prod([a.shape[ax] for ax in np.atleast_1d(axis)])
    return scale(sum_(a, axis=axis, keepdims=keepdims), 1.0 / n)


def transpose(a, axes=None):
    a = as_tensor(a)
    if axes is None:
        axes = tuple(range(a.ndim))[::-1]
    inv = np.argsort(axes)
    return _make(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inv),))


def reshape(a, shape):
    a = as_tensor(a)
    try:
        y = a.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"cannot reshape {a.shape} into {shape}") from None
    return _make(y, (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors, axis=0):
    ts = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]
    try:
        y = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError as e:
        raise DimensionError(f"concat: {e}") from None
    return _make(y, tuple(ts), lambda g: tuple(np.split(g, splits, axis=axis)))


def gather(table, index):
    """Rows of ``table`` selected by an integer array of any shape."""
    table = as_tensor(table)
    index = np.asarray(index, dtype=np.int64)
    n = table.shape[0]
    if index.size and (index.min() < 0 or index.max() >= n):
        raise ContractError(f"gather index out of range [0, {n})")
    rest = table.shape[1:]

    def bw(g):
        flat = g.reshape((index.size,) + rest)
        return (kernels.scatter_add_rows(index.reshape(-1), flat, n),)

    return _make(table.data[index], (table,), bw)


def scatter_sum(src, index, n_out):
    """out[index[i]] += src[i]; the message-aggregation primitive of the graph encoder."""
    src = as_tensor(src)
    index = np.asarray(index, dtype=np.int64)
    if index.shape != src.shape[:1]:
        raise DimensionError(f"scatter_sum: index shape {index.shape} vs source {src.shape}")
    y = kernels.scatter_add_rows(index, src.data, n_out)
    return _make(y, (src,), lambda g: (g[index],))


# -- linear algebra ------------------------------------------------------------------------


def _swap(x):
    return np.swapaxes(x, -1, -2)


def matmul(a, b):
    """Matrix product over the last two axes.

    ``a`` may carry leading batch axes; ``b`` is either a plain matrix (shared
    weight) or has the same batch axes as ``a``.
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"matmul needs 2-D or batched operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2] or (b.ndim > 2 and a.shape[:-2] != b.shape[:-2]):
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    y = np.matmul(a.data, b.data)

    def bw(g):
        ga = np.matmul(g, _swap(b.data)) if a.requires_grad else None
        gb = None
        if b.requires_grad:
            if b.ndim == 2 and a.ndim > 2:
                gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            else:
                gb = np.matmul(_swap(a.data), g)
        return ga, gb

    return _make(y, (a, b), bw)


# -- normalisation and probability ---------------------------------------------------------


def softmax_rows(x):
    """Softmax over the last axis with per-row max subtraction."""
    x = as_tensor(x)
    y = kernels.softmax_lastdim(x.data)
    return _make(y, (x,), lambda g: (kernels.softmax_lastdim_backward(y, g),))


def logsumexp(x):
    """log(sum(exp(x))) over the last axis, stabilised."""
    x = as_tensor(x)
    m = x.data.max(axis=-1, keepdims=True)
    s = np.exp(x.data - m).sum(axis=-1, keepdims=True)
    y = (m + np.log(s))[..., 0]

    def bw(g):
        return (g[..., None] * np.exp(x.data - y[..., None]),)

    return _make(y, (x,), bw)


def l2_normalize(x):
    x = as_tensor(x)
    norm = np.sqrt((x.data * x.data).sum(axis=-1, keepdims=True))
    if np.any(norm <= NORM_EPS):
        raise DegenerateInputError(f"l2_normalize: slice with norm <= {NORM_EPS}")
    y = x.data / norm

    def bw(g):
        return ((g - y * (g * y).sum(axis=-1, keepdims=True)) / norm,)

    return _make(y, (x,), bw)


def mean_pool(x, mask=None):
    """Mean over the second-to-last axis, restricted to rows where ``mask`` is true.

    ``x`` is ``[..., N, D]``; ``mask`` (optional) is boolean ``[..., N]``.
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise DimensionError(f"mean_pool expects [..., N, D], got {x.shape}")
    if mask is None:
        mask = np.ones(x.shape[:-1], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:-1]:
        raise DimensionError(f"mean_pool: mask shape {mask.shape} vs rows {x.shape[:-1]}")
    counts = mask.sum(axis=-1, keepdims=True).astype(np.float64)
    if np.any(counts == 0):
        raise EmptyPoolError("mean_pool: every row is masked")
    w = mask / counts
    y = (x.data * w[..., None]).sum(axis=-2)
    return _make(y, (x,), lambda g: (g[..., None, :] * w[..., None],))


def layer_norm(x, gain, bias, eps=1e-5):
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    rstd = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * rstd
    y = xhat * gain.data + bias.data

    def bw(g):
        gx_hat = g * gain.data
        gx = rstd * (
            gx_hat - gx_hat.mean(axis=-1, keepdims=True) - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True)
        )
        flat = g.reshape(-1, g.shape[-1])
        return gx, (flat * xhat.reshape(flat.shape)).sum(axis=0), flat.sum(axis=0)

    return _make(y, (x, gain, bias), bw)


def gaussian_kernel(x, mu, sigma):
    """Gaussian densities N(x; mu_k, sigma_k) for every k, appended as a last axis."""
    x, mu, sigma = as_tensor(x), as_tensor(mu), as_tensor(sigma)
    if np.any(sigma.data <= 0):
        raise ContractError("gaussian_kernel: every sigma must be positive")
    if mu.shape != sigma.shape or mu.ndim != 1:
        raise DimensionError(f"gaussian_kernel: mu {mu.shape} and sigma {sigma.shape} must be equal 1-D")
    y = kernels.gaussian_forward(x.data, mu.data, sigma.data)

    def bw(g):
        return kernels.gaussian_backward(x.data, mu.data, sigma.data, y, g)

    return _make(y, (x, mu, sigma), bw)
