"""Kernel backend selection.

The compiled extension is preferred; set ``BINDCORE_PURE_PYTHON=1`` to force
the numpy fallback (useful for debugging and for the benchmark comparison).
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BINDCORE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "compiled"


def use_backend(name):
    """Switch backend at runtime ('compiled' or 'python'). Returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    if name == "python":
        _impl = _kernels_py
    elif name == "compiled":
        from . import _kernels as compiled

        _impl = compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name
    return prev


def _c(a, dtype=np.float64):
    return np.ascontiguousarray(a, dtype=dtype)


def scatter_add_rows(index, src, n_out):
    index = _c(index, np.int64).reshape(-1)
    src = _c(src)
    if src.ndim == 1:
        return _impl.scatter_add_rows(index, src.reshape(-1, 1), n_out).reshape(-1)
    lead = src.shape[1:]
    out = _impl.scatter_add_rows(index, src.reshape(src.shape[0], -1), n_out)
    return out.reshape((n_out,) + lead)


def gaussian_forward(x, mu, sigma):
    shape = np.shape(x)  # taken first: ascontiguousarray promotes 0-d input to 1-d
    out = _impl.gaussian_forward(_c(x).reshape(-1), _c(mu), _c(sigma))
    return out.reshape(shape + (len(mu),))


def gaussian_backward(x, mu, sigma, out, gout):
    shape = np.shape(x)
    k = len(mu)
    gx, gmu, gsigma = _impl.gaussian_backward(
        _c(x).reshape(-1), _c(mu), _c(sigma), _c(out).reshape(-1, k), _c(gout).reshape(-1, k)
    )
    return gx.reshape(shape), gmu, gsigma


def pairwise_distances(coords):
    return _impl.pairwise_distances(_c(coords))


def softmax_lastdim(x):
    x = _c(x)
    return _impl.softmax_rows(x.reshape(-1, x.shape[-1])).reshape(x.shape)


def softmax_lastdim_backward(y, gy):
    y = _c(y)
    return _impl.softmax_rows_backward(y.reshape(-1, y.shape[-1]), _c(gy).reshape(-1, y.shape[-1])).reshape(y.shape)
