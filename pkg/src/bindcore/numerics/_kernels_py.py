"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``BINDCORE_PURE_PYTHON=1``. Signatures mirror ``_kernels.pyx`` exactly.
"""
import numpy as np

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def scatter_add_rows(index, src, n_out):
    """out[index[i]] += src[i] for a 2-D ``src``."""
    out = np.zeros((n_out, src.shape[1]), dtype=np.float64)
    np.add.at(out, index, src)
    return out


def gaussian_forward(x, mu, sigma):
    z = (x[:, None] - mu[None, :]) / sigma[None, :]
    return np.exp(-0.5 * z * z) * (_INV_SQRT_2PI / sigma)[None, :]


def gaussian_backward(x, mu, sigma, out, gout):
    # d/dx G = -G * (x-mu)/sigma^2 ; d/dsigma G = G * ((x-mu)^2/sigma^3 - 1/sigma)
    diff = x[:, None] - mu[None, :]
    inv_s2 = 1.0 / (sigma * sigma)
    go = gout * out
    t = go * diff * inv_s2[None, :]
    gx = -t.sum(axis=1)
    gmu = t.sum(axis=0)
    gsigma = (go * (diff * diff * (inv_s2 / sigma)[None, :] - (1.0 / sigma)[None, :])).sum(axis=0)
    return gx, gmu, gsigma


def pairwise_distances(coords):
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(d, 0.0)
    return d


def softmax_rows(x):
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_rows_backward(y, gy):
    return y * (gy - (gy * y).sum(axis=1, keepdims=True))
