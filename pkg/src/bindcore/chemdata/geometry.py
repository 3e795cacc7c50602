import numpy as np

from ..numerics import Tensor, kernels


def pairwise_distances(conf):
    """Euclidean distance matrix of a conformation or pocket, as a constant Tensor."""
    return Tensor(kernels.pairwise_distances(conf.coords))


def random_rotation(rng, proper=True):
    """Haar-random orthogonal 3x3 matrix (det +1 unless ``proper`` is False)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if proper and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
