import numpy as np

from .. import numerics as nx
from ..errors import DimensionError
from ..numerics import make_rng
from .base import Module, glorot


class ProjectionHead(Module):
    """Bias-free linear map into the shared space followed by L2 normalisation."""

    def __init__(self, in_width, out_dim=64, modality="", seed=0, weight=None):
        super().__init__()
        self.in_width, self.out_dim = in_width, out_dim
        if weight is None:
            weight = glorot(make_rng(seed, "init", "head", modality), in_width, out_dim)
        self.param("w", np.asarray(weight, dtype=np.float64))

    def __call__(self, e):
        return project(self, e)


def project(head, e):
    e = nx.as_tensor(e)
    if e.shape[-1] != head.in_width:
        raise DimensionError(f"projection head expects width {head.in_width}, got {e.shape[-1]}")
    if e.ndim == 1:
        return nx.reshape(nx.l2_normalize(nx.matmul(nx.reshape(e, (1, -1)), head["w"])), (head.out_dim,))
    return nx.l2_normalize(nx.matmul(e, head["w"]))
