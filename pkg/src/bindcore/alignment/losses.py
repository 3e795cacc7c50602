import numpy as np

from .. import numerics as nx
from ..errors import ContractError

NORM_TOL = 1e-3


def _check_pair(x, y):
    if x.ndim != 2 or x.shape != y.shape:
        raise ContractError(f"info_nce needs two [B, D] batches of equal shape, got {x.shape} and {y.shape}")
    if x.shape[0] < 2:
        raise ContractError("info_nce needs a batch of at least 2 (one in-batch negative)")
    for name, t in (("x", x), ("y", y)):
        dev = np.abs(np.linalg.norm(t.data, axis=1) - 1.0).max()
        if dev > NORM_TOL:
            raise ContractError(f"info_nce: rows of {name} are not unit-norm (max deviation {dev:.2e})")


def info_nce(x, y, temperature=1.0, log_temperature=None):
    """Mean over i of -log softmax_j(x_i . y_j / tau)[i]; negatives are the other rows of y.

    ``log_temperature`` (a 1-element Tensor) replaces the fixed temperature
    when the temperature is learned.
    """
    x, y = nx.as_tensor(x), nx.as_tensor(y)
    _check_pair(x, y)
    sims = nx.matmul(x, nx.transpose(y))
    if log_temperature is not None:
        logits = nx.mul(sims, nx.exp(nx.scale(log_temperature, -1.0)))
    else:
        if not temperature > 0:
            raise ContractError("temperature must be positive")
        logits = nx.scale(sims, 1.0 / float(temperature))
    positives = nx.sum_(nx.mul(logits, np.eye(x.shape[0])), axis=1)
    return nx.mean(nx.sub(nx.logsumexp(logits), positives))


def symmetric_loss(x, y, temperature=1.0, log_temperature=None):
    return nx.add(info_nce(x, y, temperature, log_temperature), info_nce(y, x, temperature, log_temperature))
