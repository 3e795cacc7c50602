import numpy as np

from ..errors import CheckpointError
from ..numerics import Tensor, layer_norm


class Module:
    """Named parameter container. Subclasses fill ``self.params`` in construction order."""

    def __init__(self):
        self.params = {}

    def param(self, name, value):
        t = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True, name=name)
        self.params[name] = t
        return t

    def __getitem__(self, name):
        return self.params[name]

    def n_parameters(self):
        return int(sum(p.data.size for p in self.params.values()))

    def state_dict(self):
        return {k: p.data.copy() for k, p in self.params.items()}

    def load_state_dict(self, state, prefix=""):
        for k, p in self.params.items():
            key = prefix + k
            if key not in state:
                raise CheckpointError(f"checkpoint lacks parameter {key}")
            arr = np.asarray(state[key], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise CheckpointError(f"parameter {key}: shape {arr.shape} != expected {p.data.shape}")
            p.data = arr.copy()
            p.grad = None

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None


def glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


def ln(mod, prefix, x):
    return layer_norm(x, mod[prefix + "_g"], mod[prefix + "_b"])


def add_ln(mod, prefix, width):
    mod.param(prefix + "_g", np.ones(width))
    mod.param(prefix + "_b", np.zeros(width))
