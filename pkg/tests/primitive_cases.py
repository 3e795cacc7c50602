"""Random finite-difference cases for every differentiable primitive.

Each builder takes a numpy Generator and returns ``(fn, arrays)`` where
``fn(*tensors)`` is scalar. Outputs are contracted against a fixed random
weight so that every output entry contributes to the checked gradient.
"""
import numpy as np

from bindcore import numerics as nx


def _contract(y, rng):
    w = rng.normal(size=y.shape)
    return nx.sum_(nx.mul(y, w))


def _away_from_zero(rng, shape, margin=1e-2):
    x = rng.normal(size=shape)
    return np.where(np.abs(x) < margin, np.sign(x + 1e-300) * margin * 2, x)


def case_matmul(rng):
    w = rng.normal(size=(3, 2))
    return (lambda a, b: _contract_fixed(nx.matmul(a, b), w)), [rng.normal(size=(3, 4)), rng.normal(size=(4, 2))]


def _contract_fixed(y, w):
    return nx.sum_(nx.mul(y, w))


def case_batched_matmul(rng):
    w = rng.normal(size=(2, 3, 5))
    return (lambda a, b: _contract_fixed(nx.matmul(a, b), w)), [rng.normal(size=(2, 3, 4)), rng.normal(size=(2, 4, 5))]


def case_shared_weight_matmul(rng):
    w = rng.normal(size=(2, 3, 5))
    return (lambda a, b: _contract_fixed(nx.matmul(a, b), w)), [rng.normal(size=(2, 3, 4)), rng.normal(size=(4, 5))]


def case_add(rng):
    w = rng.normal(size=(3, 4))
    return (lambda a, b: _contract_fixed(nx.add(a, b), w)), [rng.normal(size=(3, 4)), rng.normal(size=(4,))]


def case_sub(rng):
    w = rng.normal(size=(3, 4))
    return (lambda a, b: _contract_fixed(nx.sub(a, b), w)), [rng.normal(size=(3, 4)), rng.normal(size=(3, 4))]


def case_mul(rng):
    w = rng.normal(size=(3, 4))
    return (lambda a, b: _contract_fixed(nx.mul(a, b), w)), [rng.normal(size=(3, 4)), rng.normal(size=(3, 1))]


def case_scale(rng):
    w = rng.normal(size=(5,))
    s = float(rng.normal())
    return (lambda a: _contract_fixed(nx.scale(a, s), w)), [rng.normal(size=(5,))]


def case_relu(rng):
    w = rng.normal(size=(4, 3))
    return (lambda a: _contract_fixed(nx.relu(a), w)), [_away_from_zero(rng, (4, 3))]


def case_exp(rng):
    w = rng.normal(size=(6,))
    return (lambda a: _contract_fixed(nx.exp(a), w)), [rng.normal(size=(6,))]


def case_log(rng):
    w = rng.normal(size=(6,))
    return (lambda a: _contract_fixed(nx.log(a), w)), [rng.uniform(0.5, 3.0, size=(6,))]


def case_sum(rng):
    w = rng.normal(size=(3,))
    return (lambda a: _contract_fixed(nx.sum_(a, axis=1), w)), [rng.normal(size=(3, 4))]


def case_mean(rng):
    w = rng.normal(size=(4,))
    return (lambda a: _contract_fixed(nx.mean(a, axis=0), w)), [rng.normal(size=(3, 4))]


def case_transpose(rng):
    w = rng.normal(size=(4, 2, 3))
    return (lambda a: _contract_fixed(nx.transpose(a, (2, 0, 1)), w)), [rng.normal(size=(2, 3, 4))]


def case_reshape(rng):
    w = rng.normal(size=(6, 2))
    return (lambda a: _contract_fixed(nx.reshape(a, (6, 2)), w)), [rng.normal(size=(3, 4))]


def case_concat(rng):
    w = rng.normal(size=(3, 5))
    return (lambda a, b: _contract_fixed(nx.concat([a, b], axis=1), w)), [rng.normal(size=(3, 2)), rng.normal(size=(3, 3))]


def case_gather(rng):
    idx = rng.integers(0, 5, size=(7,))
    w = rng.normal(size=(7, 3))
    return (lambda t: _contract_fixed(nx.gather(t, idx), w)), [rng.normal(size=(5, 3))]


def case_scatter_sum(rng):
    idx = rng.integers(0, 4, size=(9,))
    w = rng.normal(size=(4, 3))
    return (lambda s: _contract_fixed(nx.scatter_sum(s, idx, 4), w)), [rng.normal(size=(9, 3))]


def case_softmax(rng):
    w = rng.normal(size=(3, 5))
    return (lambda a: _contract_fixed(nx.softmax_rows(a), w)), [rng.normal(size=(3, 5)) * 3]


def case_logsumexp(rng):
    w = rng.normal(size=(4,))
    return (lambda a: _contract_fixed(nx.logsumexp(a), w)), [rng.normal(size=(4, 6)) * 3]


def case_l2_normalize(rng):
    w = rng.normal(size=(3, 4))
    return (lambda a: _contract_fixed(nx.l2_normalize(a), w)), [rng.normal(size=(3, 4))]


def case_mean_pool(rng):
    mask = np.array([[True, False, True, True], [False, True, True, False]])
    w = rng.normal(size=(2, 3))
    return (lambda a: _contract_fixed(nx.mean_pool(a, mask), w)), [rng.normal(size=(2, 4, 3))]


def case_layer_norm(rng):
    w = rng.normal(size=(3, 5))
    return (lambda x, g, b: _contract_fixed(nx.layer_norm(x, g, b), w)), [
        rng.normal(size=(3, 5)),
        rng.uniform(0.5, 1.5, size=(5,)),
        rng.normal(size=(5,)),
    ]


def case_gaussian_kernel(rng):
    w = rng.normal(size=(2, 3, 4))
    return (lambda x, mu, s: _contract_fixed(nx.gaussian_kernel(x, mu, s), w)), [
        rng.uniform(0, 4, size=(2, 3)),
        rng.uniform(0, 4, size=(4,)),
        rng.uniform(0.5, 2.0, size=(4,)),
    ]


def case_mlp(rng):
    """Composite: two-layer MLP with a normalised output."""
    x = rng.normal(size=(4, 3))
    w = rng.normal(size=(4, 3))
    # fixed offset keeps rows away from zero when every hidden unit is off
    c = rng.choice([-1.0, 1.0], size=3) * rng.uniform(1.0, 2.0, size=3)

    def fn(w1, b1, w2):
        h = nx.relu(nx.add(nx.matmul(x, w1), b1))
        return _contract_fixed(nx.l2_normalize(nx.add(nx.matmul(h, w2), c)), w)

    return fn, [rng.normal(size=(3, 5)), rng.normal(size=(5,)) + 0.5, rng.normal(size=(5, 3))]


CASES = {
    name[len("case_"):]: fn
    for name, fn in sorted(globals().items())
    if name.startswith("case_") and callable(fn)
}
