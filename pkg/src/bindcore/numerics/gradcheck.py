"""Central finite-difference gradient oracle.

Independent of the tape: it only evaluates the forward function on perturbed
copies of the input arrays.
"""
import numpy as np

from .tensor import Tape, Tensor


def numerical_grad(f, arrays, step=1e-5, indices=None):
    """d f / d array for each array; ``f`` maps a list of ndarrays to a float.

    ``indices`` optionally limits each array to the listed flat positions;
    the other entries of the result stay zero.
    """
    grads = []
    for k, a in enumerate(arrays):
        g = np.zeros_like(a)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for i in (range(flat.size) if indices is None else indices[k]):
            orig = flat[i]
            flat[i] = orig + step
            fp = f(arrays)
            flat[i] = orig - step
            fm = f(arrays)
            flat[i] = orig
            gflat[i] = (fp - fm) / (2.0 * step)
        grads.append(g)
    return grads


def relative_error(a, b, floor=1e-8):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), floor))


def check_gradients(fn, arrays, step=1e-5, sample=None, rng=None):
    """Compare autodiff and central differences for a scalar-valued ``fn(*tensors)``.

    Returns the worst relative error over all inputs. With ``sample``, only
    that many randomly chosen entries of each input are differenced (drawn
    from ``rng``), which keeps checks of large parameter sets affordable.
    """
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    with Tape() as tape:
        out = fn(*leaves)
    tape.backward(out)
    # an input the output never reached has a zero gradient
    analytic = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in leaves]

    def f(arrs):
        return float(fn(*[Tensor(a) for a in arrs]).data.reshape(-1)[0])

    if sample is None:
        numeric = numerical_grad(f, arrays, step)
        return max(relative_error(a, n) for a, n in zip(analytic, numeric))
    rng = rng if rng is not None else np.random.default_rng(0)
    idx = [rng.choice(a.size, size=min(sample, a.size), replace=False) for a in arrays]
    numeric = numerical_grad(f, arrays, step, idx)
    return max(relative_error(a.reshape(-1)[i], n.reshape(-1)[i]) for a, n, i in zip(analytic, numeric, idx))
