"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]

Each kernel runs on inputs the size of one training batch (16 molecules of
about 30 atoms, 64 Gaussian kernels). Outputs of the two backends are also
compared, so the script doubles as a quick consistency check.
"""
import argparse
import timeit

import numpy as np

from bindcore.numerics import kernels


def cases(rng):
    n_atoms, k, width = 16 * 30, 64, 64
    dist = rng.uniform(0.0, 8.0, size=(16, 30, 30))
    mu, sigma = np.linspace(0.0, 8.0, k), np.full(k, 0.5)
    out = kernels.gaussian_forward(dist, mu, sigma)
    gout = rng.normal(size=out.shape)
    scores = rng.normal(size=(16, 4, 30, 30))
    probs = kernels.softmax_lastdim(scores)
    gprobs = rng.normal(size=probs.shape)
    # messages along both directions of every bond
    index, src = rng.integers(0, n_atoms, size=2 * 16 * 32), rng.normal(size=(2 * 16 * 32, width))
    coords = rng.normal(scale=3.0, size=(30, 3))
    return {
        "scatter_add_rows": lambda: kernels.scatter_add_rows(index, src, n_atoms),
        "gaussian_forward": lambda: kernels.gaussian_forward(dist, mu, sigma),
        "gaussian_backward": lambda: kernels.gaussian_backward(dist, mu, sigma, out, gout),
        "pairwise_distances": lambda: kernels.pairwise_distances(coords),
        "softmax_lastdim": lambda: kernels.softmax_lastdim(scores),
        "softmax_lastdim_backward": lambda: kernels.softmax_lastdim_backward(probs, gprobs),
    }


def same(a, b):
    if isinstance(a, tuple):
        return max(same(x, y) for x, y in zip(a, b))
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    try:
        kernels.use_backend("compiled")
    except ImportError:
        print("compiled extension not built; only the python backend is available")
        return
    fns = cases(np.random.default_rng(1))
    print(f"{'kernel':26s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in fns.items():
        res, ms = {}, {}
        for backend in ("python", "compiled"):
            kernels.use_backend(backend)
            res[backend] = fn()
            t = timeit.repeat(fn, number=1, repeat=args.repeat)
            ms[backend] = 1e3 * min(t)
        diff = same(res["python"], res["compiled"])
        print(f"{name:26s} {ms['python']:10.3f} {ms['compiled']:12.3f} {ms['python'] / ms['compiled']:7.1f}x "
              f"{diff:11.1e}")
    kernels.use_backend("compiled")


if __name__ == "__main__":
    main()
