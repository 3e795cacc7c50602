"""Distance-aware transformer for 3D atom sets (conformations and pockets).

Geometry enters only through interatomic distances: each pair's distance is
affinely rescaled per pair type, expanded in Gaussian kernels, projected to
one bias channel per attention head, and the bias channels are refreshed by
every layer's query-key products.
"""
import math

import numpy as np

from .. import numerics as nx
from ..chemdata.elements import N_ATOM_TYPES, N_PAIR_TYPES
from ..errors import ContractError
from ..numerics import make_rng
from .base import Module, add_ln, glorot, ln
from .batching import StructBatch

KERNEL_RANGE = 12.0  # Angstrom span covered by the kernel centres at init


def gaussian_pair_features(d, t, a, b, mu, sigma):
    """Kernel expansion of one pair (or an array of pairs) with pair types ``t``.

    Component k is N(a[t] * d + b[t]; mu[k], sigma[k]).
    """
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0):
        raise ContractError("pair distance must be non-negative")
    sigma = sigma if isinstance(sigma, nx.Tensor) else np.asarray(sigma, dtype=np.float64)
    if np.any((sigma.data if isinstance(sigma, nx.Tensor) else sigma) <= 0):
        raise ContractError("every kernel width sigma must be positive")
    t = np.asarray(t, dtype=np.int64)
    x = nx.add(nx.mul(nx.gather(a, t), d), nx.gather(b, t))
    return nx.gaussian_kernel(x, mu, sigma)


class UniMolEncoder(Module):
    def __init__(self, width=64, n_layers=2, n_heads=4, n_kernels=None, ffn_ratio=2, modality="conformation", seed=0):
        super().__init__()
        if width % n_heads:
            raise ContractError(f"width {width} is not divisible by {n_heads} heads")
        n_kernels = n_kernels or width
        self.width, self.n_layers, self.n_heads, self.n_kernels = width, n_layers, n_heads, n_kernels
        self.ffn_ratio, self.modality = ffn_ratio, modality
        rng = make_rng(seed, "init", modality)
        D, K, Hd = width, n_kernels, n_heads
        # one-hot atom features times W_h is a row lookup
        self.param("atom_emb", rng.normal(0.0, 1.0 / np.sqrt(D), size=(N_ATOM_TYPES, D)))
        self.param("pair_a", np.ones(N_PAIR_TYPES))
        self.param("pair_b", np.zeros(N_PAIR_TYPES))
        self.param("kernel_mu", np.linspace(0.0, KERNEL_RANGE, K))
        self.param("kernel_log_sigma", np.full(K, np.log(KERNEL_RANGE / K)))
        self.param("pair_proj", glorot(rng, K, Hd))
        for l in range(n_layers):
            p = f"layer{l}."
            add_ln(self, p + "ln1", D)
            for w in ("wq", "wk", "wv"):
                self.param(p + w, glorot(rng, D, D))
            if ffn_ratio:
                add_ln(self, p + "ln2", D)
                self.param(p + "w1", glorot(rng, D, D * ffn_ratio))
                self.param(p + "b1", np.zeros(D * ffn_ratio))
                self.param(p + "w2", glorot(rng, D * ffn_ratio, D))
                self.param(p + "b2", np.zeros(D))
        add_ln(self, "ln_out", D)

    def config(self):
        return {"width": self.width, "n_layers": self.n_layers, "n_heads": self.n_heads,
                "n_kernels": self.n_kernels, "ffn_ratio": self.ffn_ratio}

    def kernel_sigma(self):
        return nx.exp(self["kernel_log_sigma"])

    def pair_features(self, batch):
        """Gaussian pair features p_ij, shape [B, N, N, K]."""
        return gaussian_pair_features(batch.dist, batch.pair_types, self["pair_a"], self["pair_b"],
                                      self["kernel_mu"], self.kernel_sigma())

    def initial_pair_bias(self, batch):
        """q^0: pair features projected to one channel per head, [B, Hd, N, N]."""
        q = nx.matmul(self.pair_features(batch), self["pair_proj"])
        return nx.transpose(q, (0, 3, 1, 2))

    def layer(self, h, q, l, key_bias=None, norm=True, residual=True):
        return unimol_layer(self, h, q, l, key_bias, norm=norm, residual=residual)

    def forward(self, batch: StructBatch, zero_pair_bias=False):
        h = nx.gather(self["atom_emb"], batch.types)
        B, N = batch.types.shape
        if zero_pair_bias:
            q = nx.Tensor(np.zeros((B, self.n_heads, N, N)))
        else:
            q = self.initial_pair_bias(batch)
        key_bias = batch.key_bias(self.n_heads)
        for l in range(self.n_layers):
            h, q = unimol_layer(self, h, q, l, key_bias)
            if self.ffn_ratio:
                p = f"layer{l}."
                y = ln(self, p + "ln2", h)
                hid = nx.relu(nx.add(nx.matmul(y, self[p + "w1"]), self[p + "b1"]))
                h = nx.add(h, nx.add(nx.matmul(hid, self[p + "w2"]), self[p + "b2"]))
        h = ln(self, "ln_out", h)
        return nx.mean_pool(h, batch.mask)

    def encode(self, struct):
        return nx.reshape(self.forward(StructBatch.from_structures([struct])), (self.width,))


def unimol_layer(enc, h, q, l, key_bias=None, norm=True, residual=True):
    """One attention layer with pair bias.

    h: [B, N, D] atom states; q: [B, Hd, N, N] per-head pair channels.
    Returns (h', q') with q' = q + QK^T / sqrt(D) and
    h' = [h +] concat_h softmax(Q_h K_h^T / sqrt(d_head) + q_h) V_h.
    """
    B, N, D = h.shape
    Hd = enc.n_heads
    if q.shape != (B, Hd, N, N):
        raise ContractError(f"pair bias shape {q.shape} does not match {Hd} heads over {N} atoms")
    dh = D // Hd
    p = f"layer{l}."
    y = ln(enc, p + "ln1", h) if norm else h

    def heads(w):
        return nx.transpose(nx.reshape(nx.matmul(y, enc[p + w]), (B, N, Hd, dh)), (0, 2, 1, 3))

    Q, K, V = heads("wq"), heads("wk"), heads("wv")
    scores = nx.matmul(Q, nx.transpose(K, (0, 1, 3, 2)))  # [B, Hd, N, N]
    logits = nx.add(nx.scale(scores, 1.0 / math.sqrt(dh)), q)
    if key_bias is not None:
        logits = nx.add(logits, key_bias)
    att = nx.softmax_rows(logits)
    out = nx.reshape(nx.transpose(nx.matmul(att, V), (0, 2, 1, 3)), (B, N, D))
    h_new = nx.add(h, out) if residual else out
    q_new = nx.add(q, nx.scale(scores, 1.0 / math.sqrt(D)))
    return h_new, q_new
