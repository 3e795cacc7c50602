"""Small pre-norm transformer over word tokens, mean-pooled to one vector."""
import numpy as np

from .. import numerics as nx
from ..errors import ContractError
from ..numerics import make_rng
from .base import Module, add_ln, glorot, ln
from .batching import MASK_BIAS, TextBatch


class TextEncoder(Module):
    def __init__(self, vocab_size, width=64, n_layers=2, max_len=128, mlp_ratio=2, seed=0):
        super().__init__()
        self.vocab_size, self.width, self.n_layers, self.max_len = vocab_size, width, n_layers, max_len
        rng = make_rng(seed, "init", "language")
        H, F = width, width * mlp_ratio
        self.param("tok_emb", rng.normal(0.0, 1.0 / np.sqrt(H), size=(vocab_size, H)))
        self.param("pos_emb", rng.normal(0.0, 0.1, size=(max_len, H)))
        for l in range(n_layers):
            p = f"block{l}."
            add_ln(self, p + "ln1", H)
            for w in ("wq", "wk", "wv", "wo"):
                self.param(p + w, glorot(rng, H, H))
            add_ln(self, p + "ln2", H)
            self.param(p + "w1", glorot(rng, H, F))
            self.param(p + "b1", np.zeros(F))
            self.param(p + "w2", glorot(rng, F, H))
            self.param(p + "b2", np.zeros(H))
        add_ln(self, "ln_out", H)

    def config(self):
        return {"vocab_size": self.vocab_size, "width": self.width, "n_layers": self.n_layers, "max_len": self.max_len}

    def forward(self, batch: TextBatch):
        if batch.ids.size and (batch.ids.min() < 0 or batch.ids.max() >= self.vocab_size):
            raise ContractError(f"token id out of range [0, {self.vocab_size})")
        L = batch.ids.shape[1]
        x = nx.add(nx.gather(self["tok_emb"], batch.ids), nx.gather(self["pos_emb"], np.arange(L)))
        bias = np.where(batch.mask, 0.0, MASK_BIAS)[:, None, :]
        inv = 1.0 / np.sqrt(self.width)
        for l in range(self.n_layers):
            p = f"block{l}."
            y = ln(self, p + "ln1", x)
            q = nx.matmul(y, self[p + "wq"])
            k = nx.matmul(y, self[p + "wk"])
            v = nx.matmul(y, self[p + "wv"])
            att = nx.softmax_rows(nx.add(nx.scale(nx.matmul(q, nx.transpose(k, (0, 2, 1))), inv), bias))
            x = nx.add(x, nx.matmul(nx.matmul(att, v), self[p + "wo"]))
            y = ln(self, p + "ln2", x)
            hid = nx.relu(nx.add(nx.matmul(y, self[p + "w1"]), self[p + "b1"]))
            x = nx.add(x, nx.add(nx.matmul(hid, self[p + "w2"]), self[p + "b2"]))
        x = ln(self, "ln_out", x)
        return nx.mean_pool(x, batch.mask)

    def encode(self, seq):
        return nx.reshape(self.forward(TextBatch.from_sequences([seq], self.max_len)), (self.width,))
