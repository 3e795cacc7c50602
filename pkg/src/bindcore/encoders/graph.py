"""Graph isomorphism network over atom/bond types with mean readout."""
import numpy as np

from .. import numerics as nx
from ..chemdata.elements import N_ATOM_TYPES
from ..numerics import make_rng
from .base import Module, glorot
from .batching import GraphBatch

N_BOND_ORDERS = 5  # index 0 unused; 1, 2, 3 and 4 = aromatic


class GraphEncoder(Module):
    """h_v <- MLP((1 + eps) h_v + sum_u (h_u + bond(e_uv))), eps learnable per layer."""

    def __init__(self, width=64, n_layers=2, seed=0):
        super().__init__()
        self.width, self.n_layers = width, n_layers
        rng = make_rng(seed, "init", "graph")
        H = width
        self.param("atom_emb", rng.normal(0.0, 1.0 / np.sqrt(H), size=(N_ATOM_TYPES, H)))
        for l in range(n_layers):
            p = f"gin{l}."
            self.param(p + "eps", np.zeros(1))
            self.param(p + "bond_emb", rng.normal(0.0, 0.1, size=(N_BOND_ORDERS, H)))
            self.param(p + "w1", glorot(rng, H, H))
            self.param(p + "b1", np.zeros(H))
            self.param(p + "w2", glorot(rng, H, H))
            self.param(p + "b2", np.zeros(H))

    def config(self):
        return {"width": self.width, "n_layers": self.n_layers}

    def forward(self, batch: GraphBatch):
        n = len(batch.types)
        h = nx.gather(self["atom_emb"], batch.types)
        for l in range(self.n_layers):
            p = f"gin{l}."
            z = nx.mul(h, nx.add(self[p + "eps"], 1.0))
            if len(batch.src):
                msg = nx.add(nx.gather(h, batch.src), nx.gather(self[p + "bond_emb"], batch.bond_order))
                z = nx.add(z, nx.scatter_sum(msg, batch.dst, n))
            z = nx.relu(nx.add(nx.matmul(z, self[p + "w1"]), self[p + "b1"]))
            h = nx.add(nx.matmul(z, self[p + "w2"]), self[p + "b2"])
            if l < self.n_layers - 1:
                h = nx.relu(h)
        counts = np.bincount(batch.graph_index, minlength=batch.n_graphs).astype(np.float64)
        pooled = nx.scatter_sum(h, batch.graph_index, batch.n_graphs)
        return nx.mul(pooled, (1.0 / counts)[:, None])

    def encode(self, graph):
        return nx.reshape(self.forward(GraphBatch.from_graphs([graph])), (self.width,))
