"""Turn lists of records into padded / concatenated numpy batches."""
from dataclasses import dataclass

import numpy as np

from ..chemdata.elements import N_ATOM_TYPES
from ..numerics import kernels

MASK_BIAS = -1e9


@dataclass
class TextBatch:
    ids: np.ndarray  # [B, L] int
    mask: np.ndarray  # [B, L] bool

    @classmethod
    def from_sequences(cls, seqs, max_len=128):
        lengths = [min(len(s.token_ids), max_len) for s in seqs]
        L = max(lengths)
        ids = np.zeros((len(seqs), L), dtype=np.int64)
        mask = np.zeros((len(seqs), L), dtype=bool)
        for b, (s, n) in enumerate(zip(seqs, lengths)):
            ids[b, :n] = s.token_ids[:n]
            mask[b, :n] = True
        return cls(ids, mask)

    def __len__(self):
        return self.ids.shape[0]


@dataclass
class GraphBatch:
    types: np.ndarray  # [Ntot]
    src: np.ndarray  # [2E] message source (both directions of every bond)
    dst: np.ndarray  # [2E]
    bond_order: np.ndarray  # [2E]
    graph_index: np.ndarray  # [Ntot]
    n_graphs: int

    @classmethod
    def from_graphs(cls, graphs):
        types, src, dst, order, gidx = [], [], [], [], []
        offset = 0
        for g_i, g in enumerate(graphs):
            types.extend(g.atom_types)
            gidx.extend([g_i] * g.n_atoms)
            for i, j, o in g.bonds:
                src += [i + offset, j + offset]
                dst += [j + offset, i + offset]
                order += [o, o]
            offset += g.n_atoms
        return cls(
            np.asarray(types, dtype=np.int64),
            np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64),
            np.asarray(order, dtype=np.int64),
            np.asarray(gidx, dtype=np.int64),
            len(graphs),
        )

    def __len__(self):
        return self.n_graphs


@dataclass
class StructBatch:
    types: np.ndarray  # [B, N]
    mask: np.ndarray  # [B, N]
    dist: np.ndarray  # [B, N, N]
    pair_types: np.ndarray  # [B, N, N]

    @classmethod
    def from_structures(cls, structs):
        N = max(s.n_atoms for s in structs)
        B = len(structs)
        types = np.zeros((B, N), dtype=np.int64)
        mask = np.zeros((B, N), dtype=bool)
        dist = np.zeros((B, N, N))
        for b, s in enumerate(structs):
            n = s.n_atoms
            types[b, :n] = s.atom_types
            mask[b, :n] = True
            dist[b, :n, :n] = kernels.pairwise_distances(s.coords)
        lo = np.minimum(types[:, :, None], types[:, None, :])
        hi = np.maximum(types[:, :, None], types[:, None, :])
        return cls(types, mask, dist, lo * N_ATOM_TYPES + hi)

    def __len__(self):
        return self.types.shape[0]

    def key_bias(self, n_heads=None):
        """Additive attention bias that hides padded keys: [B, 1, N] or [B, 1, 1, N]."""
        bias = np.where(self.mask, 0.0, MASK_BIAS)
        return bias[:, None, None, :] if n_heads else bias[:, None, :]
