"""Cross-modal retrieval metrics.

Ranking ties are broken by ascending candidate index: a candidate with the
same score as the ground truth but a lower index ranks ahead of it.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from ..chemdata import PAIR_MODALITIES, split_filter
from ..errors import ConfigError, ContractError, DataError
from ..numerics import make_rng

# direction code -> (pair kind, query side 0=left 1=right)
DIRECTIONS = {
    "l2g": ("language-graph", 0),
    "g2l": ("language-graph", 1),
    "l2c": ("language-conformation", 0),
    "c2l": ("language-conformation", 1),
    "g2c": ("graph-conformation", 0),
    "c2g": ("graph-conformation", 1),
    "c2p": ("conformation-protein", 0),
    "p2c": ("conformation-protein", 1),
}
MODES = ("in_batch", "full_set")
EVAL_BATCH = 64
DEFAULT_KS = (1, 20)


def directions_for(kind):
    return [d for d, (k, _) in DIRECTIONS.items() if k == kind]


@dataclass
class SimilarityMatrix:
    scores: np.ndarray
    query_ids: list
    candidate_ids: list
    ground_truth: np.ndarray

    def __post_init__(self):
        if self.ground_truth.shape != (self.scores.shape[0],):
            raise ContractError("one ground-truth index per query required")
        if np.any(self.ground_truth < 0) or np.any(self.ground_truth >= self.scores.shape[1]):
            raise ContractError("ground-truth index outside the candidate set")
        if not np.all(np.isfinite(self.scores)):
            raise ContractError("similarity scores must be finite")

    @property
    def shape(self):
        return self.scores.shape


def similarity_matrix(queries, candidates, query_ids=None, candidate_ids=None, ground_truth=None):
    """Dot-product scores of unit-norm query rows against unit-norm candidate rows."""
    q = np.asarray(getattr(queries, "data", queries), dtype=np.float64)
    c = np.asarray(getattr(candidates, "data", candidates), dtype=np.float64)
    if q.ndim != 2 or c.ndim != 2 or q.shape[1] != c.shape[1]:
        raise ContractError(f"similarity_matrix: width mismatch {q.shape} vs {c.shape}")
    scores = q @ c.T
    if ground_truth is None:
        if q.shape[0] > c.shape[0]:
            raise ContractError("default diagonal ground truth needs at least as many candidates as queries")
        ground_truth = np.arange(q.shape[0])
    return SimilarityMatrix(
        scores,
        list(query_ids) if query_ids is not None else list(range(q.shape[0])),
        list(candidate_ids) if candidate_ids is not None else list(range(c.shape[0])),
        np.asarray(ground_truth, dtype=np.int64),
    )


def ground_truth_ranks(sim):
    """0-based rank of each query's ground-truth candidate."""
    s = sim.scores
    idx = np.arange(s.shape[0])
    gt = s[idx, sim.ground_truth][:, None]
    better = (s > gt).sum(axis=1)
    cand = np.arange(s.shape[1])[None, :]
    tied_before = ((s == gt) & (cand < sim.ground_truth[:, None])).sum(axis=1)
    return better + tied_before


def recall_at_k(sim, k):
    """Percentage of queries whose ground truth ranks within the top ``k``."""
    if k < 1:
        raise ContractError("k must be >= 1")
    if k > sim.scores.shape[1]:
        raise ContractError(f"k={k} exceeds the {sim.scores.shape[1]} candidates")
    return 100.0 * float(np.mean(ground_truth_ranks(sim) < k))


@dataclass
class RetrievalReport:
    direction: str
    mode: str
    recall_at: dict
    n_queries: int
    n_candidates: int
    split: str = "test"
    n_batches: int = 1
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "direction": self.direction,
            "mode": self.mode,
            "split": self.split,
            "recall": {str(k): v for k, v in sorted(self.recall_at.items())},
            "n_queries": self.n_queries,
            "n_candidates": self.n_candidates,
            "n_batches": self.n_batches,
            "degenerate": self.degenerate,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def paired_embeddings(model, dataset, kind, split):
    """Embeddings of both sides of every pair of ``kind`` in ``split``; row i of each is pair i."""
    manifest = split_filter(dataset.manifests[kind], split)
    if not manifest.entries:
        raise DataError(f"{kind} has no {split} pairs")
    lm, rm = PAIR_MODALITIES[kind]
    left = model.embed(lm, [dataset.get(e.left) for e in manifest.entries])
    right = model.embed(rm, [dataset.get(e.right) for e in manifest.entries])
    return manifest, left, right


def retrieval_from_embeddings(queries, candidates, direction, mode, ks=DEFAULT_KS, batch_size=EVAL_BATCH,
                              seed=0, split="test", ids=None):
    """Recall@K for paired rows (query i matches candidate i)."""
    n = queries.shape[0]
    ids = ids if ids is not None else list(range(n))
    if mode == "full_set":
        groups = [np.arange(n)]
    elif mode == "in_batch":
        if n < batch_size:
            raise DataError(f"in-batch retrieval needs at least {batch_size} pairs, {split} has {n}")
        order = make_rng(seed, "eval-batches", split).permutation(n)
        # the final partial batch is dropped
        groups = [order[i:i + batch_size] for i in range(0, n - batch_size + 1, batch_size)]
    else:
        raise ConfigError(f"unknown retrieval mode {mode!r}")
    n_cand = len(groups[0])
    usable = [k for k in ks if k <= n_cand]
    recalls = {k: [] for k in usable}
    for g in groups:
        sim = similarity_matrix(queries[g], candidates[g], [ids[i] for i in g], [ids[i] for i in g])
        ranks = ground_truth_ranks(sim)
        for k in usable:
            recalls[k].append(100.0 * float(np.mean(ranks < k)))
    report = RetrievalReport(direction, mode, {k: float(np.mean(v)) for k, v in recalls.items()},
                             n_queries=n if mode == "full_set" else len(groups) * batch_size,
                             n_candidates=n_cand, split=split, n_batches=len(groups),
                             degenerate=n_cand < 2)
    if len(usable) < len(ks):
        report.notes.append(f"K > {n_cand} candidates omitted")
    return report


def evaluate_retrieval(model, dataset, direction, mode="full_set", split="test", ks=DEFAULT_KS,
                       batch_size=EVAL_BATCH, seed=0, embeddings=None):
    if direction not in DIRECTIONS:
        raise ConfigError(f"unknown direction {direction!r}; expected one of {sorted(DIRECTIONS)}")
    kind, side = DIRECTIONS[direction]
    if embeddings is None:
        manifest, left, right = paired_embeddings(model, dataset, kind, split)
    else:
        manifest, left, right = embeddings
    q, c = (left, right) if side == 0 else (right, left)
    ids = [e.left if side == 0 else e.right for e in manifest.entries]
    return retrieval_from_embeddings(q, c, direction, mode, ks, batch_size, seed, split, ids)
