"""Modality-subset ablation: train one model per set of active pair kinds and compare L2G / L2C."""
import csv
import io
from dataclasses import replace

import numpy as np

from ..chemdata import PAIR_KINDS, Vocabulary, pretrain_texts
from ..errors import ConfigError
from ..numerics import make_rng
from .retrieval import evaluate_retrieval, paired_embeddings

# Pair-kind configurations in the row order of the reference ablation table.
STANDARD_GRID = (
    ("language-graph",),
    ("language-conformation",),
    ("graph-conformation",),
    ("language-graph", "language-conformation"),
    ("language-graph", "graph-conformation"),
    ("language-conformation", "graph-conformation"),
    PAIR_KINDS,
)
CSV_FIELDS = ("label", "pairs", "seed", "l2g_r1", "l2c_r1")


def config_label(pairs):
    if set(pairs) == set(PAIR_KINDS):
        return "all four pairs"
    return " & ".join("({})".format(", ".join(k.split("-"))) for k in pairs)


def matched_vs_mismatched(q, c, n_shuffles=10_000, seed=0):
    """Permutation test that matched rows are more similar than mismatched ones.

    The statistic is mean cosine over matched pairs minus mean over all
    mismatched pairs. The null shuffles the pairing. Returns ``(margin, p)``
    with ``p = (1 + #{null >= observed}) / (1 + n_shuffles)``.
    """
    s = np.asarray(q) @ np.asarray(c).T
    n = s.shape[0]
    if n < 2:
        raise ConfigError("permutation test needs at least 2 pairs")
    total = s.sum()

    def stat(matched_sum):
        return matched_sum / n - (total - matched_sum) / (n * n - n)

    observed = stat(np.trace(s))
    rng = make_rng(seed, "permutation-test")
    rows = np.arange(n)
    null = np.empty(n_shuffles)
    for i in range(n_shuffles):
        null[i] = stat(s[rows, rng.permutation(n)].sum())
    p = (1 + int(np.sum(null >= observed))) / (1 + n_shuffles)
    return float(observed), float(p)


def ablation_run(dataset, pair_subsets, cfg, model_factory, split="test", run_emergence_test=True):
    """Train one model per configuration from the same seed; one result row per configuration.

    ``model_factory(vocab, seed)`` builds a fresh model. Every configuration
    shares the same vocabulary and seed, so rows differ only in the active
    pair kinds.
    """
    from ..alignment.training import train

    pair_subsets = [tuple(p) for p in pair_subsets]
    if not pair_subsets:
        raise ConfigError("ablation grid is empty")
    for p in pair_subsets:
        if not p:
            raise ConfigError("every ablation configuration needs at least one pair kind")
    vocab = Vocabulary.build(pretrain_texts(dataset))
    rows = []
    for pairs in pair_subsets:
        model = model_factory(vocab, cfg.seed)
        model, _ = train(model, dataset, replace(cfg, active_pairs=pairs))
        rows.append(ablation_row(model, dataset, pairs, cfg.seed, split, run_emergence_test))
    return rows


def ablation_row(model, dataset, pairs, seed, split="test", run_emergence_test=True):
    """Result row for a model already trained on ``pairs``: full-set L2G / L2C R@1 and the permutation test."""
    row = {"label": config_label(pairs), "pairs": ";".join(pairs), "seed": seed}
    for d in ("l2g", "l2c"):
        row[f"{d}_r1"] = evaluate_retrieval(model, dataset, d, "full_set", split, ks=(1,)).recall_at[1]
    if run_emergence_test:
        _, lang, conf = paired_embeddings(model, dataset, "language-conformation", split)
        row["l2c_margin"], row["l2c_perm_p"] = matched_vs_mismatched(lang, conf, seed=seed)
    return row


def rows_to_csv(rows):
    extra = [k for k in rows[0] if k not in CSV_FIELDS] if rows else []
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(CSV_FIELDS) + extra, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
