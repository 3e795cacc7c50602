"""Multi-pair contrastive training loop.

Each epoch interleaves batches round-robin over the active pair kinds (one
batch of each kind per cycle; a kind whose batches are exhausted is skipped
for the rest of the epoch). Every step updates only the two encoders and
heads involved in that pair kind.
"""
import json
import logging
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .. import numerics as nx
from ..chemdata import PAIR_KINDS, PAIR_MODALITIES, split_filter
from ..chemdata.manifest import ref_modality
from ..errors import ConfigError, ContractError, DataError
from ..evaluation.retrieval import EVAL_BATCH, directions_for, evaluate_retrieval, paired_embeddings
from ..numerics import make_rng
from .losses import symmetric_loss

log = logging.getLogger(__name__)


@dataclass
class AlignmentConfig:
    temperature: float = 1.0
    batch_size: int = 16
    max_epochs: int = 100
    lr: float = 0.001
    active_pairs: tuple = PAIR_KINDS
    schedule: str = "round_robin"
    seed: int = 0
    patience: int = 10
    eval_batch_size: int = EVAL_BATCH
    learn_temperature: bool = False

    def __post_init__(self):
        self.active_pairs = tuple(self.active_pairs)
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2")
        if not self.active_pairs:
            raise ConfigError("active_pairs must name at least one pair kind")
        bad = [k for k in self.active_pairs if k not in PAIR_KINDS]
        if bad:
            raise ConfigError(f"unknown pair kinds {bad}")
        if len(set(self.active_pairs)) != len(self.active_pairs):
            raise ConfigError("duplicate pair kinds in active_pairs")
        if self.max_epochs < 0 or self.patience < 1:
            raise ConfigError("max_epochs must be >= 0 and patience >= 1")
        if self.schedule != "round_robin":
            raise ConfigError(f"unsupported schedule {self.schedule!r}")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown alignment config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["active_pairs"] = list(self.active_pairs)
        return d


def train_step(model, kind, left_records, right_records, cfg):
    """One symmetric-loss Adam step on a homogeneous batch; returns the loss value."""
    if kind not in PAIR_MODALITIES:
        raise ContractError(f"unknown pair kind {kind!r}")
    if len(left_records) != len(right_records):
        raise ContractError("left and right batch sizes differ")
    if len(left_records) < 2:
        raise ContractError("a contrastive batch needs at least 2 pairs")
    lm, rm = PAIR_MODALITIES[kind]
    with nx.Tape() as tape:
        x = model.embed_batch(lm, model.featurize(lm, left_records))
        y = model.embed_batch(rm, model.featurize(rm, right_records))
        loss = symmetric_loss(x, y, cfg.temperature, model.log_temperature)
    tape.backward(loss)
    for m in (lm, rm):
        for st in (model.optim[m],):
            st.lr = cfg.lr
        model.step(m)
    if model.log_temperature is not None:
        model.optim["temperature"].lr = cfg.lr
        nx.adam_step({"log_temperature": model.log_temperature}, model.optim["temperature"])
    return float(loss.data)


def step_on_entries(model, dataset, kind, entries, cfg):
    """train_step on manifest entries; rejects batches that mix pair kinds."""
    want = PAIR_MODALITIES.get(kind)
    seen = {(ref_modality(e.left), ref_modality(e.right)) for e in entries}
    if seen != {want}:
        raise ContractError(f"batch for {kind} holds pairs of modalities {sorted(seen)}")
    return train_step(model, kind, [dataset.get(e.left) for e in entries], [dataset.get(e.right) for e in entries],
                      cfg)


def validation_recall(model, dataset, kinds, cfg):
    """In-batch R@1 on each kind's validation split: {kind: (mean, {direction: value})}."""
    out = {}
    for kind in kinds:
        emb = paired_embeddings(model, dataset, kind, "validation")
        n = len(emb[0].entries)
        bs = min(cfg.eval_batch_size, n)
        if bs < 2:
            raise DataError(f"{kind} needs at least 2 validation pairs")
        per = {d: evaluate_retrieval(model, dataset, d, "in_batch", "validation", ks=(1,), batch_size=bs,
                                     seed=cfg.seed, embeddings=emb).recall_at[1]
               for d in directions_for(kind)}
        out[kind] = (float(np.mean(list(per.values()))), per)
    return out


def _batches(entries, batch_size, rng):
    order = rng.permutation(len(entries))
    out = [[entries[i] for i in order[s:s + batch_size]] for s in range(0, len(order), batch_size)]
    return [b for b in out if len(b) >= 2]


def train(model, dataset, cfg, run_dir=None, on_epoch=None):
    """Train ``model`` in place; returns ``(model, metrics)``.

    ``metrics`` holds one record per (epoch, pair kind). The returned model
    carries the parameters of the best validation epoch. With ``run_dir``,
    ``best.ckpt``, ``last.ckpt`` and ``metrics.jsonl`` are written there.
    """
    for kind in cfg.active_pairs:
        if kind not in dataset.manifests:
            raise DataError(f"no manifest for active pair kind {kind}")
        if not split_filter(dataset.manifests[kind], "pretrain").entries:
            raise DataError(f"{kind} has no pretrain pairs")
    metrics = []
    if cfg.max_epochs == 0:
        return model, metrics
    run_dir = Path(run_dir) if run_dir else None
    metrics_fh = open(run_dir / "metrics.jsonl", "w", encoding="utf-8") if run_dir else None
    train_entries = {k: split_filter(dataset.manifests[k], "pretrain").entries for k in cfg.active_pairs}
    best_score, best_state, best_epoch, since_best = -np.inf, None, 0, 0
    extra = {"alignment": cfg.to_dict()}
    try:
        for epoch in range(1, cfg.max_epochs + 1):
            t0 = time.perf_counter()
            batches = {k: _batches(train_entries[k], cfg.batch_size, make_rng(cfg.seed, "shuffle", k, epoch))
                       for k in cfg.active_pairs}
            losses = {k: [] for k in cfg.active_pairs}
            n_cycles = max(len(b) for b in batches.values())
            for c in range(n_cycles):
                for kind in cfg.active_pairs:
                    if c < len(batches[kind]):
                        losses[kind].append(step_on_entries(model, dataset, kind, batches[kind][c], cfg))
            val = validation_recall(model, dataset, cfg.active_pairs, cfg)
            score = float(np.mean([v[0] for v in val.values()]))
            for kind in cfg.active_pairs:
                rec = {"epoch": epoch, "pair_kind": kind, "loss": float(np.mean(losses[kind])),
                       "val_recall_at_1": val[kind][0], "val_recall_at_1_by_direction": val[kind][1]}
                metrics.append(rec)
                if metrics_fh:
                    metrics_fh.write(json.dumps(rec, sort_keys=True) + "\n")
                    metrics_fh.flush()
            log.info("epoch %d: %s val R@1 %.2f (%.1fs)", epoch,
                     " ".join(f"{k}={np.mean(losses[k]):.4f}" for k in cfg.active_pairs), score,
                     time.perf_counter() - t0)
            if on_epoch:
                on_epoch(epoch, metrics[-len(cfg.active_pairs):])
            if score > best_score:
                best_score, best_state, best_epoch, since_best = score, model.state_dict(), epoch, 0
                if run_dir:
                    model.save(run_dir / "best.ckpt", {**extra, "epoch": epoch})
            else:
                since_best += 1
                if since_best >= cfg.patience:
                    log.info("early stop at epoch %d (best epoch %d)", epoch, best_epoch)
                    break
        if run_dir:
            model.save(run_dir / "last.ckpt", {**extra, "epoch": epoch})
    finally:
        if metrics_fh:
            metrics_fh.close()
    model.load_state_dict(best_state)
    return model, metrics
