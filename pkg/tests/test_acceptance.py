"""Acceptance suite: one test per criterion, each reporting a pass/fail line.

Criteria 5 to 7 share one synthetic corpus (2,000 samples, latent_dim 8,
noise 0.05) and default hyperparameters (D = 64, batch 16, lr 1e-3, tau 1,
up to 100 epochs with early stopping on validation R@1). The all-pairs model
trained for criterion 5 doubles as the all-pairs row of the ablation: same
seed and configuration, so training it again would reproduce it bit for bit.
"""
import json
import math
import time

import numpy as np
import pytest

from bindcore.alignment import AlignmentConfig, JointModel, info_nce, symmetric_loss, train, train_step
from bindcore.chemdata import (
    PAIR_KINDS,
    PAIR_MODALITIES,
    REFERENCE_COUNTS,
    PairEntry,
    PairManifest,
    TokenSequence,
    Vocabulary,
    count_report,
    generate_synthetic_m4,
    parse_manifest,
    pretrain_texts,
    random_rotation,
    split_filter,
    write_manifest,
)
from bindcore.cli import main
from bindcore.encoders import (
    GraphBatch,
    GraphEncoder,
    ProjectionHead,
    StructBatch,
    TextBatch,
    TextEncoder,
    UniMolEncoder,
    encode_conformation,
    encode_graph,
    encode_pocket,
    project,
)
from bindcore.evaluation import (
    STANDARD_GRID,
    ablation_row,
    ablation_run,
    directions_for,
    evaluate_retrieval,
    retrieval_from_embeddings,
)
from bindcore.numerics.gradcheck import check_gradients

from acceptance_log import report
from oracles import module_gradcheck, random_graph, random_structure
from primitive_cases import CASES

TRIALS = 100
ALL_PAIRS = tuple(PAIR_KINDS)
EMERGENT = ("language-graph", "graph-conformation")
GC_ONLY = ("graph-conformation",)


# -- 1. gradients ----------------------------------------------------------------------------


def encoder_trial(kind, seed):
    """Worst relative gradient error for one random small encoder, batch and head."""
    rng = np.random.default_rng(seed)
    head = ProjectionHead(8, 4, seed=seed, modality=kind)
    if kind == "language":
        enc = TextEncoder(10, width=8, max_len=6, seed=seed)
        seqs = [TokenSequence(rng.integers(0, 10, size=rng.integers(1, 7)), "", 10) for _ in range(2)]
        batch = TextBatch.from_sequences(seqs, 6)
    elif kind == "graph":
        enc = GraphEncoder(width=8, seed=seed)
        for l in range(enc.n_layers):
            enc[f"gin{l}.eps"].data = rng.normal(scale=0.3, size=1)
            # nonzero output bias: at width 8 every hidden unit can be off at once
            enc[f"gin{l}.b2"].data = rng.normal(scale=0.3, size=8)
        batch = GraphBatch.from_graphs([random_graph(rng, max_atoms=6) for _ in range(2)])
    else:
        enc = UniMolEncoder(width=8, n_heads=2, modality=kind, seed=seed)
        # off their initial values so the affine and kernel parameters carry signal
        enc["pair_a"].data = rng.uniform(0.7, 1.3, size=enc["pair_a"].data.shape)
        enc["pair_b"].data = rng.normal(scale=0.2, size=enc["pair_b"].data.shape)
        batch = StructBatch.from_structures([random_structure(rng, max_atoms=5, pocket=kind == "protein")
                                             for _ in range(2)])
    # every parameter block is checked in every trial, at a few random entries each
    return module_gradcheck(enc, head, lambda: enc.forward(batch), sample=3, rng=rng)


def test_criterion_1_gradient_suite():
    t0 = time.perf_counter()
    prim = {name: max(check_gradients(*CASES[name](np.random.default_rng(s))) for s in range(TRIALS))
            for name in CASES}
    enc = {kind: max(encoder_trial(kind, s) for s in range(TRIALS))
           for kind in ("language", "graph", "conformation", "protein")}
    elapsed = time.perf_counter() - t0
    worst_prim, worst_enc = max(prim.values()), max(enc.values())
    ok = worst_prim < 1e-6 and worst_enc < 1e-4 and elapsed < 60
    detail = (f"{len(prim)} primitives x {TRIALS} seeds, worst rel. error {worst_prim:.1e} (limit 1e-6); "
              f"4 encoders x {TRIALS} seeds, worst {worst_enc:.1e} (limit 1e-4); {elapsed:.1f} s (limit 60 s)")
    assert report(1, "gradient suite", ok, detail)


# -- 2. invariances --------------------------------------------------------------------------


def test_criterion_2_invariance_suite():
    rng = np.random.default_rng(2)
    worst = {}
    genc = GraphEncoder(seed=1)
    dev = 0.0
    for _ in range(50):
        g = random_graph(rng, max_atoms=8)
        ref = encode_graph(genc, g).data
        dev = max(dev, np.abs(encode_graph(genc, g.permuted(rng.permutation(g.n_atoms))).data - ref).max())
    worst["graph permutation"] = (dev, 1e-9)

    for kind, fn in (("conformation", encode_conformation), ("protein", encode_pocket)):
        enc = UniMolEncoder(modality=kind, seed=1)
        e3 = perm = 0.0
        for _ in range(50):
            s = random_structure(rng, max_atoms=10, pocket=kind == "protein")
            ref = fn(enc, s).data
            moved = s.moved(random_rotation(rng, proper=bool(rng.integers(2))), rng.uniform(-10, 10, 3))
            e3 = max(e3, np.abs(fn(enc, moved).data - ref).max())
            perm = max(perm, np.abs(fn(enc, s.permuted(rng.permutation(s.n_atoms))).data - ref).max())
        worst[f"{kind} E(3)"] = (e3, 1e-8)
        worst[f"{kind} atom permutation"] = (perm, 1e-9)

    norm = 0.0
    for s in range(50):
        head = ProjectionHead(64, 64, seed=s)
        norm = max(norm, abs(np.linalg.norm(project(head, rng.normal(size=64)).data) - 1.0))
    worst["head norm"] = (norm, 1e-6)

    rot = 0.0
    for _ in range(50):
        x, y = rng.normal(size=(8, 64)), rng.normal(size=(8, 64))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        q, _ = np.linalg.qr(rng.normal(size=(64, 64)))
        rot = max(rot, abs(info_nce(x @ q, y @ q).data - info_nce(x, y).data))
    worst["InfoNCE rotation"] = (rot, 1e-9)

    ok = all(v < lim for v, lim in worst.values())
    detail = "; ".join(f"{k} {v:.1e} (limit {lim:.0e})" for k, (v, lim) in worst.items()) + "; 50 trials each"
    assert report(2, "invariance suite", ok, detail)


# -- 3. closed forms -------------------------------------------------------------------------


def test_criterion_3_closed_form_losses():
    checks = {}
    for b in (2, 4, 16, 64):
        v = np.zeros((b, 8))
        v[:, 0] = 1.0
        checks[f"uniform B={b}"] = (info_nce(v, v).data, math.log(b))
    v = np.zeros((4, 8))
    v[:, 0] = 1.0
    checks["symmetric uniform B=4"] = (symmetric_loss(v, v).data, 2 * math.log(4))
    for tau in (1.0, 0.5, 0.25, 2.0):
        checks[f"diagonal B=2 tau={tau}"] = (info_nce(np.eye(2), np.eye(2), tau).data, math.log1p(math.exp(-1 / tau)))
    worst = max(abs(a - b) for a, b in checks.values())
    ok = worst < 1e-9
    assert report(3, "closed-form losses", ok, f"{len(checks)} cases, worst abs. error {worst:.1e} (limit 1e-9)")


# -- 4. overfit ------------------------------------------------------------------------------


def test_criterion_4_overfit_four_samples():
    syn = generate_synthetic_m4(40, seed=4)
    ds = syn.dataset()
    model = JointModel(Vocabulary.build(pretrain_texts(ds)), seed=0)
    cfg = AlignmentConfig()
    kind = "language-graph"
    ents = split_filter(ds.manifests[kind], "pretrain").entries[:4]
    left, right = [ds.get(e.left) for e in ents], [ds.get(e.right) for e in ents]
    t0 = time.perf_counter()
    first = train_step(model, kind, left, right, cfg)
    for _ in range(499):
        last = train_step(model, kind, left, right, cfg)
    elapsed = time.perf_counter() - t0
    lm, rm = PAIR_MODALITIES[kind]
    x, y = model.embed(lm, left), model.embed(rm, right)
    r = [retrieval_from_embeddings(q, c, d, "in_batch", ks=(1,), batch_size=4).recall_at[1]
         for d, (q, c) in zip(directions_for(kind), ((x, y), (y, x)))]
    ok = min(r) == 100.0 and elapsed < 30
    detail = (f"{kind}, 500 steps: loss {first:.3f} -> {last:.3f}, in-batch R@1 {r[0]:.0f}% / {r[1]:.0f}% "
              f"(need 100%); {elapsed:.1f} s (limit 30 s)")
    assert report(4, "overfit a 4-sample batch", ok, detail)


# -- 5 to 7. desk-scale training and ablation ------------------------------------------------


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic_m4(2000, latent_dim=8, noise_sigma=0.05, seed=0).dataset()


@pytest.fixture(scope="module")
def all_pairs_run(corpus):
    vocab = Vocabulary.build(pretrain_texts(corpus))
    cfg = AlignmentConfig()
    t0 = time.perf_counter()
    model, log = train(JointModel(vocab, seed=cfg.seed), corpus, cfg)
    return model, log, time.perf_counter() - t0


def test_criterion_5_desk_scale_alignment(corpus, all_pairs_run):
    model, log, elapsed = all_pairs_run
    recall = {d: evaluate_retrieval(model, corpus, d, "in_batch", "test", ks=(1,), batch_size=64).recall_at[1]
              for kind in PAIR_KINDS for d in directions_for(kind)}
    epochs = max(r["epoch"] for r in log)
    ok = min(recall.values()) >= 90.0 and elapsed < 1800
    detail = (", ".join(f"{d} {v:.1f}" for d, v in recall.items())
              + f" (held-out in-batch B=64 R@1 %, need >= 90, chance {100 / 64:.2f}); "
              f"{epochs} epochs in {elapsed / 60:.1f} min (limit 30 min)")
    assert report(5, "desk-scale alignment, all four pairs", ok, detail)


@pytest.fixture(scope="module")
def ablation(corpus, all_pairs_run):
    cfg = AlignmentConfig()
    others = [p for p in STANDARD_GRID if set(p) != set(ALL_PAIRS)]
    rows = ablation_run(corpus, others, cfg, JointModel)
    rows.append(ablation_row(all_pairs_run[0], corpus, ALL_PAIRS, cfg.seed))
    n_test = len(split_filter(corpus.manifests["language-conformation"], "test").entries)
    return {tuple(r["pairs"].split(";")): r for r in rows}, n_test


def test_criterion_6_emergence(ablation):
    rows, n_test = ablation
    chance = 100.0 / n_test
    emergent, full = rows[EMERGENT], rows[ALL_PAIRS]
    direct = {p: r for p, r in rows.items() if "language-conformation" in p and p != ALL_PAIRS}
    best_direct = max(r["l2c_r1"] for r in direct.values())
    first = {col: full[col] >= max(r[col] for r in rows.values()) for col in ("l2g_r1", "l2c_r1")}
    checks = {
        "emergent L2C >= 10x chance": emergent["l2c_r1"] >= 10 * chance,
        "permutation p < 0.01": emergent["l2c_perm_p"] < 0.01 and emergent["l2c_margin"] > 0,
        "direct >= emergent": best_direct >= emergent["l2c_r1"],
        "all pairs first on L2G and L2C": all(first.values()),
    }
    table = "; ".join(f"{r['label']} {r['l2g_r1']:.1f}/{r['l2c_r1']:.1f}" for r in rows.values())
    detail = (f"emergent L2C {emergent['l2c_r1']:.1f}% vs chance {chance:.2f}%, margin {emergent['l2c_margin']:.3f} "
              f"p={emergent['l2c_perm_p']:.4f}; best direct L2C {best_direct:.1f}%; "
              + ", ".join(f"{k}: {'yes' if v else 'no'}" for k, v in checks.items())
              + f"; full-test L2G/L2C R@1: {table}")
    assert report(6, "emergent language-conformation alignment", all(checks.values()), detail)


def test_criterion_7_chance_level_without_language(ablation):
    rows, n_test = ablation
    row = rows[GC_ONLY]
    p = 1.0 / n_test
    se = 100.0 * math.sqrt(p * (1 - p) / n_test)
    chance = 100.0 * p
    ok = abs(row["l2g_r1"] - chance) <= 3 * se and abs(row["l2c_r1"] - chance) <= 3 * se
    detail = (f"(graph, conformation) only: L2G {row['l2g_r1']:.2f}%, L2C {row['l2c_r1']:.2f}%; "
              f"chance {chance:.2f}% +/- 3 SE = {3 * se:.2f} over {n_test} test pairs")
    assert report(7, "chance level without language pairs", ok, detail)


# -- 8. determinism --------------------------------------------------------------------------


def test_criterion_8_train_determinism(tmp_path):
    data = tmp_path / "data"
    assert main(["synth", "--out", str(data), "--n", "120", "--levels", "4", "--seed", "8"]) == 0
    runs = []
    for name in ("a", "b"):
        run = tmp_path / name
        assert main(["train", "--data", str(data), "--run-dir", str(run), "--epochs", "2", "--seed", "8"]) == 0
        runs.append(run)
    same_log = (runs[0] / "metrics.jsonl").read_bytes() == (runs[1] / "metrics.jsonl").read_bytes()
    blocks = []
    for run in runs:
        ck = json.loads((run / "last.ckpt").read_text())
        blocks.append({k: np.asarray(v["data"]) for k, v in ck["params"].items()})
    same_params = blocks[0].keys() == blocks[1].keys() and all(
        np.array_equal(blocks[0][k], blocks[1][k]) for k in blocks[0])
    same_ckpt = all((runs[0] / f).read_bytes() == (runs[1] / f).read_bytes() for f in ("best.ckpt", "last.ckpt"))
    n_lines = len((runs[0] / "metrics.jsonl").read_text().splitlines())
    ok = same_log and same_params and same_ckpt
    detail = (f"two seeded train runs: metric logs identical {same_log} ({n_lines} records), "
              f"{len(blocks[0])} parameter blocks identical {same_params}, checkpoint bytes identical {same_ckpt}")
    assert report(8, "train determinism", ok, detail)


# -- 9. manifest conformance -----------------------------------------------------------------


def test_criterion_9_manifest_conformance(tmp_path):
    paths = {}
    for kind, counts in REFERENCE_COUNTS.items():
        lm, rm = PAIR_MODALITIES[kind]
        entries = [PairEntry(f"{lm}/{split[0]}{i}", f"{rm}/{split[0]}{i}", split)
                   for split, n in counts.items() for i in range(n)]
        paths[kind] = tmp_path / f"{kind}.jsonl"
        write_manifest(PairManifest(kind, entries), paths[kind])
    manifests = [parse_manifest(p) for p in paths.values()]
    complete, mismatches = count_report(manifests)

    # one pair short in one split: reported, not raised
    short = paths["conformation-protein"].read_text().splitlines()[:-1]
    paths["conformation-protein"].write_text("\n".join(short) + "\n")
    altered = [m if m.pair_kind != "conformation-protein" else parse_manifest(paths["conformation-protein"])
               for m in manifests]
    complete2, mismatches2 = count_report(altered)

    total = sum(sum(c.values()) for c in REFERENCE_COUNTS.values())
    ok = complete and not mismatches and not complete2 and len(mismatches2) == 1
    detail = (f"{total:,} pairs with reference counts validate as complete: {complete}; "
              f"a one-pair deficit is reported, not raised: {mismatches2}")
    assert report(9, "manifest conformance", ok, detail)
