"""Synthetic four-modality corpus with a known shared latent per sample.

Sample ``i`` owns a latent ``z_i``. Each modality renders its own noisy copy
``z_i + noise_sigma * eps`` through a fixed map:

* language: one ``k<dim>q<level>`` word per latent dimension, where the level
  is the quantile bucket of that coordinate;
* graph: a backbone path of per-dimension marker atoms; marker ``d`` carries
  a chain of ``level`` atoms of its own element, so every dimension reads off
  from its own chain and no single feature dominates the rest;
* conformation: the same atoms in 3D, with the marker-to-chain distance
  tracking the continuous coordinate, then a pose (rotation + translation);
* protein: a ring of marker atoms with partner chains whose length is the
  complementary level and whose distance tracks the coordinate.

Poses are a deterministic function of ``(seed, z_i)``, so identical latents
with zero noise render identical records.
"""
import hashlib
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from ..errors import ConfigError
from ..numerics import make_rng
from .elements import SYMBOL_TO_ID
from .formats import write_sdf, write_xyz
from .geometry import random_rotation
from .manifest import PAIR_KINDS, PAIR_MODALITIES, PairEntry, PairManifest
from .records import Conformation, MoleculeGraph, PocketStructure
from .store import EXTENSIONS, PairDataset

MARKER_ELEMENTS = ("C", "N", "O", "S", "P", "F", "Cl", "Br", "B", "Si", "Se", "Zn")
MAX_LATENT_DIM = len(MARKER_ELEMENTS)
TEXT_TEMPLATE = "The molecule is {}."
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)
GENERATOR_VERSION = 2


def level_name(levels):
    """Class-name string for a row of per-dimension levels (the text minus the template)."""
    return " ".join(f"k{k}q{int(b)}" for k, b in enumerate(levels))


def _pose_rng(seed, modality, z):
    return make_rng(seed, "pose", modality, zlib.crc32(np.ascontiguousarray(z, dtype=np.float64).tobytes()))


def render_graph(levels):
    """Backbone path of marker atoms; marker ``d`` carries a chain of ``levels[d]`` atoms of its own element."""
    k = len(levels)
    types = [SYMBOL_TO_ID[MARKER_ELEMENTS[d]] for d in range(k)]
    bonds = [(d, d + 1, 1) for d in range(k - 1)]
    for d, b in enumerate(levels):
        prev = d
        for _ in range(int(b)):
            types.append(SYMBOL_TO_ID[MARKER_ELEMENTS[d]])
            bonds.append((prev, len(types) - 1, 1))
            prev = len(types) - 1
    return types, bonds


def _backbone(k):
    pos = np.stack([1.3 * np.arange(k), 0.75 * (np.arange(k) % 2), np.zeros(k)], axis=1)
    outward = np.zeros((k, 3))
    outward[:, 1] = np.where(np.arange(k) % 2 == 1, 1.0, -1.0)
    return pos, outward


def render_conformation(levels, u):
    types, _ = render_graph(levels)
    pos, outward = _backbone(len(levels))
    coords = list(pos)
    for d, b in enumerate(levels):
        # the first chain atom sits at a distance that tracks the continuous coordinate
        dist = 1.0 + 0.8 * u[d]
        for step in range(int(b)):
            coords.append(pos[d] + outward[d] * (dist + 1.4 * step))
    return types, np.array(coords)


def render_pocket(levels, u, n_levels):
    """Ring of marker atoms; partner chains along +z have the complementary length."""
    k = len(levels)
    radius = max(5.0, 1.9 / np.sin(np.pi / k))
    ang = 2 * np.pi * np.arange(k) / k
    pos = np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(k)], axis=1)
    types = [SYMBOL_TO_ID[MARKER_ELEMENTS[d]] for d in range(k)]
    coords = list(pos)
    for d, b in enumerate(levels):
        dist = 3.2 - 1.2 * u[d]
        for step in range(n_levels - 1 - int(b)):
            types.append(SYMBOL_TO_ID[MARKER_ELEMENTS[d]])
            coords.append(pos[d] + np.array([0.0, 0.0, dist + 1.4 * step]))
    return types, np.array(coords)


@dataclass
class SyntheticM4:
    latents: np.ndarray
    records: dict
    manifests: dict
    config: dict
    names: dict  # language ref -> class name used by zero-shot classification

    def dataset(self):
        return PairDataset(self.manifests, self.records)


def _split_labels(n, seed):
    order = make_rng(seed, "splits").permutation(n)
    n_pre = int(round(SPLIT_FRACTIONS[0] * n))
    n_val = int(round(SPLIT_FRACTIONS[1] * n))
    labels = np.empty(n, dtype=object)
    labels[order[:n_pre]] = "pretrain"
    labels[order[n_pre:n_pre + n_val]] = "validation"
    labels[order[n_pre + n_val:]] = "test"
    return labels


def generate_synthetic_m4(n_samples, latent_dim=8, noise_sigma=0.05, seed=0, levels=8, latents=None):
    """Render ``n_samples`` latents into all four modalities and the four pair manifests.

    ``latents`` may be passed explicitly (shape ``[n_samples, latent_dim]``)
    instead of being drawn from the seed.
    """
    if n_samples < 2:
        raise ConfigError("n_samples must be at least 2 (contrastive batches need a negative)")
    if not 2 <= latent_dim <= MAX_LATENT_DIM:
        raise ConfigError(f"latent_dim must lie in [2, {MAX_LATENT_DIM}]")
    if not 2 <= levels <= 16:
        raise ConfigError("levels must lie in [2, 16]")
    if noise_sigma < 0:
        raise ConfigError("noise_sigma must be non-negative")
    if latents is None:
        z = make_rng(seed, "latents").normal(size=(n_samples, latent_dim))
    else:
        z = np.array(latents, dtype=np.float64)
        if z.shape != (n_samples, latent_dim):
            raise ConfigError(f"latents must have shape {(n_samples, latent_dim)}")

    noise = {m: make_rng(seed, "noise", m) for m in ("language", "graph", "conformation", "protein")}
    width = len(str(n_samples - 1))
    ids = [f"s{i:0{width}d}" for i in range(n_samples)]
    records, names = {}, {}
    for i, sid in enumerate(ids):
        zi = z[i]
        rendered = {}
        for m, rng in noise.items():
            zm = zi + noise_sigma * rng.normal(size=latent_dim)
            u = ndtr(zm)
            lv = np.minimum((u * levels).astype(int), levels - 1)
            if m == "language":
                names[f"language/{sid}"] = level_name(lv)
                records[f"language/{sid}"] = TEXT_TEMPLATE.format(level_name(lv))
                continue
            if m == "graph":
                types, bonds = render_graph(lv)
                records[f"graph/{sid}"] = MoleculeGraph(types, bonds, sid)
                continue
            if m == "conformation":
                types, coords = render_conformation(lv, u)
                kind = Conformation
            else:
                types, coords = render_pocket(lv, u, levels)
                kind = PocketStructure
            pose = _pose_rng(seed, m, zi)
            coords = coords - coords.mean(axis=0)
            coords = coords @ random_rotation(pose).T + pose.uniform(-5.0, 5.0, size=3)
            if noise_sigma > 0:
                coords = coords + noise_sigma * rng.normal(size=coords.shape)
            rendered[m] = kind(types, np.round(coords, 6), sid)
        records[f"conformation/{sid}"] = rendered["conformation"]
        records[f"protein/{sid}"] = rendered["protein"]

    splits = _split_labels(n_samples, seed)
    manifests = {}
    for kind in PAIR_KINDS:
        lm, rm = PAIR_MODALITIES[kind]
        manifests[kind] = PairManifest(kind, [PairEntry(f"{lm}/{sid}", f"{rm}/{sid}", str(splits[i]))
                                              for i, sid in enumerate(ids)])
    config = {"generator_version": GENERATOR_VERSION, "n_samples": n_samples, "latent_dim": latent_dim,
              "noise_sigma": noise_sigma, "seed": seed, "levels": levels}
    return SyntheticM4(z, records, manifests, config, names)


def _serialise(ref, rec):
    modality = ref.partition("/")[0]
    if modality == "language":
        return rec + "\n"
    if modality == "graph":
        return write_sdf(rec)
    return write_xyz(rec)


def write_dataset(ds, out_dir):
    """Write records, manifests and a provenance file; returns the provenance dict."""
    out = Path(out_dir)
    for modality in EXTENSIONS:
        (out / modality).mkdir(parents=True, exist_ok=True)
    (out / "manifests").mkdir(parents=True, exist_ok=True)
    for ref in sorted(ds.records):
        (out / (ref + EXTENSIONS[ref.partition("/")[0]])).write_text(_serialise(ref, ds.records[ref]), encoding="utf-8")
    digests = {}
    for kind, m in ds.manifests.items():
        text = m.to_jsonl()
        (out / "manifests" / f"{kind}.jsonl").write_text(text, encoding="utf-8")
        digests[kind] = hashlib.sha256(text.encode()).hexdigest()
    (out / "names.json").write_text(json.dumps(ds.names, sort_keys=True, indent=0) + "\n", encoding="utf-8")
    np.save(out / "latents.npy", ds.latents)
    prov = {"source": "synthetic", **ds.config, "manifest_sha256": digests,
            "counts": {k: m.counts for k, m in ds.manifests.items()}}
    (out / "provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return prov


def tree_hash(root):
    """SHA-256 over relative paths and bytes of every file below ``root``."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(q for q in root.rglob("*") if q.is_file()):
        h.update(str(p.relative_to(root)).encode())
        h.update(p.read_bytes())
    return h.hexdigest()
