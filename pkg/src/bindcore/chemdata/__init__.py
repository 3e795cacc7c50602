"""Modal records, file formats, pair manifests and the synthetic corpus generator."""
from .elements import N_ATOM_TYPES, N_PAIR_TYPES, UNK, atom_type, pair_type, symbol
from .formats import parse_pocket_xyz, parse_sdf_subset, parse_xyz, write_sdf, write_xyz
from .geometry import pairwise_distances, random_rotation
from .manifest import (
    MODALITIES,
    PAIR_KINDS,
    PAIR_MODALITIES,
    REFERENCE_COUNTS,
    SPLITS,
    PairEntry,
    PairManifest,
    count_report,
    parse_manifest,
    split_filter,
    write_manifest,
)
from .records import Conformation, MoleculeGraph, PocketStructure, TokenSequence
from .store import PairDataset, RecordStore, load_dataset, pretrain_texts
from .synthetic import TEXT_TEMPLATE, SyntheticM4, generate_synthetic_m4, tree_hash, write_dataset
from .tokenizer import Vocabulary, tokenize

__all__ = [
    "Conformation",
    "MODALITIES",
    "MoleculeGraph",
    "N_ATOM_TYPES",
    "N_PAIR_TYPES",
    "PAIR_KINDS",
    "PAIR_MODALITIES",
    "PairDataset",
    "PairEntry",
    "PairManifest",
    "PocketStructure",
    "REFERENCE_COUNTS",
    "RecordStore",
    "SPLITS",
    "SyntheticM4",
    "TEXT_TEMPLATE",
    "TokenSequence",
    "UNK",
    "Vocabulary",
    "atom_type",
    "count_report",
    "generate_synthetic_m4",
    "load_dataset",
    "pair_type",
    "pairwise_distances",
    "pretrain_texts",
    "parse_manifest",
    "parse_pocket_xyz",
    "parse_sdf_subset",
    "parse_xyz",
    "random_rotation",
    "split_filter",
    "symbol",
    "tokenize",
    "tree_hash",
    "write_dataset",
    "write_manifest",
    "write_sdf",
    "write_xyz",
]
