"""Per-modality encoders and projection heads into the shared embedding space."""
from .batching import GraphBatch, StructBatch, TextBatch
from .graph import GraphEncoder
from .heads import ProjectionHead, project
from .text import TextEncoder
from .unimol import UniMolEncoder, gaussian_pair_features, unimol_layer


def encode_text(enc, seq):
    return enc.encode(seq)


def encode_graph(enc, graph):
    return enc.encode(graph)


def encode_conformation(enc, conf):
    return enc.encode(conf)


def encode_pocket(enc, pocket):
    return enc.encode(pocket)


__all__ = [
    "GraphBatch",
    "GraphEncoder",
    "ProjectionHead",
    "StructBatch",
    "TextBatch",
    "TextEncoder",
    "UniMolEncoder",
    "encode_conformation",
    "encode_graph",
    "encode_pocket",
    "encode_text",
    "gaussian_pair_features",
    "project",
    "unimol_layer",
]
