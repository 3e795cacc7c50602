"""Contrastive alignment of molecular modalities (text, 2D graph, 3D conformation, pocket)."""
__version__ = "0.1.0"
