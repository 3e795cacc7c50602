from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from .elements import N_ATOM_TYPES


@dataclass(frozen=True)
class MoleculeGraph:
    atom_types: tuple
    bonds: tuple  # (i, j, order) with order in {1, 2, 3, 4=aromatic}
    molecule_id: str = None

    def __post_init__(self):
        object.__setattr__(self, "atom_types", tuple(int(t) for t in self.atom_types))
        object.__setattr__(self, "bonds", tuple((int(i), int(j), int(o)) for i, j, o in self.bonds))
        n = len(self.atom_types)
        if n < 1:
            raise ContractError("MoleculeGraph needs at least one atom")
        if any(not 0 <= t < N_ATOM_TYPES for t in self.atom_types):
            raise ContractError("atom type id out of range")
        seen = set()
        for i, j, order in self.bonds:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ContractError(f"invalid bond endpoints ({i}, {j}) for {n} atoms")
            if order not in (1, 2, 3, 4):
                raise ContractError(f"invalid bond order {order}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ContractError(f"duplicate bond {key}")
            seen.add(key)

    @property
    def n_atoms(self):
        return len(self.atom_types)

    def same_content(self, other):
        return self.atom_types == other.atom_types and self.bonds == other.bonds

    def permuted(self, perm):
        """Relabel atoms: new atom k is old atom perm[k]."""
        inv = np.argsort(perm)
        types = [self.atom_types[p] for p in perm]
        bonds = [(int(inv[i]), int(inv[j]), o) for i, j, o in self.bonds]
        return MoleculeGraph(types, bonds, self.molecule_id)


@dataclass(frozen=True)
class Conformation:
    atom_types: tuple
    coords: np.ndarray = field(compare=False)
    molecule_id: str = None

    def __post_init__(self):
        object.__setattr__(self, "atom_types", tuple(int(t) for t in self.atom_types))
        coords = np.array(self.coords, dtype=np.float64).reshape(-1, 3) if len(self.atom_types) else np.zeros((0, 3))
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if len(self.atom_types) < 1:
            raise ContractError(f"{type(self).__name__} needs at least one atom")
        if coords.shape[0] != len(self.atom_types):
            raise ContractError(f"{coords.shape[0]} coordinate rows for {len(self.atom_types)} atoms")
        if not np.all(np.isfinite(coords)):
            raise ContractError("non-finite coordinates")
        if any(not 0 <= t < N_ATOM_TYPES for t in self.atom_types):
            raise ContractError("atom type id out of range")

    @property
    def n_atoms(self):
        return len(self.atom_types)

    def same_content(self, other, atol=0.0):
        return self.atom_types == other.atom_types and np.allclose(self.coords, other.coords, rtol=0, atol=atol)

    def moved(self, rotation, translation=(0.0, 0.0, 0.0)):
        return type(self)(self.atom_types, self.coords @ np.asarray(rotation).T + np.asarray(translation),
                          self.molecule_id)

    def permuted(self, perm):
        return type(self)([self.atom_types[p] for p in perm], self.coords[list(perm)], self.molecule_id)


class PocketStructure(Conformation):
    """Protein pocket atoms; same shape as a conformation but fed to the pocket encoder."""

    @property
    def pocket_id(self):
        return self.molecule_id


@dataclass(frozen=True)
class TokenSequence:
    token_ids: tuple
    raw_text: str
    vocab_size: int

    def __post_init__(self):
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))
        if not self.token_ids:
            raise ContractError("token sequence must hold at least one token")
        if any(not 0 <= t < self.vocab_size for t in self.token_ids):
            raise ContractError(f"token id out of range [0, {self.vocab_size})")

    def __len__(self):
        return len(self.token_ids)
