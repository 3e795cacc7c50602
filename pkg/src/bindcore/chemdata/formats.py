"""Readers and writers for a V2000 molfile subset and XYZ.

Only the parts needed for the encoders are honoured: the counts line, element
symbols (plus coordinates) in the atom block, and the bond block. Property
lines between the bond block and ``M  END`` are skipped.
"""
import numpy as np

from ..errors import ContractError, ParseError
from .elements import atom_type, symbol
from .records import Conformation, MoleculeGraph, PocketStructure


def _int_field(text, lineno, what):
    s = text.strip()
    if not s or not (s.isdigit() or (s[0] == "-" and s[1:].isdigit())):
        raise ParseError(f"malformed {what} {text!r}", lineno)
    return int(s)


def _float_field(text, lineno, what):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"malformed {what} {text.strip()!r}", lineno) from None


def parse_sdf_subset(text, with_coords=False):
    """Parse one molfile record into a :class:`MoleculeGraph`.

    With ``with_coords=True`` the atom-block coordinates are returned as well,
    as ``(graph, coords)``.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise ParseError("truncated header: a molfile needs 3 header lines and a counts line", len(lines) + 1)
    counts = lines[3]
    if counts[34:39] != "V2000":
        raise ParseError("counts line is not V2000", 4)
    n_atoms = _int_field(counts[0:3], 4, "atom count")
    n_bonds = _int_field(counts[3:6], 4, "bond count")
    if n_atoms < 1 or n_bonds < 0:
        raise ParseError(f"invalid counts {n_atoms} atoms / {n_bonds} bonds", 4)

    types = []
    coords = np.zeros((n_atoms, 3))
    for k in range(n_atoms):
        lineno = 5 + k
        if lineno > len(lines):
            raise ParseError(f"atom block truncated: expected {n_atoms} atoms", lineno)
        line = lines[lineno - 1]
        if len(line) < 34:
            raise ParseError("atom line too short", lineno)
        for c in range(3):
            coords[k, c] = _float_field(line[10 * c:10 * c + 10], lineno, "coordinate")
        if line[30] != " ":
            raise ParseError("malformed atom line", lineno)
        types.append(atom_type(line[31:34]))

    bonds = []
    seen = set()
    for k in range(n_bonds):
        lineno = 5 + n_atoms + k
        if lineno > len(lines):
            raise ParseError(f"bond block truncated: expected {n_bonds} bonds", lineno)
        line = lines[lineno - 1]
        i = _int_field(line[0:3], lineno, "bond atom index")
        j = _int_field(line[3:6], lineno, "bond atom index")
        order = _int_field(line[6:9], lineno, "bond type")
        if not (1 <= i <= n_atoms and 1 <= j <= n_atoms):
            raise ParseError(f"bond references atom outside 1..{n_atoms}: ({i}, {j})", lineno)
        if i == j:
            raise ParseError(f"self bond on atom {i}", lineno)
        if order not in (1, 2, 3, 4):
            raise ParseError(f"unsupported bond type {order}", lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ParseError(f"duplicate bond {key}", lineno)
        seen.add(key)
        bonds.append((i - 1, j - 1, order))

    end = None
    for lineno in range(5 + n_atoms + n_bonds, len(lines) + 1):
        line = lines[lineno - 1]
        if line.rstrip() == "M  END":
            end = lineno
            break
        if not line.startswith(("M  ", "A  ", "V  ", "G  ", "S  ")):
            raise ParseError(f"unexpected line in properties block: {line!r}", lineno)
    if end is None:
        raise ParseError("missing 'M  END' terminator", len(lines) + 1)
    for lineno in range(end + 1, len(lines) + 1):
        if lines[lineno - 1].strip() not in ("", "$$$$"):
            raise ParseError("trailing content after 'M  END'", lineno)

    name = lines[0].strip() or None
    graph = MoleculeGraph(types, bonds, name)
    return (graph, coords) if with_coords else graph


def write_sdf(graph, coords=None):
    """Serialise a graph (optionally with coordinates) as a single V2000 record."""
    n = graph.n_atoms
    if coords is None:
        coords = np.zeros((n, 3))
    if n > 999 or len(graph.bonds) > 999:
        raise ContractError("V2000 supports at most 999 atoms and bonds")
    out = [graph.molecule_id or "", "  bindcore", ""]
    out.append(f"{n:3d}{len(graph.bonds):3d}  0  0  0  0  0  0  0  0999 V2000")
    for t, (x, y, z) in zip(graph.atom_types, coords):
        out.append(f"{x:10.4f}{y:10.4f}{z:10.4f} {symbol(t):<3s} 0  0  0  0  0  0  0  0  0  0  0  0")
    for i, j, order in graph.bonds:
        out.append(f"{i + 1:3d}{j + 1:3d}{order:3d}  0  0  0  0")
    out.append("M  END")
    return "\n".join(out) + "\n"


def parse_xyz(text, kind=Conformation):
    """Parse an XYZ file: atom count, comment line (used as the id), then ``symbol x y z`` rows."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty XYZ input", 1)
    n = _int_field(lines[0], 1, "atom count")
    if n < 1:
        raise ParseError("atom count must be positive", 1)
    if len(lines) < 2:
        raise ParseError("missing comment line", 2)
    types = []
    coords = np.zeros((n, 3))
    for k in range(n):
        lineno = 3 + k
        if lineno > len(lines):
            raise ParseError(f"expected {n} atom rows, found {k}", lineno)
        parts = lines[lineno - 1].split()
        if len(parts) != 4:
            raise ParseError(f"atom row needs 4 fields, got {len(parts)}", lineno)
        if not parts[0].isalpha():
            raise ParseError(f"malformed element symbol {parts[0]!r}", lineno)
        types.append(atom_type(parts[0]))
        for c in range(3):
            coords[k, c] = _float_field(parts[c + 1], lineno, "coordinate")
    if not np.all(np.isfinite(coords)):
        raise ParseError("non-finite coordinate", 3)
    for lineno in range(3 + n, len(lines) + 1):
        if lines[lineno - 1].strip():
            raise ParseError(f"more atom rows than the declared count {n}", lineno)
    return kind(types, coords, lines[1].strip() or None)


def write_xyz(conf):
    out = [str(conf.n_atoms), conf.molecule_id or ""]
    for t, (x, y, z) in zip(conf.atom_types, conf.coords):
        out.append(f"{symbol(t)} {x:.6f} {y:.6f} {z:.6f}")
    return "\n".join(out) + "\n"


def parse_pocket_xyz(text):
    return parse_xyz(text, kind=PocketStructure)
