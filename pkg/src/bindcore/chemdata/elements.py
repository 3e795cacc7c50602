"""Fixed atom-type universe: 16 common drug-like elements plus UNK (id 0)."""

UNK = 0
ELEMENTS = ("H", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "B", "Si", "Se", "Na", "K", "Zn")
SYMBOL_TO_ID = {sym: i + 1 for i, sym in enumerate(ELEMENTS)}
ID_TO_SYMBOL = {i: s for s, i in SYMBOL_TO_ID.items()}
ID_TO_SYMBOL[UNK] = "X"
N_ATOM_TYPES = len(ELEMENTS) + 1
N_PAIR_TYPES = N_ATOM_TYPES * N_ATOM_TYPES


def atom_type(symbol):
    """Map an element symbol (case-insensitive for the second letter) to its type id."""
    s = symbol.strip()
    if len(s) > 1:
        s = s[0].upper() + s[1:].lower()
    else:
        s = s.upper()
    return SYMBOL_TO_ID.get(s, UNK)


def symbol(type_id):
    return ID_TO_SYMBOL.get(int(type_id), "X")


def pair_type(a, b, n_types=N_ATOM_TYPES):
    """Canonical unordered pair index: min(a, b) * T + max(a, b)."""
    lo, hi = (a, b) if a <= b else (b, a)
    return lo * n_types + hi
