"""On-disk dataset layout and a lazily-parsing record store.

::

    root/
      language/<id>.txt      graph/<id>.sdf
      conformation/<id>.xyz  protein/<id>.xyz
      manifests/<pair_kind>.jsonl
      provenance.json

A reference such as ``graph/s00012`` resolves to ``root/graph/s00012.sdf``.
"""
from pathlib import Path

from ..errors import DataError, ParseError
from .formats import parse_pocket_xyz, parse_sdf_subset, parse_xyz
from .manifest import PAIR_KINDS, parse_manifest

EXTENSIONS = {"language": ".txt", "graph": ".sdf", "conformation": ".xyz", "protein": ".xyz"}
PARSERS = {
    "language": lambda text: text.strip(),
    "graph": parse_sdf_subset,
    "conformation": parse_xyz,
    "protein": parse_pocket_xyz,
}


class PairDataset:
    """Manifests plus a way to fetch the record behind each reference."""

    def __init__(self, manifests, records):
        self.manifests = dict(manifests)
        self._records = records

    def get(self, ref):
        return self._records[ref]

    def __contains__(self, ref):
        return ref in self._records


class RecordStore:
    """Mapping-like view over a dataset directory; parses records on first access."""

    def __init__(self, root):
        self.root = Path(root)
        self._cache = {}

    def path(self, ref):
        modality, _, rid = ref.partition("/")
        if modality not in EXTENSIONS or not rid or "/" in rid or rid in (".", ".."):
            raise DataError(f"malformed record reference {ref!r}")
        return self.root / modality / f"{rid}{EXTENSIONS[modality]}"

    def __contains__(self, ref):
        try:
            return self.path(ref).is_file()
        except DataError:
            return False

    def __getitem__(self, ref):
        rec = self._cache.get(ref)
        if rec is None:
            path = self.path(ref)
            try:
                text = path.read_text(encoding="utf-8")
            except FileNotFoundError:
                raise DataError(f"record file not found: {path}") from None
            try:
                rec = PARSERS[ref.partition("/")[0]](text)
            except ParseError as exc:
                raise ParseError(f"{path}: {exc}") from None
            self._cache[ref] = rec
        return rec


def load_dataset(root, pair_kinds=None):
    """Open a dataset directory, validating the requested manifests against the record files."""
    root = Path(root)
    store = RecordStore(root)
    kinds = list(pair_kinds) if pair_kinds else [k for k in PAIR_KINDS if (root / "manifests" / f"{k}.jsonl").is_file()]
    manifests = {}
    for kind in kinds:
        path = root / "manifests" / f"{kind}.jsonl"
        if not path.is_file():
            raise DataError(f"missing manifest for {kind}: {path}")
        m = parse_manifest(path, resolver=store.__contains__)
        if m.pair_kind != kind:
            raise DataError(f"{path} holds {m.pair_kind} pairs, expected {kind}")
        manifests[kind] = m
    return PairDataset(manifests, store)


def pretrain_texts(dataset):
    """Language records referenced by any pretrain pair, in sorted reference order."""
    refs = set()
    for m in dataset.manifests.values():
        for e in m.entries:
            if e.split == "pretrain":
                refs.update(r for r in (e.left, e.right) if r.startswith("language/"))
    return [dataset.get(r) for r in sorted(refs)]
