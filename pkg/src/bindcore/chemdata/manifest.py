"""Pair manifests: newline-delimited JSON, one cross-modal pair per line.

Each line is ``{"pair_kind": ..., "left": ref, "right": ref, "split": ...}``.
Reference counts for the full four-modality corpus are kept in
:data:`REFERENCE_COUNTS` so real data can be checked for completeness.
"""
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError

PAIR_KINDS = ("language-graph", "language-conformation", "graph-conformation", "conformation-protein")
PAIR_MODALITIES = {
    "language-graph": ("language", "graph"),
    "language-conformation": ("language", "conformation"),
    "graph-conformation": ("graph", "conformation"),
    "conformation-protein": ("conformation", "protein"),
}
MODALITIES = ("language", "graph", "conformation", "protein")
SPLITS = ("pretrain", "validation", "test")

# pretrain / validation / test pair counts of the complete corpus
REFERENCE_COUNTS = {
    "language-graph": {"pretrain": 319_353, "validation": 1_500, "test": 1_500},
    "language-conformation": {"pretrain": 158_237, "validation": 1_500, "test": 1_500},
    "conformation-protein": {"pretrain": 72_355, "validation": 100, "test": 285},
    "graph-conformation": {"pretrain": 158_237, "validation": 1_500, "test": 1_500},
}


@dataclass(frozen=True)
class PairEntry:
    left: str
    right: str
    split: str


@dataclass
class PairManifest:
    pair_kind: str
    entries: list = field(default_factory=list)

    @property
    def modalities(self):
        return PAIR_MODALITIES[self.pair_kind]

    @property
    def counts(self):
        c = Counter(e.split for e in self.entries)
        return {s: c.get(s, 0) for s in SPLITS}

    def __len__(self):
        return len(self.entries)

    def to_jsonl(self):
        return "".join(
            json.dumps({"pair_kind": self.pair_kind, "left": e.left, "right": e.right, "split": e.split}) + "\n"
            for e in self.entries
        )


def ref_modality(ref):
    """References are ``<modality>/<record id>``."""
    head, _, rest = ref.partition("/")
    return head if rest else None


def validate_entries(pair_kind, entries, resolver=None, lines=None):
    """Raise ValidationError listing every offending line."""
    lines = lines or list(range(1, len(entries) + 1))
    left_mod, right_mod = PAIR_MODALITIES[pair_kind]
    bad = []
    seen = {}
    for lineno, e in zip(lines, entries):
        if e.split not in SPLITS:
            bad.append(f"line {lineno}: unknown split {e.split!r}")
        for ref, mod in ((e.left, left_mod), (e.right, right_mod)):
            if ref_modality(ref) != mod:
                bad.append(f"line {lineno}: ref {ref!r} is not a {mod} record")
            elif resolver is not None and not resolver(ref):
                bad.append(f"line {lineno}: dangling ref {ref!r}")
        key = (e.left, e.right)
        if key in seen:
            prev_line, prev_split = seen[key]
            what = "duplicate" if prev_split == e.split else "pair in two splits"
            bad.append(f"line {lineno}: {what} ({e.left}, {e.right}) first at line {prev_line}")
        else:
            seen[key] = (lineno, e.split)
    if bad:
        raise ValidationError(f"invalid {pair_kind} manifest", bad)


def parse_manifest(path, resolver=None):
    """Read and validate a manifest file.

    ``resolver(ref) -> bool`` checks that references exist; without it only
    the reference modality prefixes are checked.
    """
    path = Path(path)
    kinds = set()
    entries, lines, bad = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                kind, left, right, split = rec["pair_kind"], rec["left"], rec["right"], rec["split"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                bad.append(f"line {lineno}: malformed record ({exc.__class__.__name__}: {exc})")
                continue
            if kind not in PAIR_KINDS:
                bad.append(f"line {lineno}: unknown pair_kind {kind!r}")
                continue
            kinds.add(kind)
            entries.append(PairEntry(str(left), str(right), str(split)))
            lines.append(lineno)
    if bad:
        raise ValidationError(f"{path}: invalid manifest", bad)
    if len(kinds) > 1:
        raise ValidationError(f"{path}: one pair_kind per manifest", sorted(kinds))
    if not kinds:
        raise ValidationError(f"{path}: manifest is empty")
    kind = kinds.pop()
    validate_entries(kind, entries, resolver, lines)
    return PairManifest(kind, entries)


def write_manifest(manifest, path):
    Path(path).write_text(manifest.to_jsonl(), encoding="utf-8")


def split_filter(manifest, split):
    if split not in SPLITS:
        raise ValidationError(f"unknown split {split!r}")
    return PairManifest(manifest.pair_kind, [e for e in manifest.entries if e.split == split])


def count_report(manifests):
    """Compare per-split counts with :data:`REFERENCE_COUNTS`.

    Returns ``(complete, mismatches)``; mismatches are reported, never raised.
    """
    by_kind = {m.pair_kind: m for m in manifests}
    mismatches = []
    for kind, expected in REFERENCE_COUNTS.items():
        m = by_kind.get(kind)
        if m is None:
            mismatches.append(f"{kind}: manifest missing")
            continue
        got = m.counts
        for split, n in expected.items():
            if got[split] != n:
                mismatches.append(f"{kind}/{split}: expected {n}, found {got[split]}")
    return not mismatches, mismatches
