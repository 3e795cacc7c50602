import re
from collections import Counter
from pathlib import Path

from ..errors import ParseError
from .records import TokenSequence

OOV = "[oov]"
_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text):
    """Lowercase and split on runs of non-alphanumerics."""
    return [t for t in _SPLIT.split(text.lower()) if t]


class Vocabulary:
    """Corpus-built token table; id 0 is the single out-of-vocabulary token."""

    def __init__(self, tokens):
        tokens = list(tokens)
        if not tokens or tokens[0] != OOV:
            tokens = [OOV] + [t for t in tokens if t != OOV]
        self.tokens = tokens
        self.index = {t: i for i, t in enumerate(tokens)}
        if len(self.index) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")

    @classmethod
    def build(cls, texts, min_freq=2):
        counts = Counter(tok for text in texts for tok in tokenize(text))
        kept = sorted((t for t, c in counts.items() if c >= min_freq), key=lambda t: (-counts[t], t))
        return cls([OOV] + kept)

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def encode(self, text):
        ids = [self.index.get(t, 0) for t in tokenize(text)] or [0]
        return TokenSequence(ids, text, len(self.tokens))

    def save(self, path):
        Path(path).write_text("".join(f"{t}\t{i}\n" for i, t in enumerate(self.tokens)), encoding="utf-8")

    @classmethod
    def load(cls, path):
        tokens = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line:
                continue
            tok, sep, idx = line.partition("\t")
            if not sep or not idx.isdigit() or int(idx) != len(tokens):
                raise ParseError("vocabulary lines must be '<token>\\t<id>' with consecutive ids", lineno)
            tokens.append(tok)
        return cls(tokens)
