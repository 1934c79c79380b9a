"""Word-level text tokenizer for motion descriptions.

Deliberately simple: lowercase, split on whitespace after isolating basic
punctuation, fixed vocabulary built from a corpus, single unknown-word id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import RejectedInputError

UNK = "<unk>"

_SPLIT = re.compile(r"[.,;:!?()\"]")


def words(text: str) -> list[str]:
    """Lowercased word stream with punctuation stripped."""
    return _SPLIT.sub(" ", text.lower()).split()


@dataclass
class TextTokenizer:
    vocab: list[str]
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.vocab or self.vocab[0] != UNK:
            raise RejectedInputError(f"text vocabulary must start with {UNK!r}")
        if len(set(self.vocab)) != len(self.vocab):
            raise RejectedInputError("text vocabulary contains duplicates")
        self._index = {w: i for i, w in enumerate(self.vocab)}

    @classmethod
    def from_corpus(cls, texts) -> "TextTokenizer":
        seen = sorted({w for text in texts for w in words(text)})
        return cls(vocab=[UNK] + seen)

    @property
    def size(self) -> int:
        return len(self.vocab)

    def encode(self, text: str) -> list[int]:
        ids = [self._index.get(w, 0) for w in words(text)]
        if not ids:
            raise RejectedInputError("description has no tokenizable words")
        return ids

    def decode(self, ids) -> str:
        out = []
        for i in ids:
            if not 0 <= int(i) < self.size:
                raise RejectedInputError(f"text id {i} outside vocabulary")
            out.append(self.vocab[int(i)])
        return " ".join(out)
