"""Tokenization and vocabulary construction.

The rest of the pipeline never touches raw strings directly: everything
downstream works on token lists produced by a tokenizer callable, so a
morphological analyzer (or any language-specific splitter) can be swapped
in without changing the models.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Callable, Iterable

Tokenizer = Callable[[str], list[str]]

#: Id returned for tokens that are not part of the vocabulary.
UNKNOWN_ID = -1

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Default tokenizer: lowercase, split on Unicode word boundaries.

    Punctuation is dropped entirely; digits and underscore-joined tokens
    survive because they carry meaning in forum text.
    """
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    """Token inventory with dense integer ids.

    Ids are assigned by descending corpus frequency (ties keep first-seen
    order), which makes the id assignment reproducible from any iteration
    order of the same corpus. Tokens below ``min_count`` are excluded;
    looking one up yields :data:`UNKNOWN_ID`.
    """

    def __init__(self, counts: dict[str, int], min_count: int = 1):
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        self.min_count = min_count
        kept = [(t, c) for t, c in counts.items() if c >= min_count]
        kept.sort(key=lambda tc: -tc[1])  # stable: ties stay in first-seen order
        self._tokens = [t for t, _ in kept]
        self._freqs = [c for _, c in kept]
        self._ids = {t: i for i, t in enumerate(self._tokens)}

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def lookup(self, token: str) -> int:
        """Return the dense id of ``token``, or ``UNKNOWN_ID`` if unseen."""
        return self._ids.get(token, UNKNOWN_ID)

    def token(self, token_id: int) -> str:
        return self._tokens[token_id]

    def frequency(self, token: str) -> int:
        """Corpus frequency of an in-vocabulary token (0 if unknown)."""
        i = self._ids.get(token)
        return 0 if i is None else self._freqs[i]

    @property
    def frequencies(self) -> list[int]:
        """Frequencies aligned with ids (index == id)."""
        return list(self._freqs)

    @property
    def tokens(self) -> list[str]:
        """Tokens aligned with ids (index == id)."""
        return list(self._tokens)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to ids, silently dropping out-of-vocabulary ones."""
        ids = (self._ids.get(t) for t in tokens)
        return [i for i in ids if i is not None]


def build_vocab(token_stream: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Count a flat stream of tokens and keep those seen >= min_count times."""
    return Vocabulary(Counter(token_stream), min_count=min_count)
