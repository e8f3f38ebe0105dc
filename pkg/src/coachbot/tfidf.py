"""TF-IDF weighting for the matching stage.

Deliberately the plainest variant there is: raw term frequency times
``ln(N / df)`` with no smoothing, so every weight can be checked by hand.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence


class TfIdfModel:
    """Document frequencies fitted on a corpus of token lists."""

    def __init__(self, df: dict[str, int], n_docs: int):
        self.df = df
        self.n_docs = n_docs

    def idf(self, token: str) -> float:
        """``ln(N / df)``; 0.0 for tokens never seen in fitting."""
        d = self.df.get(token)
        if d is None:
            return 0.0
        return math.log(self.n_docs / d)


def fit_tfidf(docs: Sequence[Iterable[str]]) -> TfIdfModel:
    """Count in how many documents each token appears.

    A token repeated inside one document still counts that document once.
    """
    if not docs:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for tokens in docs:
        df.update(set(tokens))
    return TfIdfModel(dict(df), len(docs))


def tfidf_vector(model: TfIdfModel, tokens: Iterable[str]) -> dict[str, float]:
    """Sparse ``{token: tf * idf}`` vector; unseen tokens get weight 0.

    Zero-weight entries are omitted so the dict doubles as the support.
    """
    tf = Counter(tokens)
    vec: dict[str, float] = {}
    for token, count in tf.items():
        idf = model.idf(token)
        if idf > 0.0 and count > 0:
            vec[token] = count * idf
    return vec
