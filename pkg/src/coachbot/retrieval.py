"""Dense top-K retrieval over post-title vectors.

The index is an exact brute-force scan: rows are unit-normalized at build
time so a query reduces to one matrix-vector product. Immutable once
built, safe to share across concurrent queries.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class DenseIndex:
    """Unit-normalized title vectors aligned with their post ids.

    Zero input vectors are stored as zero rows (flagged) and always rank
    last; their reported similarity is 0.0.
    """

    def __init__(self, matrix: np.ndarray, post_ids: list[str], zero_rows: np.ndarray):
        self.matrix = matrix
        self.post_ids = post_ids
        self.zero_rows = zero_rows

    def __len__(self) -> int:
        return len(self.post_ids)

    @property
    def dims(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_normalized(cls, matrix: np.ndarray, post_ids: Sequence[str]) -> "DenseIndex":
        """Rebuild from rows that are already unit (or zero) without
        touching their bits -- what a lossless reload needs."""
        matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        if matrix.shape[0] != len(post_ids):
            raise ValueError("rows must align with post_ids")
        zero_rows = ~matrix.any(axis=1)
        matrix.setflags(write=False)
        return cls(matrix, list(post_ids), zero_rows)


def build_index(title_vectors, post_ids: Sequence[str]) -> DenseIndex:
    """Normalize rows and freeze them next to their post ids."""
    matrix = np.asarray(title_vectors, dtype=np.float32)
    if matrix.ndim != 2:
        raise ValueError("title_vectors must be a 2-D array")
    if matrix.shape[0] != len(post_ids):
        raise ValueError(
            f"{matrix.shape[0]} vectors but {len(post_ids)} post_ids"
        )
    if matrix.shape[0] < 1:
        raise ValueError("index needs at least one vector")
    norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
    zero_rows = norms == 0.0
    safe = np.where(zero_rows, 1.0, norms)
    normalized = (matrix / safe[:, None].astype(np.float32)).astype(np.float32)
    normalized[zero_rows] = 0.0
    normalized.setflags(write=False)
    return DenseIndex(normalized, list(post_ids), zero_rows)


def retrieve(index: DenseIndex, q_vec, k1: int) -> list[tuple[str, float]]:
    """Top ``min(k1, N)`` posts by cosine, descending.

    Ties break toward the earlier stored position, which keeps results
    reproducible and lets a brute-force scan agree exactly.
    """
    if k1 < 1:
        raise ValueError("k1 must be >= 1")
    if len(index) == 0:
        raise ValueError("index is empty")
    q = np.asarray(q_vec, dtype=np.float64)
    if q.shape != (index.dims,):
        raise ValueError(f"query has shape {q.shape}, index dims {index.dims}")
    qnorm = np.linalg.norm(q)
    if qnorm > 0.0:
        q = q / qnorm
    sims = index.matrix.astype(np.float64) @ q
    sims[index.zero_rows] = 0.0
    # zero rows sort below any real cosine but still report similarity 0
    sort_keys = np.where(index.zero_rows, -2.0, sims)
    order = np.argsort(-sort_keys, kind="stable")[: min(k1, len(index))]
    return [(index.post_ids[i], float(sims[i])) for i in order]
