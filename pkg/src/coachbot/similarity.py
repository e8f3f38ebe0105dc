"""Cosine similarity over dense arrays and sparse dict vectors."""

from __future__ import annotations

import math

import numpy as np


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1].

    Accepts either two dense 1-D arrays of equal length or two sparse
    vectors given as ``{token: weight}`` dicts. If either vector has zero
    norm the similarity is 0.0 by convention, so degenerate queries rank
    neutrally instead of raising mid-pipeline.
    """
    if isinstance(u, dict) and isinstance(v, dict):
        return _sparse_cosine(u, v)
    if isinstance(u, dict) or isinstance(v, dict):
        raise ValueError("cannot mix sparse and dense vectors")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _sparse_cosine(u: dict, v: dict) -> float:
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(v) < len(u):
        u, v = v, u
    dot = sum(w * v[t] for t, w in u.items() if t in v)
    return dot / (nu * nv)
