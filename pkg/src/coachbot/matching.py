"""Matching stage: TF-IDF re-scoring of retrieved posts into candidates.

The retrieved posts are re-ranked by sparse TF-IDF cosine between the
query and each post's title (optionally title+body), the best k2 posts
survive, and their replies are pooled -- in post-score order, then reply
order -- into the candidate set the ranker will score.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import Post
from .similarity import cosine
from .text import Tokenizer, tokenize
from .tfidf import TfIdfModel, tfidf_vector

#: Which post text the TF-IDF comparison sees.
MATCH_FIELDS = ("title", "title_body")


@dataclass
class Candidate:
    response_text: str
    reply_vec: np.ndarray
    post_id: str
    reply_index: int
    net_score: int
    match_score: float


@dataclass
class CandidateSet:
    query_text: str
    query_vec: np.ndarray
    candidates: list[Candidate]
    true_reply_index: int | None = None


def match_candidates(
    query_text: str,
    retrieved: Sequence[str],
    posts: Mapping[str, Post],
    tfidf: TfIdfModel,
    k2: int,
    cap: int,
    *,
    query_vec: np.ndarray | None = None,
    reply_vectors: Callable[[str, int], np.ndarray] | None = None,
    reply_dims: int = 128,
    tokenizer: Tokenizer = tokenize,
    match_field: str = "title",
) -> CandidateSet:
    """Re-score retrieved posts and pool their replies.

    ``retrieved`` must already be in dense-retrieval order: when the
    query shares no TF-IDF mass with any post (all match scores zero),
    that order is what the candidates fall back to. The stable sort makes
    the fallback automatic -- equal scores never reorder posts.
    """
    if not retrieved:
        raise ValueError("retrieved must be non-empty")
    if k2 < 1:
        raise ValueError("k2 must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if match_field not in MATCH_FIELDS:
        raise ValueError(f"match_field must be one of {MATCH_FIELDS}")

    q_sparse = tfidf_vector(tfidf, tokenizer(query_text))
    scored: list[tuple[str, float]] = []
    for post_id in retrieved:
        post = posts[post_id]
        text = post.title if match_field == "title" else f"{post.title}\n{post.body}"
        p_sparse = tfidf_vector(tfidf, tokenizer(text))
        scored.append((post_id, cosine(q_sparse, p_sparse)))

    # stable sort: ties (including the all-zero fallback) keep dense order
    ranked = sorted(scored, key=lambda s: -s[1])[:k2]

    candidates: list[Candidate] = []
    for post_id, score in ranked:
        post = posts[post_id]
        for idx, reply in enumerate(post.replies):
            if len(candidates) >= cap:
                break
            if reply_vectors is not None:
                rvec = np.asarray(reply_vectors(post_id, idx), dtype=np.float32)
            else:
                rvec = np.zeros(reply_dims, dtype=np.float32)
            candidates.append(
                Candidate(
                    response_text=reply.text,
                    reply_vec=rvec,
                    post_id=post_id,
                    reply_index=idx,
                    net_score=reply.net_score,
                    match_score=score,
                )
            )
        if len(candidates) >= cap:
            break

    if not candidates:
        raise ValueError("retrieved posts contributed no replies")
    if query_vec is None:
        query_vec = np.zeros(0, dtype=np.float32)
    return CandidateSet(
        query_text=query_text,
        query_vec=np.asarray(query_vec, dtype=np.float32),
        candidates=candidates,
    )
