"""End-to-end query answering and in-memory chat sessions.

One call runs the whole pipeline: tokenize, embed the query, retrieve
posts by dense cosine, re-match them with TF-IDF, score the pooled
replies with the bilinear ranker, and pick one. The trace records what
every stage did, so a response is auditable down to its probabilities.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .bundle import EngineBundle
from .matching import match_candidates
from .pvdm import infer_doc_vector
from .ranker import candidate_scores, response_distribution, select_response
from .retrieval import retrieve
from .text import tokenize


class InvalidQuery(ValueError):
    """The utterance is empty (or tokenizes to nothing)."""


@dataclass
class CandidateTrace:
    post_id: str
    reply_index: int
    match_score: float
    probability: float
    text: str


@dataclass
class Trace:
    retrieved: list[tuple[str, float]]
    candidates: list[CandidateTrace]
    selected_index: int
    policy: str
    seed: int
    fallback: bool


@dataclass
class ChatResponse:
    response_text: str
    trace: Trace


@dataclass
class Session:
    session_id: str
    created_at: float
    history: list[tuple[str, str, float]] = field(default_factory=list)


class SessionStore:
    """Append-only in-memory session log, safe under concurrent requests."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def record(self, session_id: str, utterance: str, response_text: str) -> Session:
        now = time.time()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                session = Session(session_id=session_id, created_at=now)
                self._sessions[session_id] = session
            session.history.append((utterance, response_text, now))
            return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)


def answer(
    utterance: str,
    bundle: EngineBundle,
    seed: int | None = None,
    policy: str | None = None,
    temperature: float | None = None,
) -> ChatResponse:
    """Run the three-stage pipeline for one utterance.

    A fixed seed makes the whole call deterministic: it drives both the
    query-vector inference and the sampling policy. When the query shares
    no vocabulary with the embedding model, the dense stage is skipped
    and TF-IDF matching runs over the full corpus instead; the trace
    flags that fallback.
    """
    if bundle.ranker is None:
        raise ValueError("bundle has no trained ranker")
    if not bundle.posts:
        raise ValueError("bundle corpus is empty")
    config = bundle.pipeline
    policy = config.policy if policy is None else policy
    temperature = config.temperature if temperature is None else temperature

    tokens = tokenize(utterance)
    if not tokens:
        raise InvalidQuery("utterance is empty after tokenization")

    if seed is None:
        seed = secrets.randbelow(2**31)
    infer_seed, select_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(2)
    )

    fallback = False
    try:
        query_vec = infer_doc_vector(bundle.title_model, tokens, seed=infer_seed)
    except ValueError as exc:
        if "no known tokens" not in str(exc):
            raise
        fallback = True
        query_vec = np.zeros(bundle.title_model.dims, dtype=np.float32)

    if fallback:
        retrieved = [(post.post_id, 0.0) for post in bundle.posts]
        trace_retrieved: list[tuple[str, float]] = []
    else:
        retrieved = retrieve(bundle.index, query_vec, config.k1)
        trace_retrieved = retrieved

    candidate_set = match_candidates(
        utterance,
        [post_id for post_id, _ in retrieved],
        bundle.posts_by_id,
        bundle.tfidf,
        k2=config.k2,
        cap=config.cap,
        query_vec=query_vec,
        reply_vectors=bundle.reply_vector,
        reply_dims=bundle.reply_model.dims,
        match_field=config.match_field,
    )

    replies = np.stack([c.reply_vec for c in candidate_set.candidates])
    scores = candidate_scores(query_vec.astype(np.float64), replies, bundle.ranker)
    probabilities = response_distribution(scores)
    selected = select_response(
        probabilities, policy=policy, temperature=temperature, seed=select_seed
    )

    chosen = candidate_set.candidates[selected]
    trace = Trace(
        retrieved=trace_retrieved,
        candidates=[
            CandidateTrace(
                post_id=c.post_id,
                reply_index=c.reply_index,
                match_score=c.match_score,
                probability=float(p),
                text=c.response_text,
            )
            for c, p in zip(candidate_set.candidates, probabilities)
        ],
        selected_index=selected,
        policy=policy,
        seed=seed,
        fallback=fallback,
    )
    return ChatResponse(response_text=chosen.response_text, trace=trace)
