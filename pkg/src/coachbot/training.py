"""Pipeline-level training helpers: embedding stages, episode assembly,
and recall evaluation.

Episode assembly is where teacher forcing lives: a training query is the
post's own title, so its true reply usually surfaces through retrieval
and matching on its own -- and is force-inserted into the candidate set
when it does not, because an episode without its true reply carries no
learning signal in one-hot mode.
"""

from __future__ import annotations

import logging

import numpy as np

from .bundle import EngineBundle, PipelineConfig, reply_doc_id
from .corpus import Post
from .matching import Candidate, CandidateSet, match_candidates
from .pvdm import PVDMConfig, PVDMModel, train_pvdm
from .ranker import TrainingEpisode, target_distribution
from .retrieval import DenseIndex, build_index, retrieve
from .text import tokenize
from .tfidf import TfIdfModel, fit_tfidf

logger = logging.getLogger(__name__)


def train_embedding_models(
    posts: list[Post],
    titles_config: PVDMConfig,
    replies_config: PVDMConfig,
) -> tuple[PVDMModel, PVDMModel, TfIdfModel]:
    """Train the title and reply paragraph-vector models plus TF-IDF."""
    title_docs = [(p.post_id, tokenize(p.title)) for p in posts]
    reply_docs = [
        (reply_doc_id(p.post_id, i), tokenize(r.text))
        for p in posts
        for i, r in enumerate(p.replies)
    ]
    title_model = train_pvdm(title_docs, titles_config)
    reply_model = train_pvdm(reply_docs, replies_config)
    tfidf = fit_tfidf([tokens for _, tokens in title_docs])
    return title_model, reply_model, tfidf


def build_title_index(title_model: PVDMModel) -> DenseIndex:
    """Index the trained title vectors under their post ids."""
    return build_index(title_model.doc_vectors, title_model.doc_ids)


def true_reply_of(post: Post) -> int:
    """The reply a query 'should' get: highest net score, earliest wins ties."""
    best = 0
    for i, reply in enumerate(post.replies):
        if reply.net_score > post.replies[best].net_score:
            best = i
    return best


def assemble_episodes(
    bundle: EngineBundle,
    mode: str = "likes",
    max_episodes: int | None = None,
    seed: int = 0,
) -> list[TrainingEpisode]:
    """Build one training episode per corpus post by running stages 1-2.

    The query embedding is the post's trained title vector (it was a
    training document, so no inference pass is needed). In one-hot mode
    the post's best reply is the supervision target and is force-inserted
    into the candidates when matching missed it.
    """
    config = bundle.pipeline
    posts = bundle.posts
    rng = np.random.default_rng(seed)
    if max_episodes is not None and max_episodes < len(posts):
        chosen = rng.choice(len(posts), size=max_episodes, replace=False)
        posts = [posts[i] for i in sorted(chosen)]

    episodes: list[TrainingEpisode] = []
    for post in posts:
        query_vec = bundle.title_model.doc_vector(post.post_id)
        retrieved = retrieve(bundle.index, query_vec, config.k1)
        candidate_set = match_candidates(
            post.title,
            [pid for pid, _ in retrieved],
            bundle.posts_by_id,
            bundle.tfidf,
            k2=config.k2,
            cap=config.cap,
            query_vec=query_vec,
            reply_vectors=bundle.reply_vector,
            reply_dims=bundle.reply_model.dims,
            match_field=config.match_field,
        )
        if mode == "one_hot":
            true_idx = true_reply_of(post)
            position = next(
                (
                    i
                    for i, c in enumerate(candidate_set.candidates)
                    if c.post_id == post.post_id and c.reply_index == true_idx
                ),
                None,
            )
            if position is None:
                reply = post.replies[true_idx]
                forced = Candidate(
                    response_text=reply.text,
                    reply_vec=np.asarray(
                        bundle.reply_vector(post.post_id, true_idx), dtype=np.float32
                    ),
                    post_id=post.post_id,
                    reply_index=true_idx,
                    net_score=reply.net_score,
                    match_score=0.0,
                )
                candidate_set.candidates[-1] = forced
                position = len(candidate_set.candidates) - 1
            candidate_set.true_reply_index = position
        targets = target_distribution(
            [c.net_score for c in candidate_set.candidates],
            mode=mode,
            true_reply_index=candidate_set.true_reply_index,
        )
        episodes.append(TrainingEpisode(candidates=candidate_set, targets=targets))
    return episodes


def evaluate_recall(
    bundle: EngineBundle, heldout: list[Post], ks: list[int]
) -> dict[int, float]:
    """Recall@k of each held-out post's replies among ranked candidates.

    A query is the held-out title; a hit at k means one of that post's
    own reply texts appears among the k candidates with highest response
    probability.
    """
    from .engine import answer  # local import to avoid a cycle

    hits = {k: 0 for k in ks}
    for qi, post in enumerate(heldout):
        truth = {r.text for r in post.replies}
        response = answer(post.title, bundle, seed=qi, policy="argmax")
        ranked = sorted(
            response.trace.candidates, key=lambda c: -c.probability
        )
        for k in ks:
            top = {c.text for c in ranked[:k]}
            if truth & top:
                hits[k] += 1
    return {k: hits[k] / len(heldout) for k in ks} if heldout else {k: 0.0 for k in ks}
