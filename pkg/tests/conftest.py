"""Shared fixtures: synthetic corpora and trained desk-scale models."""

from __future__ import annotations

import numpy as np
import pytest

from coachbot.bundle import EngineBundle, PipelineConfig
from coachbot.corpus import Post, Reply
from coachbot.pvdm import PVDMConfig, train_pvdm
from coachbot.ranker import TrainConfig, train_ranker
from coachbot.training import (
    assemble_episodes,
    build_title_index,
    train_embedding_models,
)

TOPIC_A = [f"aa{i:02d}" for i in range(30)]
TOPIC_B = [f"bb{i:02d}" for i in range(30)]


def make_two_topic_docs(
    n_per_topic: int = 100, anchors: int = 4, doc_len: int = 12, seed: int = 11
) -> list[tuple[str, list[str]]]:
    """Docs drawn from two disjoint vocabularies; ids carry the topic.

    Each doc repeats a small set of anchor words sampled from its topic
    vocabulary, shuffled. Anchors give every doc a recognizable identity
    (so re-inference can find it again) while the disjoint vocabularies
    keep the topics separable.
    """
    rng = np.random.default_rng(seed)
    docs = []
    for t, vocab in (("a", TOPIC_A), ("b", TOPIC_B)):
        for i in range(n_per_topic):
            anchor = rng.choice(len(vocab), size=anchors, replace=False)
            tokens = [vocab[anchor[j % anchors]] for j in range(doc_len)]
            perm = rng.permutation(doc_len)
            docs.append((f"{t}{i:03d}", [tokens[p] for p in perm]))
    return docs


@pytest.fixture(scope="session")
def two_topic_docs():
    return make_two_topic_docs()


@pytest.fixture(scope="session")
def two_topic_model(two_topic_docs):
    config = PVDMConfig(dims=32, window=5, epochs=20, seed=7)
    return train_pvdm(two_topic_docs, config)


def make_desk_posts(n_posts: int = 36, seed: int = 29) -> list[Post]:
    """A small forum-shaped corpus with distinctive titles and replies.

    Titles and replies repeat a handful of anchor words from one of two
    topic vocabularies, long enough (8+ tokens) to produce training
    windows at the default window size. Every reply text is unique, so
    closed-world checks can match texts exactly.
    """
    rng = np.random.default_rng(seed)
    posts = []
    for i in range(n_posts):
        vocab = TOPIC_A if i % 2 == 0 else TOPIC_B
        anchor = rng.choice(len(vocab), size=4, replace=False)
        title_tokens = [vocab[anchor[j % 4]] for j in range(8)]
        perm = rng.permutation(8)
        title = " ".join(title_tokens[p] for p in perm)
        replies = []
        for ri in range(int(rng.integers(2, 5))):
            r_anchor = rng.choice(len(vocab), size=3, replace=False)
            tokens = [vocab[r_anchor[j % 3]] for j in range(8)]
            rperm = rng.permutation(8)
            text = " ".join(tokens[p] for p in rperm) + f" reply{i:02d}x{ri}"
            replies.append(
                Reply(
                    text=text,
                    likes=int(rng.integers(0, 7)),
                    dislikes=int(rng.integers(0, 3)),
                )
            )
        posts.append(
            Post(
                post_id=f"post{i:03d}",
                title=title,
                body=f"body text for post {i}",
                replies=replies,
                source="fixture",
            )
        )
    return posts


@pytest.fixture(scope="session")
def desk_posts():
    return make_desk_posts()


def make_desk_bundle(posts: list[Post], train_ranker_epochs: int = 10) -> EngineBundle:
    titles_config = PVDMConfig(dims=32, epochs=10, seed=3)
    replies_config = PVDMConfig(dims=16, epochs=10, seed=4)
    title_model, reply_model, tfidf = train_embedding_models(
        posts, titles_config, replies_config
    )
    index = build_title_index(title_model)
    bundle = EngineBundle(
        posts=posts,
        title_model=title_model,
        reply_model=reply_model,
        tfidf=tfidf,
        index=index,
        ranker=None,
        pipeline=PipelineConfig(k1=20, k2=5, cap=8),
    )
    episodes = assemble_episodes(bundle, mode="one_hot", seed=5)
    config = TrainConfig(
        learning_rate=0.05,
        epochs=train_ranker_epochs,
        seed=6,
        target_mode="one_hot",
        m=4,
    )
    params, _ = train_ranker(episodes, config)
    bundle.ranker = params
    bundle.validate()
    return bundle


@pytest.fixture(scope="session")
def desk_bundle(desk_posts):
    return make_desk_bundle(desk_posts)
