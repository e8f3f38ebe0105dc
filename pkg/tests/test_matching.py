"""Match-stage tests on the 3-title corpus whose TF-IDF cosines are
recomputed from the defining formula inside the test.
"""

import math

import numpy as np
import pytest

from coachbot.corpus import Post, Reply
from coachbot.matching import match_candidates
from coachbot.text import tokenize
from coachbot.tfidf import fit_tfidf


@pytest.fixture()
def posts():
    return {
        "p1": Post("p1", "love advice", "body", [Reply("r1a"), Reply("r1b", 2, 1)]),
        "p2": Post("p2", "date advice", "body", [Reply("r2a")]),
        "p3": Post(
            "p3", "love letter", "body", [Reply("r3a"), Reply("r3b"), Reply("r3c")]
        ),
    }


@pytest.fixture()
def tfidf(posts):
    return fit_tfidf([tokenize(p.title) for p in posts.values()])


class TestMatchOrdering:
    def test_rescored_order_and_hand_cosines(self, posts, tfidf):
        # hand oracle for query "love letter" against the three titles:
        # ln-based weights give cosines (0.2448.., 0.0, 1.0)
        a = math.log(1.5)
        b = math.log(3.0)
        cos_p1 = (a * a) / (math.sqrt(a * a + b * b) * math.sqrt(2) * a)
        cs = match_candidates(
            "love letter", ["p1", "p2", "p3"], posts, tfidf, k2=2, cap=10
        )
        assert [c.post_id for c in cs.candidates] == ["p3", "p3", "p3", "p1", "p1"]
        assert cs.candidates[0].match_score == pytest.approx(1.0, abs=1e-12)
        assert cs.candidates[3].match_score == pytest.approx(cos_p1, abs=1e-12)
        assert cs.candidates[3].match_score == pytest.approx(0.2448, abs=1e-3)
        texts = [c.response_text for c in cs.candidates]
        assert texts == ["r3a", "r3b", "r3c", "r1a", "r1b"]

    def test_match_scores_non_increasing(self, posts, tfidf):
        cs = match_candidates(
            "love letter", ["p1", "p2", "p3"], posts, tfidf, k2=3, cap=10
        )
        scores = [c.match_score for c in cs.candidates]
        assert scores == sorted(scores, reverse=True)

    def test_cap_truncates(self, posts, tfidf):
        cs = match_candidates(
            "love letter", ["p1", "p2", "p3"], posts, tfidf, k2=1, cap=2
        )
        assert len(cs.candidates) == 2
        assert [c.response_text for c in cs.candidates] == ["r3a", "r3b"]

    def test_zero_overlap_falls_back_to_dense_order(self, posts, tfidf):
        cs = match_candidates(
            "zzz qqq", ["p2", "p3", "p1"], posts, tfidf, k2=3, cap=10
        )
        assert [c.post_id for c in cs.candidates] == [
            "p2", "p3", "p3", "p3", "p1", "p1",
        ]
        assert all(c.match_score == 0.0 for c in cs.candidates)


class TestCandidateSetContracts:
    def test_candidates_subset_of_retrieved_replies(self, posts, tfidf):
        cs = match_candidates(
            "love advice", ["p1", "p3"], posts, tfidf, k2=2, cap=10
        )
        allowed = {
            (pid, i) for pid in ("p1", "p3") for i in range(len(posts[pid].replies))
        }
        assert all((c.post_id, c.reply_index) in allowed for c in cs.candidates)
        assert "p2" not in {c.post_id for c in cs.candidates}

    def test_net_scores_carried(self, posts, tfidf):
        cs = match_candidates("love advice", ["p1"], posts, tfidf, k2=1, cap=10)
        assert [c.net_score for c in cs.candidates] == [0, 1]

    def test_reply_vectors_looked_up(self, posts, tfidf):
        def lookup(post_id, reply_index):
            return np.full(4, float(reply_index), dtype=np.float32)

        cs = match_candidates(
            "love advice", ["p1"], posts, tfidf, k2=1, cap=10,
            reply_vectors=lookup, reply_dims=4,
        )
        assert cs.candidates[1].reply_vec.tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_deterministic(self, posts, tfidf):
        a = match_candidates("love letter", ["p1", "p2", "p3"], posts, tfidf, 2, 10)
        b = match_candidates("love letter", ["p1", "p2", "p3"], posts, tfidf, 2, 10)
        assert [(c.post_id, c.reply_index, c.match_score) for c in a.candidates] == [
            (c.post_id, c.reply_index, c.match_score) for c in b.candidates
        ]

    def test_empty_retrieved_rejected(self, posts, tfidf):
        with pytest.raises(ValueError):
            match_candidates("q", [], posts, tfidf, k2=1, cap=1)

    def test_validation(self, posts, tfidf):
        with pytest.raises(ValueError):
            match_candidates("q", ["p1"], posts, tfidf, k2=0, cap=1)
        with pytest.raises(ValueError):
            match_candidates("q", ["p1"], posts, tfidf, k2=1, cap=0)
        with pytest.raises(ValueError):
            match_candidates("q", ["p1"], posts, tfidf, 1, 1, match_field="replies")
