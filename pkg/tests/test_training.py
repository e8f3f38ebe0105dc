import numpy as np
import pytest

from coachbot.training import assemble_episodes, evaluate_recall, true_reply_of
from tests.conftest import make_desk_posts


class TestTrueReply:
    def test_highest_net_score_wins(self, desk_posts):
        for post in desk_posts:
            best = true_reply_of(post)
            nets = [r.net_score for r in post.replies]
            assert nets[best] == max(nets)
            assert best == nets.index(max(nets))  # earliest on ties


class TestAssembleEpisodes:
    def test_one_episode_per_post(self, desk_bundle):
        episodes = assemble_episodes(desk_bundle, mode="likes", seed=0)
        assert len(episodes) == len(desk_bundle.posts)

    def test_targets_are_probability_vectors(self, desk_bundle):
        for episode in assemble_episodes(desk_bundle, mode="likes", seed=0):
            assert episode.targets.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(episode.targets >= 0)

    def test_one_hot_contains_true_reply(self, desk_bundle):
        episodes = assemble_episodes(desk_bundle, mode="one_hot", seed=0)
        for episode, post in zip(episodes, desk_bundle.posts):
            cs = episode.candidates
            idx = cs.true_reply_index
            assert idx is not None
            chosen = cs.candidates[idx]
            assert chosen.post_id == post.post_id
            assert chosen.reply_index == true_reply_of(post)
            assert episode.targets[idx] == 1.0

    def test_candidates_respect_cap(self, desk_bundle):
        for episode in assemble_episodes(desk_bundle, mode="one_hot", seed=0):
            assert 1 <= len(episode.candidates.candidates) <= desk_bundle.pipeline.cap

    def test_max_episodes_samples_subset(self, desk_bundle):
        episodes = assemble_episodes(desk_bundle, mode="likes", max_episodes=10, seed=1)
        assert len(episodes) == 10

    def test_deterministic(self, desk_bundle):
        a = assemble_episodes(desk_bundle, mode="one_hot", max_episodes=12, seed=3)
        b = assemble_episodes(desk_bundle, mode="one_hot", max_episodes=12, seed=3)
        assert len(a) == len(b)
        for ea, eb in zip(a, b):
            assert ea.candidates.query_text == eb.candidates.query_text
            assert np.array_equal(ea.targets, eb.targets)


class TestEvaluateRecall:
    def test_recall_on_training_posts_is_high_at_k5(self, desk_bundle):
        heldout = desk_bundle.posts[:12]
        recall = evaluate_recall(desk_bundle, heldout, ks=[1, 5])
        # querying a post's own title must surface its replies most of the time
        assert recall[5] >= 0.5
        assert 0.0 <= recall[1] <= 1.0
        assert recall[1] <= recall[5]

    def test_empty_heldout(self, desk_bundle):
        assert evaluate_recall(desk_bundle, [], ks=[1]) == {1: 0.0}
