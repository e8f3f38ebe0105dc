import json

import numpy as np
import pytest

from coachbot.corpus import (
    CorpusStats,
    Post,
    Reply,
    build_qr_pairs,
    clean_posts,
    parse_corpus,
    post_to_record,
)


def record(post_id="p1", title="t", body="b", replies=None, **extra):
    obj = {
        "post_id": post_id,
        "title": title,
        "body": body,
        "replies": [] if replies is None else replies,
    }
    obj.update(extra)
    return json.dumps(obj)


class TestParse:
    def test_valid_record(self):
        line = record(replies=[{"text": "r1", "likes": 3}, {"text": "r2"}])
        posts, errors = parse_corpus([line])
        assert errors == []
        assert len(posts) == 1
        post = posts[0]
        assert post.title == "t"
        assert post.body == "b"
        assert [r.text for r in post.replies] == ["r1", "r2"]
        assert post.replies[0].likes == 3
        assert post.replies[0].dislikes == 0

    def test_missing_title(self):
        obj = {"post_id": "p1", "body": "b", "replies": []}
        posts, errors = parse_corpus([json.dumps(obj)])
        assert posts == []
        assert len(errors) == 1
        assert "title" in errors[0].reason
        assert errors[0].line_no == 1

    def test_empty_input(self):
        assert parse_corpus([]) == ([], [])

    def test_bad_json_does_not_abort(self):
        lines = ["{not json", record("p1"), record("p2")]
        posts, errors = parse_corpus(lines)
        assert [p.post_id for p in posts] == ["p1", "p2"]
        assert len(errors) == 1
        assert errors[0].line_no == 1

    def test_duplicate_post_id_errors_on_later(self):
        posts, errors = parse_corpus([record("p1", title="first"), record("p1")])
        assert len(posts) == 1
        assert posts[0].title == "first"
        assert len(errors) == 1
        assert errors[0].line_no == 2
        assert "duplicate" in errors[0].reason

    def test_negative_likes_rejected(self):
        line = record(replies=[{"text": "r", "likes": -1}])
        posts, errors = parse_corpus([line])
        assert posts == []
        assert "likes" in errors[0].reason

    def test_blank_lines_skipped(self):
        posts, errors = parse_corpus(["", record("p1"), "   \n"])
        assert len(posts) == 1
        assert errors == []

    def test_order_preserved(self):
        lines = [record(f"p{i}") for i in range(5)]
        posts, _ = parse_corpus(lines)
        assert [p.post_id for p in posts] == [f"p{i}" for i in range(5)]


def make_post(post_id="p", title="a title", body="a body", n_replies=2, **kw):
    replies = [Reply(text=f"reply {i}") for i in range(n_replies)]
    return Post(post_id=post_id, title=title, body=body, replies=replies, **kw)


class TestClean:
    def test_no_replies_dropped(self):
        kept, stats = clean_posts([make_post(n_replies=0)])
        assert kept == []
        assert stats.posts_dropped_no_reply == 1

    def test_empty_body_dropped(self):
        kept, stats = clean_posts([make_post(body="")])
        assert kept == []
        assert stats.posts_dropped_no_body == 1

    def test_whitespace_body_counts_as_empty(self):
        _, stats = clean_posts([make_post(body="   \n\t")])
        assert stats.posts_dropped_no_body == 1

    def test_markup_only_body_is_non_text(self):
        post = make_post(body='<img src="x.jpg"> https://pix.example/1')
        _, stats = clean_posts([post])
        assert stats.posts_dropped_no_body == 1

    def test_empty_title_dropped(self):
        _, stats = clean_posts([make_post(title=" ")])
        assert stats.posts_dropped_no_title == 1

    def test_noise_pattern_matches_title_or_body(self):
        posts = [
            make_post("p1", title="BUY NOW cheap pills"),
            make_post("p2", body="limited offer, buy now!"),
            make_post("p3"),
        ]
        kept, stats = clean_posts(posts, noise_patterns=["buy now"])
        assert [p.post_id for p in kept] == ["p3"]
        assert stats.posts_dropped_noise == 2

    def test_empty_text_replies_removed(self):
        post = Post("p", "t", "b", [Reply(""), Reply("ok"), Reply("  ")])
        kept, stats = clean_posts([post])
        assert len(kept) == 1
        assert [r.text for r in kept[0].replies] == ["ok"]
        assert stats.replies_kept == 1

    def test_post_left_with_no_replies_drops(self):
        post = Post("p", "t", "b", [Reply(""), Reply("   ")])
        kept, stats = clean_posts([post])
        assert kept == []
        assert stats.posts_dropped_no_reply == 1

    def test_ten_post_fixture_keeps_seven(self):
        posts = [make_post(f"p{i}") for i in range(7)]
        posts.insert(2, make_post("bad1", n_replies=0))
        posts.insert(5, make_post("bad2", body=""))
        posts.insert(8, make_post("bad3", title="buy now miracle diet"))
        assert len(posts) == 10
        kept, stats = clean_posts(posts, noise_patterns=["buy now"])
        assert len(kept) == 7
        assert stats.posts_in == 10
        assert stats.posts_kept == 7
        assert stats.posts_dropped_no_reply == 1
        assert stats.posts_dropped_no_body == 1
        assert stats.posts_dropped_noise == 1

    def test_conservation_on_random_fixtures(self):
        rng = np.random.default_rng(17)
        for trial in range(30):
            posts = []
            for i in range(int(rng.integers(1, 40))):
                kind = rng.integers(0, 5)
                post = make_post(
                    f"t{trial}p{i}",
                    title="" if kind == 1 else "title words",
                    body="" if kind == 2 else "body words",
                    n_replies=0 if kind == 3 else int(rng.integers(1, 4)),
                )
                if kind == 4:
                    post.body = "click to buy now"
                posts.append(post)
            kept, stats = clean_posts(posts, noise_patterns=["buy now"])
            dropped = (
                stats.posts_dropped_no_reply
                + stats.posts_dropped_no_body
                + stats.posts_dropped_no_title
                + stats.posts_dropped_noise
            )
            assert stats.posts_in == len(posts)
            assert stats.posts_kept + dropped == stats.posts_in
            assert stats.posts_kept == len(kept)
            assert stats.replies_kept == sum(len(p.replies) for p in kept)

    def test_idempotent(self):
        posts = [
            make_post("p1"),
            make_post("p2", body="<b>bold</b> text"),
            Post("p3", "t", "b", [Reply(""), Reply("keep")]),
        ]
        once, _ = clean_posts(posts, noise_patterns=["spam"])
        twice, stats = clean_posts(once, noise_patterns=["spam"])
        assert twice == once
        assert stats.posts_kept == stats.posts_in


class TestQRPairs:
    def test_net_scores(self):
        post = Post("p", "t", "b", [Reply("a", 3, 1), Reply("b", 2, 2)])
        pairs = build_qr_pairs([post])
        assert [p.net_score for p in pairs] == [2, 0]
        assert all(p.query_text == "t" for p in pairs)

    def test_counts_and_uniqueness(self):
        posts = [make_post(f"p{i}", n_replies=2) for i in range(3)]
        pairs = build_qr_pairs(posts)
        assert len(pairs) == 6
        keys = {(p.post_id, p.reply_index) for p in pairs}
        assert len(keys) == 6

    def test_negative_net_score_preserved(self):
        post = Post("p", "t", "b", [Reply("r", 0, 4)])
        assert build_qr_pairs([post])[0].net_score == -4

    def test_pair_count_matches_cleaned_replies(self):
        rng = np.random.default_rng(23)
        posts = [
            make_post(f"p{i}", n_replies=int(rng.integers(1, 5))) for i in range(20)
        ]
        kept, stats = clean_posts(posts)
        assert len(build_qr_pairs(kept)) == stats.replies_kept


class TestRoundTrip:
    def test_post_to_record_round_trips(self):
        post = make_post("p1", source="forum-a")
        post.replies[0].likes = 5
        line = json.dumps(post_to_record(post))
        parsed, errors = parse_corpus([line])
        assert errors == []
        assert parsed[0] == post
