"""Forum corpus ingestion: parse line-delimited records, clean, pair.

Input is one JSON object per line::

    {"post_id": "...", "title": "...", "body": "...", "source": "...",
     "replies": [{"text": "...", "likes": 3, "dislikes": 1}, ...]}

``source`` is optional, as are ``likes``/``dislikes`` (default 0).
Cleaning applies the usual forum hygiene: drop posts that advertise,
carry no readable body, have an empty title, or end up with no replies.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Pattern

# Markup/URL stripping used only to decide whether a body has real text;
# the stored body is never rewritten.
_TAG_RE = re.compile(r"<[^>]*>")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)


@dataclass
class Reply:
    text: str
    likes: int = 0
    dislikes: int = 0

    @property
    def net_score(self) -> int:
        return self.likes - self.dislikes


@dataclass
class Post:
    post_id: str
    title: str
    body: str
    replies: list[Reply]
    source: str = ""


@dataclass
class QRPair:
    """One query-response training unit: post title paired with a reply."""

    query_text: str
    response_text: str
    post_id: str
    reply_index: int
    net_score: int


@dataclass
class ParseError:
    line_no: int
    reason: str


@dataclass
class CorpusStats:
    posts_in: int = 0
    posts_kept: int = 0
    posts_dropped_no_reply: int = 0
    posts_dropped_no_body: int = 0
    posts_dropped_no_title: int = 0
    posts_dropped_noise: int = 0
    replies_kept: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "posts_in": self.posts_in,
            "posts_kept": self.posts_kept,
            "posts_dropped_no_reply": self.posts_dropped_no_reply,
            "posts_dropped_no_body": self.posts_dropped_no_body,
            "posts_dropped_no_title": self.posts_dropped_no_title,
            "posts_dropped_noise": self.posts_dropped_noise,
            "replies_kept": self.replies_kept,
        }


def _parse_reply(obj, line_no: int, idx: int) -> Reply:
    if not isinstance(obj, dict):
        raise _FieldError(f"replies[{idx}] is not an object")
    text = obj.get("text")
    if not isinstance(text, str):
        raise _FieldError(f"replies[{idx}].text missing or not a string")
    likes = obj.get("likes", 0)
    dislikes = obj.get("dislikes", 0)
    for name, value in (("likes", likes), ("dislikes", dislikes)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise _FieldError(f"replies[{idx}].{name} must be a non-negative integer")
    return Reply(text=text, likes=likes, dislikes=dislikes)


class _FieldError(Exception):
    pass


def _parse_record(raw: str, line_no: int) -> Post:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _FieldError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise _FieldError("record is not an object")
    for name in ("post_id", "title", "body"):
        value = obj.get(name)
        if not isinstance(value, str):
            raise _FieldError(f"field '{name}' missing or not a string")
    replies = obj.get("replies")
    if not isinstance(replies, list):
        raise _FieldError("field 'replies' missing or not an array")
    source = obj.get("source", "")
    if not isinstance(source, str):
        raise _FieldError("field 'source' must be a string")
    parsed = [_parse_reply(r, line_no, i) for i, r in enumerate(replies)]
    return Post(
        post_id=obj["post_id"],
        title=obj["title"],
        body=obj["body"],
        replies=parsed,
        source=source,
    )


def parse_corpus(record_stream: Iterable[str]) -> tuple[list[Post], list[ParseError]]:
    """Parse line-delimited records into posts, collecting per-line errors.

    Malformed lines never abort the stream; each produces a ParseError
    with its 1-based line number. A duplicate post_id is an error on the
    later record. Blank lines are skipped.
    """
    posts: list[Post] = []
    errors: list[ParseError] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(record_stream, start=1):
        if not raw.strip():
            continue
        try:
            post = _parse_record(raw, line_no)
        except _FieldError as exc:
            errors.append(ParseError(line_no=line_no, reason=str(exc)))
            continue
        if post.post_id in seen_ids:
            errors.append(
                ParseError(line_no=line_no, reason=f"duplicate post_id '{post.post_id}'")
            )
            continue
        seen_ids.add(post.post_id)
        posts.append(post)
    return posts, errors


def strip_markup(text: str) -> str:
    """Remove HTML-ish tags and URLs; used for the has-real-text check."""
    return _URL_RE.sub(" ", _TAG_RE.sub(" ", text))


def compile_noise_patterns(patterns: Iterable[str]) -> list[Pattern[str]]:
    """Compile noise (ad) patterns; matching is case-insensitive search."""
    return [re.compile(p, re.IGNORECASE) for p in patterns]


def clean_posts(
    posts: Iterable[Post], noise_patterns: Iterable[str] = ()
) -> tuple[list[Post], CorpusStats]:
    """Apply the corpus hygiene filters and account for every input post.

    Drop rules, checked in this order (the first hit is what the stats
    record): title/body matches a noise pattern; body empty after markup
    and URL stripping; empty title; no replies left once empty-text
    replies are removed. Whitespace-only text counts as empty throughout.
    """
    compiled = compile_noise_patterns(noise_patterns)
    stats = CorpusStats()
    kept: list[Post] = []
    for post in posts:
        stats.posts_in += 1
        if any(p.search(post.title) or p.search(post.body) for p in compiled):
            stats.posts_dropped_noise += 1
            continue
        if not strip_markup(post.body).strip():
            stats.posts_dropped_no_body += 1
            continue
        if not post.title.strip():
            stats.posts_dropped_no_title += 1
            continue
        replies = [r for r in post.replies if r.text.strip()]
        if not replies:
            stats.posts_dropped_no_reply += 1
            continue
        kept.append(
            Post(
                post_id=post.post_id,
                title=post.title,
                body=post.body,
                replies=replies,
                source=post.source,
            )
        )
        stats.posts_kept += 1
        stats.replies_kept += len(replies)
    return kept, stats


def build_qr_pairs(posts: Iterable[Post]) -> list[QRPair]:
    """Flatten cleaned posts into (title, reply) pairs.

    ``net_score`` is likes - dislikes, kept signed; clamping is the
    ranker's business, not the corpus layer's.
    """
    pairs: list[QRPair] = []
    for post in posts:
        for idx, reply in enumerate(post.replies):
            pairs.append(
                QRPair(
                    query_text=post.title,
                    response_text=reply.text,
                    post_id=post.post_id,
                    reply_index=idx,
                    net_score=reply.net_score,
                )
            )
    return pairs


def post_to_record(post: Post) -> dict:
    """Serialize a post back to the corpus schema object."""
    return {
        "post_id": post.post_id,
        "title": post.title,
        "body": post.body,
        "source": post.source,
        "replies": [
            {"text": r.text, "likes": r.likes, "dislikes": r.dislikes}
            for r in post.replies
        ],
    }
