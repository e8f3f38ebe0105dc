"""Corpus ingestion walkthrough: parse, clean, and pair a forum dump.

Run:  python3 demos/01_corpus_ingestion.py
"""

import json

from coachbot import build_qr_pairs, clean_posts, parse_corpus

# A forum dump is one JSON object per line. This little corpus has a bit
# of everything: good posts, an ad, a photo-only post, and a broken line.
RAW_LINES = [
    json.dumps(
        {
            "post_id": "p1",
            "title": "how do i ask someone to a movie",
            "body": "we keep talking after class and i want to ask them out",
            "source": "demo-forum",
            "replies": [
                {"text": "just ask, the worst answer is no", "likes": 12, "dislikes": 2},
                {"text": "invite the whole group, less pressure", "likes": 3, "dislikes": 5},
            ],
        }
    ),
    json.dumps(
        {
            "post_id": "p2",
            "title": "BUY NOW best deals on watches",
            "body": "unbeatable prices, buy now",
            "replies": [{"text": "reported"}],
        }
    ),
    json.dumps(
        {
            "post_id": "p3",
            "title": "look at this",
            "body": "<img src='cat.jpg'> https://pix.example/cat",
            "replies": [{"text": "cute!"}],
        }
    ),
    json.dumps(
        {
            "post_id": "p4",
            "title": "second date ideas",
            "body": "dinner went well, what next?",
            "replies": [{"text": "a walk somewhere you can actually talk", "likes": 9}],
        }
    ),
    '{"post_id": "p5", "title": "broken record...',
]


def main():
    print("=== parsing ===")
    posts, errors = parse_corpus(RAW_LINES)
    print(f"{len(posts)} posts parsed, {len(errors)} parse errors")
    for err in errors:
        print(f"  line {err.line_no}: {err.reason}")

    print("\n=== cleaning ===")
    cleaned, stats = clean_posts(posts, noise_patterns=["buy now"])
    print(json.dumps(stats.as_dict(), indent=2))
    print("kept:", [p.post_id for p in cleaned])

    print("\n=== query-response pairs ===")
    for pair in build_qr_pairs(cleaned):
        print(
            f"  [{pair.post_id}#{pair.reply_index}] net={pair.net_score:+d} "
            f"{pair.query_text!r} -> {pair.response_text!r}"
        )


if __name__ == "__main__":
    main()
