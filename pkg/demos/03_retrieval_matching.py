"""Retrieve-then-match walkthrough: the first two pipeline stages.

Stage 1 pulls the nearest posts by dense cosine over title vectors;
stage 2 re-scores them with sparse TF-IDF and pools their replies into
the candidate set the ranker will see.

Run:  python3 demos/03_retrieval_matching.py
"""

import numpy as np

from coachbot import (
    Post,
    PVDMConfig,
    Reply,
    build_index,
    fit_tfidf,
    infer_doc_vector,
    match_candidates,
    retrieve,
    tokenize,
    train_pvdm,
)

TITLES = [
    ("p1", "nervous about a first date at a coffee shop"),
    ("p2", "how early should i arrive for a first date"),
    ("p3", "good conversation topics for a first date"),
    ("p4", "my crush keeps leaving me on read"),
    ("p5", "should i text back right away or wait"),
    ("p6", "how to end a text conversation politely"),
]

REPLIES = {
    "p1": ["order something simple so you can focus on talking",
           "being a little nervous reads as charming, honestly"],
    "p2": ["ten minutes early, never more than fifteen"],
    "p3": ["ask about the thing they could talk about for hours"],
    "p4": ["stop double texting and give it a few days"],
    "p5": ["reply when you actually have something to say"],
    "p6": ["say you enjoyed it and suggest a concrete next plan"],
}


def main():
    posts = {
        pid: Post(pid, title, "body", [Reply(t) for t in REPLIES[pid]])
        for pid, title in TITLES
    }

    print("=== stage 0: train title vectors and TF-IDF ===")
    docs = [(pid, tokenize(title)) for pid, title in TITLES]
    model = train_pvdm(docs, PVDMConfig(dims=16, window=3, epochs=40, seed=5))
    tfidf = fit_tfidf([tokens for _, tokens in docs])
    index = build_index(model.doc_vectors, model.doc_ids)
    print(f"index holds {len(index)} posts at {index.dims} dims")

    query = "so nervous about my coffee date tomorrow"
    print(f"\nquery: {query!r}")

    print("\n=== stage 1: dense retrieval ===")
    q_vec = infer_doc_vector(model, tokenize(query), seed=3)
    retrieved = retrieve(index, q_vec, k1=4)
    for pid, sim in retrieved:
        print(f"  {sim:+.3f}  {pid}  {posts[pid].title!r}")

    print("\n=== stage 2: TF-IDF matching pools candidate replies ===")
    cs = match_candidates(
        query, [pid for pid, _ in retrieved], posts, tfidf, k2=2, cap=5,
        query_vec=q_vec,
    )
    for c in cs.candidates:
        print(f"  match={c.match_score:.3f}  [{c.post_id}#{c.reply_index}] "
              f"{c.response_text!r}")

    print("\n=== zero-overlap query falls back to dense order ===")
    oov_query = "zzz qqq xxx"
    cs = match_candidates(
        oov_query, [pid for pid, _ in retrieved], posts, tfidf, k2=3, cap=5,
    )
    print(f"query {oov_query!r} -> candidates from "
          f"{[c.post_id for c in cs.candidates]}")


if __name__ == "__main__":
    main()
