"""Embedding walkthrough: paragraph vectors and TF-IDF side by side.

Trains a small distributed-memory paragraph-vector model on a synthetic
two-topic corpus, then shows that (a) documents cluster by topic,
(b) an unseen query embeds near its topic, and (c) TF-IDF weights match
what you would compute by hand.

Run:  python3 demos/02_embeddings.py
"""

import numpy as np

from coachbot import (
    PVDMConfig,
    cosine,
    fit_tfidf,
    infer_doc_vector,
    tfidf_vector,
    tokenize,
    train_pvdm,
)

COOKING = "dough oven spice roast simmer knead salt butter flour grill".split()
ASTRONOMY = "orbit nebula telescope lunar comet galaxy eclipse star dust flare".split()


def synth_docs(vocab, label, n, rng):
    docs = []
    for i in range(n):
        anchor = rng.choice(len(vocab), size=4, replace=False)
        tokens = [vocab[anchor[j % 4]] for j in range(12)]
        docs.append((f"{label}{i:02d}", list(rng.permutation(tokens))))
    return docs


def main():
    rng = np.random.default_rng(42)
    docs = synth_docs(COOKING, "cook", 40, rng) + synth_docs(ASTRONOMY, "astro", 40, rng)

    print("=== training paragraph vectors (distributed memory) ===")
    model = train_pvdm(docs, PVDMConfig(dims=24, epochs=20, seed=1))
    print(f"vocab {len(model.vocab)} tokens, doc matrix {model.doc_vectors.shape}")
    print("per-epoch mean loss:", " ".join(f"{l:.2f}" for l in model.epoch_losses[:8]), "...")

    print("\n=== topic structure in document space ===")
    unit = model.doc_vectors / np.linalg.norm(model.doc_vectors, axis=1, keepdims=True)
    cook, astro = unit[:40], unit[40:]
    iu = np.triu_indices(40, k=1)
    print(f"mean cosine cook~cook   {float((cook @ cook.T)[iu].mean()):+.3f}")
    print(f"mean cosine astro~astro {float((astro @ astro.T)[iu].mean()):+.3f}")
    print(f"mean cosine cook~astro  {float((cook @ astro.T).mean()):+.3f}")

    print("\n=== embedding an unseen query ===")
    query = "fresh dough in a hot oven with butter"
    q_vec = infer_doc_vector(model, tokenize(query), seed=7)
    sims = unit @ (q_vec / np.linalg.norm(q_vec))
    top = np.argsort(-sims)[:5]
    print(f"query: {query!r}")
    for di in top:
        print(f"  {sims[di]:+.3f}  {model.doc_ids[di]}  {' '.join(docs[di][1][:6])} ...")

    print("\n=== TF-IDF by hand ===")
    corpus = [["love", "advice"], ["date", "advice"], ["love", "letter"]]
    tfidf = fit_tfidf(corpus)
    print("df:", tfidf.df, "N:", tfidf.n_docs)
    q = tfidf_vector(tfidf, ["love", "date"])
    d1 = tfidf_vector(tfidf, ["love", "advice"])
    print("query 'love date'  ->", {t: round(w, 4) for t, w in q.items()})
    print("doc   'love advice'->", {t: round(w, 4) for t, w in d1.items()})
    print(f"cosine(query, doc) = {cosine(q, d1):.4f}   (ln-formula hand value 0.2448)")


if __name__ == "__main__":
    main()
