"""Response-ranker walkthrough: bilinear features, softmax selection,
and learning a planted signal that generalizes.

Each candidate reply r gets m features act(q' W_j r + b_j), collapsed to
one score act(f . s + c); softmax over the scores is the response
distribution. Here every episode's true reply is the same fixed linear
projection of its query (plus noise), while distractors are random with
the same norm distribution -- so the only way to score well on episodes
never seen in training is to actually learn the projection.

Run:  python3 demos/04_response_ranking.py
"""

import numpy as np

from coachbot import (
    TrainConfig,
    TrainingEpisode,
    candidate_scores,
    response_distribution,
    select_response,
    train_ranker,
)
from coachbot.matching import Candidate, CandidateSet

D_Q, D_R, N_CANDIDATES = 16, 8, 6


def planted_episodes(projection, n_episodes, rng, noise=0.1):
    episodes = []
    for e in range(n_episodes):
        q = rng.normal(size=D_Q)
        true_idx = int(rng.integers(N_CANDIDATES))
        candidates = []
        for i in range(N_CANDIDATES):
            if i == true_idx:
                vec = projection @ q + noise * rng.normal(size=D_R)
            else:
                vec = rng.normal(size=D_R)  # same norm scale as the true reply
            candidates.append(
                Candidate(f"reply {e}.{i}", vec.astype(np.float32), f"p{e}", i, 0, 0.0)
            )
        cs = CandidateSet(f"q{e}", q.astype(np.float32), candidates,
                          true_reply_index=true_idx)
        targets = np.zeros(N_CANDIDATES)
        targets[true_idx] = 1.0
        episodes.append(TrainingEpisode(cs, targets))
    return episodes


def recall_at_1(episodes, params):
    hits = 0
    for ep in episodes:
        cs = ep.candidates
        g = candidate_scores(
            cs.query_vec.astype(np.float64),
            np.stack([c.reply_vec for c in cs.candidates]),
            params,
        )
        hits += int(select_response(response_distribution(g), "argmax")
                    == cs.true_reply_index)
    return hits / len(episodes)


def main():
    rng = np.random.default_rng(99)
    projection = rng.normal(size=(D_R, D_Q)) / np.sqrt(D_Q)
    train = planted_episodes(projection, 400, rng)
    test = planted_episodes(projection, 60, rng)

    print("=== training the bilinear ranker (plain SGD, MSE on softmax) ===")
    config = TrainConfig(learning_rate=0.01, epochs=30, seed=4,
                         target_mode="one_hot", m=4)
    params, history = train_ranker(train, config)
    for e in (0, 4, 9, 19, 29):
        print(f"  epoch {e + 1:>2}: mean loss {history[e]:.5f}")

    print(f"\n=== recall@1 (random baseline 1/{N_CANDIDATES} = "
          f"{1 / N_CANDIDATES:.2f}) ===")
    print(f"  training episodes  {recall_at_1(train, params):.2f}")
    print(f"  unseen episodes    {recall_at_1(test, params):.2f}")

    print("\n=== a single unseen episode, scored ===")
    cs = test[0].candidates
    g = candidate_scores(
        cs.query_vec.astype(np.float64),
        np.stack([c.reply_vec for c in cs.candidates]),
        params,
    )
    p = response_distribution(g)
    for i, (score, prob) in enumerate(zip(g, p)):
        marker = "<- true" if i == cs.true_reply_index else ""
        print(f"  candidate {i}: score {score:8.3f}  p {prob:.3f} {marker}")
    print(f"argmax pick: {select_response(p, 'argmax')}")
    print(f"sampled pick (seed 1, T=1.0): {select_response(p, 'sample', seed=1)}")
    print(f"sampled pick (seed 1, T=3.0): "
          f"{select_response(p, 'sample', temperature=3.0, seed=1)}")


if __name__ == "__main__":
    main()
