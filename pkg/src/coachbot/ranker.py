"""Bilinear response ranking: scores, distribution, training, selection.

Each candidate reply r is related to the query q through m bilinear
features f_j = act(q' W_j r + b_j); the features collapse to one score
g = act(f . s + c); softmax over the candidate scores gives the response
distribution. Training regresses that distribution onto like-derived (or
one-hot) targets with mean squared error and plain per-episode SGD.

W_j is rectangular (d_q x d_r) so the query and reply embeddings may
live in different-sized spaces; the square case falls out when they
match. All the heavy math runs in float64; trained parameters are
rounded to float32 at the end so a saved and reloaded model reproduces
its in-memory behavior bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matching import CandidateSet

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "softplus")


class TrainingDiverged(RuntimeError):
    """SGD hit a non-finite loss; lower the rate or set gradient_clip."""


@dataclass
class RankerParams:
    """Trainable parameters of the scoring chain.

    weights: (m, d_q, d_r) bilinear maps, one per relational feature.
    feature_bias: (m,) added inside each feature activation.
    score_weights: (m,) mixing features into the scalar score.
    score_bias: scalar added before the score activation.
    """

    weights: np.ndarray
    feature_bias: np.ndarray
    score_weights: np.ndarray
    score_bias: float
    activation: str = "relu"

    def __post_init__(self):
        self.weights = np.asarray(self.weights)
        self.feature_bias = np.asarray(self.feature_bias)
        self.score_weights = np.asarray(self.score_weights)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.weights.ndim != 3:
            raise ValueError("weights must have shape (m, d_q, d_r)")
        m = self.weights.shape[0]
        if m < 1:
            raise ValueError("need at least one relational feature")
        if self.feature_bias.shape != (m,) or self.score_weights.shape != (m,):
            raise ValueError("feature_bias and score_weights must have shape (m,)")
        for arr in (self.weights, self.feature_bias, self.score_weights):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")
        if not np.isfinite(self.score_bias):
            raise ValueError("parameters must be finite")

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def d_q(self) -> int:
        return self.weights.shape[1]

    @property
    def d_r(self) -> int:
        return self.weights.shape[2]

    def astype(self, dtype) -> "RankerParams":
        return RankerParams(
            weights=self.weights.astype(dtype),
            feature_bias=self.feature_bias.astype(dtype),
            score_weights=self.score_weights.astype(dtype),
            score_bias=float(np.asarray(self.score_bias, dtype=dtype)),
            activation=self.activation,
        )


@dataclass
class RankerGrads:
    weights: np.ndarray
    feature_bias: np.ndarray
    score_weights: np.ndarray
    score_bias: float

    def global_norm(self) -> float:
        return float(
            np.sqrt(
                np.sum(self.weights**2)
                + np.sum(self.feature_bias**2)
                + np.sum(self.score_weights**2)
                + self.score_bias**2
            )
        )


@dataclass
class TrainingEpisode:
    """A candidate set plus the target probability vector it should hit."""

    candidates: CandidateSet
    targets: np.ndarray

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.float64)
        n = len(self.candidates.candidates)
        if self.targets.shape != (n,):
            raise ValueError("targets must align with candidates")
        if np.any(self.targets < 0) or abs(float(self.targets.sum()) - 1.0) > 1e-9:
            raise ValueError("targets must be a probability vector")


@dataclass(frozen=True)
class TrainConfig:
    """Defaults for training runs.

    The activation defaults to softplus rather than the scoring default
    of ReLU: with ReLU both the features and the final score clamp at
    zero, and an unlucky initialization can start every score in the
    dead region, freezing SGD permanently. Softplus keeps gradients
    alive everywhere; a trained model still serves with whatever
    activation it was trained with (it is stored in the parameters).
    """

    learning_rate: float = 0.05
    epochs: int = 30
    seed: int = 0
    target_mode: str = "likes"  # or "one_hot"
    gradient_clip: float | None = None
    m: int = 8
    activation: str = "softplus"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.target_mode not in ("likes", "one_hot"):
            raise ValueError("target_mode must be 'likes' or 'one_hot'")


def _act(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    return np.logaddexp(0.0, x)  # softplus, overflow-safe


def _act_grad(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (x > 0.0).astype(np.float64)  # subgradient 0 at the kink
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))  # sigmoid


def _feature_matrix(
    q: np.ndarray, replies: np.ndarray, params: RankerParams
) -> tuple[np.ndarray, np.ndarray]:
    """Pre-activations Z and features F for all candidates, float64.

    Z[i, j] = q' W_j r_i + b_j, computed as one (n, d_r) x (d_r, m)
    product after projecting q through every W_j.
    """
    q = np.asarray(q, dtype=np.float64)
    replies = np.asarray(replies, dtype=np.float64)
    w = params.weights.astype(np.float64)
    if q.shape != (params.d_q,):
        raise ValueError(f"query has shape {q.shape}, expected ({params.d_q},)")
    if replies.ndim != 2 or replies.shape[1] != params.d_r:
        raise ValueError(
            f"replies have shape {replies.shape}, expected (n, {params.d_r})"
        )
    projected = np.einsum("q,mqr->mr", q, w)  # (m, d_r)
    z = replies @ projected.T + params.feature_bias.astype(np.float64)
    return z, _act(z, params.activation)


def relational_features(q, r, params: RankerParams) -> np.ndarray:
    """Feature vector f for one candidate: f_j = act(q' W_j r + b_j)."""
    r = np.asarray(r, dtype=np.float64)
    _, features = _feature_matrix(q, r[None, :], params)
    return features[0]


def candidate_scores(q, replies, params: RankerParams) -> np.ndarray:
    """Scalar score per candidate: g_i = act(f_i . s + c)."""
    replies = np.asarray(replies, dtype=np.float64)
    if replies.ndim != 2 or replies.shape[0] < 1:
        raise ValueError("need at least one candidate reply vector")
    _, features = _feature_matrix(q, replies, params)
    u = features @ params.score_weights.astype(np.float64) + float(params.score_bias)
    return _act(u, params.activation)


def response_distribution(g) -> np.ndarray:
    """Stable softmax of the candidate scores.

    The exponentials are summed in sorted order, so the denominator (and
    therefore every probability) depends only on the multiset of scores:
    permuting the candidates permutes p exactly, bit for bit.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.size == 0:
        raise ValueError("no candidate scores")
    if not np.all(np.isfinite(g)):
        raise ValueError("candidate scores must be finite")
    e = np.exp(g - g.max())
    return e / np.sort(e).sum()


def target_distribution(
    net_scores: Sequence[int],
    mode: str = "likes",
    true_reply_index: int | None = None,
) -> np.ndarray:
    """Supervision targets over candidates.

    likes mode divides each clamped-at-zero net score by their total; a
    candidate set with no positive score at all falls back to uniform.
    one_hot mode is an indicator on the known true reply.
    """
    n = len(net_scores)
    if n < 1:
        raise ValueError("need at least one candidate")
    if mode == "likes":
        clamped = np.maximum(np.asarray(net_scores, dtype=np.float64), 0.0)
        total = clamped.sum()
        if total <= 0.0:
            return np.full(n, 1.0 / n)
        return clamped / total
    if mode == "one_hot":
        if true_reply_index is None:
            raise ValueError("one_hot targets need true_reply_index")
        if not 0 <= true_reply_index < n:
            raise ValueError("true_reply_index out of range")
        t = np.zeros(n)
        t[true_reply_index] = 1.0
        return t
    raise ValueError("mode must be 'likes' or 'one_hot'")


def episode_targets(candidate_set: CandidateSet, mode: str) -> np.ndarray:
    return target_distribution(
        [c.net_score for c in candidate_set.candidates],
        mode=mode,
        true_reply_index=candidate_set.true_reply_index,
    )


def _loss_and_grad_arrays(
    q: np.ndarray,
    replies: np.ndarray,
    t: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    s: np.ndarray,
    c: float,
    act: str,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, float]:
    """Loss/gradient core on raw float64 arrays (hot path for SGD)."""
    n = len(t)
    projected = np.einsum("q,mqr->mr", q, w)  # (m, d_r)
    z = replies @ projected.T + b  # (n, m)
    features = _act(z, act)
    u = features @ s + c  # (n,)
    g = _act(u, act)
    p = response_distribution(g)

    loss = float(np.mean((p - t) ** 2))

    dl_dp = 2.0 * (p - t) / n
    # softmax jacobian: dL/dg_i = p_i * (dL/dp_i - sum_k dL/dp_k p_k)
    dl_dg = p * (dl_dp - float(dl_dp @ p))
    dl_du = dl_dg * _act_grad(u, act)

    grad_s = features.T @ dl_du
    grad_c = float(dl_du.sum())
    dl_df = np.outer(dl_du, s)  # (n, m)
    dl_dz = dl_df * _act_grad(z, act)  # (n, m)
    grad_b = dl_dz.sum(axis=0)
    # dL/dW_j = sum_i dl_dz[i, j] * outer(q, r_i); contract replies first
    grad_w = np.einsum("q,mr->mqr", q, dl_dz.T @ replies)
    return loss, grad_w, grad_b, grad_s, grad_c


def mse_loss_and_grad(
    episode: TrainingEpisode, params: RankerParams
) -> tuple[float, RankerGrads]:
    """Mean squared error between p and the targets, with exact gradients.

    The chain runs softmax -> score activation -> feature activation;
    every derivative is analytic (ReLU uses subgradient 0 at the kink).
    """
    cs = episode.candidates
    q = np.asarray(cs.query_vec, dtype=np.float64)
    replies = np.stack([c.reply_vec for c in cs.candidates]).astype(np.float64)
    if q.shape != (params.d_q,):
        raise ValueError(f"query has shape {q.shape}, expected ({params.d_q},)")
    if replies.shape[1] != params.d_r:
        raise ValueError(
            f"replies have shape {replies.shape}, expected (n, {params.d_r})"
        )
    loss, grad_w, grad_b, grad_s, grad_c = _loss_and_grad_arrays(
        q,
        replies,
        episode.targets,
        params.weights.astype(np.float64),
        params.feature_bias.astype(np.float64),
        params.score_weights.astype(np.float64),
        float(params.score_bias),
        params.activation,
    )
    return loss, RankerGrads(grad_w, grad_b, grad_s, grad_c)


def init_params(
    m: int,
    d_q: int,
    d_r: int,
    activation: str = "relu",
    seed: int = 0,
) -> RankerParams:
    """Uniform(-0.05, 0.05) bilinear maps and mixer, zero biases."""
    rng = np.random.default_rng(seed)
    return RankerParams(
        weights=rng.uniform(-0.05, 0.05, size=(m, d_q, d_r)),
        feature_bias=np.zeros(m),
        score_weights=rng.uniform(-0.05, 0.05, size=m),
        score_bias=0.0,
        activation=activation,
    )


def train_ranker(
    episodes: Sequence[TrainingEpisode], config: TrainConfig
) -> tuple[RankerParams, list[float]]:
    """Plain SGD over episodes, shuffled each epoch from the seed.

    Returns the trained parameters (float32, so persistence is lossless)
    and the per-epoch mean loss history. A non-finite loss aborts with a
    diagnostic instead of silently emitting NaN parameters.
    """
    if not episodes:
        raise ValueError("episodes must be non-empty")
    first = episodes[0].candidates
    d_q = len(first.query_vec)
    d_r = len(first.candidates[0].reply_vec)
    rng = np.random.default_rng(config.seed)
    init = init_params(config.m, d_q, d_r, config.activation, seed=config.seed)

    # hot loop works on raw float64 arrays; episode tensors are staged once
    w = init.weights.copy()
    b = init.feature_bias.copy()
    s = init.score_weights.copy()
    c = float(init.score_bias)
    staged = []
    for episode in episodes:
        cs = episode.candidates
        q = np.asarray(cs.query_vec, dtype=np.float64)
        replies = np.stack([cd.reply_vec for cd in cs.candidates]).astype(np.float64)
        if q.shape != (d_q,) or replies.shape[1] != d_r:
            raise ValueError("episodes disagree on embedding dimensions")
        staged.append((q, replies, episode.targets))

    history: list[float] = []
    lr = config.learning_rate
    grad_flow = 0.0
    for epoch in range(config.epochs):
        order = rng.permutation(len(staged))
        epoch_loss = 0.0
        for ei in order:
            q, replies, t = staged[ei]
            try:
                loss, grad_w, grad_b, grad_s, grad_c = _loss_and_grad_arrays(
                    q, replies, t, w, b, s, c, config.activation
                )
                if not np.isfinite(loss):
                    raise ValueError("loss is not finite")
            except ValueError as exc:
                if "finite" in str(exc):
                    raise TrainingDiverged(
                        f"training diverged at epoch {epoch} ({exc}); "
                        "lower learning_rate or set gradient_clip"
                    ) from exc
                raise
            if config.gradient_clip is not None:
                norm = float(
                    np.sqrt(
                        np.sum(grad_w**2)
                        + np.sum(grad_b**2)
                        + np.sum(grad_s**2)
                        + grad_c**2
                    )
                )
                if norm > config.gradient_clip:
                    scale = config.gradient_clip / norm
                    grad_w *= scale
                    grad_b *= scale
                    grad_s *= scale
                    grad_c *= scale
            w -= lr * grad_w
            b -= lr * grad_b
            s -= lr * grad_s
            c -= lr * grad_c
            epoch_loss += loss
            if epoch == 0:
                grad_flow += abs(grad_c) + float(np.abs(grad_s).sum())
        if epoch == 0 and grad_flow == 0.0:
            logger.warning(
                "no gradient reached the parameters in the first epoch "
                "(every score is in the ReLU dead region); training cannot "
                "progress -- use softplus activation"
            )
        history.append(epoch_loss / len(episodes))

    params = RankerParams(
        weights=w,
        feature_bias=b,
        score_weights=s,
        score_bias=c,
        activation=config.activation,
    )
    return params.astype(np.float32), history


def select_response(
    p,
    policy: str = "argmax",
    temperature: float = 1.0,
    seed: int | None = None,
) -> int:
    """Pick a candidate index from the response distribution.

    argmax returns the lowest index attaining the maximum. sample draws
    from softmax(ln p / temperature) -- temperature 1 reproduces p itself,
    lower sharpens, higher flattens -- reproducibly for a given seed.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty probability vector")
    if policy == "argmax":
        return int(np.argmax(p))
    if policy != "sample":
        raise ValueError("policy must be 'argmax' or 'sample'")
    if temperature <= 0:
        raise ValueError("temperature must be > 0 for sampling")
    with np.errstate(divide="ignore"):
        logits = np.where(p > 0.0, np.log(p), -np.inf) / temperature
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    weights /= weights.sum()
    rng = np.random.default_rng(seed)
    return int(rng.choice(len(p), p=weights))
