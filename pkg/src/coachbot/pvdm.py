"""Distributed-memory paragraph vectors trained with negative sampling.

Every document owns a dense vector. For each word position, the document
vector is averaged with the surrounding context word vectors and that
average is pushed to predict the center word against a handful of noise
words (negative sampling). The prediction error flows back into the
document vector, the context word vectors, and the output-side word
weights -- the classic CBOW-style update with one extra "document" input.

Training is single-threaded and bit-reproducible for a fixed seed by
default; a multi-worker throughput mode exists but gives up determinism.
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .text import Vocabulary, build_vocab

logger = logging.getLogger(__name__)

#: Exponent flattening the unigram distribution used to draw noise words.
NOISE_POWER = 0.75


class NoTrainingWindows(ValueError):
    """Raised when no document is long enough to produce a training window."""


@dataclass(frozen=True)
class PVDMConfig:
    dims: int = 256
    word_dims: int | None = None  # must equal dims; the input layer is an average
    window: int = 5
    epochs: int = 20
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    negative_samples: int = 5
    min_count: int = 1
    seed: int = 1
    workers: int = 1  # >1 trades bit-reproducibility for throughput
    infer_steps: int = 50

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if self.word_dims is not None and self.word_dims != self.dims:
            raise ValueError(
                "word_dims must equal dims: the averaged input layer mixes "
                "word and document vectors in one space"
            )
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class PVDMModel:
    """Trained paragraph-vector model.

    Attributes:
        vocab: token inventory used during training.
        word_vectors: (|V|, d) float32 input-side word vectors.
        context_vectors: (|V|, d) float32 output-side weights (needed to
            infer vectors for unseen documents).
        doc_vectors: (N, d) float32, one row per training document.
        doc_ids: ids aligned with doc_vectors rows.
        epoch_losses: mean negative-sampling loss per epoch.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        word_vectors: np.ndarray,
        context_vectors: np.ndarray,
        doc_vectors: np.ndarray,
        doc_ids: list[str],
        config: PVDMConfig,
        epoch_losses: list[float] | None = None,
    ):
        if doc_vectors.shape[0] != len(doc_ids):
            raise ValueError("doc_vectors rows must align with doc_ids")
        self.vocab = vocab
        self.word_vectors = word_vectors
        self.context_vectors = context_vectors
        self.doc_vectors = doc_vectors
        self.doc_ids = list(doc_ids)
        self.config = config
        self.epoch_losses = list(epoch_losses or [])
        self._doc_index = {d: i for i, d in enumerate(self.doc_ids)}

    @property
    def dims(self) -> int:
        return self.doc_vectors.shape[1]

    def doc_vector(self, doc_id: str) -> np.ndarray:
        return self.doc_vectors[self._doc_index[doc_id]]

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self._doc_index

    def noise_cumulative(self) -> np.ndarray:
        """Cumulative noise-word weights (unigram^0.75), float64."""
        freqs = np.asarray(self.vocab.frequencies, dtype=np.float64)
        return np.cumsum(freqs**NOISE_POWER)


def _init_vectors(rng: np.random.Generator, rows: int, dims: int) -> np.ndarray:
    # Same spread word2vec uses: small values scaled down with dimension.
    return ((rng.random((rows, dims)) - 0.5) / dims).astype(np.float32)


def _draw_negatives(
    rng: np.random.Generator, cum: np.ndarray, k: int, exclude: int
) -> np.ndarray:
    total = cum[-1]
    negs = cum.searchsorted(rng.random(k) * total).astype(np.int64)
    # redraw any slot that hit the center word
    while True:
        mask = negs == exclude
        if not mask.any():
            return negs
        negs[mask] = cum.searchsorted(rng.random(int(mask.sum())) * total)


def _train_document(
    doc_ids: list[int],
    dvec_row: int,
    word_vectors: np.ndarray,
    context_vectors: np.ndarray,
    doc_vectors: np.ndarray,
    cum: np.ndarray,
    rng: np.random.Generator,
    alpha: float,
    window: int,
    negative: int,
    learn_weights: bool = True,
) -> tuple[float, int]:
    """One pass over a document; returns (summed loss, window count).

    With ``learn_weights`` off only the document vector moves -- that is
    the inference mode for unseen text.
    """
    loss = 0.0
    n = len(doc_ids)
    alpha32 = np.float32(alpha)
    for pos in range(n):
        center = doc_ids[pos]
        lo = max(0, pos - window)
        ctx = doc_ids[lo:pos] + doc_ids[pos + 1 : pos + window + 1]
        l1 = word_vectors[ctx].sum(axis=0) + doc_vectors[dvec_row]
        l1 /= np.float32(len(ctx) + 1)

        targets = np.empty(negative + 1, dtype=np.int64)
        targets[0] = center
        targets[1:] = _draw_negatives(rng, cum, negative, center)
        l2 = context_vectors[targets]  # (k+1, d)
        scores = l2 @ l1  # (k+1,)
        loss += float(np.logaddexp(0.0, -scores[0]) + np.logaddexp(0.0, scores[1:]).sum())

        probs = 1.0 / (1.0 + np.exp(-np.clip(scores, -60.0, 60.0)))
        gb = -probs * alpha32
        gb[0] += alpha32  # labels are [1, 0, ..., 0]
        neu1e = gb @ l2  # error for every input that fed l1
        if learn_weights:
            context_vectors[targets] += np.outer(gb, l1)
            if ctx:
                np.add.at(word_vectors, ctx, neu1e)
        doc_vectors[dvec_row] += neu1e
    return loss, n


def _epoch_alpha(config: PVDMConfig, step: int, total_steps: int) -> float:
    lo = min(config.min_learning_rate, config.learning_rate)
    span = max(total_steps, 1)
    return config.learning_rate - (config.learning_rate - lo) * (step / span)


def train_pvdm(docs: Sequence[tuple[str, list[str]]], config: PVDMConfig) -> PVDMModel:
    """Train paragraph vectors over ``(doc_id, tokens)`` pairs.

    Documents shorter than ``window + 1`` in-vocabulary tokens produce no
    training windows; they keep their randomly initialized vector and a
    warning is logged. If every document is that short, training cannot
    proceed and :class:`NoTrainingWindows` is raised.
    """
    if not docs:
        raise ValueError("docs must be non-empty")
    ids = [d for d, _ in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("doc_ids must be unique")

    vocab = build_vocab((t for _, tokens in docs for t in tokens), config.min_count)
    encoded = [vocab.encode(tokens) for _, tokens in docs]
    trainable = [i for i, e in enumerate(encoded) if len(e) >= config.window + 1]
    skipped = len(docs) - len(trainable)
    if skipped:
        logger.warning(
            "%d of %d docs shorter than window+1 in-vocabulary tokens; "
            "they keep random vectors",
            skipped,
            len(docs),
        )
    if not trainable:
        raise NoTrainingWindows("no training windows")

    rng = np.random.default_rng(config.seed)
    word_vectors = _init_vectors(rng, len(vocab), config.dims)
    doc_vectors = _init_vectors(rng, len(docs), config.dims)
    context_vectors = np.zeros((len(vocab), config.dims), dtype=np.float32)
    cum = np.cumsum(np.asarray(vocab.frequencies, dtype=np.float64) ** NOISE_POWER)

    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        alpha = _epoch_alpha(config, epoch, config.epochs)
        order = rng.permutation(len(trainable))
        total_loss = 0.0
        total_windows = 0
        if config.workers <= 1:
            for oi in order:
                di = trainable[oi]
                loss, windows = _train_document(
                    encoded[di], di, word_vectors, context_vectors,
                    doc_vectors, cum, rng, alpha, config.window,
                    config.negative_samples,
                )
                total_loss += loss
                total_windows += windows
        else:
            # Hogwild-style: workers update shared arrays without locks.
            chunks = np.array_split(order, config.workers)
            seeds = rng.integers(0, 2**63, size=len(chunks))

            def run(chunk, seed):
                local = np.random.default_rng(int(seed))
                agg_loss, agg_windows = 0.0, 0
                for oi in chunk:
                    di = trainable[int(oi)]
                    loss, windows = _train_document(
                        encoded[di], di, word_vectors, context_vectors,
                        doc_vectors, cum, local, alpha, config.window,
                        config.negative_samples,
                    )
                    agg_loss += loss
                    agg_windows += windows
                return agg_loss, agg_windows

            with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
                for loss, windows in pool.map(run, chunks, seeds):
                    total_loss += loss
                    total_windows += windows
        epoch_losses.append(total_loss / max(total_windows, 1))

    return PVDMModel(
        vocab=vocab,
        word_vectors=word_vectors,
        context_vectors=context_vectors,
        doc_vectors=doc_vectors,
        doc_ids=ids,
        config=config,
        epoch_losses=epoch_losses,
    )


def infer_doc_vector(
    model: PVDMModel,
    tokens: Sequence[str],
    steps: int | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """Fit a fresh document vector to unseen text, model weights frozen.

    Runs ``steps`` gradient passes over the token windows, updating only
    the new document vector. Unlike training, any in-vocabulary token at
    all is enough: short queries still get a usable embedding from
    partial windows. Deterministic for a fixed seed (defaults to the
    model's training seed).
    """
    if not tokens:
        raise ValueError("empty query")
    encoded = model.vocab.encode(tokens)
    if not encoded:
        raise ValueError("no known tokens")
    config = model.config
    steps = config.infer_steps if steps is None else steps
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    dvec = _init_vectors(rng, 1, model.dims)
    cum = model.noise_cumulative()
    for step in range(steps):
        alpha = _epoch_alpha(config, step, steps)
        _train_document(
            encoded, 0, model.word_vectors, model.context_vectors, dvec,
            cum, rng, alpha, config.window, config.negative_samples,
            learn_weights=False,
        )
    return dvec[0].copy()
