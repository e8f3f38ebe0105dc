"""Retrieval-based short-text conversation engine over forum Q-R corpora.

The pipeline: clean a post/reply corpus, embed titles and replies as
paragraph vectors, retrieve posts by dense cosine, re-match them with
TF-IDF, score the pooled replies with a trainable bilinear ranker, and
serve the selected reply over a small HTTP API.
"""

from .corpus import (
    CorpusStats,
    ParseError,
    Post,
    QRPair,
    Reply,
    build_qr_pairs,
    clean_posts,
    parse_corpus,
)
from .matching import Candidate, CandidateSet, match_candidates
from .pvdm import PVDMConfig, PVDMModel, infer_doc_vector, train_pvdm
from .ranker import (
    RankerParams,
    TrainConfig,
    TrainingEpisode,
    candidate_scores,
    mse_loss_and_grad,
    relational_features,
    response_distribution,
    select_response,
    target_distribution,
    train_ranker,
)
from .retrieval import DenseIndex, build_index, retrieve
from .similarity import cosine
from .text import Vocabulary, build_vocab, tokenize
from .tfidf import TfIdfModel, fit_tfidf, tfidf_vector

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CandidateSet",
    "CorpusStats",
    "DenseIndex",
    "ParseError",
    "Post",
    "PVDMConfig",
    "PVDMModel",
    "QRPair",
    "RankerParams",
    "Reply",
    "TfIdfModel",
    "TrainConfig",
    "TrainingEpisode",
    "Vocabulary",
    "build_index",
    "build_qr_pairs",
    "build_vocab",
    "candidate_scores",
    "clean_posts",
    "cosine",
    "fit_tfidf",
    "infer_doc_vector",
    "match_candidates",
    "mse_loss_and_grad",
    "parse_corpus",
    "relational_features",
    "response_distribution",
    "retrieve",
    "select_response",
    "target_distribution",
    "tfidf_vector",
    "tokenize",
    "train_pvdm",
    "train_ranker",
]
