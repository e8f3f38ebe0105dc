"""Engine bundle: every artifact the pipeline needs, on disk and in memory.

Bundle directory layout::

    manifest                 JSON: dims, seeds, config, file checksums
    corpus.jsonl             cleaned posts, one record per line
    titles/vocab.txt         token<TAB>frequency, id = line number
    titles/vectors.bin       document vectors ("PVDM" header)
    titles/word_vectors.bin  input-side word vectors
    titles/context_vectors.bin  output-side weights (needed for inference)
    titles/doc_ids.txt       one doc id per line
    replies/...              same five files for the reply model
    tfidf.txt                N header line, then token<TAB>df
    index.bin                normalized title matrix ("PVDM" header)
    post_ids.txt             index rows -> post ids
    ranker.bin               "RNKR" header + parameters

Matrices are float32 little-endian, which is also their in-memory dtype:
a save/load round trip is lossless, so a reloaded bundle answers queries
bit-identically to the one that was saved.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Post, parse_corpus, post_to_record
from .matching import CandidateSet
from .pvdm import PVDMConfig, PVDMModel
from .ranker import ACTIVATIONS, RankerParams
from .retrieval import DenseIndex
from .text import Vocabulary
from .tfidf import TfIdfModel

MATRIX_MAGIC = b"PVDM"
RANKER_MAGIC = b"RNKR"

MANIFEST_NAME = "manifest"
FORMAT_TAG = "coachbot-bundle/1"


class BundleError(Exception):
    """A bundle file is missing, corrupt, or inconsistent."""


@dataclass(frozen=True)
class PipelineConfig:
    k1: int = 100
    k2: int = 10
    cap: int = 10
    policy: str = "sample"  # serving default; tests pin argmax explicitly
    temperature: float = 1.0
    match_field: str = "title"

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EngineBundle:
    posts: list[Post]
    title_model: PVDMModel
    reply_model: PVDMModel
    tfidf: TfIdfModel
    index: DenseIndex
    ranker: RankerParams | None
    pipeline: PipelineConfig

    def __post_init__(self):
        self.posts_by_id = {p.post_id: p for p in self.posts}
        self._reply_rows = {}
        for row, doc_id in enumerate(self.reply_model.doc_ids):
            post_id, _, idx = doc_id.rpartition("#")
            self._reply_rows[(post_id, int(idx))] = row

    def reply_vector(self, post_id: str, reply_index: int) -> np.ndarray:
        return self.reply_model.doc_vectors[self._reply_rows[(post_id, reply_index)]]

    def validate(self) -> None:
        """Cross-check dims and coverage; raise BundleError when torn."""
        corpus_ids = set(self.posts_by_id)
        if not set(self.index.post_ids) <= corpus_ids:
            raise BundleError("index post_ids are not a subset of the corpus")
        if self.index.dims != self.title_model.dims:
            raise BundleError(
                f"index dims {self.index.dims} != title model dims "
                f"{self.title_model.dims}"
            )
        for post in self.posts:
            for idx in range(len(post.replies)):
                if (post.post_id, idx) not in self._reply_rows:
                    raise BundleError(
                        f"reply ({post.post_id}, {idx}) has no reply vector"
                    )
        if self.ranker is not None:
            if self.ranker.d_q != self.title_model.dims:
                raise BundleError(
                    f"ranker d_q {self.ranker.d_q} != title dims "
                    f"{self.title_model.dims}"
                )
            if self.ranker.d_r != self.reply_model.dims:
                raise BundleError(
                    f"ranker d_r {self.ranker.d_r} != reply dims "
                    f"{self.reply_model.dims}"
                )


def reply_doc_id(post_id: str, reply_index: int) -> str:
    return f"{post_id}#{reply_index}"


# ---------------------------------------------------------------------------
# low-level file formats


def write_matrix(path: Path, matrix: np.ndarray, magic: bytes = MATRIX_MAGIC) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2-D")
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(matrix.tobytes())


def read_matrix(path: Path, magic: bytes = MATRIX_MAGIC) -> np.ndarray:
    name = path.name
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise BundleError(f"missing file: {name}") from None
    if len(data) < len(magic) + 8 or data[: len(magic)] != magic:
        raise BundleError(f"bad magic bytes in {name}")
    rows, cols = struct.unpack_from("<II", data, len(magic))
    payload = data[len(magic) + 8 :]
    if len(payload) != rows * cols * 4:
        raise BundleError(
            f"truncated {name}: expected {rows * cols * 4} payload bytes, "
            f"got {len(payload)}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()


def write_vocab(path: Path, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token, freq in zip(vocab.tokens, vocab.frequencies):
            fh.write(f"{token}\t{freq}\n")


def read_vocab(path: Path, min_count: int = 1) -> Vocabulary:
    counts: dict[str, int] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise BundleError(f"missing file: {path.name}") from None
    for i, line in enumerate(lines):
        if not line:
            continue
        token, _, freq = line.partition("\t")
        if not freq:
            raise BundleError(f"malformed line {i + 1} in {path.name}")
        counts[token] = int(freq)
    # ids were assigned by (-freq, first-seen); file order preserves that
    return Vocabulary(counts, min_count=min_count)


def write_ranker(path: Path, params: RankerParams) -> None:
    p32 = params.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(RANKER_MAGIC)
        fh.write(struct.pack("<IIIB", p32.m, p32.d_q, p32.d_r,
                             ACTIVATIONS.index(p32.activation)))
        fh.write(np.ascontiguousarray(p32.weights, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(p32.feature_bias, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(p32.score_weights, dtype="<f4").tobytes())
        fh.write(struct.pack("<f", p32.score_bias))


def read_ranker(path: Path) -> RankerParams:
    name = path.name
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise BundleError(f"missing file: {name}") from None
    header = len(RANKER_MAGIC) + 13
    if len(data) < header or data[: len(RANKER_MAGIC)] != RANKER_MAGIC:
        raise BundleError(f"bad magic bytes in {name}")
    m, d_q, d_r, act_code = struct.unpack_from("<IIIB", data, len(RANKER_MAGIC))
    if act_code >= len(ACTIVATIONS):
        raise BundleError(f"unknown activation code {act_code} in {name}")
    expected = (m * d_q * d_r + m + m + 1) * 4
    payload = data[header:]
    if len(payload) != expected:
        raise BundleError(
            f"truncated {name}: expected {expected} payload bytes, got {len(payload)}"
        )
    floats = np.frombuffer(payload, dtype="<f4")
    w_end = m * d_q * d_r
    return RankerParams(
        weights=floats[:w_end].reshape(m, d_q, d_r).copy(),
        feature_bias=floats[w_end : w_end + m].copy(),
        score_weights=floats[w_end + m : w_end + 2 * m].copy(),
        score_bias=float(floats[-1]),
        activation=ACTIVATIONS[act_code],
    )


def write_tfidf(path: Path, model: TfIdfModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"N\t{model.n_docs}\n")
        for token in sorted(model.df):
            fh.write(f"{token}\t{model.df[token]}\n")


def read_tfidf(path: Path) -> TfIdfModel:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise BundleError(f"missing file: {path.name}") from None
    if not lines or not lines[0].startswith("N\t"):
        raise BundleError(f"{path.name} is missing its N header line")
    n_docs = int(lines[0].split("\t", 1)[1])
    df = {}
    for line in lines[1:]:
        if not line:
            continue
        token, _, count = line.partition("\t")
        df[token] = int(count)
    return TfIdfModel(df, n_docs)


def write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def read_lines(path: Path) -> list[str]:
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise BundleError(f"missing file: {path.name}") from None


# ---------------------------------------------------------------------------
# per-model save/load


def save_pvdm(model: PVDMModel, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    write_vocab(directory / "vocab.txt", model.vocab)
    write_matrix(directory / "vectors.bin", model.doc_vectors)
    write_matrix(directory / "word_vectors.bin", model.word_vectors)
    write_matrix(directory / "context_vectors.bin", model.context_vectors)
    write_lines(directory / "doc_ids.txt", model.doc_ids)


def load_pvdm(directory: Path, config: PVDMConfig) -> PVDMModel:
    vocab = read_vocab(directory / "vocab.txt", min_count=config.min_count)
    doc_vectors = read_matrix(directory / "vectors.bin")
    word_vectors = read_matrix(directory / "word_vectors.bin")
    context_vectors = read_matrix(directory / "context_vectors.bin")
    doc_ids = read_lines(directory / "doc_ids.txt")
    if word_vectors.shape != (len(vocab), config.dims):
        raise BundleError(
            f"word_vectors.bin shape {word_vectors.shape} does not match "
            f"vocab size {len(vocab)} x dims {config.dims}"
        )
    if context_vectors.shape != word_vectors.shape:
        raise BundleError("context_vectors.bin shape mismatch")
    if doc_vectors.shape[0] != len(doc_ids):
        raise BundleError("vectors.bin rows do not match doc_ids.txt")
    return PVDMModel(
        vocab=vocab,
        word_vectors=word_vectors,
        context_vectors=context_vectors,
        doc_vectors=doc_vectors,
        doc_ids=doc_ids,
        config=config,
    )


def save_corpus(posts: list[Post], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post_to_record(post), ensure_ascii=False) + "\n")


def load_corpus(path: Path) -> list[Post]:
    try:
        with open(path, encoding="utf-8") as fh:
            posts, errors = parse_corpus(fh)
    except FileNotFoundError:
        raise BundleError(f"missing file: {path.name}") from None
    if errors:
        raise BundleError(
            f"{path.name} line {errors[0].line_no}: {errors[0].reason}"
        )
    return posts


# ---------------------------------------------------------------------------
# manifest and the full bundle


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _pvdm_config_dict(config: PVDMConfig) -> dict:
    return dataclasses.asdict(config)


def _pvdm_config_from(obj: dict) -> PVDMConfig:
    return PVDMConfig(**obj)


def write_manifest(directory: Path, manifest: dict) -> None:
    files = {}
    for path in sorted(directory.rglob("*")):
        if path.is_file() and path.name != MANIFEST_NAME:
            files[path.relative_to(directory).as_posix()] = _sha256(path)
    manifest = dict(manifest)
    manifest["format"] = FORMAT_TAG
    manifest["files"] = files
    (directory / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_manifest(directory: Path, verify: bool = True) -> dict:
    path = directory / MANIFEST_NAME
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BundleError(f"missing file: {MANIFEST_NAME}") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"corrupt {MANIFEST_NAME}: {exc.msg}") from exc
    if manifest.get("format") != FORMAT_TAG:
        raise BundleError(f"{MANIFEST_NAME} has unknown format tag")
    if verify:
        for rel, digest in manifest.get("files", {}).items():
            target = directory / rel
            if not target.is_file():
                raise BundleError(f"missing file: {rel}")
            if _sha256(target) != digest:
                raise BundleError(f"checksum mismatch: {rel}")
    return manifest


def save_bundle(bundle: EngineBundle, directory: str | Path) -> dict:
    """Write every artifact plus a checksummed manifest; returns the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_corpus(bundle.posts, directory / "corpus.jsonl")
    save_pvdm(bundle.title_model, directory / "titles")
    save_pvdm(bundle.reply_model, directory / "replies")
    write_tfidf(directory / "tfidf.txt", bundle.tfidf)
    write_matrix(directory / "index.bin", bundle.index.matrix)
    write_lines(directory / "post_ids.txt", bundle.index.post_ids)
    if bundle.ranker is not None:
        write_ranker(directory / "ranker.bin", bundle.ranker)

    manifest = {
        "pipeline": bundle.pipeline.as_dict(),
        "corpus": {
            "posts": len(bundle.posts),
            "replies": sum(len(p.replies) for p in bundle.posts),
        },
        "models": {
            "titles": _pvdm_config_dict(bundle.title_model.config),
            "replies": _pvdm_config_dict(bundle.reply_model.config),
        },
        "tfidf": {"docs": bundle.tfidf.n_docs, "tokens": len(bundle.tfidf.df)},
        "index": {"rows": len(bundle.index), "dims": bundle.index.dims},
        "ranker": None
        if bundle.ranker is None
        else {
            "m": bundle.ranker.m,
            "d_q": bundle.ranker.d_q,
            "d_r": bundle.ranker.d_r,
            "activation": bundle.ranker.activation,
        },
    }
    write_manifest(directory, manifest)
    return manifest


def load_bundle(
    directory: str | Path, require_ranker: bool = True, verify: bool = True
) -> EngineBundle:
    """Load and cross-validate a bundle directory.

    Checksums are verified against the manifest first, so corruption is
    reported by file name before any partial deserialization runs.
    """
    directory = Path(directory)
    manifest = read_manifest(directory, verify=verify)

    posts = load_corpus(directory / "corpus.jsonl")
    title_config = _pvdm_config_from(manifest["models"]["titles"])
    reply_config = _pvdm_config_from(manifest["models"]["replies"])
    title_model = load_pvdm(directory / "titles", title_config)
    reply_model = load_pvdm(directory / "replies", reply_config)
    tfidf = read_tfidf(directory / "tfidf.txt")

    matrix = read_matrix(directory / "index.bin")
    post_ids = read_lines(directory / "post_ids.txt")
    if matrix.shape[0] != len(post_ids):
        raise BundleError("index.bin rows do not match post_ids.txt")
    index = DenseIndex.from_normalized(matrix, post_ids)

    ranker = None
    ranker_path = directory / "ranker.bin"
    ranker_meta = manifest.get("ranker")
    if ranker_path.exists():
        ranker = read_ranker(ranker_path)
        if ranker_meta is None:
            raise BundleError("ranker.bin present but manifest has no ranker entry")
        if (
            ranker_meta["m"] != ranker.m
            or ranker_meta["d_q"] != ranker.d_q
            or ranker_meta["d_r"] != ranker.d_r
            or ranker_meta["activation"] != ranker.activation
        ):
            raise BundleError("manifest ranker dims do not match ranker.bin")
    elif require_ranker:
        raise BundleError("missing file: ranker.bin (train-ranker first)")

    bundle = EngineBundle(
        posts=posts,
        title_model=title_model,
        reply_model=reply_model,
        tfidf=tfidf,
        index=index,
        ranker=ranker,
        pipeline=PipelineConfig(**manifest["pipeline"]),
    )
    bundle.validate()
    return bundle
