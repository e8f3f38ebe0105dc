"""Command-line entry points for the whole bundle lifecycle.

    coachbot ingest corpus.jsonl --out bundle/ [--noise-patterns FILE]
    coachbot train-embeddings bundle/ [--titles-dim 256] [--replies-dim 128]
    coachbot build-index bundle/
    coachbot train-ranker bundle/ [--mode likes|one_hot] [--epochs] [--lr]
    coachbot eval bundle/ --heldout FILE [--k 1,5]
    coachbot chat bundle/
    coachbot serve bundle/ [--port 8000]

Every flag can also come from a ``key = value`` config file passed with
``--config``; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bundle as bundle_io
from .bundle import BundleError, PipelineConfig
from .corpus import build_qr_pairs, clean_posts, parse_corpus
from .engine import InvalidQuery, answer
from .pvdm import PVDMConfig
from .ranker import TrainConfig, train_ranker
from .training import (
    assemble_episodes,
    build_title_index,
    evaluate_recall,
    train_embedding_models,
)


def read_config_file(path: str | None) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment; keys use either
    dashes or underscores."""
    if path is None:
        return {}
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config: cannot parse line: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class Options:
    """Flag > config file > hard default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = read_config_file(getattr(args, "config", None))

    def get(self, key: str, default, cast=str):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.config:
            raw = self.config[key]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default


def _load_manifest(bundle_dir: Path) -> dict:
    try:
        return bundle_io.read_manifest(bundle_dir)
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")


def _load_posts(bundle_dir: Path) -> list:
    try:
        return bundle_io.load_corpus(bundle_dir / "corpus.jsonl")
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")


def cmd_ingest(args: argparse.Namespace) -> int:
    opt = Options(args)
    out = opt.get("out", None)
    if out is None:
        raise SystemExit("error: --out is required")
    out_dir = Path(out)
    patterns: list[str] = []
    patterns_file = opt.get("noise_patterns", None)
    if patterns_file:
        for line in Path(patterns_file).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                patterns.append(line)

    with open(args.corpus, encoding="utf-8") as fh:
        posts, errors = parse_corpus(fh)
    for err in errors:
        print(f"parse error at line {err.line_no}: {err.reason}", file=sys.stderr)
    cleaned, stats = clean_posts(posts, noise_patterns=patterns)
    if not cleaned:
        print("error: no posts survived cleaning", file=sys.stderr)
        return 1

    out_dir.mkdir(parents=True, exist_ok=True)
    bundle_io.save_corpus(cleaned, out_dir / "corpus.jsonl")
    pipeline = PipelineConfig(
        k1=opt.get("k1", 100, int),
        k2=opt.get("k2", 10, int),
        cap=opt.get("cap", 10, int),
        policy=opt.get("policy", "sample"),
        temperature=opt.get("temperature", 1.0, float),
        match_field=opt.get("match_field", "title"),
    )
    bundle_io.write_manifest(
        out_dir,
        {
            "pipeline": pipeline.as_dict(),
            "corpus": {
                "posts": len(cleaned),
                "replies": sum(len(p.replies) for p in cleaned),
            },
        },
    )
    report = dict(stats.as_dict())
    report["parse_errors"] = len(errors)
    report["qr_pairs"] = len(build_qr_pairs(cleaned))
    print(json.dumps(report))
    return 0


def cmd_train_embeddings(args: argparse.Namespace) -> int:
    opt = Options(args)
    bundle_dir = Path(args.bundle)
    manifest = _load_manifest(bundle_dir)
    posts = _load_posts(bundle_dir)

    seed = opt.get("seed", 1, int)
    shared = dict(
        window=opt.get("window", 5, int),
        epochs=opt.get("epochs", 20, int),
        learning_rate=opt.get("lr", 0.025, float),
        negative_samples=opt.get("negative", 5, int),
        min_count=opt.get("min_count", 1, int),
        workers=opt.get("workers", 1, int),
        infer_steps=opt.get("infer_steps", 50, int),
    )
    titles_config = PVDMConfig(dims=opt.get("titles_dim", 256, int), seed=seed, **shared)
    replies_config = PVDMConfig(
        dims=opt.get("replies_dim", 128, int), seed=seed + 1, **shared
    )

    title_model, reply_model, tfidf = train_embedding_models(
        posts, titles_config, replies_config
    )
    bundle_io.save_pvdm(title_model, bundle_dir / "titles")
    bundle_io.save_pvdm(reply_model, bundle_dir / "replies")
    bundle_io.write_tfidf(bundle_dir / "tfidf.txt", tfidf)

    manifest["models"] = {
        "titles": bundle_io._pvdm_config_dict(titles_config),
        "replies": bundle_io._pvdm_config_dict(replies_config),
    }
    manifest["tfidf"] = {"docs": tfidf.n_docs, "tokens": len(tfidf.df)}
    bundle_io.write_manifest(bundle_dir, manifest)
    print(
        f"trained titles ({title_model.dims}d, final loss "
        f"{title_model.epoch_losses[-1]:.4f}) and replies ({reply_model.dims}d, "
        f"final loss {reply_model.epoch_losses[-1]:.4f})"
    )
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    bundle_dir = Path(args.bundle)
    manifest = _load_manifest(bundle_dir)
    if "models" not in manifest:
        raise SystemExit("error: bundle has no embeddings (run train-embeddings)")
    titles_config = bundle_io._pvdm_config_from(manifest["models"]["titles"])
    title_model = bundle_io.load_pvdm(bundle_dir / "titles", titles_config)
    index = build_title_index(title_model)
    bundle_io.write_matrix(bundle_dir / "index.bin", index.matrix)
    bundle_io.write_lines(bundle_dir / "post_ids.txt", index.post_ids)
    manifest["index"] = {"rows": len(index), "dims": index.dims}
    bundle_io.write_manifest(bundle_dir, manifest)
    print(f"indexed {len(index)} posts at {index.dims} dims")
    return 0


def cmd_train_ranker(args: argparse.Namespace) -> int:
    opt = Options(args)
    bundle_dir = Path(args.bundle)
    try:
        engine = bundle_io.load_bundle(bundle_dir, require_ranker=False)
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")

    config = TrainConfig(
        learning_rate=opt.get("lr", 0.05, float),
        epochs=opt.get("epochs", 30, int),
        seed=opt.get("seed", 0, int),
        target_mode=opt.get("mode", "likes"),
        gradient_clip=opt.get("clip", None, float),
        m=opt.get("m", 8, int),
        activation=opt.get("activation", "softplus"),
    )
    episodes = assemble_episodes(
        engine,
        mode=config.target_mode,
        max_episodes=opt.get("max_episodes", None, int),
        seed=config.seed,
    )
    params, history = train_ranker(episodes, config)
    bundle_io.write_ranker(bundle_dir / "ranker.bin", params)

    manifest = _load_manifest(bundle_dir)
    manifest["ranker"] = {
        "m": params.m,
        "d_q": params.d_q,
        "d_r": params.d_r,
        "activation": params.activation,
    }
    bundle_io.write_manifest(bundle_dir, manifest)
    print(
        f"trained ranker on {len(episodes)} episodes ({config.target_mode}); "
        f"loss {history[0]:.6f} -> {history[-1]:.6f}"
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    opt = Options(args)
    bundle_dir = Path(args.bundle)
    try:
        engine = bundle_io.load_bundle(bundle_dir)
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")
    heldout_path = opt.get("heldout", None)
    if heldout_path is None:
        raise SystemExit("error: --heldout is required")
    with open(heldout_path, encoding="utf-8") as fh:
        posts, errors = parse_corpus(fh)
    posts, _ = clean_posts(posts)
    if not posts:
        raise SystemExit("error: held-out file has no usable posts")
    ks = [int(k) for k in str(opt.get("k", "1,5")).split(",") if k.strip()]
    recall = evaluate_recall(engine, posts, ks)
    for k in ks:
        print(f"recall@{k} {recall[k]:.4f}")
    return 0


def cmd_chat(args: argparse.Namespace) -> int:
    opt = Options(args)
    try:
        engine = bundle_io.load_bundle(Path(args.bundle))
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")
    policy = opt.get("policy", None)
    temperature = opt.get("temperature", None, float)
    seed = opt.get("seed", None, int)
    show_trace = bool(opt.get("trace", False, bool))
    print("coachbot ready. empty line or Ctrl-D exits.")
    while True:
        try:
            line = input("> ")
        except EOFError:
            print()
            break
        if not line.strip():
            break
        try:
            response = answer(
                line, engine, seed=seed, policy=policy, temperature=temperature
            )
        except InvalidQuery:
            print("(that didn't contain any words I can use)")
            continue
        print(response.response_text)
        if show_trace:
            for i, c in enumerate(response.trace.candidates):
                marker = "*" if i == response.trace.selected_index else " "
                print(
                    f"  {marker} p={c.probability:.3f} match={c.match_score:.3f} "
                    f"[{c.post_id}#{c.reply_index}] {c.text[:60]}"
                )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .webapi import create_app

    opt = Options(args)
    try:
        engine = bundle_io.load_bundle(Path(args.bundle))
    except BundleError as exc:
        raise SystemExit(f"error: {exc}")
    app = create_app(engine)
    uvicorn.run(
        app,
        host=opt.get("host", "127.0.0.1"),
        port=opt.get("port", 8000, int),
        log_level="info",
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coachbot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key = value file mirroring the flags")
        return p

    p = add("ingest", cmd_ingest, help="parse + clean a corpus into a bundle")
    p.add_argument("corpus", help="line-delimited corpus file")
    p.add_argument("--out", help="bundle directory to create")
    p.add_argument("--noise-patterns", dest="noise_patterns",
                   help="file of ad/noise regexes, one per line")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--policy", choices=["argmax", "sample"])
    p.add_argument("--temperature", type=float)
    p.add_argument("--match-field", dest="match_field",
                   choices=["title", "title_body"])

    p = add("train-embeddings", cmd_train_embeddings,
            help="train title/reply paragraph vectors and TF-IDF")
    p.add_argument("bundle")
    p.add_argument("--titles-dim", dest="titles_dim", type=int)
    p.add_argument("--replies-dim", dest="replies_dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--negative", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--infer-steps", dest="infer_steps", type=int)

    p = add("build-index", cmd_build_index, help="build the dense title index")
    p.add_argument("bundle")

    p = add("train-ranker", cmd_train_ranker, help="train the response ranker")
    p.add_argument("bundle")
    p.add_argument("--mode", choices=["likes", "one_hot"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--activation", choices=["relu", "softplus"])
    p.add_argument("--clip", type=float)
    p.add_argument("--max-episodes", dest="max_episodes", type=int)

    p = add("eval", cmd_eval, help="recall@k against a held-out corpus file")
    p.add_argument("bundle")
    p.add_argument("--heldout")
    p.add_argument("--k")

    p = add("chat", cmd_chat, help="interactive terminal chat")
    p.add_argument("bundle")
    p.add_argument("--policy", choices=["argmax", "sample"])
    p.add_argument("--temperature", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", action="store_const", const=True, default=None)

    p = add("serve", cmd_serve, help="HTTP API server")
    p.add_argument("bundle")
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
