"""Command-line front end for the token-clustering pipeline.

Subcommands: ingest, filter, reduce, cluster, lda, topics, eval,
analyze. All numerical artifacts are a pure function of inputs,
parameters, and seeds; every artifact written to disk gets a JSON
manifest sidecar recording parameters, seeds, and input digests.

Exit codes: 0 success, 1 I/O or file-format failure, 2 usage or
parameter error, 3 data integrity failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, cluster, filtering, lda, metrics
from . import corpus as corpus_mod
from . import reduce as reduce_mod
from . import topics as topics_mod
from .errors import ConfigError, FormatError, IntegrityError, TokenTopicsError
from .manifest import RunManifest


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line usage errors, exit 2
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(2)


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="key=value file; explicit flags win")
    p.add_argument(
        "--threads",
        type=int,
        help="worker threads where results stay identical (default: "
        "$TOKENTOPICS_THREADS or 1)",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="tokentopics", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    p = sub.add_parser(
        "ingest",
        parents=[],
        help="merge subword rows into word vectors and recompute doc frequencies",
    )
    p.add_argument("--in", dest="in_path", required=True, help="input token file")
    p.add_argument("--out", required=True, help="output token file")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="drop word types by document frequency")
    p.add_argument("--in", dest="in_path", required=True, help="input token file")
    p.add_argument("--out", required=True, help="output token file")
    p.add_argument(
        "--max-doc-frac",
        type=float,
        help="remove types in more than this fraction of documents (default: 0.25)",
    )
    p.add_argument(
        "--min-docs",
        type=int,
        help="remove types in fewer than this many documents (default: 5)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("reduce", help="project token vectors to k dimensions")
    p.add_argument("--in", dest="in_path", required=True, help="input token file")
    p.add_argument("--out", required=True, help="output token file")
    p.add_argument("--method", choices=["pca", "srp"], help="reducer (required unless --model)")
    p.add_argument("--dim", type=int, help="target dimension k (default: 100)")
    p.add_argument(
        "--batch-size",
        help="rows per update batch, or 'auto' for 5x input dim (default: auto)",
    )
    p.add_argument("--seed", type=int, help="projection seed, srp only (default: 0)")
    p.add_argument("--model", help="apply an existing reduction model file")
    p.add_argument("--save-model", help="write the fitted model to this .npz path")
    _add_common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("cluster", help="spherical k-means over unit vectors")
    p.add_argument("--in", dest="in_path", required=True, help="input token file")
    p.add_argument(
        "--k", help="cluster count, or comma list for a sweep (default: 50,100,500)"
    )
    p.add_argument("--seeds", type=int, help="run seeds 0..N-1 (default: 10)")
    p.add_argument("--seed", type=int, help="run exactly one seed")
    p.add_argument("--max-iter", type=int, help="iteration cap (default: 1000)")
    p.add_argument("--out", help="model path for a single (k, seed) run")
    p.add_argument("--out-dir", help="directory for sweep model files")
    _add_common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("lda", help="collapsed Gibbs sampler baseline")
    p.add_argument("--in", dest="in_path", required=True, help="input token file")
    p.add_argument("--k", type=int, help="topic count (default: 100)")
    p.add_argument(
        "--alpha", help="doc-topic prior, or 'auto' for 5/k (default: auto)"
    )
    p.add_argument("--beta", type=float, help="topic-word prior (default: 0.01)")
    p.add_argument("--iters", type=int, help="full sweeps (default: 1000)")
    p.add_argument("--seed", type=int, help="sampler seed (default: 0)")
    p.add_argument(
        "--engine",
        choices=["numba", "python"],
        help="sweep implementation (default: numba)",
    )
    p.add_argument("--out", required=True, help="model path")
    _add_common(p)
    p.set_defaults(func=cmd_lda)

    p = sub.add_parser("topics", help="summarize a fitted model's topics")
    p.add_argument("--model", required=True, help="cluster or sampler model file")
    p.add_argument("--in", dest="in_path", required=True, help="token file the model was fit on")
    p.add_argument("--top-n", type=int, help="words per topic (default: 20)")
    p.add_argument("--out", help="summary TSV path (default: stdout)")
    p.add_argument("--doc-topics", help="also write the doc-topic matrix TSV here")
    _add_common(p)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("eval", help="score topics: entropy, coherence, exclusivity")
    p.add_argument("--model", required=True, help="cluster or sampler model file")
    p.add_argument("--in", dest="in_path", required=True, help="token file the model was fit on")
    p.add_argument(
        "--reference",
        help="tokenized reference corpus, one document per line (enables "
        "external coherence)",
    )
    p.add_argument("--top-n", type=int, help="words per topic (default: 20)")
    p.add_argument("--epsilon", type=float, help="smoothing constant (default: 1e-12)")
    p.add_argument("--window", type=int, help="reference window length (default: 25)")
    p.add_argument(
        "--min-attested",
        type=int,
        help="skip topics with fewer attested words (default: 10)",
    )
    p.add_argument("--out", help="metric TSV path (default: stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="corpus analyses over a fitted model")
    p.add_argument(
        "report",
        choices=["prevalence", "timeseries", "uniform", "polysemy", "pos"],
        help="which analysis to run",
    )
    p.add_argument("--model", required=True, help="cluster or sampler model file")
    p.add_argument("--in", dest="in_path", required=True, help="token file the model was fit on")
    p.add_argument("--scheme", help="metadata partition scheme (prevalence/timeseries/uniform)")
    p.add_argument(
        "--normalize",
        choices=["none", "per-label"],
        help="timeseries normalization (default: none)",
    )
    p.add_argument("--top-n", type=int, help="top words per topic (default: 20)")
    p.add_argument("--top-m", type=int, help="rows to keep in rankings (default: all)")
    p.add_argument(
        "--sparkline",
        action="store_true",
        default=None,
        help="render timeseries rows as text sparklines",
    )
    p.add_argument(
        "--composition",
        action="store_true",
        default=None,
        help="pos report: emit the tag composition table instead of per-topic entropy",
    )
    p.add_argument("--out", help="report TSV path (default: stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    return parser


class Options:
    """Flag values with config-file fallback: flags win, then config, then default."""

    def __init__(self, args: argparse.Namespace, allowed: set[str]):
        self.args = args
        self.values: dict[str, str] = {}
        allowed = allowed | {"threads"}
        if getattr(args, "config", None):
            self.values = _read_config(args.config, allowed)

    def get(self, key: str, default, cast=str):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.values:
            raw = self.values[key]
            try:
                if cast is bool:
                    if raw.lower() in ("1", "true", "yes"):
                        return True
                    if raw.lower() in ("0", "false", "no"):
                        return False
                    raise ValueError(raw)
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"config value {raw!r} for key {key!r} is not a valid "
                    f"{cast.__name__}"
                ) from exc
        return default

    def threads(self) -> int:
        env_default = int(os.environ.get("TOKENTOPICS_THREADS", "1"))
        n = self.get("threads", env_default, int)
        if n < 1:
            raise ConfigError(f"threads must be at least 1, got {n}")
        return n


def _read_config(path: str, allowed: set[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} does not exist") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in allowed:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r} for this subcommand"
            )
        values[key] = value.strip()
    return values


def _require_vocab(in_path: str) -> corpus_mod.Vocabulary:
    sidecar = corpus_mod.vocab_sidecar(in_path)
    if not sidecar.exists():
        raise FormatError(f"{in_path}: missing vocabulary sidecar {sidecar}")
    return corpus_mod.read_vocabulary(sidecar)


def _optional_meta(in_path: str) -> corpus_mod.DocumentMeta | None:
    sidecar = corpus_mod.meta_sidecar(in_path)
    if not sidecar.exists():
        return None
    return corpus_mod.read_metadata(sidecar)


def _carry_sidecars(
    in_path: str, out_path: str, vocab: corpus_mod.Vocabulary
) -> list[Path]:
    written = [corpus_mod.vocab_sidecar(out_path)]
    corpus_mod.write_vocabulary(written[0], vocab)
    meta = _optional_meta(in_path)
    if meta is not None:
        target = corpus_mod.meta_sidecar(out_path)
        corpus_mod.write_metadata(target, meta)
        written.append(target)
    return written


def _finish_manifest(
    command: str,
    parameters: dict,
    seeds: dict,
    inputs: list,
    outputs: list,
    manifest: RunManifest,
    primary_out,
) -> None:
    manifest.command = command
    manifest.parameters = parameters
    manifest.seeds = seeds
    manifest.tool_version = __version__
    for p in inputs:
        manifest.add_input(p)
    for p in outputs:
        manifest.add_output(p)
    manifest.finish()
    manifest.write(primary_out)


def _check_type_range(table: corpus_mod.TokenTable, vocab: corpus_mod.Vocabulary, path) -> None:
    if len(table) and int(table.type_ids.max()) >= len(vocab):
        raise IntegrityError(
            f"{path}: type_id {int(table.type_ids.max())} out of range for "
            f"vocabulary of {len(vocab)}"
        )


def cmd_ingest(args) -> int:
    opts = Options(args, {"in_path", "out"})
    manifest = RunManifest(command="ingest").start()
    in_path, out_path = args.in_path, args.out
    vocab = _require_vocab(in_path)
    with corpus_mod.TokenWriter(
        out_path, corpus_mod.read_header(in_path).dim, has_subword_groups=False
    ) as writer:
        for rec in corpus_mod.merge_subwords(corpus_mod.iter_tokens(in_path)):
            writer.write(rec)
        merged = writer.count
    _, table = corpus_mod.load_table(out_path)
    _check_type_range(table, vocab, out_path)
    freqs = corpus_mod.compute_doc_frequencies(
        table.doc_ids, table.type_ids, len(vocab)
    )
    total_docs = corpus_mod.count_documents(table.doc_ids)
    vocab_out = vocab.with_doc_frequencies(freqs, total_docs)
    sidecars = _carry_sidecars(in_path, out_path, vocab_out)
    _finish_manifest(
        "ingest",
        {"in": in_path, "out": out_path, "threads": opts.threads()},
        {},
        [in_path],
        [out_path, *sidecars],
        manifest,
        out_path,
    )
    print(f"ingest: {merged} word vectors over {total_docs} documents -> {out_path}")
    return 0


def cmd_filter(args) -> int:
    opts = Options(args, {"in_path", "out", "max_doc_frac", "min_docs"})
    manifest = RunManifest(command="filter").start()
    in_path, out_path = args.in_path, args.out
    max_frac = opts.get("max_doc_frac", filtering.DEFAULT_MAX_DOC_FRACTION, float)
    min_docs = opts.get("min_docs", filtering.DEFAULT_MIN_DOC_COUNT, int)
    policy = filtering.FilterPolicy(max_doc_fraction=max_frac, min_doc_count=min_docs)

    header, table = corpus_mod.load_table(in_path)
    vocab = _require_vocab(in_path)
    _check_type_range(table, vocab, in_path)
    # The sidecar frequencies drive the mask; verify them against the
    # stream for every type that still has rows.
    stream_freqs = corpus_mod.compute_doc_frequencies(
        table.doc_ids, table.type_ids, len(vocab)
    )
    recorded = vocab.doc_frequencies()
    present = stream_freqs > 0
    if not np.array_equal(stream_freqs[present], recorded[present]):
        bad = int(np.where(present & (stream_freqs != recorded))[0][0])
        raise IntegrityError(
            f"{in_path}: sidecar doc_frequency for type {bad} is "
            f"{int(recorded[bad])} but the stream shows {int(stream_freqs[bad])}"
        )

    mask = filtering.keep_mask(vocab, policy)
    kept = filtering.filter_table(table, mask)
    with corpus_mod.TokenWriter(
        out_path, header.dim, has_subword_groups=header.has_subword_groups
    ) as writer:
        writer.write_batch(
            kept.doc_ids, kept.word_indices, kept.type_ids, kept.vectors
        )
    sidecars = _carry_sidecars(in_path, out_path, vocab)
    _finish_manifest(
        "filter",
        {
            "in": in_path,
            "out": out_path,
            "max_doc_frac": max_frac,
            "min_docs": min_docs,
            "threads": opts.threads(),
        },
        {},
        [in_path],
        [out_path, *sidecars],
        manifest,
        out_path,
    )
    print(
        f"filter: kept {int(mask.sum())} of {len(vocab)} types, "
        f"{len(kept)} of {len(table)} tokens -> {out_path}"
    )
    return 0


def cmd_reduce(args) -> int:
    opts = Options(
        args,
        {"in_path", "out", "method", "dim", "batch_size", "seed", "model", "save_model"},
    )
    manifest = RunManifest(command="reduce").start()
    in_path, out_path = args.in_path, args.out
    header = corpus_mod.read_header(in_path)
    seed = opts.get("seed", 0, int)
    model_in = opts.get("model", None)
    save_model = opts.get("save_model", None)

    if model_in:
        model = reduce_mod.load_reduction(model_in)
        method = "pca" if isinstance(model, reduce_mod.PcaModel) else "srp"
        dim = model.output_dim
        batch = None
    else:
        method = opts.get("method", None)
        if method is None:
            raise ConfigError("reduce needs --method pca|srp or --model FILE")
        dim = opts.get("dim", reduce_mod.DEFAULT_TARGET_DIM, int)
        raw_batch = opts.get("batch_size", "auto")
        if raw_batch in (None, "auto"):
            batch = None
        else:
            try:
                batch = int(raw_batch)
            except ValueError as exc:
                raise ConfigError(
                    f"batch-size must be an integer or 'auto', got {raw_batch!r}"
                ) from exc
        config = reduce_mod.ReductionConfig(target_dim=dim, batch_size=batch)
        if method == "pca":
            read_rows = batch if batch is not None else 5 * header.dim
            model = reduce_mod.fit_incremental_pca(
                corpus_mod.iter_vector_batches(in_path, read_rows), config
            )
        else:
            model = reduce_mod.fit_srp(header.dim, config, seed)

    outputs = [out_path]
    with corpus_mod.TokenWriter(
        out_path, dim, has_subword_groups=header.has_subword_groups
    ) as writer:
        for chunk in corpus_mod.iter_record_batches(in_path, 1 << 15):
            projected = model.transform(chunk["vector"])
            writer.write_batch(
                chunk["doc_id"], chunk["word_index"], chunk["type_id"], projected
            )
    vocab = _require_vocab(in_path)
    outputs.extend(_carry_sidecars(in_path, out_path, vocab))
    if save_model:
        outputs.append(reduce_mod.save_reduction(save_model, model))
    _finish_manifest(
        "reduce",
        {
            "in": in_path,
            "out": out_path,
            "method": method,
            "dim": dim,
            "batch_size": batch if batch is not None else "auto",
            "model": model_in,
            "save_model": save_model,
            "threads": opts.threads(),
        },
        {"projection": model.seed}
        if isinstance(model, reduce_mod.SrpModel)
        else {},
        [in_path] + ([model_in] if model_in else []),
        outputs,
        manifest,
        out_path,
    )
    print(f"reduce: {method} {header.dim} -> {dim} dims, {header.token_count} tokens")
    return 0


def _parse_k_list(raw: str) -> list[int]:
    out = []
    for piece in str(raw).split(","):
        piece = piece.strip()
        if piece:
            try:
                out.append(int(piece))
            except ValueError as exc:
                raise ConfigError(f"bad cluster count {piece!r} in --k") from exc
    if not out:
        raise ConfigError("--k parsed to an empty list")
    for k in out:
        if k < 1:
            raise ConfigError(f"cluster count must be at least 1, got {k}")
    return out


def cmd_cluster(args) -> int:
    opts = Options(
        args, {"in_path", "k", "seeds", "seed", "max_iter", "out", "out_dir"}
    )
    in_path = args.in_path
    ks = _parse_k_list(opts.get("k", "50,100,500"))
    single_seed = opts.get("seed", None, int)
    if single_seed is not None:
        seeds = [single_seed]
    else:
        n_seeds = opts.get("seeds", 10, int)
        if n_seeds < 1:
            raise ConfigError(f"--seeds must be at least 1, got {n_seeds}")
        seeds = list(range(n_seeds))
    max_iter = opts.get("max_iter", cluster.DEFAULT_MAX_ITER, int)
    out = opts.get("out", None)
    out_dir = opts.get("out_dir", None)
    runs = [(k, s) for k in ks for s in seeds]
    if len(runs) == 1 and out:
        targets = [Path(out)]
    elif out_dir:
        base = Path(out_dir)
        base.mkdir(parents=True, exist_ok=True)
        targets = [base / f"cluster-k{k}-seed{s}.npz" for k, s in runs]
    elif out:
        raise ConfigError(
            f"--out names one file but the sweep has {len(runs)} runs; use --out-dir"
        )
    else:
        raise ConfigError("cluster needs --out (single run) or --out-dir (sweep)")

    _, table = corpus_mod.load_table(in_path)
    if len(table) == 0:
        raise ConfigError(f"{in_path}: cannot cluster an empty corpus")
    for (k, s), target in zip(runs, targets):
        manifest = RunManifest(command="cluster").start()
        model = cluster.fit(table.vectors, k, max_iter=max_iter, seed=s)
        written = cluster.save_cluster_model(target, model)
        _finish_manifest(
            "cluster",
            {"in": in_path, "k": k, "max_iter": max_iter, "out": str(written)},
            {"init": s},
            [in_path],
            [written],
            manifest,
            written,
        )
        state = "converged" if model.converged else "iteration cap"
        print(
            f"cluster: k={k} seed={s} {state} after {model.iterations_run} "
            f"iterations, objective {model.objective:.6f} -> {written}"
        )
    return 0


def cmd_lda(args) -> int:
    opts = Options(
        args, {"in_path", "k", "alpha", "beta", "iters", "seed", "engine", "out"}
    )
    manifest = RunManifest(command="lda").start()
    in_path = args.in_path
    k = opts.get("k", 100, int)
    raw_alpha = opts.get("alpha", "auto")
    if raw_alpha in (None, "auto"):
        alpha = None
    else:
        try:
            alpha = float(raw_alpha)
        except ValueError as exc:
            raise ConfigError(
                f"alpha must be a number or 'auto', got {raw_alpha!r}"
            ) from exc
    beta = opts.get("beta", lda.DEFAULT_BETA, float)
    iters = opts.get("iters", lda.DEFAULT_SWEEPS, int)
    seed = opts.get("seed", 0, int)
    engine = opts.get("engine", "numba")

    _, table = corpus_mod.load_table(in_path)
    state = lda.gibbs_fit(
        table.doc_ids,
        table.type_ids,
        k,
        alpha=alpha,
        beta=beta,
        iterations=iters,
        seed=seed,
        engine=engine,
    )
    written = lda.save_lda_model(args.out, state)
    _finish_manifest(
        "lda",
        {
            "in": in_path,
            "k": k,
            "alpha": state.alpha,
            "beta": beta,
            "iters": iters,
            "engine": engine,
            "out": str(written),
        },
        {"sampler": seed},
        [in_path],
        [written],
        manifest,
        written,
    )
    print(
        f"lda: k={k} alpha={state.alpha:.4g} beta={beta} {iters} sweeps -> {written}"
    )
    return 0


def _load_model_and_corpus(args):
    assignments, n_topics, kind = topics_mod.load_assignments_any(args.model)
    _, table = corpus_mod.load_table(args.in_path)
    vocab = _require_vocab(args.in_path)
    if len(assignments) != len(table):
        raise IntegrityError(
            f"model holds {len(assignments)} assignments but {args.in_path} "
            f"has {len(table)} tokens"
        )
    _check_type_range(table, vocab, args.in_path)
    return assignments, n_topics, kind, table, vocab


def cmd_topics(args) -> int:
    opts = Options(args, {"model", "in_path", "top_n", "out", "doc_topics"})
    manifest = RunManifest(command="topics").start()
    top_n = opts.get("top_n", topics_mod.DEFAULT_TOP_N, int)
    assignments, n_topics, _, table, vocab = _load_model_and_corpus(args)
    summaries = topics_mod.summarize(assignments, table, vocab, n_topics, top_n)
    out = opts.get("out", None)
    doc_topics = opts.get("doc_topics", None)
    topics_mod.write_topic_summaries(out if out else sys.stdout, summaries, vocab)
    outputs = [out] if out else []
    if doc_topics:
        rows = topics_mod.doc_topic_matrix(assignments, table, n_topics)
        topics_mod.write_doc_topic_matrix(doc_topics, rows)
        outputs.append(doc_topics)
    if outputs:
        _finish_manifest(
            "topics",
            {
                "model": args.model,
                "in": args.in_path,
                "top_n": top_n,
                "threads": opts.threads(),
            },
            {},
            [args.model, args.in_path],
            outputs,
            manifest,
            outputs[0],
        )
    return 0


def cmd_eval(args) -> int:
    opts = Options(
        args,
        {
            "model",
            "in_path",
            "reference",
            "top_n",
            "epsilon",
            "window",
            "min_attested",
            "out",
        },
    )
    manifest = RunManifest(command="eval").start()
    config = metrics.CoherenceConfig(
        top_n=opts.get("top_n", 20, int),
        epsilon=opts.get("epsilon", metrics.DEFAULT_EPSILON, float),
        window=opts.get("window", metrics.DEFAULT_WINDOW, int),
        min_attested=opts.get("min_attested", metrics.DEFAULT_MIN_ATTESTED, int),
    )
    assignments, n_topics, _, table, vocab = _load_model_and_corpus(args)
    summaries = topics_mod.summarize(
        assignments, table, vocab, n_topics, config.top_n
    )
    candidate_ids = sorted(
        {t for s in summaries for t, _ in s.top_words[: config.top_n]}
    )
    index = metrics.CooccurrenceIndex(window=config.window)
    index.index_documents(table, candidate_ids)
    reference = opts.get("reference", None)
    if reference:
        surfaces = {vocab.surface(t) for t in candidate_ids}
        with open(reference, "r", encoding="utf-8") as fh:
            index.index_reference((line.split() for line in fh), surfaces)
    rows = metrics.evaluate_topics(
        summaries,
        vocab,
        index,
        config,
        threads=opts.threads(),
        with_external=bool(reference),
    )
    out = opts.get("out", None)
    metrics.write_metrics(out if out else sys.stdout, rows)
    if out:
        _finish_manifest(
            "eval",
            {
                "model": args.model,
                "in": args.in_path,
                "reference": reference,
                "top_n": config.top_n,
                "epsilon": config.epsilon,
                "window": config.window,
                "min_attested": config.min_attested,
                "threads": opts.threads(),
            },
            {},
            [args.model, args.in_path] + ([reference] if reference else []),
            [out],
            manifest,
            out,
        )
    return 0


_SPARK_BLOCKS = "▁▂▃▄▅▆▇█"


def _sparkline(values: np.ndarray) -> str:
    top = values.max()
    if top <= 0:
        return _SPARK_BLOCKS[0] * len(values)
    idx = np.minimum(
        (values / top * (len(_SPARK_BLOCKS) - 1)).round().astype(int),
        len(_SPARK_BLOCKS) - 1,
    )
    return "".join(_SPARK_BLOCKS[i] for i in idx)


def cmd_analyze(args) -> int:
    opts = Options(
        args,
        {
            "model",
            "in_path",
            "scheme",
            "normalize",
            "top_n",
            "top_m",
            "sparkline",
            "composition",
            "out",
        },
    )
    manifest = RunManifest(command="analyze").start()
    report = args.report
    assignments, n_topics, _, table, vocab = _load_model_and_corpus(args)
    top_n = opts.get("top_n", 20, int)
    top_m = opts.get("top_m", None, int)
    out = opts.get("out", None)
    sink = out if out else sys.stdout

    def need_meta() -> corpus_mod.DocumentMeta:
        meta = _optional_meta(args.in_path)
        if meta is None:
            raise FormatError(
                f"{args.in_path}: missing metadata sidecar "
                f"{corpus_mod.meta_sidecar(args.in_path)}"
            )
        return meta

    def need_scheme() -> str:
        scheme = opts.get("scheme", None)
        if not scheme:
            raise ConfigError(f"analyze {report} needs --scheme")
        return scheme

    with topics_mod.text_sink(sink) as fh:
        if report == "prevalence":
            ptable = analysis.partition_prevalence(
                assignments, table, need_meta(), need_scheme(), n_topics
            )
            if top_m is not None:
                fh.write("label\ttopic_id\ttokens\n")
                for label, ranked in analysis.top_topics_per_label(
                    ptable, top_m
                ).items():
                    for k, count in ranked:
                        fh.write(f"{label}\t{k}\t{count}\n")
            else:
                fh.write("topic_id\t" + "\t".join(ptable.labels) + "\n")
                for k in range(ptable.n_topics):
                    cells = "\t".join(str(int(c)) for c in ptable.counts[k])
                    fh.write(f"{k}\t{cells}\n")
        elif report == "timeseries":
            ptable = analysis.partition_prevalence(
                assignments, table, need_meta(), need_scheme(), n_topics
            )
            series = analysis.time_series(
                ptable, normalize=opts.get("normalize", "none")
            )
            use_spark = opts.get("sparkline", False, bool)
            if use_spark:
                fh.write("topic_id\tseries\n")
                for k in series.topic_order:
                    fh.write(f"{k}\t{_sparkline(series.values[k])}\n")
            else:
                fh.write(
                    "topic_id\t" + "\t".join(str(p) for p in series.periods) + "\n"
                )
                for k in series.topic_order:
                    cells = "\t".join(f"{v:.10g}" for v in series.values[k])
                    fh.write(f"{k}\t{cells}\n")
        elif report == "uniform":
            ptable = analysis.partition_prevalence(
                assignments, table, need_meta(), need_scheme(), n_topics
            )
            fh.write("topic_id\tlabel_entropy\n")
            for k, h in analysis.uniform_topics(ptable, top_m):
                fh.write(f"{k}\t{h:.10g}\n")
        elif report == "polysemy":
            summaries = topics_mod.summarize(
                assignments, table, vocab, n_topics, top_n
            )
            candidates = analysis.polysemy_candidates(summaries, top_n=top_n)
            if top_m is not None:
                candidates = candidates[:top_m]
            fh.write("type_id\tsurface\ttopic_a\ttopic_b\tjsd\n")
            for c in candidates:
                fh.write(
                    f"{c.type_id}\t{vocab.surface(c.type_id)}\t"
                    f"{c.topic_a}\t{c.topic_b}\t{c.divergence:.10g}\n"
                )
        else:  # pos
            summaries = topics_mod.summarize(
                assignments, table, vocab, n_topics, top_n
            )
            if opts.get("composition", False, bool):
                fh.write("tag\tfraction\n")
                for tag, frac in analysis.pos_composition(
                    summaries, vocab, top_n
                ).items():
                    fh.write(f"{tag}\t{frac:.10g}\n")
            else:
                fh.write("topic_id\tpos_entropy\n")
                for s in summaries:
                    h = analysis.pos_entropy(s, vocab, top_n)
                    cell = "NA" if h is None else f"{h:.10g}"
                    fh.write(f"{s.topic_id}\t{cell}\n")

    if out:
        _finish_manifest(
            "analyze",
            {
                "report": report,
                "model": args.model,
                "in": args.in_path,
                "scheme": opts.get("scheme", None),
                "top_n": top_n,
                "top_m": top_m,
                "threads": opts.threads(),
            },
            {},
            [args.model, args.in_path],
            [out],
            manifest,
            out,
        )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(2, "config", exc)
    except FormatError as exc:
        return _fail(1, "format", exc)
    except IntegrityError as exc:
        return _fail(3, "integrity", exc)
    except OSError as exc:
        return _fail(1, "io", exc)
    except TokenTopicsError as exc:
        return _fail(3, "error", exc)


def _fail(code: int, category: str, exc: Exception) -> int:
    message = " ".join(str(exc).split())
    print(f"error: {category}: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
