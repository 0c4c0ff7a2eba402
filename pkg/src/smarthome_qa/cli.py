"""Command-line pipeline driver.

One subcommand per pipeline step: ingest, build-v1, refine, review-serve,
apply-review, synth-split, topics, split, predict, eval, compare, stats.
Progress goes to stderr; machine-readable output goes to files or stdout.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import ingest as ingest_mod
from . import predict as predict_mod
from . import report as report_mod
from . import topics as topics_mod
from .config import PipelineConfig, load_config
from .errors import ToolError
from .llm import ChatCompletionClient, LlmClientConfig, RetryPolicy
from .metrics import HttpEmbedder, OneHotEmbedder
from .model import (
    Version,
    dataset_stats,
    load_dataset,
    load_splits,
    save_dataset,
    save_splits,
    split_dataset,
    Splits,
)
from .preprocess import build_v1, load_candidates, save_candidates
from .refine import (
    RecordStore,
    Stage,
    apply_decisions,
    default_templates,
    load_templates,
    run_stage,
    synthetic_totals,
)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _llm_client(args: argparse.Namespace, config: PipelineConfig) -> ChatCompletionClient:
    llm = config.llm
    base_url = args.base_url or llm.base_url
    model = args.model or llm.model_name
    if not base_url or not model:
        raise ToolError("an endpoint --base-url and --model are required (flag or config)")
    client_config = LlmClientConfig(
        base_url=base_url,
        model_name=model,
        api_key_ref=args.api_key_env or llm.api_key_env,
        max_concurrency=args.max_concurrency or llm.max_concurrency,
        retry=RetryPolicy(
            max_attempts=args.max_attempts or llm.max_attempts,
            backoff_base_ms=args.backoff_ms if args.backoff_ms is not None else llm.backoff_base_ms,
        ),
        request_timeout_ms=args.timeout_ms or llm.request_timeout_ms,
    )
    return ChatCompletionClient(client_config)


def _add_llm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--base-url", help="chat-completion endpoint base URL")
    parser.add_argument("--model", help="model name sent in requests")
    parser.add_argument("--api-key-env", help="environment variable holding the API key")
    parser.add_argument("--max-concurrency", type=int, default=None)
    parser.add_argument("--max-attempts", type=int, default=None)
    parser.add_argument("--backoff-ms", type=int, default=None)
    parser.add_argument("--timeout-ms", type=int, default=None)


def cmd_ingest(args: argparse.Namespace, config: PipelineConfig) -> int:
    result = ingest_mod.parse_export(args.export, source=args.source)
    threads = list(result.threads)
    warnings = list(result.warnings)
    _info(f"parsed {len(threads)} threads from {args.export} ({len(warnings)} warnings)")
    if not args.no_filter:
        spec = ingest_mod.load_keywords(args.keywords or config.keywords_path)
        kept = ingest_mod.keyword_filter(threads, spec)
        _info(f"keyword filter kept {len(kept)}/{len(threads)} threads")
        threads = kept
    candidates = []
    for thread in threads:
        try:
            candidates.append(ingest_mod.thread_to_candidate(thread))
        except ToolError as exc:
            warnings.append(ingest_mod.ParseWarning(str(args.export), -1, str(exc)))
    save_candidates(candidates, args.out)
    _info(f"wrote {len(candidates)} candidates to {args.out}")
    warn_path = args.warnings or (str(args.out) + ".warnings.jsonl")
    if warnings or args.warnings:
        ingest_mod.write_warning_report(warnings, warn_path)
        _info(f"wrote {len(warnings)} warnings to {warn_path}")
    return 0


def cmd_build_v1(args: argparse.Namespace, config: PipelineConfig) -> int:
    candidates = load_candidates(args.candidates)
    allowlist: Optional[set[str]] = None
    if args.allowlist:
        allowlist = {
            line.strip()
            for line in Path(args.allowlist).read_text(encoding="utf-8").splitlines()
            if line.strip()
        }
    dataset, reduction = build_v1(candidates, allowlist=allowlist)
    save_dataset(dataset, args.out)
    report_path = args.report or (str(args.out) + ".report.json")
    Path(report_path).write_text(
        json.dumps(reduction.to_json_dict(), indent=2) + "\n", encoding="utf-8"
    )
    _info(
        f"v1.0 dataset: {reduction.output_pairs} pairs from {reduction.input_candidates} "
        f"candidates (no-answer {reduction.dropped_no_answer}, "
        f"duplicate {reduction.dropped_duplicate}, unselected {reduction.dropped_unselected})"
    )
    return 0


def cmd_refine(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    store = RecordStore(args.store)
    templates = load_templates(args.templates) if args.templates else default_templates()
    client = _llm_client(args, config)
    try:
        records = run_stage(
            dataset,
            Stage(args.stage),
            client,
            templates,
            store,
            max_tokens=args.max_tokens,
        )
    finally:
        client.close()
    failed = sum(1 for r in records if r.status.value == "failed")
    _info(
        f"stage {args.stage}: created {len(records)} records "
        f"({failed} failed) in {args.store}"
    )
    return 0


def cmd_review_serve(args: argparse.Namespace, config: PipelineConfig) -> int:
    import uvicorn

    from .review import create_app

    store = RecordStore(args.store)
    pair_index = {}
    for path in args.dataset or []:
        for pair in load_dataset(path).pairs:
            pair_index[pair.id] = pair
    app = create_app(store, pairs=pair_index, static_dir=args.static)
    _info(f"serving review API on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_apply_review(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    store = RecordStore(args.store)
    stage = Stage(args.stage)
    records = store.filtered(stage=stage)
    if not records:
        raise ToolError(f"store has no records for stage {stage.value}")
    result = apply_decisions(dataset, records, Version(args.target))
    save_dataset(result, args.out)
    _info(f"wrote {len(result.pairs)} {result.version.value} pairs to {args.out}")
    return 0


def cmd_synth_split(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset, expected_version=Version.SYNTHETIC)
    train = args.train if args.train is not None else config.synthetic.train
    val = args.val if args.val is not None else config.synthetic.val
    seed = args.seed if args.seed is not None else config.synthetic.seed
    result = synthetic_totals(dataset, (train, val), seed)
    save_splits(
        Splits(
            train_ids=result.train_ids,
            val_ids=result.val_ids,
            test_ids=(),
            seed=seed,
            source_version=Version.SYNTHETIC,
        ),
        args.out,
    )
    print(json.dumps(result.totals()))
    return 0


def cmd_topics(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    lda = config.lda
    k = args.k if args.k is not None else lda.k
    alpha = args.alpha if args.alpha is not None else lda.effective_alpha()
    beta = args.beta if args.beta is not None else lda.beta
    iterations = args.iterations if args.iterations is not None else lda.iterations
    seed = args.seed if args.seed is not None else lda.seed
    min_df = args.min_df if args.min_df is not None else lda.min_df
    n_keywords = (
        args.keywords_per_topic if args.keywords_per_topic is not None else lda.keywords_per_topic
    )
    stopwords = topics_mod.load_stopwords(args.stopwords or config.stopwords_path)

    if args.whole:
        segments = [topics_mod.Segment(name="all", pairs=dataset.pairs)]
    else:
        top_n = args.top_n if args.top_n is not None else lda.top_n_segments
        segments = topics_mod.segment_dataset(dataset, top_n=top_n)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for segment in segments:
        if not segment.pairs:
            _info(f"segment {segment.name}: empty, skipped")
            continue
        corpus = topics_mod.tokenize_corpus(segment.pairs, stopwords, min_df=min_df)
        if corpus.dropped_doc_ids:
            _info(f"segment {segment.name}: dropped {len(corpus.dropped_doc_ids)} empty docs")
        seg_k = min(k, corpus.n_tokens, len(corpus.vocabulary)) if args.adapt_k else k
        model = topics_mod.fit_lda(corpus, seg_k, alpha, beta, iterations, seed)
        n_kw = min(n_keywords, len(corpus.vocabulary))
        topic_report = topics_mod.top_keywords(model, n_kw, segment=segment.name)
        topic_report.save(out_dir / f"topics_{segment.name}.json")
        reports.append(topic_report)
        _info(f"segment {segment.name}: {len(segment.pairs)} pairs, k={seg_k}, wrote report")
    if args.csv:
        topics_mod.write_topics_csv(reports, args.csv)
        _info(f"wrote topic CSV to {args.csv}")
    return 0


def cmd_split(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    sd = config.split
    counts = (
        args.train if args.train is not None else sd.train,
        args.val if args.val is not None else sd.val,
        args.test if args.test is not None else sd.test,
    )
    seed = args.seed if args.seed is not None else sd.seed
    splits = split_dataset(dataset, counts, seed)
    save_splits(splits, args.out)
    _info(
        f"split {len(dataset.pairs)} pairs into "
        f"{len(splits.train_ids)}/{len(splits.val_ids)}/{len(splits.test_ids)} "
        f"(seed {seed}) -> {args.out}"
    )
    return 0


def cmd_predict(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    splits = load_splits(args.splits)
    split_ids = {
        "train": splits.train_ids,
        "val": splits.val_ids,
        "test": splits.test_ids,
    }[args.split]
    gen = config.generation
    params = predict_mod.GenerationParams(
        temperature=args.temperature if args.temperature is not None else gen.temperature,
        seed=args.seed if args.seed is not None else gen.seed,
        max_tokens=args.max_tokens if args.max_tokens is not None else gen.max_tokens,
    )
    client = _llm_client(args, config)
    try:
        predictions = predict_mod.generate_predictions(
            split_ids,
            dataset,
            client,
            params,
            predict_mod.PredictionMode(args.mode),
            args.out,
        )
    finally:
        client.close()
    _info(f"{len(predictions)} predictions in {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    predictions = predict_mod.load_predictions(args.predictions)
    if args.embedder == "one-hot":
        embedder = OneHotEmbedder()
    else:
        embedder = HttpEmbedder(args.embedder, args.embedder_model or "embedding")
    eval_report = report_mod.evaluate_predictions(predictions, dataset, embedder)
    eval_report.save(args.out)
    if args.distribution:
        eval_report.write_distribution_csv(args.distribution)
    means = eval_report.means
    _info(
        f"{eval_report.model_name} [{eval_report.mode.value}] on {len(eval_report.per_example)} "
        f"examples: f1 {means.f1:.4f}, rouge_l {means.rouge_l:.4f}, "
        f"semantic_f1 {means.semantic_f1:.4f}"
    )
    return 0


def cmd_compare(args: argparse.Namespace, config: PipelineConfig) -> int:
    reports = [report_mod.load_report(p) for p in args.reports]
    table = report_mod.compare_models(reports)
    if args.csv:
        Path(args.csv).write_text(table.to_csv_text(), encoding="utf-8")
        _info(f"wrote comparison CSV to {args.csv}")
    print(table.to_text(), end="")
    return 0


def cmd_stats(args: argparse.Namespace, config: PipelineConfig) -> int:
    dataset = load_dataset(args.dataset)
    stats = dataset_stats(dataset)
    if args.json:
        print(json.dumps(stats.to_json_dict(), indent=2))
    else:
        print(f"version                      {dataset.version.value}")
        print(f"total pairs                  {stats.total_pairs}")
        print(f"avg question length (words)  {stats.avg_question_len_words:.2f}")
        print(f"avg answer length (words)    {stats.avg_answer_len_words:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smarthome-qa",
        description="Build, refine, topic-mine, and evaluate a smart-home security QA dataset.",
    )
    parser.add_argument("--config", help="JSON or TOML config file with pipeline defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a forum export into QA candidates")
    p.add_argument("export", help="scraper export file (.json or .csv)")
    p.add_argument("--source", required=True, help="source forum key")
    p.add_argument("--keywords", help="keyword list file (default: packaged list)")
    p.add_argument("--no-filter", action="store_true", help="skip the keyword filter")
    p.add_argument("--out", required=True, help="candidates JSONL output")
    p.add_argument("--warnings", help="warning report JSONL output")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-v1", help="candidates -> v1.0 dataset")
    p.add_argument("candidates", help="candidates JSONL from ingest")
    p.add_argument("--out", required=True, help="v1.0 dataset JSONL output")
    p.add_argument("--allowlist", help="file of thread ids kept by manual selection")
    p.add_argument("--report", help="reduction report JSON path")
    p.set_defaults(func=cmd_build_v1)

    p = sub.add_parser("refine", help="run an LLM refinement stage")
    p.add_argument("--dataset", required=True)
    p.add_argument("--stage", required=True, choices=[s.value for s in Stage])
    p.add_argument("--store", required=True, help="refinement record store (JSONL)")
    p.add_argument("--templates", help="prompt template JSON overriding the defaults")
    p.add_argument("--max-tokens", type=int, default=1024)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("review-serve", help="serve the human-review API and UI")
    p.add_argument("--store", required=True)
    p.add_argument("--dataset", action="append", help="dataset(s) for pair lookup; repeatable")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory with the built review UI bundle")
    p.set_defaults(func=cmd_review_serve)

    p = sub.add_parser("apply-review", help="fold decided records into the next version")
    p.add_argument("--dataset", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--stage", required=True, choices=[s.value for s in Stage])
    p.add_argument("--target", required=True, choices=[v.value for v in Version])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_apply_review)

    p = sub.add_parser("synth-split", help="train/val split of the synthetic dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--train", type=int, default=None)
    p.add_argument("--val", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_split)

    p = sub.add_parser("topics", help="LDA topic extraction per segment")
    p.add_argument("--dataset", required=True)
    p.add_argument("--whole", action="store_true", help="one segment over the whole dataset")
    p.add_argument("--top-n", type=int, default=None, help="single-source segments (default 12)")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-df", type=int, default=None)
    p.add_argument("--stopwords", help="stopword file (default: packaged list)")
    p.add_argument("--keywords-per-topic", type=int, default=None)
    p.add_argument(
        "--adapt-k",
        action="store_true",
        help="cap k at each segment's token/vocabulary size instead of failing",
    )
    p.add_argument("--out-dir", required=True)
    p.add_argument("--csv", help="also write a combined (segment, topic, keywords) CSV")
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("split", help="seeded train/val/test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--train", type=int, default=None)
    p.add_argument("--val", type=int, default=None)
    p.add_argument("--test", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("predict", help="generate model answers for a split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--split", required=True, choices=["train", "val", "test"])
    p.add_argument(
        "--mode",
        required=True,
        choices=[m.value for m in predict_mod.PredictionMode],
    )
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a prediction file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument(
        "--embedder",
        default="one-hot",
        help="'one-hot' or the base URL of an embedding endpoint",
    )
    p.add_argument("--embedder-model", help="model name for a remote embedder")
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--distribution", help="per-example score CSV for plotting")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="metric-by-model comparison table")
    p.add_argument("reports", nargs="+", help="report JSON files from eval")
    p.add_argument("--csv", help="write the table as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="dataset statistics (counts, average lengths)")
    p.add_argument("--dataset", required=True)
    p.add_argument("--json", action="store_true", help="emit the full report as JSON")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
