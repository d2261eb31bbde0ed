"""Command-line pipeline driver.

Subcommands communicate only through files so any impact source (the
BM25 baseline or an externally learned impact file) can feed the same
build/search/evaluate chain:

    expand -> score-bm25 -> build -> search -> evaluate / bench / significance
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import corpus, evaluation, impacts, index as index_mod, quantize, query as query_mod
from ._backend import available_backends, load_kernels
from .errors import ConfigError, ImpactIdxError


def _add_tokenizer_flags(parser):
    group = parser.add_argument_group("tokenizer")
    group.add_argument("--no-lowercase", action="store_true", help="keep original case")
    group.add_argument("--keep-punctuation", action="store_true",
                       help="split on whitespace only")
    group.add_argument("--stem", action="store_true", help="apply Porter stemming")
    group.add_argument("--stopwords", metavar="FILE",
                       help="file with one stopword per line")


def _tokenizer_config(args) -> corpus.TokenizerConfig:
    stopwords = None
    if args.stopwords:
        with open(args.stopwords, encoding="utf-8") as fh:
            stopwords = frozenset(line.strip() for line in fh if line.strip())
    return corpus.TokenizerConfig(
        lowercase=not args.no_lowercase,
        strip_punctuation=not args.keep_punctuation,
        stemming=args.stem,
        stopwords=stopwords,
    )


def _cmd_expand(args) -> int:
    config = _tokenizer_config(args)
    expansions = corpus.read_expansion_jsonl(args.expansion) if args.expansion else {}
    passages = corpus.build_passages(
        corpus.read_corpus_tsv(args.corpus), expansions,
        corpus.ExpansionMode(args.mode), config)
    corpus.write_expanded_tsv(passages, args.output)
    print(f"expanded {len(passages)} passages -> {args.output}")
    return 0


def _cmd_score_bm25(args) -> int:
    passages = corpus.read_expanded_tsv(args.corpus)
    params = impacts.Bm25Params(k1=args.k1, b=args.b)
    collection = impacts.compute_bm25_impacts(passages, params)
    impacts.write_impact_file(collection, args.output)
    print(f"scored {collection.doc_count} documents -> {args.output}")
    return 0


def _cmd_build(args) -> int:
    collection = impacts.load_impact_file(args.impacts)
    quantizer = quantize.fit(collection, args.bits)
    idx = index_mod.build(collection, quantizer)
    index_mod.save(idx, args.output)
    print(f"indexed {idx.doc_count} documents, {idx.term_count} terms "
          f"(bits={idx.bits}, s_max={idx.s_max:g}) -> {args.output}")
    return 0


def _cmd_search(args) -> int:
    idx = index_mod.load(args.index)
    queries = query_mod.read_queries_tsv(args.queries, _tokenizer_config(args))
    results, _ = query_mod.batch_search(
        idx, queries, args.k, query_mod.Strategy(args.strategy),
        threads=args.threads, kernels=load_kernels(args.backend))
    query_mod.write_trec_run(results, args.output, args.run_tag)
    print(f"searched {len(queries)} queries (k={args.k}, {args.strategy}) -> {args.output}")
    return 0


_METRIC_BUILDERS = {
    "mrr": lambda run, qrels, k, thr: evaluation.mrr_at_k(run, qrels, k, thr),
    "recall": lambda run, qrels, k, thr: evaluation.recall_at_k(run, qrels, k, thr),
    "ndcg": lambda run, qrels, k, thr: evaluation.ndcg_at_k(run, qrels, k),
    "map": lambda run, qrels, k, thr: evaluation.map_metric(run, qrels, thr),
}


def _parse_metric(spec: str):
    name, _, depth = spec.strip().partition("@")
    name = name.lower()
    if name not in _METRIC_BUILDERS:
        raise ConfigError(f"unknown metric {spec!r}")
    if name == "map":
        if depth:
            raise ConfigError("map takes no cutoff")
        return name, None
    if not depth:
        raise ConfigError(f"metric {name} needs a cutoff, e.g. {name}@10")
    k = int(depth)
    if k < 1:
        raise ConfigError(f"cutoff must be >= 1 in {spec!r}")
    return name, k


def _cmd_evaluate(args) -> int:
    run = evaluation.read_trec_run(args.run)
    qrels = evaluation.parse_qrels(args.qrels)
    reports = []
    for spec in args.metrics.split(","):
        name, k = _parse_metric(spec)
        reports.append(_METRIC_BUILDERS[name](run, qrels, k, args.rel_threshold))

    lines = [f"{r.metric}\t{r.mean:.6f}" for r in reports]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)

    if args.per_query:
        with open(args.per_query, "w", encoding="utf-8", newline="\n") as fh:
            for r in reports:
                for query_id in sorted(r.per_query):
                    fh.write(f"{r.metric}\t{query_id}\t{r.per_query[query_id]:.6f}\n")
    return 0


def _percentile(sorted_values, pct: float) -> float:
    # nearest-rank on an already sorted sample
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def _cmd_bench(args) -> int:
    idx = index_mod.load(args.index)
    queries = query_mod.read_queries_tsv(args.queries, _tokenizer_config(args))
    strategies = ([query_mod.Strategy(args.strategy)] if args.strategy != "both"
                  else [query_mod.Strategy.MAXSCORE, query_mod.Strategy.EXHAUSTIVE])
    backends = list(available_backends()) if args.backend == "both" else [args.backend]
    for backend in backends:
        kernels = load_kernels(backend)
        for strategy in strategies:
            samples = []
            for _ in range(args.repeat):
                _, latencies = query_mod.batch_search(idx, queries, args.k, strategy,
                                                      kernels=kernels)
                samples.extend(latencies)
            samples.sort()
            mrt = sum(samples) / len(samples)
            print(f"strategy={strategy.value} backend={kernels.BACKEND_NAME} "
                  f"queries={len(samples)} k={args.k} "
                  f"mrt_ms={mrt:.3f} p50_ms={_percentile(samples, 50):.3f} "
                  f"p99_ms={_percentile(samples, 99):.3f}")
    return 0


def _cmd_significance(args) -> int:
    names = args.names.split(",") if args.names else None
    if names and len(names) != len(args.per_query_files):
        raise ConfigError("--names must list one name per per-query file")
    scores: dict[str, dict[str, float]] = {}
    for i, path in enumerate(args.per_query_files):
        name = names[i] if names else os.path.basename(path)
        per_query: dict[str, float] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                if len(parts) == 3 and parts[0] == args.metric:
                    per_query[parts[1]] = float(parts[2])
        if not per_query:
            raise ConfigError(f"no {args.metric!r} rows in {path}")
        scores[name] = per_query
    results = evaluation.paired_ttest_bonferroni(scores, args.alpha)
    print("system_a\tsystem_b\tt\tp\tsignificant")
    for r in results:
        print(f"{r.system_a}\t{r.system_b}\t{r.t_statistic:.6g}\t{r.p_value:.6g}"
              f"\t{'yes' if r.significant else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impactidx",
        description="Quantized term-impact indexing and safe top-k retrieval.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="tokenize a corpus and merge expansion terms")
    p.add_argument("--corpus", required=True, help="TSV: doc_id<TAB>text")
    p.add_argument("--expansion", help="JSON lines with id and queries fields")
    p.add_argument("--mode", choices=[m.value for m in corpus.ExpansionMode],
                   default="none")
    p.add_argument("-o", "--output", required=True, help="expanded TSV out")
    _add_tokenizer_flags(p)
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("score-bm25", help="compute BM25 impacts for an expanded corpus")
    p.add_argument("--corpus", required=True, help="expanded TSV from `expand`")
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("-o", "--output", required=True, help="impacts JSON-lines out")
    p.set_defaults(func=_cmd_score_bm25)

    p = sub.add_parser("build", help="quantize impacts and build the inverted index")
    p.add_argument("--impacts", required=True, help="impacts JSON-lines file")
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("-o", "--output", required=True, help="index file out")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("search", help="run top-k retrieval, write a TREC run file")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True, help="TSV: query_id<TAB>text")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--strategy", choices=[s.value for s in query_mod.Strategy],
                   default="maxscore")
    p.add_argument("--backend", choices=["auto", "c", "py"], default="auto")
    p.add_argument("--run-tag", default="impactidx")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="TREC run file out")
    _add_tokenizer_flags(p)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("evaluate", help="score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default="mrr@10,recall@1000,ndcg@10,map",
                   help="comma list, e.g. mrr@10,recall@100,ndcg@10,map")
    p.add_argument("--rel-threshold", type=int, default=1,
                   help="minimum grade counted as relevant")
    p.add_argument("--per-query", help="optional per-query TSV dump")
    p.add_argument("-o", "--output", help="report TSV (also printed)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("bench", help="measure per-query latency")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--strategy", choices=["maxscore", "exhaustive", "both"],
                   default="both")
    p.add_argument("--backend", choices=["auto", "c", "py", "both"], default="both")
    p.add_argument("--repeat", type=int, default=1)
    _add_tokenizer_flags(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("significance",
                       help="Bonferroni-corrected pairwise t-tests over per-query dumps")
    p.add_argument("--metric", required=True, help="metric name as in the dump, e.g. map")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--names", help="comma list of system names (default: file names)")
    p.add_argument("per_query_files", nargs="+",
                   help="per-query TSV dumps from `evaluate --per-query`")
    p.set_defaults(func=_cmd_significance)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ImpactIdxError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
