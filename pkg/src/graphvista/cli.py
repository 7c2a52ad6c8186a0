"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.
All randomness flows from --seed; two runs with equal flags produce
byte-identical artifacts (timestamps live only in logs).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import grena
from .client import HttpReasoner
from .errors import (
    GraphVistaError,
    ParameterError,
    ProviderError,
    TransportError,
)
from .graph import dump_graph, load_graph, to_json_obj
from .ragbase import BaseConfig, build_base, dump_base, load_base
from .router import parse_question
from .subgraph import ExtractionConfig, extract_ego, extract_multi
from .suite import PipelineConfig, run_suite

USAGE_EXIT = 1
DATA_EXIT = 2
BACKEND_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _read_graph(path: str):
    try:
        return load_graph(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise _DataError(f"graph file not found: {path}") from exc
    except (ValueError, GraphVistaError) as exc:
        raise _DataError(f"cannot parse graph file {path}: {exc}") from exc


class _DataError(Exception):
    pass


def _pipeline_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        try:
            obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
            cfg = PipelineConfig.from_json(obj)
        except FileNotFoundError as exc:
            raise _DataError(f"config file not found: {args.config}") from exc
        except (ValueError, GraphVistaError) as exc:
            raise _DataError(f"bad config file: {exc}") from exc
    if getattr(args, "seed", None) is not None:
        cfg = PipelineConfig(
            base=cfg.base, extraction=cfg.extraction, sampling=cfg.sampling,
            retrieval_budget=cfg.retrieval_budget,
            routing_table_path=cfg.routing_table_path, seed=args.seed,
        )
    return cfg


def _make_backend(args, items=None, graphs=None, cfg: PipelineConfig | None = None):
    if args.backend == "http":
        try:
            return HttpReasoner.from_env()
        except ParameterError as exc:
            raise _DataError(str(exc)) from exc
    if items is None:
        raise _DataError("scripted backend requires a benchmark")
    cfg = cfg or PipelineConfig()
    return grena.OracleScriptedReasoner(
        items, graphs, base_cfg=cfg.base, ext_cfg=cfg.extraction, seed=cfg.seed
    )


def cmd_build_base(args) -> int:
    g = _read_graph(args.graph)
    cfg = BaseConfig(
        k1_percent=args.k1, k2_percent=args.k2,
        store_tier3=args.store_tier3, bypass_threshold=args.bypass_threshold,
    )
    base = build_base(g, cfg)
    Path(args.out).write_text(dump_base(base) + "\n", encoding="utf-8")
    print(f"built base over {g.n} nodes: {len(base.entries)} entries, "
          f"coverage {base.coverage_ratio():.4f}")
    return 0


def cmd_parse(args) -> int:
    g = _read_graph(args.graph)
    parsed = parse_question(args.question, g)
    print(json.dumps(parsed.to_json(), sort_keys=True))
    return 0


def cmd_extract(args) -> int:
    g = _read_graph(args.graph)
    if args.base:
        base = load_base(Path(args.base).read_text(encoding="utf-8"))
    else:
        base = build_base(g)
    cfg = ExtractionConfig(k=args.k, n_max=args.n_max, yen_k=args.yen_k)
    if args.target:
        sub = extract_multi(g, base, args.center, args.target, cfg)
    else:
        sub = extract_ego(g, base, args.center, cfg)
    payload = {
        "graph": to_json_obj(sub.graph),
        "centers": list(sub.centers),
        "path_cover": sorted(sub.path_cover),
        "prune_log": list(sub.prune_log),
    }
    Path(args.out).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"extracted {sub.graph.n} nodes / {sub.graph.m} edges "
          f"(pruned {len(sub.prune_log)})")
    return 0


def cmd_ask(args) -> int:
    from .ragbase import retrieve
    from .reasoning import answer_text, run_vgt
    from .router import make_plan
    from .subgraph import extract_for_task

    g = _read_graph(args.graph)
    cfg = _pipeline_config(args)
    if args.base:
        base = load_base(Path(args.base).read_text(encoding="utf-8"))
    else:
        base = build_base(g, cfg.base)
    parsed = parse_question(args.question, g)
    if args.backend == "http":
        reasoner = HttpReasoner.from_env()
    else:
        reasoner = grena.SingleTaskOracleReasoner(
            g, parsed, base=base, ext_cfg=cfg.extraction, seed=cfg.seed
        )
    if parsed.category == "simple":
        ctx = retrieve(base, parsed, cfg.retrieval_budget)
        final = answer_text(parsed, ctx, reasoner, weighted=g.is_weighted)
    else:
        sub = extract_for_task(g, base, parsed, cfg.extraction)
        session = run_vgt(make_plan(parsed), sub, reasoner, parsed, seed=cfg.seed)
        final = session.final
    print(json.dumps(
        {"question": args.question, "category": parsed.category,
         "answer": final.answer.to_json(), "rationale": final.rationale},
        sort_keys=True,
    ))
    return 0


def cmd_gen_bench(args) -> int:
    if args.paper_split:
        cfg = grena.paper_split_config(seed=args.seed or 0)
    else:
        if not args.config:
            raise _DataError("gen-bench needs --config or --paper-split")
        try:
            obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise _DataError(f"config file not found: {args.config}") from exc
        if args.seed is not None:
            obj["seed"] = args.seed
        cfg = grena.BenchConfig.from_json(obj)
    items, graphs, manifest = grena.generate_benchmark(cfg)
    grena.write_benchmark(args.out, items, graphs, manifest)
    totals = manifest["totals"]
    print(f"wrote {totals['all']} items ({totals['simple']} simple / "
          f"{totals['complex']} complex) to {args.out}")
    return 0


def cmd_gen_dpo(args) -> int:
    items, graphs, _ = grena.load_benchmark(args.bench)
    mix = args.mix
    if mix != "uniform":
        try:
            mix = json.loads(mix)
        except ValueError as exc:
            raise _DataError(f"--mix must be 'uniform' or a JSON map: {exc}") from exc
    cfg = _pipeline_config(args)
    pairs, svg_store, histogram = grena.build_preference_dataset(
        items, graphs, mix=mix, seed=args.seed or 0,
        base_cfg=cfg.base, ext_cfg=cfg.extraction,
    )
    grena.write_preference_dataset(args.out, pairs, svg_store, histogram)
    print(f"wrote {len(pairs)} preference pairs to {args.out}; "
          f"histogram {json.dumps(dict(sorted(histogram.items())))}")
    return 0


def cmd_evaluate(args) -> int:
    from .evaluate import aggregate, size_bucket, write_report
    from .evaluate import EvalRecord
    from .evaluate import score as score_fn
    from .oracles import GoldAnswer

    items, graphs, _ = grena.load_benchmark(args.bench)
    by_id = {it.id: it for it in items}
    records = []
    try:
        rows = Path(args.answers).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as exc:
        raise _DataError(f"answers file not found: {args.answers}") from exc
    for line in rows:
        if not line.strip():
            continue
        obj = json.loads(line)
        item = by_id.get(obj.get("item_id"))
        if item is None:
            raise _DataError(f"unknown item_id {obj.get('item_id')!r} in answers")
        predicted = (
            GoldAnswer.from_json(obj["answer"]) if obj.get("answer") else None
        )
        g = graphs[item.graph_ref]
        records.append(EvalRecord(
            item_id=item.id,
            predicted=predicted,
            gold=item.gold,
            correct=score_fn(predicted, item.gold, item.task.task_type, g),
            latency_ms=float(obj.get("latency_ms", 0.0)),
            category=item.category,
            size_bucket=size_bucket(item.size),
            error=obj.get("error"),
        ))
    report = aggregate(records)
    write_report(report, args.out,
                 Path(args.out).with_suffix(".txt") if args.text else None)
    print(report.text_table())
    return 0


def cmd_run_suite(args) -> int:
    items, graphs, _ = grena.load_benchmark(args.bench)
    cfg = _pipeline_config(args)
    reasoner = _make_backend(args, items, graphs, cfg)
    result = run_suite((items, graphs), reasoner, cfg, out_dir=args.out,
                       jobs=args.jobs, resume=not args.no_resume)
    print(result.report.text_table())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="graphvista")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-base", help="build the tiered storage base")
    p.add_argument("--graph", required=True)
    p.add_argument("--k1", type=float, default=10.0)
    p.add_argument("--k2", type=float, default=20.0)
    p.add_argument("--store-tier3", dest="store_tier3", action="store_true",
                   default=True)
    p.add_argument("--no-store-tier3", dest="store_tier3", action="store_false")
    p.add_argument("--bypass-threshold", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_base)

    p = sub.add_parser("parse", help="parse a question into a task")
    p.add_argument("--graph", required=True)
    p.add_argument("--question", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("extract", help="extract a task-relevant subgraph")
    p.add_argument("--graph", required=True)
    p.add_argument("--center", required=True)
    p.add_argument("--target")
    p.add_argument("--base")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-max", dest="n_max", type=int, default=25)
    p.add_argument("--yen-k", dest="yen_k", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("ask", help="answer one question end to end")
    p.add_argument("--graph", required=True)
    p.add_argument("--base")
    p.add_argument("--question", required=True)
    p.add_argument("--backend", choices=("scripted", "http"), default="scripted")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("gen-bench", help="generate a benchmark")
    p.add_argument("--config")
    p.add_argument("--paper-split", action="store_true",
                   help="use the built-in large-scale split configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_bench)

    p = sub.add_parser("gen-dpo", help="build the preference-pair dataset")
    p.add_argument("--bench", required=True)
    p.add_argument("--mix", default="uniform")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_dpo)

    p = sub.add_parser("evaluate", help="score an answers file against a benchmark")
    p.add_argument("--bench", required=True)
    p.add_argument("--answers", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run-suite", help="run a full benchmark end to end")
    p.add_argument("--bench", required=True)
    p.add_argument("--backend", choices=("scripted", "http"), default="scripted")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-resume", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return args.func(args)
    except _DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (TransportError, ProviderError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return BACKEND_EXIT
    except GraphVistaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
