"""End-to-end benchmark runs: parse, route, answer, score, report.

Per item the flow is parse -> categorize -> (retrieve + text answer) or
(extract + render + stepwise visual loop) -> score.  Item failures are
recorded as incorrect with their error class; a run never aborts on one
item.  Results and journals land in per-item files keyed by item id, so
an interrupted run resumes exactly where it stopped and produces the
same final report as an uninterrupted one.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .client import SamplingParams
from .errors import GraphVistaError
from .evaluate import EvalRecord, Report, aggregate, score, size_bucket, write_report
from .grena import derive_seed, load_benchmark
from .ragbase import BaseConfig, build_base, retrieve
from .reasoning import answer_text, run_vgt
from .router import load_routing_table, make_plan, parse_question
from .subgraph import ExtractionConfig, extract_for_task


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a suite run needs beyond the benchmark itself."""

    base: BaseConfig = BaseConfig()
    extraction: ExtractionConfig = ExtractionConfig()
    sampling: SamplingParams = SamplingParams()
    retrieval_budget: int = 4096
    routing_table_path: str | None = None
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "extraction": {
                "k": self.extraction.k,
                "n_max": self.extraction.n_max,
                "yen_k": self.extraction.yen_k,
            },
            "sampling": {
                "temperature": self.sampling.temperature,
                "top_p": self.sampling.top_p,
                "max_tokens": self.sampling.max_tokens,
            },
            "retrieval_budget": self.retrieval_budget,
            "routing_table_path": self.routing_table_path,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "PipelineConfig":
        base = BaseConfig(**obj.get("base", {}))
        ext = ExtractionConfig(**obj.get("extraction", {}))
        sampling = SamplingParams(**obj.get("sampling", {}))
        return PipelineConfig(
            base=base,
            extraction=ext,
            sampling=sampling,
            retrieval_budget=obj.get("retrieval_budget", 4096),
            routing_table_path=obj.get("routing_table_path"),
            seed=obj.get("seed", 0),
        )


@dataclass
class SuiteResult:
    report: Report
    records: list[EvalRecord] = field(default_factory=list)
    out_dir: Path | None = None


def _run_item(item, g, base, reasoner, cfg: PipelineConfig, routing_table):
    started = time.perf_counter()
    journal: list[dict] = []
    predicted = None
    error = None
    try:
        parsed = parse_question(item.question, g, fallback=None,
                                routing_table=routing_table)
        tags = {"item_id": item.id}
        if parsed.category == "simple":
            ctx = retrieve(base, parsed, cfg.retrieval_budget)
            final = answer_text(parsed, ctx, reasoner,
                                weighted=g.is_weighted, journal_tags=tags)
            journal.append({
                "t": 1,
                "mode": "text",
                "truncated": ctx.truncated,
                "final": final.to_json(),
            })
        else:
            sub = extract_for_task(g, base, parsed, cfg.extraction)
            plan = make_plan(parsed)
            session = run_vgt(
                plan, sub, reasoner, parsed,
                seed=derive_seed(cfg.seed, "layout", item.id) % (2 ** 31),
                journal_tags=tags,
            )
            final = session.final
            journal = session.journal
        predicted = final.answer
        correct = score(predicted, item.gold, item.task.task_type, g)
    except GraphVistaError as exc:
        error = type(exc).__name__
        journal.append({"error": error, "detail": str(exc)})
        correct = False
    latency_ms = (time.perf_counter() - started) * 1000.0
    record = EvalRecord(
        item_id=item.id,
        predicted=predicted,
        gold=item.gold,
        correct=correct,
        latency_ms=latency_ms,
        category=item.category,
        size_bucket=size_bucket(item.size),
        error=error,
    )
    return record, journal


def run_suite(bench, reasoner, config: PipelineConfig | None = None,
              out_dir=None, jobs: int = 1, resume: bool = True) -> SuiteResult:
    """Run a full benchmark against one reasoner backend.

    ``bench`` is a benchmark directory or an (items, graphs) pair.  With
    an out_dir, per-item results and journals are persisted and previous
    results are reused on resume.
    """
    cfg = config or PipelineConfig()
    if isinstance(bench, (str, Path)):
        items, graphs, _ = load_benchmark(bench)
    else:
        items, graphs = bench
    routing_table = (
        load_routing_table(cfg.routing_table_path)
        if cfg.routing_table_path else None
    )
    results_dir = journals_dir = None
    if out_dir is not None:
        out = Path(out_dir)
        results_dir = out / "results"
        journals_dir = out / "journals"
        results_dir.mkdir(parents=True, exist_ok=True)
        journals_dir.mkdir(parents=True, exist_ok=True)

    records: dict[str, EvalRecord] = {}
    pending = []
    for item in items:
        if resume and results_dir is not None:
            path = results_dir / f"{item.id}.json"
            if path.exists():
                records[item.id] = EvalRecord.from_json(
                    json.loads(path.read_text(encoding="utf-8"))
                )
                continue
        pending.append(item)

    # bases are shared read-only state: build them up front, one per graph
    bases = {}
    for item in pending:
        if item.graph_ref not in bases:
            bases[item.graph_ref] = build_base(graphs[item.graph_ref], cfg.base)

    def work(item):
        record, journal = _run_item(
            item, graphs[item.graph_ref], bases[item.graph_ref],
            reasoner, cfg, routing_table,
        )
        if results_dir is not None:
            (results_dir / f"{item.id}.json").write_text(
                json.dumps(record.to_json(), sort_keys=True) + "\n",
                encoding="utf-8",
            )
            with open(journals_dir / f"{item.id}.jsonl", "w", encoding="utf-8") as fh:
                for row in journal:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
        return record

    if jobs > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for record in pool.map(work, pending):
                records[record.item_id] = record
    else:
        for item in pending:
            record = work(item)
            records[record.item_id] = record

    ordered = [records[item.id] for item in items if item.id in records]
    report = aggregate(ordered)
    if out_dir is not None:
        write_report(report, Path(out_dir) / "report.json",
                     Path(out_dir) / "report.txt")
        (Path(out_dir) / "config.json").write_text(
            json.dumps(cfg.to_json(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    return SuiteResult(report=report, records=ordered,
                       out_dir=Path(out_dir) if out_dir else None)
