"""Answer scoring and report aggregation.

Scoring is representation-blind: sets compare order-insensitively, reals
within relative tolerance, and a predicted shortest path is correct iff
it is a valid path of optimal length, whichever optimal path it is.
Aggregation micro-averages accuracy overall and per size bucket; macro
averages ride along for transparency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParameterError
from .graph import Graph
from .oracles import GoldAnswer

REAL_RTOL = 1e-6

SIZE_BUCKETS = (
    ("[0,50)", 0, 50),
    ("[50,512)", 50, 512),
    ("[512,1024)", 512, 1024),
    ("[1024,2050]", 1024, 2051),
    ("(2050,inf)", 2051, None),
)


def size_bucket(n: int) -> str:
    for name, lo, hi in SIZE_BUCKETS:
        if n >= lo and (hi is None or n < hi):
            return name
    raise ParameterError(f"negative graph size {n}")  # pragma: no cover


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    predicted: GoldAnswer | None   # None marks an errored item
    gold: GoldAnswer
    correct: bool
    latency_ms: float
    category: str
    size_bucket: str
    error: str | None = None
    flag: str | None = None

    def to_json(self) -> dict:
        return {
            "item_id": self.item_id,
            "predicted": self.predicted.to_json() if self.predicted else None,
            "gold": self.gold.to_json(),
            "correct": self.correct,
            "latency_ms": self.latency_ms,
            "category": self.category,
            "size_bucket": self.size_bucket,
            "error": self.error,
            "flag": self.flag,
        }

    @staticmethod
    def from_json(obj: dict) -> "EvalRecord":
        return EvalRecord(
            item_id=obj["item_id"],
            predicted=GoldAnswer.from_json(obj["predicted"]) if obj.get("predicted") else None,
            gold=GoldAnswer.from_json(obj["gold"]),
            correct=obj["correct"],
            latency_ms=obj["latency_ms"],
            category=obj["category"],
            size_bucket=obj["size_bucket"],
            error=obj.get("error"),
            flag=obj.get("flag"),
        )


def _real_close(a: float, b: float) -> bool:
    return abs(a - b) <= REAL_RTOL * max(1.0, abs(a), abs(b))


def _path_length(g: Graph, path) -> float | None:
    total = 0.0
    for a, b in zip(path, path[1:]):
        if not g.has_edge(a, b):
            return None
        total += g.weight(a, b) if g.is_weighted else 1.0
    return total


def score(pred: GoldAnswer | None, gold: GoldAnswer, task_type: str,
          g: Graph | None = None) -> bool:
    """True iff the prediction matches gold under the task's semantics.

    Errors (pred None) and kind mismatches score incorrect.  Shortest
    paths accept any valid optimal path when the graph is supplied, exact
    sequence equality otherwise.
    """
    if pred is None:
        return False
    if pred.kind != gold.kind:
        return False
    if gold.kind == "boolean":
        return bool(pred.value) is bool(gold.value)
    if gold.kind == "integer":
        return isinstance(pred.value, int) and not isinstance(pred.value, bool) \
            and pred.value == gold.value
    if gold.kind == "real":
        try:
            return _real_close(float(pred.value), float(gold.value))
        except (TypeError, ValueError):
            return False
    if gold.kind == "node":
        return pred.value == gold.value
    if gold.kind in ("node_set", "edge_set"):
        try:
            if gold.kind == "edge_set":
                norm = lambda pairs: {frozenset(p) for p in pairs}  # noqa: E731
            else:
                norm = set
            return norm(pred.value or ()) == norm(gold.value or ())
        except TypeError:
            return False
    if gold.kind == "node_sequence":
        if gold.value is None or pred.value is None:
            return gold.value is None and pred.value is None
        pred_path = tuple(pred.value)
        gold_path = tuple(gold.value)
        if g is None:
            return pred_path == gold_path
        if not pred_path or pred_path[0] != gold_path[0] or pred_path[-1] != gold_path[-1]:
            return False
        if len(set(pred_path)) != len(pred_path):
            return False
        length = _path_length(g, pred_path)
        if length is None:
            return False
        gold_length = (gold.extra or {}).get("length")
        if gold_length is None:
            gold_length = _path_length(g, gold_path)
        return _real_close(float(length), float(gold_length))
    if gold.kind == "analysis_record":
        if not isinstance(pred.value, dict):
            return False
        for key, want in gold.value.items():
            have = pred.value.get(key)
            if isinstance(want, list):
                if list(have or ()) != want:
                    return False
            elif have != want:
                return False
        return True
    return False  # pragma: no cover


@dataclass(frozen=True)
class Report:
    simple_acc: float
    complex_acc: float
    overall_acc: float
    macro_acc: float
    by_size: dict[str, dict] = field(compare=False)
    counts: dict[str, int] = field(compare=False)

    def to_json(self) -> dict:
        return {
            "simple_acc": self.simple_acc,
            "complex_acc": self.complex_acc,
            "overall_acc": self.overall_acc,
            "macro_acc": self.macro_acc,
            "by_size": self.by_size,
            "counts": self.counts,
        }

    def text_table(self) -> str:
        rows = [
            f"{'bucket':>14s} {'simple':>8s} {'complex':>8s} {'overall':>8s} {'n':>7s}",
            f"{'all':>14s} {self.simple_acc:8.4f} {self.complex_acc:8.4f} "
            f"{self.overall_acc:8.4f} {self.counts['all']:7d}",
        ]
        for bucket in sorted(self.by_size):
            b = self.by_size[bucket]
            rows.append(
                f"{bucket:>14s} {b['simple_acc']:8.4f} {b['complex_acc']:8.4f} "
                f"{b['overall_acc']:8.4f} {b['count']:7d}"
            )
        return "\n".join(rows)


def _acc(records) -> float:
    records = list(records)
    if not records:
        return 0.0
    return sum(1 for r in records if r.correct) / len(records)


def aggregate(records) -> Report:
    """Micro-averaged accuracies overall, per category, and per size
    bucket; permutation-invariant over the input order."""
    records = list(records)
    if not records:
        raise ParameterError("aggregate needs at least one record")
    simple = [r for r in records if r.category == "simple"]
    complex_ = [r for r in records if r.category == "complex"]
    simple_acc = _acc(simple)
    complex_acc = _acc(complex_)
    present = [acc for part, acc in ((simple, simple_acc), (complex_, complex_acc)) if part]
    by_size: dict[str, dict] = {}
    for bucket in sorted({r.size_bucket for r in records}):
        in_bucket = [r for r in records if r.size_bucket == bucket]
        by_size[bucket] = {
            "simple_acc": _acc(r for r in in_bucket if r.category == "simple"),
            "complex_acc": _acc(r for r in in_bucket if r.category == "complex"),
            "overall_acc": _acc(in_bucket),
            "count": len(in_bucket),
        }
    return Report(
        simple_acc=simple_acc,
        complex_acc=complex_acc,
        overall_acc=_acc(records),
        macro_acc=sum(present) / len(present),
        by_size=by_size,
        counts={
            "all": len(records),
            "simple": len(simple),
            "complex": len(complex_),
            "correct": sum(1 for r in records if r.correct),
            "errors": sum(1 for r in records if r.error),
        },
    )


def write_report(report: Report, json_path, text_path=None) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    if text_path is not None:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(report.text_table() + "\n")
