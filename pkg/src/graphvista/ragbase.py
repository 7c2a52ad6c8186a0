"""Hierarchical tiered storage of per-node neighborhood descriptions.

Nodes are partitioned into three tiers by centrality: tier 1 (core, top
PageRank slice) keeps its full 2-hop neighborhood, tier 2 (backbone, next
slice by betweenness among the rest) keeps its 1-hop neighborhood, and
tier 3 (peripheral) keeps a 1-hop entry only when it touches no higher
tier node, whose entry would already cover it.  Small graphs bypass
storage entirely and are kept whole.

A built base is immutable; ``retrieve`` is read-only and safe for any
number of concurrent callers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NodeNotFoundError, ParameterError
from .graph import (
    CentralityScores,
    Graph,
    betweenness,
    canonical_edge,
    k_hop_neighborhood,
    node_key,
    pagerank,
    to_edge_list,
)


@dataclass(frozen=True)
class BaseConfig:
    """Tier sizing and storage policy knobs."""

    k1_percent: float = 10.0
    k2_percent: float = 20.0
    store_tier3: bool = True
    bypass_threshold: int = 15

    def __post_init__(self):
        if not (0 < self.k1_percent <= 100):
            raise ParameterError("k1_percent must lie in (0, 100]")
        if not (0 <= self.k2_percent <= 100):
            raise ParameterError("k2_percent must lie in [0, 100]")
        if self.k1_percent + self.k2_percent > 100:
            raise ParameterError("k1_percent + k2_percent must not exceed 100")
        if self.bypass_threshold < 0:
            raise ParameterError("bypass_threshold must be >= 0")

    def to_json(self) -> dict:
        return {
            "k1_percent": self.k1_percent,
            "k2_percent": self.k2_percent,
            "store_tier3": self.store_tier3,
            "bypass_threshold": self.bypass_threshold,
        }

    @staticmethod
    def from_json(obj: dict) -> "BaseConfig":
        return BaseConfig(**obj)


@dataclass(frozen=True)
class NeighborhoodEntry:
    """One stored neighborhood: the anchor, its radius-ball, induced edges,
    and the canonical text rendering fed to reasoners."""

    anchor: str
    tier: int
    radius: int
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    text: str


@dataclass(frozen=True)
class TieredBase:
    """The built storage base over one graph."""

    config: BaseConfig
    tiers: dict[str, int] = field(compare=False)
    pagerank: CentralityScores = field(compare=False)
    betweenness: CentralityScores = field(compare=False)
    entries: dict[str, NeighborhoodEntry] = field(compare=False)
    bypass: Graph | None
    node_count: int
    edge_count: int
    # node -> anchors whose stored entry contains it, retrieval order
    coverage: dict[str, tuple[str, ...]] = field(compare=False)

    def summary_text(self) -> str:
        return f"Graph summary: |V|={self.node_count}, |E|={self.edge_count}."

    def recoverable_edges(self) -> set[tuple[str, str]]:
        """Edges reconstructible from stored entries (or the bypass copy)."""
        if self.bypass is not None:
            return set(self.bypass.edges)
        out: set[tuple[str, str]] = set()
        for entry in self.entries.values():
            out.update(entry.edges)
        return out

    def coverage_ratio(self) -> float:
        if self.edge_count == 0:
            return 1.0
        return len(self.recoverable_edges()) / self.edge_count


def _ceil_percent(percent: float, n: int) -> int:
    # Fraction keeps e.g. 30% of 10 from drifting to 4 via float error
    exact = Fraction(str(percent)) * n / 100
    return int(-(-exact.numerator // exact.denominator))


def assign_tiers(
    g: Graph,
    cfg: BaseConfig,
    pagerank_scores: CentralityScores | None = None,
    betweenness_scores: CentralityScores | None = None,
) -> dict[str, int]:
    """Partition nodes into tiers 1..3.

    Tier 1 is exactly the top ceil(k1% * |V|) nodes by PageRank, tier 2
    the next ceil(k2% * |V|) among the remainder ranked by betweenness
    (capped at what remains), tier 3 the rest.  All ties break by
    ascending canonical node id.
    """
    if g.n < 1:
        raise ParameterError("cannot tier an empty graph")
    pr = pagerank_scores or pagerank(g)
    n1 = min(_ceil_percent(cfg.k1_percent, g.n), g.n)
    tier1 = set(pr.top(n1))
    tiers = {v: 3 for v in g.nodes}
    for v in tier1:
        tiers[v] = 1
    n2 = min(_ceil_percent(cfg.k2_percent, g.n), g.n - n1)
    if n2 > 0:
        bt = betweenness_scores or betweenness(g)
        rest = [v for v in g.nodes if v not in tier1]
        rest.sort(key=lambda v: (-bt.values[v], node_key(v)))
        for v in rest[:n2]:
            tiers[v] = 2
    return tiers


def serialize_entry(e: NeighborhoodEntry) -> str:
    """Canonical template, stable across runs."""
    others = sorted(e.nodes - {e.anchor}, key=node_key)
    edge_list = sorted(e.edges, key=lambda p: (node_key(p[0]), node_key(p[1])))
    neighbors = ", ".join(others) if others else "none"
    edges = ", ".join(f"({u},{v})" for u, v in edge_list) if edge_list else "none"
    return (
        f"Node {e.anchor} (tier {e.tier}): neighbors {neighbors}; "
        f"edges within radius {e.radius}: {edges}."
    )


_ENTRY_RE = re.compile(
    r"^Node (?P<anchor>\S+) \(tier (?P<tier>[123])\): neighbors (?P<nbrs>.*); "
    r"edges within radius (?P<radius>[12]): (?P<edges>.*)\.$"
)


def parse_entry(text: str) -> NeighborhoodEntry:
    """Inverse of serialize_entry (round-trips node and edge sets)."""
    m = _ENTRY_RE.match(text.strip())
    if not m:
        raise ParameterError(f"unparseable entry text: {text!r}")
    anchor = m.group("anchor")
    nbrs = m.group("nbrs")
    nodes = {anchor}
    if nbrs != "none":
        nodes.update(x.strip() for x in nbrs.split(","))
    edges: set[tuple[str, str]] = set()
    if m.group("edges") != "none":
        for pair in re.findall(r"\(([^,()]+),([^,()]+)\)", m.group("edges")):
            edges.add(canonical_edge(pair[0], pair[1]))
    return NeighborhoodEntry(
        anchor=anchor,
        tier=int(m.group("tier")),
        radius=int(m.group("radius")),
        nodes=frozenset(nodes),
        edges=frozenset(edges),
        text=text.strip(),
    )


def _make_entry(g: Graph, v: str, tier: int) -> NeighborhoodEntry:
    radius = 2 if tier == 1 else 1
    nodes = frozenset(k_hop_neighborhood(g, v, radius))
    edges = frozenset(
        (a, b) for a, b in g.edges if a in nodes and b in nodes
    )
    entry = NeighborhoodEntry(v, tier, radius, nodes, edges, "")
    text = serialize_entry(entry)
    return NeighborhoodEntry(v, tier, radius, nodes, edges, text)


def build_base(g: Graph, cfg: BaseConfig | None = None) -> TieredBase:
    """Build the tiered base for ``g``.

    Graphs at or below the bypass threshold are stored whole with no
    entries; tiers and centralities are still computed because subgraph
    pruning keys consume them either way.
    """
    cfg = cfg or BaseConfig()
    pr = pagerank(g)
    bt = betweenness(g)
    tiers = assign_tiers(g, cfg, pr, bt)
    bypass = g if g.n <= cfg.bypass_threshold else None
    entries: dict[str, NeighborhoodEntry] = {}
    if bypass is None:
        for v in g.nodes:
            tier = tiers[v]
            if tier == 3:
                if not cfg.store_tier3:
                    continue
                if any(tiers[w] != 3 for w in g.neighbors(v)):
                    continue  # conditional policy: a higher tier covers it
            entries[v] = _make_entry(g, v, tier)
    coverage: dict[str, list[str]] = {v: [] for v in g.nodes}
    for anchor in sorted(entries, key=node_key):
        for v in entries[anchor].nodes:
            coverage[v].append(anchor)
    return TieredBase(
        config=cfg,
        tiers=tiers,
        pagerank=pr,
        betweenness=bt,
        entries=entries,
        bypass=bypass,
        node_count=g.n,
        edge_count=g.m,
        coverage={v: tuple(a) for v, a in coverage.items()},
    )


def coverage_report(g: Graph, base: TieredBase) -> dict[str, str]:
    """Classify every node for the coverage trichotomy check.

    Returns node -> "anchor" | "covered" | "suppressed_adjacent" |
    "uncovered"; the last class means the trichotomy is violated.
    """
    report = {}
    for v in g.nodes:
        if v in base.entries:
            report[v] = "anchor"
        elif base.coverage.get(v):
            report[v] = "covered"
        elif base.tiers[v] == 3 and any(
            base.tiers[w] in (1, 2) for w in g.neighbors(v)
        ):
            report[v] = "suppressed_adjacent"
        else:
            report[v] = "uncovered"
    return report


@dataclass(frozen=True)
class RetrievedContext:
    """Retrieval output: ordered entries plus the assembled prompt text."""

    entries: tuple[NeighborhoodEntry, ...]
    summary: str | None
    assembled_text: str
    truncated: bool


def retrieve(base: TieredBase, task, budget: int) -> RetrievedContext:
    """Assemble task-relevant context from the base, within ``budget`` chars.

    Priority: entries anchored at task entities, then entries whose
    neighborhood contains an entity (nearest anchor first), and for
    entity-less tasks the base summary record.  Bypassed bases return the
    whole graph.  Deterministic; the assembled text never exceeds budget.
    """
    if budget < 0:
        raise ParameterError("budget must be >= 0")
    entities = [e for e in getattr(task, "entities", ()) if e]
    for e in entities:
        if e not in base.tiers:
            raise NodeNotFoundError(e)

    if base.bypass is not None:
        body = base.summary_text() + "\nEdges:\n" + to_edge_list(base.bypass)
        return _assemble((), base.summary_text(), body, budget)

    picked: list[NeighborhoodEntry] = []
    seen: set[str] = set()
    for e in entities:  # (1) anchor hits, in entity order
        if e in base.entries and e not in seen:
            picked.append(base.entries[e])
            seen.add(e)
    for e in entities:  # (2) covering entries, nearest anchor first
        covering = []
        for anchor in base.coverage.get(e, ()):
            if anchor in seen:
                continue
            entry = base.entries[anchor]
            dist = 1 if canonical_edge(anchor, e) in entry.edges else 2
            covering.append((dist, node_key(anchor), entry))
        covering.sort(key=lambda t: (t[0], t[1]))
        for _, _, entry in covering:
            picked.append(entry)
            seen.add(entry.anchor)

    summary = base.summary_text() if not entities else None
    parts = ([summary] if summary else []) + [p.text for p in picked]
    return _assemble(tuple(picked), summary, "\n".join(parts), budget)


def _assemble(entries, summary, body, budget) -> RetrievedContext:
    truncated = len(body) > budget
    return RetrievedContext(
        entries=entries,
        summary=summary,
        assembled_text=body[:budget],
        truncated=truncated,
    )


# -- persistence -------------------------------------------------------------


def base_to_json(base: TieredBase) -> dict:
    obj = {
        "config": base.config.to_json(),
        "node_count": base.node_count,
        "edge_count": base.edge_count,
        "tiers": dict(sorted(base.tiers.items(), key=lambda kv: node_key(kv[0]))),
        "pagerank": {
            v: base.pagerank.values[v]
            for v in sorted(base.pagerank.values, key=node_key)
        },
        "betweenness": {
            v: base.betweenness.values[v]
            for v in sorted(base.betweenness.values, key=node_key)
        },
        "entries": [
            base.entries[a].text for a in sorted(base.entries, key=node_key)
        ],
        "bypass": None,
    }
    if base.bypass is not None:
        from .graph import to_json_obj

        obj["bypass"] = to_json_obj(base.bypass)
    return obj


def base_from_json(obj: dict) -> TieredBase:
    from .graph import from_json_obj

    cfg = BaseConfig.from_json(obj["config"])
    entries = {}
    for text in obj["entries"]:
        entry = parse_entry(text)
        entries[entry.anchor] = entry
    bypass = from_json_obj(obj["bypass"]) if obj.get("bypass") else None
    tiers = {v: int(t) for v, t in obj["tiers"].items()}
    coverage: dict[str, list[str]] = {v: [] for v in tiers}
    for anchor in sorted(entries, key=node_key):
        for v in entries[anchor].nodes:
            coverage.setdefault(v, []).append(anchor)
    return TieredBase(
        config=cfg,
        tiers=tiers,
        pagerank=CentralityScores("pagerank", dict(obj["pagerank"])),
        betweenness=CentralityScores("betweenness", dict(obj["betweenness"])),
        entries=entries,
        bypass=bypass,
        node_count=obj["node_count"],
        edge_count=obj["edge_count"],
        coverage={v: tuple(a) for v, a in coverage.items()},
    )


def dump_base(base: TieredBase) -> str:
    return json.dumps(base_to_json(base), sort_keys=True)


def load_base(text: str) -> TieredBase:
    return base_from_json(json.loads(text))
