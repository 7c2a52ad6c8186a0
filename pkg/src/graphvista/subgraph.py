"""Task-relevant subgraph extraction and pruning.

Ego-centric extraction takes the k-hop ball around one entity;
multi-centric extraction takes the union of the K shortest paths between
two entities expanded by one hop.  When the result exceeds the node cap,
nodes are removed in a fixed priority order built from hop distance,
storage tier, and PageRank.  Tier is encoded as an importance rank
(tier 3 lowest) so that ascending sort removes peripheral nodes first;
removing core nodes first would defeat the point of the tiers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import DisconnectedError, InfeasibleCapError, ParameterError
from .graph import (
    Graph,
    connected_components,
    induced_subgraph,
    node_key,
    yen_k_shortest,
)
from .ragbase import TieredBase


@dataclass(frozen=True)
class ExtractionConfig:
    k: int = 2          # hop radius for ego extraction
    n_max: int = 25     # node cap after pruning
    yen_k: int = 3      # shortest paths for multi-centric extraction

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.n_max < 2:
            raise ParameterError("n_max must be >= 2")
        if self.yen_k < 1:
            raise ParameterError("yen_k must be >= 1")


@dataclass(frozen=True)
class Subgraph:
    """An extracted subgraph plus its provenance."""

    graph: Graph
    centers: tuple[str, ...]
    path_cover: frozenset[str] = frozenset()  # protected nodes (multi only)
    prune_log: tuple[str, ...] = ()           # removed nodes, removal order
    distances: dict[str, int] = field(default_factory=dict, compare=False)


def _tier_importance(tier: int) -> int:
    # tier 3 -> 1, tier 2 -> 2, tier 1 -> 3: ascending sort prunes tier 3 first
    return 4 - tier


def _hop_distances(g: Graph, center: str, limit: int | None = None) -> dict[str, int]:
    dist = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if limit is not None and dist[v] >= limit:
            continue
        for w in g.neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def extract_ego(g: Graph, base: TieredBase, v: str, cfg: ExtractionConfig | None = None,
                radius: int | None = None) -> Subgraph:
    """Induced k-hop subgraph around v, pruned to the cap; v never pruned.

    ``radius`` overrides cfg.k (radius 0 degenerates to the single node).
    """
    cfg = cfg or ExtractionConfig()
    g.require(v)
    k = cfg.k if radius is None else radius
    if k < 0:
        raise ParameterError("radius must be >= 0")
    dist = _hop_distances(g, v, k)
    sub = Subgraph(
        graph=induced_subgraph(g, dist.keys()),
        centers=(v,),
        distances=dist,
    )
    return prune_ego(sub, v, base, cfg.n_max)


def extract_multi(g: Graph, base: TieredBase, s: str, t: str,
                  cfg: ExtractionConfig | None = None) -> Subgraph:
    """Union of the yen_k shortest s-t paths, expanded one hop, then pruned.

    Path nodes are protected; a cap below their count is infeasible.
    Disconnected endpoints raise DisconnectedError carrying the component
    labels of both.
    """
    cfg = cfg or ExtractionConfig()
    g.require(s)
    g.require(t)
    if s == t:
        raise ParameterError("multi-centric extraction needs distinct entities")
    paths = yen_k_shortest(g, s, t, cfg.yen_k)
    if not paths:
        comps = connected_components(g)
        label = {v: i for i, c in enumerate(comps) for v in c}
        raise DisconnectedError(
            s, t, label[s], label[t], len(comps[label[s]]), len(comps[label[t]])
        )
    cover: set[str] = set()
    for p in paths:
        cover.update(p.path)
    expanded = set(cover)
    for v in cover:
        expanded.update(g.neighbors(v))
    sub = Subgraph(
        graph=induced_subgraph(g, expanded),
        centers=(s, t),
        path_cover=frozenset(cover),
    )
    return prune_multi(sub, base, cfg.n_max)


def _prune(sub: Subgraph, protected: set[str], base: TieredBase, n_max: int,
           sort_key) -> Subgraph:
    nodes = sub.graph.nodes
    if len(nodes) <= n_max:
        return Subgraph(
            graph=sub.graph,
            centers=sub.centers,
            path_cover=sub.path_cover,
            prune_log=(),
            distances=sub.distances,
        )
    candidates = [v for v in nodes if v not in protected]
    candidates.sort(key=sort_key)
    n_prune = len(nodes) - n_max
    if n_prune > len(candidates):
        raise InfeasibleCapError(
            f"cap {n_max} infeasible: {len(protected)} protected nodes"
        )
    removed = tuple(candidates[:n_prune])
    kept = set(nodes) - set(removed)
    return Subgraph(
        graph=induced_subgraph(sub.graph, kept),
        centers=sub.centers,
        path_cover=sub.path_cover,
        prune_log=removed,
        distances={v: d for v, d in sub.distances.items() if v in kept},
    )


def prune_ego(sub: Subgraph, v: str, base: TieredBase, n_max: int) -> Subgraph:
    """Remove the overflow by key (-distance, tier importance, centrality,
    id): farthest first, then least important tier, then lowest PageRank."""
    if v not in sub.graph:
        raise ParameterError(f"center {v!r} not in subgraph")
    dist = sub.distances or _hop_distances(sub.graph, v)
    pr = base.pagerank.values

    def key(x: str):
        return (
            -dist.get(x, 0),
            _tier_importance(base.tiers[x]),
            pr[x],
            node_key(x),
        )

    return _prune(sub, {v}, base, n_max, key)


def prune_multi(sub: Subgraph, base: TieredBase, n_max: int) -> Subgraph:
    """Remove the overflow by key (tier importance, centrality, id); every
    path-cover node is protected."""
    if len(sub.path_cover) > n_max:
        raise InfeasibleCapError(
            f"cap {n_max} below the {len(sub.path_cover)} protected path nodes"
        )
    pr = base.pagerank.values

    def key(x: str):
        return (_tier_importance(base.tiers[x]), pr[x], node_key(x))

    return _prune(sub, set(sub.path_cover), base, n_max, key)


def extract_for_task(g: Graph, base: TieredBase, task,
                     cfg: ExtractionConfig | None = None) -> Subgraph:
    """Route a parsed task to the right extraction strategy.

    Two entities go multi-centric, one goes ego-centric; entity-less
    tasks (global questions that still run visually) center on the top
    PageRank node.
    """
    ents = tuple(e for e in getattr(task, "entities", ()) if e)
    if len(ents) >= 2:
        return extract_multi(g, base, ents[0], ents[1], cfg)
    if len(ents) == 1:
        return extract_ego(g, base, ents[0], cfg)
    center = base.pagerank.top(1)[0]
    return extract_ego(g, base, center, cfg)
