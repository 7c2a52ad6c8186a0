"""Benchmark and preference-dataset generation.

Generates synthetic graphs, task instances with oracle-validated gold
answers, deterministic gold reasoning traces (the chosen paths), and
error-injected rejected paths.  Everything is derived from one master
seed through per-item hashes, so regeneration is byte-identical no matter
how work is ordered.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    GraphVistaError,
    InapplicableCategoryError,
    ParameterError,
    TemplateMissingError,
)
from .graph import (
    Graph,
    canonical_edge,
    connected_components,
    from_json_obj,
    generate_ba,
    generate_er,
    k_hop_neighborhood,
    node_key,
    shortest_path,
    to_json_obj,
)
from .oracles import (
    GoldAnswer,
    TaskInstance,
    bipartition,
    count_triangles,
    critical_nodes,
    find_cliques,
    find_cycle,
    solve_task,
    third_order_neighbors,
    triangles_through,
)
from .ragbase import BaseConfig, TieredBase, build_base
from .render import HighlightAction, VisualState, replay_actions
from .router import (
    ExecutionPlan,
    ParsedTask,
    categorize,
    render_question,
    visual_plan_for,
)
from .reasoning import FinalAnswer, ReasoningStep
from .subgraph import ExtractionConfig, Subgraph, extract_for_task

ERROR_CATEGORIES = (
    "factual",
    "logical",
    "computation",
    "omitted_steps",
    "element_misrecognition",
    "visual_neglect",
    "text_visual_inconsistency",
    "visualization_misuse",
)


def derive_seed(*parts) -> int:
    """Stable sub-seed from arbitrary labels; parallel generation order
    cannot change any derived stream."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


# -- benchmark configuration ---------------------------------------------------


@dataclass(frozen=True)
class BenchConfig:
    """Benchmark scale knobs.

    ``tasks_per_graph`` keys are task types, optionally suffixed
    ``@arity`` to pick the entity arity for types that allow more than
    one.  ``er_avg_degree`` sets ER density as p = avg_degree / (n - 1).
    """

    node_sizes: tuple[int, ...]
    graphs_per_size: int
    tasks_per_graph: dict[str, int] = field(default_factory=dict)
    er_fraction: float = 0.5
    er_avg_degree: float = 8.0
    ba_m: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.node_sizes or any(n < 2 for n in self.node_sizes):
            raise ParameterError("node_sizes must be >= 2")
        if self.graphs_per_size < 1:
            raise ParameterError("graphs_per_size must be >= 1")
        if any(c < 0 for c in self.tasks_per_graph.values()):
            raise ParameterError("task counts must be >= 0")
        if not (0 <= self.er_fraction <= 1):
            raise ParameterError("er_fraction must lie in [0, 1]")

    def to_json(self) -> dict:
        return {
            "node_sizes": list(self.node_sizes),
            "graphs_per_size": self.graphs_per_size,
            "tasks_per_graph": dict(sorted(self.tasks_per_graph.items())),
            "er_fraction": self.er_fraction,
            "er_avg_degree": self.er_avg_degree,
            "ba_m": self.ba_m,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "BenchConfig":
        obj = dict(obj)
        obj["node_sizes"] = tuple(obj["node_sizes"])
        return BenchConfig(**obj)


def paper_split_config(seed: int = 0) -> BenchConfig:
    """The default large-scale configuration: 36 graphs over sizes 50 to
    2050 emitting exactly 8,136 simple and 5,724 complex items."""
    return BenchConfig(
        node_sizes=(50, 110, 220, 420, 512, 800, 1024, 1600, 2050),
        graphs_per_size=4,
        tasks_per_graph={
            # simple: 226 per graph
            "node_count": 1,
            "edge_count": 1,
            "connectivity_check": 1,
            "node_degree": 56,
            "edge_existence": 56,
            "highest_degree_neighbor": 56,
            "find_connected_edges": 55,
            # complex: 159 per graph
            "common_third_order_neighbors": 29,
            "connectivity_analysis@1": 29,
            "neighbor_connections": 29,
            "shortest_path": 29,
            "third_order_neighbors": 29,
            "triangle_counting@1": 6,
            "triangle_counting@0": 1,
            "clique_detection": 3,
            "bipartite_detection": 1,
            "critical_node_detection": 1,
            "cycle_detection": 1,
            "planarity_testing": 1,
        },
        seed=seed,
    )


@dataclass(frozen=True)
class BenchItem:
    id: str
    graph_ref: str
    size: int
    family: str
    question: str
    task: TaskInstance
    gold: GoldAnswer
    category: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "graph_ref": self.graph_ref,
            "size": self.size,
            "family": self.family,
            "question": self.question,
            "task": self.task.to_json(),
            "gold": self.gold.to_json(),
            "category": self.category,
        }

    @staticmethod
    def from_json(obj: dict) -> "BenchItem":
        return BenchItem(
            id=obj["id"],
            graph_ref=obj["graph_ref"],
            size=obj["size"],
            family=obj["family"],
            question=obj["question"],
            task=TaskInstance.from_json(obj["task"]),
            gold=GoldAnswer.from_json(obj["gold"]),
            category=obj["category"],
        )


def _task_key_parts(key: str) -> tuple[str, int | None]:
    if "@" in key:
        tt, arity = key.split("@", 1)
        return tt, int(arity)
    return key, None


_DEFAULT_ARITY = {"connectivity_analysis": 1, "triangle_counting": 0}


class _EntityPool:
    """Entity sampling without replacement until the pool runs dry, then a
    fresh reshuffled pool; deterministic per (graph, task) stream."""

    def __init__(self, nodes, rng, arity):
        self._nodes = list(nodes)
        self._rng = rng
        self._arity = arity
        self._pool: list = []
        self._seen_pairs: set = set()

    def draw(self):
        if self._arity == 1:
            if not self._pool:
                self._pool = list(self._nodes)
                self._rng.shuffle(self._pool)
            return (self._pool.pop(),)
        a, b = self._rng.sample(self._nodes, 2)
        pair = (a, b)
        if pair in self._seen_pairs and len(self._seen_pairs) < len(self._nodes) ** 2 // 4:
            return self.draw()
        self._seen_pairs.add(pair)
        return pair


def _unsatisfiable(gold: GoldAnswer, task_type: str) -> bool:
    if task_type == "shortest_path":
        return gold.value is None
    if task_type == "highest_degree_neighbor":
        return gold.value is None
    return False


def generate_benchmark(cfg: BenchConfig):
    """Generate graphs and benchmark items.

    Returns (items, graphs, manifest).  Every gold answer is produced and
    then revalidated by a second solver pass at emit time; unsatisfiable
    entity draws are resampled up to 50 times and then skipped with a
    manifest note.
    """
    items: list[BenchItem] = []
    graphs: dict[str, Graph] = {}
    skips: list[str] = []
    per_type: dict[str, int] = {}
    per_size: dict[str, int] = {}
    n_er = round(cfg.graphs_per_size * cfg.er_fraction)
    for size in cfg.node_sizes:
        for gi in range(cfg.graphs_per_size):
            family = "er" if gi < n_er else "ba"
            gseed = derive_seed(cfg.seed, "graph", size, gi, family)
            if family == "er":
                p = min(1.0, cfg.er_avg_degree / max(1, size - 1))
                g = generate_er(size, p, gseed)
            else:
                g = generate_ba(size, min(cfg.ba_m, size - 1), gseed)
            graph_ref = f"g-{size}-{gi}-{family}"
            graphs[graph_ref] = g
            for key in sorted(cfg.tasks_per_graph):
                count = cfg.tasks_per_graph[key]
                tt, arity = _task_key_parts(key)
                if arity is None:
                    arities = _DEFAULT_ARITY.get(tt)
                    from .oracles import TASK_ARITY

                    arity = arities if arities is not None else TASK_ARITY[tt][0]
                rng = random.Random(derive_seed(cfg.seed, "entities", graph_ref, key))
                pool = _EntityPool(g.nodes, rng, arity) if arity else None
                for j in range(count):
                    item = _emit_item(
                        g, graph_ref, size, family, tt, arity, key, j, rng, pool, skips
                    )
                    if item is None:
                        continue
                    items.append(item)
                    per_type[tt] = per_type.get(tt, 0) + 1
                    per_size[str(size)] = per_size.get(str(size), 0) + 1
    totals = {
        "all": len(items),
        "simple": sum(1 for it in items if it.category == "simple"),
        "complex": sum(1 for it in items if it.category == "complex"),
    }
    manifest = {
        "config": cfg.to_json(),
        "totals": totals,
        "per_type": dict(sorted(per_type.items())),
        "per_size": dict(sorted(per_size.items())),
        "skips": skips,
    }
    return items, graphs, manifest


def _emit_item(g, graph_ref, size, family, tt, arity, key, j, rng, pool, skips):
    params = {}
    if tt == "clique_detection":
        params["k"] = 3 + j % 3
    for attempt in range(50):
        entities = pool.draw() if arity else ()
        task = TaskInstance(tt, tuple(entities), params)
        gold = solve_task(g, task)
        if _unsatisfiable(gold, tt):
            continue
        recheck = solve_task(g, task)  # second pass guards determinism
        if recheck != gold:
            raise GraphVistaError(
                f"gold answer failed revalidation for {task} on {graph_ref}"
            )
        item_id = f"{graph_ref}-{key.replace('@', '_a')}-{j:03d}"
        return BenchItem(
            id=item_id,
            graph_ref=graph_ref,
            size=size,
            family=family,
            question=render_question(task),
            task=task,
            gold=gold,
            category=categorize(tt),
        )
    skips.append(f"{graph_ref}:{key}:{j}: unsatisfiable after 50 resamples")
    return None


# -- benchmark persistence -----------------------------------------------------


def write_benchmark(out_dir, items, graphs, manifest) -> None:
    out = Path(out_dir)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    for ref in sorted(graphs):
        path = out / "graphs" / f"{ref}.json"
        path.write_text(
            json.dumps(to_json_obj(graphs[ref]), sort_keys=True) + "\n",
            encoding="utf-8",
        )
    with open(out / "items.jsonl", "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_json(), sort_keys=True) + "\n")
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_benchmark(bench_dir):
    out = Path(bench_dir)
    items = []
    with open(out / "items.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                items.append(BenchItem.from_json(json.loads(line)))
    graphs = {}
    for path in sorted((out / "graphs").glob("*.json")):
        graphs[path.stem] = from_json_obj(json.loads(path.read_text(encoding="utf-8")))
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    return items, graphs, manifest


# -- gold traces ---------------------------------------------------------------


@dataclass(frozen=True)
class GoldTrace:
    """A deterministic template trace: plan, steps, rendered states, and
    the final answer (always the oracle answer on the traced graph)."""

    task: TaskInstance
    graph: Graph
    plan: ExecutionPlan
    steps: tuple[ReasoningStep, ...]
    states: tuple[VisualState, ...]
    final: GoldAnswer


def _fmt(seq) -> str:
    seq = list(seq)
    return ", ".join(seq) if seq else "none"


def _fmt_edges(pairs) -> str:
    pairs = list(pairs)
    return ", ".join(f"({u},{v})" for u, v in pairs) if pairs else "none"


def _sorted_nodes(seq):
    return tuple(sorted(seq, key=node_key))


def _sorted_edges(pairs):
    canon = {canonical_edge(u, v) for u, v in pairs}
    return tuple(sorted(canon, key=lambda e: (node_key(e[0]), node_key(e[1]))))


def _hn(payload, color=""):
    return HighlightAction("highlight_nodes", tuple(payload), color) if payload else None


def _he(payload, color=""):
    return HighlightAction("highlight_edges", tuple(payload), color) if payload else None


def _hp(payload):
    return HighlightAction("highlight_path", tuple(payload)) if payload else None


def _odd_cycle(g: Graph):
    """An odd cycle in a non-bipartite graph, via BFS layer parity."""
    from collections import deque

    iadj = g.int_adjacency()
    color = [-1] * g.n
    parent = [-1] * g.n
    depth = [0] * g.n
    for s in range(g.n):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in iadj[v]:
                if color[w] == -1:
                    color[w] = 1 - color[v]
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    queue.append(w)
                elif color[w] == color[v]:
                    # join v and w through their lowest common ancestor
                    a, b = v, w
                    left, right = [a], [b]
                    while depth[a] > depth[b]:
                        a = parent[a]
                        left.append(a)
                    while depth[b] > depth[a]:
                        b = parent[b]
                        right.append(b)
                    while a != b:
                        a = parent[a]
                        b = parent[b]
                        left.append(a)
                        right.append(b)
                    cycle = left + right[-2::-1]
                    return tuple(g.nodes[i] for i in cycle)
    return None


def _trace_rows(g: Graph, t: TaskInstance) -> list[tuple[str, HighlightAction | None]]:
    """(observation, action) rows per plan step for one task type."""
    tt = t.task_type
    e = t.entities
    if tt == "triangle_counting" and len(e) == 1:
        a = e[0]
        nbrs = _sorted_nodes(g.neighbors(a))
        inter = _sorted_edges(
            (x, y)
            for i, x in enumerate(nbrs)
            for y in nbrs[i + 1:]
            if g.has_edge(x, y)
        )
        tris = triangles_through(g, a)
        rows = [
            (f"In the image, the neighbors of node {a} are {_fmt(nbrs)}.", _hn(nbrs)),
            (
                f"Checking the image for edges between the highlighted "
                f"neighbors: {_fmt_edges(inter)}.",
                _he(inter),
            ),
        ]
        if tris:
            w = tris[0]
            tri_edges = _sorted_edges([(w[0], w[1]), (w[0], w[2]), (w[1], w[2])])
            rows.append(
                (
                    f"The image confirms triangle {w[0]}-{w[1]}-{w[2]} through "
                    f"node {a}.",
                    _he(tri_edges, "path"),
                )
            )
        else:
            rows.append(
                (
                    f"No edge in the image joins two neighbors of node {a}, so "
                    f"no triangle through it exists.",
                    None,
                )
            )
        return rows

    if tt == "shortest_path":
        a, b = e
        res = shortest_path(g, a, b)
        if res is None:
            raise ParameterError("no gold trace for a disconnected pair")
        p = res.path
        length = int(res.length) if not g.is_weighted else res.length
        frontier = _sorted_nodes(g.neighbors(a))
        mid = p[: max(2, (len(p) + 1) // 2)]
        chain = "-".join(p)
        return [
            (
                f"In the image, the start node {a} and the target node {b} "
                f"are marked.",
                _hn((a, b)),
            ),
            (
                f"The image shows {_fmt(frontier)} one hop from {a}; the "
                f"candidate path extends to {p[1]}.",
                _hp(p[:2]),
            ),
            (
                f"Extending the candidate path in the image: {'-'.join(mid)}.",
                _hp(mid),
            ),
            (
                f"The target {b} is reached in the image; the traced path is "
                f"{chain}.",
                _hp(p),
            ),
            (
                f"The path {chain} has length {length} and the image shows no "
                f"shorter route.",
                _hp(p),
            ),
        ]

    if tt == "find_connected_edges":
        a = e[0]
        nbrs = _sorted_nodes(g.neighbors(a))
        inc = _sorted_edges((a, w) for w in nbrs)
        return [
            (f"The target node {a} is identified in the image.", _hn((a,))),
            (
                f"In the image, the nodes directly connected to {a} are "
                f"{_fmt(nbrs)}; incident edges: {_fmt_edges(inc)}.",
                _hn(nbrs),
            ),
        ]

    if tt == "bipartite_detection":
        parts = bipartition(g)
        if parts is not None:
            side0, side1 = parts
            return [
                (
                    f"Layering the image two-colors the nodes; the first color "
                    f"class is {_fmt(side0)}.",
                    _hn(side0, "focus"),
                ),
                (
                    f"The second color class in the image is {_fmt(side1)}; no "
                    f"edge joins two nodes of the same class.",
                    _hn(side1, "frontier"),
                ),
                ("Every edge crosses the two classes, so the graph is bipartite.", None),
            ]
        cyc = _odd_cycle(g)
        cyc_edges = _sorted_edges(
            list(zip(cyc, cyc[1:])) + [(cyc[-1], cyc[0])]
        )
        return [
            (
                f"Layering the image from node {cyc[0]} assigns alternating "
                f"colors.",
                _hn((cyc[0],)),
            ),
            (
                f"In the image, the cycle {'-'.join(cyc)} has odd length "
                f"{len(cyc)}.",
                _he(cyc_edges),
            ),
            ("An odd cycle exists, so the graph is not bipartite.", None),
        ]

    if tt == "clique_detection":
        k = t.params["k"]
        exists, witness = find_cliques(g, k)
        if exists:
            cand = witness
        else:
            cand = tuple(
                sorted(g.nodes, key=lambda v: (-g.degree(v), node_key(v)))[:k]
            )
        present = _sorted_edges(
            (x, y)
            for i, x in enumerate(cand)
            for y in cand[i + 1:]
            if g.has_edge(x, y)
        )
        need = k * (k - 1) // 2
        rows = [
            (
                f"Candidate nodes for a clique of size {k} in the image: "
                f"{_fmt(cand)}.",
                _hn(cand),
            ),
            (
                f"Edges present among the candidates in the image: "
                f"{_fmt_edges(present)}.",
                _he(present),
            ),
        ]
        if exists:
            rows.append(
                (
                    f"All {need} pairwise edges are present, confirming a "
                    f"clique of size {k}.",
                    None,
                )
            )
        else:
            rows.append(
                (
                    f"Only {len(present)} of the {need} required edges appear "
                    f"in the image, and no node set completes a clique of "
                    f"size {k}.",
                    None,
                )
            )
        return rows

    if tt == "common_third_order_neighbors":
        a, b = e
        n3a = third_order_neighbors(g, a)
        n3b = third_order_neighbors(g, b)
        inter = _sorted_nodes(set(n3a) & set(n3b))
        return [
            (f"The query nodes {a} and {b} are marked in the image.", _hn((a, b))),
            (
                f"In the image, the nodes at distance exactly 3 from {a} are "
                f"{_fmt(n3a)}.",
                _hn(n3a, "focus"),
            ),
            (
                f"In the image, the nodes at distance exactly 3 from {b} are "
                f"{_fmt(n3b)}.",
                _hn(n3b, "frontier"),
            ),
            (f"The two sets share {_fmt(inter)}.", _hn(inter, "path")),
        ]

    if tt == "connectivity_analysis":
        comps = connected_components(g)
        c0 = _sorted_nodes(comps[0])
        rows = [
            (
                f"Flooding the image from node {c0[0]} covers {_fmt(c0)}.",
                _hn(c0),
            )
        ]
        if len(comps) > 1:
            c1 = _sorted_nodes(comps[1])
            rows.append(
                (
                    f"The image still contains unvisited regions; the next "
                    f"flood covers {_fmt(c1)}.",
                    _hn(c1, "frontier"),
                )
            )
        else:
            rows.append(("No unvisited region remains in the image.", None))
        sizes = [len(c) for c in comps]
        verdict = (
            f"The graph has {len(comps)} connected component(s) with sizes "
            f"{sizes}."
        )
        if e:
            size_q = next(len(c) for c in comps if e[0] in c)
            verdict += f" Node {e[0]} lies in a component of size {size_q}."
        rows.append((verdict, None))
        return rows

    if tt == "critical_node_detection":
        pts = critical_nodes(g)
        if pts:
            p0 = pts[0]
            rest = [v for v in g.nodes if v != p0]
            edges = [(x, y) for x, y in g.edges if p0 not in (x, y)]
            after = len(connected_components(Graph(rest, edges)))
            before = len(connected_components(g))
            return [
                (f"Junction candidates in the image: {_fmt(pts)}.", _hn(pts)),
                (
                    f"Removing node {p0} from the image splits the graph into "
                    f"{after} components (from {before}).",
                    _hn((p0,), "path"),
                ),
                (f"The articulation points are {_fmt(pts)}.", None),
            ]
        return [
            ("No junction node separates the image.", None),
            ("Every node's neighborhood stays connected without it.", None),
            ("There are no articulation points.", None),
        ]

    if tt == "cycle_detection":
        cyc = find_cycle(g)
        if cyc is not None:
            cyc_nodes = _sorted_nodes(cyc)
            cyc_edges = _sorted_edges(list(zip(cyc, cyc[1:])) + [(cyc[-1], cyc[0])])
            return [
                (
                    f"Traversing the image reveals the closed loop candidate "
                    f"{_fmt(cyc_nodes)}.",
                    _hn(cyc_nodes),
                ),
                (
                    f"In the image, the edges {_fmt_edges(cyc_edges)} close a "
                    f"loop.",
                    _he(cyc_edges),
                ),
                (f"The cycle {'-'.join(cyc)} exists, so the graph is cyclic.", None),
            ]
        root = g.nodes[0]
        return [
            (
                f"Traversal from node {root} visits the image without "
                f"revisiting any node.",
                _hn((root,)),
            ),
            ("No edge in the image closes back onto a visited node.", None),
            ("The graph is acyclic.", None),
        ]

    if tt == "neighbor_connections":
        a = e[0]
        nbrs = _sorted_nodes(g.neighbors(a))
        among = _sorted_edges(
            (x, y)
            for i, x in enumerate(nbrs)
            for y in nbrs[i + 1:]
            if g.has_edge(x, y)
        )
        return [
            (f"In the image, the neighbors of node {a} are {_fmt(nbrs)}.", _hn(nbrs)),
            (
                f"Edges joining two highlighted neighbors in the image: "
                f"{_fmt_edges(among)}.",
                _he(among),
            ),
            (f"There are {len(among)} such edges.", None),
        ]

    if tt == "planarity_testing":
        from .planarity import is_planar

        planar = is_planar(g)
        tops = tuple(
            sorted(g.nodes, key=lambda v: (-g.degree(v), node_key(v)))[: min(5, g.n)]
        )
        budget = max(0, 3 * g.n - 6)
        if g.m > budget:
            middle = (
                f"The graph has {g.n} nodes and {g.m} edges, exceeding the "
                f"planar budget of {budget}."
            )
        elif planar:
            middle = (
                f"The graph has {g.n} nodes and {g.m} edges, within the planar "
                f"budget of {budget}; the image admits a crossing-free "
                f"redrawing."
            )
        else:
            middle = (
                f"The graph has {g.n} nodes and {g.m} edges, within the planar "
                f"budget of {budget}, but the edges cannot be redrawn without "
                f"crossings (a K5- or K3,3-like pattern is present)."
            )
        return [
            (f"The densest nodes in the image are {_fmt(tops)}.", _hn(tops)),
            (middle, None),
            (
                f"The graph is {'planar' if planar else 'not planar'}.",
                None,
            ),
        ]

    if tt == "third_order_neighbors":
        a = e[0]
        ring12 = _sorted_nodes(k_hop_neighborhood(g, a, 2) - {a})
        n3 = third_order_neighbors(g, a)
        return [
            (f"The query node {a} is marked in the image.", _hn((a,))),
            (
                f"Everything within two hops of {a} in the image: "
                f"{_fmt(ring12)}.",
                _hn(ring12),
            ),
            (
                f"The ring at distance exactly 3 in the image is {_fmt(n3)}.",
                _hn(n3, "path"),
            ),
        ]

    if tt == "triangle_counting" and not e:
        count, triples = count_triangles(g, with_triples=True)
        if count:
            f3 = triples[0]
            tri_edges = _sorted_edges(
                [(f3[0], f3[1]), (f3[0], f3[2]), (f3[1], f3[2])]
            )
            return [
                (
                    f"A mutually connected triple {f3[0]}-{f3[1]}-{f3[2]} "
                    f"appears in the image.",
                    _hn(f3),
                ),
                ("Its three edges are all present in the image.", _he(tri_edges)),
                (
                    f"Counting every such triple in the image gives {count} "
                    f"triangle(s).",
                    None,
                ),
            ]
        return [
            (
                "Scanning the image finds no mutually connected triple.",
                _hn((g.nodes[0],)),
            ),
            ("No candidate triple has all three edges in the image.", None),
            ("The graph contains 0 triangles.", None),
        ]

    raise TemplateMissingError(f"no gold-trace template for {tt}@{len(e)}")


def make_gold_trace(g, t: TaskInstance, seed: int = 0) -> GoldTrace:
    """Deterministic oracle-backed trace for a (traceable) task.

    ``g`` may be a Graph or an already extracted Subgraph; rendering uses
    the subgraph's centers when given.  The final answer is always the
    oracle answer on the traced graph.  Covers the 11 complex types plus
    the neighbor-retrieval exemplar (find_connected_edges).
    """
    if isinstance(g, Subgraph):
        sub = g
        graph = g.graph
    else:
        graph = g
        sub = Subgraph(graph=graph, centers=tuple(t.entities))
    t.validate(graph)
    if t.task_type not in _TRACEABLE:
        raise TemplateMissingError(f"no gold-trace template for {t.task_type}")
    plan = visual_plan_for(
        t.task_type,
        len(t.entities),
        {
            "a": t.entities[0] if t.entities else None,
            "b": t.entities[1] if len(t.entities) > 1 else None,
            "k": t.params.get("k"),
        },
    )
    rows = _trace_rows(graph, t)
    if len(rows) != len(plan.steps):
        raise GraphVistaError(
            f"trace template for {t.task_type} emitted {len(rows)} rows for a "
            f"{len(plan.steps)}-step plan"
        )  # pragma: no cover
    actions = [action for _, action in rows if action is not None]
    states = replay_actions(sub, actions, seed)
    steps = []
    state_idx = 0
    for plan_step, (obs, action) in zip(plan.steps, rows):
        if action is not None:
            state_idx += 1
        steps.append(
            ReasoningStep(
                index=plan_step.index,
                instruction=plan_step.instruction,
                observation=obs,
                action=action,
                state_revision_after=states[state_idx].revision,
            )
        )
    return GoldTrace(
        task=t,
        graph=graph,
        plan=plan,
        steps=tuple(steps),
        states=tuple(states),
        final=solve_task(graph, t),
    )


_TRACEABLE = frozenset(
    {
        "bipartite_detection",
        "clique_detection",
        "common_third_order_neighbors",
        "connectivity_analysis",
        "critical_node_detection",
        "cycle_detection",
        "find_connected_edges",
        "neighbor_connections",
        "planarity_testing",
        "shortest_path",
        "third_order_neighbors",
        "triangle_counting",
    }
)


def validate_trace(trace: GoldTrace) -> list[str]:
    """Check every per-step claim of a trace against the oracles.

    Returns a list of violations (empty means the trace is sound).
    """
    g = trace.graph
    t = trace.task
    tt = t.task_type
    e = t.entities
    bad: list[str] = []

    def payload(i):
        action = trace.steps[i].action
        return tuple(action.payload) if action else ()

    if trace.final != solve_task(g, t):
        bad.append("final answer differs from the oracle answer")
    if tt == "triangle_counting" and len(e) == 1:
        if set(payload(0)) != set(g.neighbors(e[0])):
            bad.append("step 1 highlight is not the neighbor set")
        for u, v in payload(1):
            if not g.has_edge(u, v):
                bad.append(f"step 2 claims missing edge ({u},{v})")
        if trace.final.value:
            tri = set()
            for u, v in payload(2):
                tri.update((u, v))
            if len(tri) != 3 or e[0] not in tri:
                bad.append("confirmed triangle does not pass through the query node")
    elif tt == "shortest_path":
        res = shortest_path(g, e[0], e[1])
        want = res.path if res else None
        final_path = trace.final.value
        if final_path is None or res is None:
            bad.append("gold path trace on a disconnected pair")
        else:
            for a, b in zip(final_path, final_path[1:]):
                if not g.has_edge(a, b):
                    bad.append(f"final path uses missing edge ({a},{b})")
            from .brute import path_length

            if abs(path_length(g, tuple(final_path)) - res.length) > 1e-9:
                bad.append("final path is not optimal")
            for step in trace.steps:
                if step.action and step.action.kind == "highlight_path":
                    seq = step.action.payload
                    if tuple(seq) != tuple(final_path[: len(seq)]):
                        bad.append("path step is not a prefix of the final path")
    elif tt == "find_connected_edges":
        if set(payload(1)) != set(g.neighbors(e[0])):
            bad.append("highlighted nodes differ from the true neighbor set")
    elif tt == "bipartite_detection":
        if trace.final.value:
            side0, side1 = set(payload(0)), set(payload(1))
            if side0 | side1 != set(g.nodes) or side0 & side1:
                bad.append("claimed classes do not partition the nodes")
            for u, v in g.edges:
                if (u in side0) == (v in side0):
                    bad.append(f"edge ({u},{v}) stays inside one class")
                    break
        else:
            cyc_edges = payload(1)
            if len(cyc_edges) % 2 == 0 or any(
                not g.has_edge(u, v) for u, v in cyc_edges
            ):
                bad.append("claimed odd cycle is not an odd cycle")
    elif tt == "clique_detection":
        k = t.params["k"]
        cand = payload(0)
        if len(cand) != min(k, g.n):
            bad.append("candidate set size differs from k")
        if trace.final.value:
            for i, x in enumerate(cand):
                for y in cand[i + 1:]:
                    if not g.has_edge(x, y):
                        bad.append("claimed clique misses an edge")
    elif tt == "common_third_order_neighbors":
        if set(payload(1)) != set(third_order_neighbors(g, e[0])):
            bad.append("distance-3 set of the first entity is wrong")
        if set(payload(2)) != set(third_order_neighbors(g, e[1])):
            bad.append("distance-3 set of the second entity is wrong")
        if set(payload(3)) != set(trace.final.value):
            bad.append("claimed intersection differs from the answer")
    elif tt == "connectivity_analysis":
        comps = connected_components(g)
        if set(payload(0)) != comps[0]:
            bad.append("first flood is not the largest component")
        if len(comps) > 1 and set(payload(1)) != comps[1]:
            bad.append("second flood is not the next component")
    elif tt == "critical_node_detection":
        if set(payload(0)) != set(critical_nodes(g)):
            bad.append("candidate junctions differ from the articulation points")
    elif tt == "cycle_detection":
        if trace.final.value:
            for u, v in payload(1):
                if not g.has_edge(u, v):
                    bad.append("claimed cycle uses a missing edge")
    elif tt == "neighbor_connections":
        if set(payload(0)) != set(g.neighbors(e[0])):
            bad.append("highlighted neighbors are wrong")
        if len(payload(1)) != trace.final.value:
            bad.append("marked edges disagree with the final count")
    elif tt == "planarity_testing":
        tops = tuple(
            sorted(g.nodes, key=lambda v: (-g.degree(v), node_key(v)))[: min(5, g.n)]
        )
        if payload(0) != tops:
            bad.append("highlighted nodes are not the top-degree nodes")
    elif tt == "third_order_neighbors":
        ring12 = k_hop_neighborhood(g, e[0], 2) - {e[0]}
        if set(payload(1)) != ring12:
            bad.append("two-hop set is wrong")
        if set(payload(2)) != set(trace.final.value):
            bad.append("distance-3 ring differs from the answer")
    elif tt == "triangle_counting":
        if trace.final.value and isinstance(trace.final.value, int):
            tri = payload(0)
            if len(tri) == 3:
                a, b, c = tri
                if not (g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(a, c)):
                    bad.append("claimed triple is not a triangle")
    return bad


# -- rejected paths ------------------------------------------------------------


@dataclass(frozen=True)
class RejectedTrace:
    """An error-injected counterpart of a gold trace."""

    steps: tuple[ReasoningStep, ...]
    final: GoldAnswer
    category: str
    edit: dict  # {"step_index": 1-based | None, "field": ...}


def _replace_token(text: str, old: str, new: str) -> str:
    return re.sub(
        rf"(?<![A-Za-z0-9_]){re.escape(old)}(?![A-Za-z0-9_])", new, text
    )


def _corrupt_answer(gold: GoldAnswer, g: Graph, rng: random.Random) -> GoldAnswer:
    """A same-kind answer guaranteed to differ from the gold value."""
    kind, value = gold.kind, gold.value
    if kind == "boolean":
        return GoldAnswer(kind, not value)
    if kind == "integer":
        delta = rng.choice((1, -1))
        wrong = value + delta
        if wrong < 0:
            wrong = value + 1
        return GoldAnswer(kind, wrong)
    if kind == "real":
        return GoldAnswer(kind, float(value) + 1.0)
    if kind == "node":
        pool = [v for v in g.nodes if v != value]
        return GoldAnswer(kind, rng.choice(pool) if pool else None)
    if kind == "node_set":
        current = set(value or ())
        outside = sorted(set(g.nodes) - current, key=node_key)
        if outside:
            wrong = _sorted_nodes(current | {rng.choice(outside)})
        else:
            dropped = rng.choice(sorted(current, key=node_key))
            wrong = _sorted_nodes(current - {dropped})
        return GoldAnswer(kind, wrong)
    if kind == "node_sequence":
        if value is None:
            return GoldAnswer(kind, (g.nodes[0],))
        seq = list(value)
        if len(seq) > 2:
            seq = seq[:-2] + [seq[-1]]  # skip the penultimate hop
        else:
            seq = [seq[0]]
        return GoldAnswer(kind, tuple(seq))
    if kind == "edge_set":
        current = set(value or ())
        missing = [p for p in g.edges if p not in current]
        if missing:
            wrong = _sorted_edges(current | {rng.choice(missing)})
        elif current:
            dropped = rng.choice(sorted(current))
            wrong = _sorted_edges(current - {dropped})
        else:
            return GoldAnswer(kind, ((g.nodes[0], g.nodes[0]),))
        return GoldAnswer(kind, wrong)
    if kind == "analysis_record":
        record = dict(value)
        record["component_count"] = record["component_count"] + 1
        return GoldAnswer(kind, record)
    raise InapplicableCategoryError(f"cannot corrupt kind {kind}")


def _renumber(steps) -> tuple[ReasoningStep, ...]:
    return tuple(
        ReasoningStep(
            index=i + 1,
            instruction=s.instruction,
            observation=s.observation,
            action=s.action,
            state_revision_after=s.state_revision_after,
            action_error=s.action_error,
        )
        for i, s in enumerate(steps)
    )


def _with_obs(step: ReasoningStep, obs: str) -> ReasoningStep:
    return ReasoningStep(step.index, step.instruction, obs, step.action,
                         step.state_revision_after, step.action_error)


def _with_action(step: ReasoningStep, action) -> ReasoningStep:
    return ReasoningStep(step.index, step.instruction, step.observation,
                         action, step.state_revision_after, step.action_error)


def inject_error(y_w: GoldTrace, category: str, seed: int) -> RejectedTrace:
    """One seeded perturbation of a gold trace per the category's recipe.

    Raises InapplicableCategoryError when the trace shape cannot host the
    category (the caller then picks another).  The output always differs
    from the gold trace; factual and computation errors also flip the
    final answer away from gold.
    """
    if category not in ERROR_CATEGORIES:
        raise ParameterError(f"unknown error category {category!r}")
    rng = random.Random(derive_seed(seed, category))
    g = y_w.graph
    steps = list(y_w.steps)
    final = y_w.final

    if category == "factual":
        candidates = [
            i for i, s in enumerate(steps)
            if s.action is not None and s.action.kind == "highlight_nodes"
            and len(s.action.payload) >= 1
            and any(_token_in(s.observation, v) for v in s.action.payload)
            and len(set(g.nodes) - set(s.action.payload)) >= 1
        ]
        if not candidates:
            raise InapplicableCategoryError("no stated node set to falsify")
        i = rng.choice(candidates)
        s = steps[i]
        stated = [v for v in s.action.payload if _token_in(s.observation, v)]
        victim = rng.choice(stated)
        outside = sorted(set(g.nodes) - set(s.action.payload), key=node_key)
        impostor = rng.choice(outside)
        new_payload = tuple(
            impostor if v == victim else v for v in s.action.payload
        )
        steps[i] = ReasoningStep(
            s.index, s.instruction,
            _replace_token(s.observation, victim, impostor),
            HighlightAction("highlight_nodes", new_payload, s.action.color),
            s.state_revision_after,
        )
        final = _corrupt_answer(y_w.final, g, rng)
        return RejectedTrace(tuple(steps), final, category,
                             {"step_index": i + 1, "field": "observation+action"})

    if category == "logical":
        if y_w.task.task_type == "shortest_path":
            from .graph import yen_k_shortest

            a, b = y_w.task.entities
            alts = yen_k_shortest(g, a, b, 3)
            gold_len = alts[0].length if alts else None
            longer = [p for p in alts[1:] if p.length > gold_len]
            if not longer:
                raise InapplicableCategoryError("no longer alternative path")
            wrong = longer[0]
            chain = "-".join(wrong.path)
            i = len(steps) - 1
            s = steps[i]
            steps[i] = ReasoningStep(
                s.index, s.instruction,
                f"Comparing routes by how familiar they look rather than by "
                f"hop count, the path {chain} is selected as shortest.",
                HighlightAction("highlight_path", wrong.path),
                s.state_revision_after,
            )
            length = int(wrong.length) if not g.is_weighted else wrong.length
            final = GoldAnswer("node_sequence", wrong.path, {"length": length})
            return RejectedTrace(tuple(steps), final, category,
                                 {"step_index": i + 1, "field": "observation+action+final"})
        if y_w.final.kind == "boolean":
            i = len(steps) - 1
            s = steps[i]
            steps[i] = _with_obs(
                s, s.observation + " Inverting the criterion, the opposite "
                "verdict follows."
            )
            final = GoldAnswer("boolean", not y_w.final.value)
            return RejectedTrace(tuple(steps), final, category,
                                 {"step_index": i + 1, "field": "observation+final"})
        if y_w.final.kind in ("integer", "real"):
            i = len(steps) - 1
            s = steps[i]
            steps[i] = _with_obs(
                s, s.observation + " Counting each element from both "
                "endpoints doubles the tally."
            )
            wrong = y_w.final.value * 2 + (1 if y_w.final.value == 0 else 0)
            final = GoldAnswer(y_w.final.kind, wrong)
            return RejectedTrace(tuple(steps), final, category,
                                 {"step_index": i + 1, "field": "observation+final"})
        raise InapplicableCategoryError("no logical recipe for this answer kind")

    if category == "computation":
        if y_w.final.kind == "integer":
            final = _corrupt_answer(y_w.final, g, rng)  # off by one
        elif y_w.final.kind == "real":
            final = GoldAnswer("real", float(y_w.final.value) + 1.0)
        elif y_w.final.kind == "analysis_record":
            final = _corrupt_answer(y_w.final, g, rng)
        else:
            raise InapplicableCategoryError("final answer is not numeric")
        i = len(steps) - 1
        s = steps[i]
        old_num = str(y_w.final.value if y_w.final.kind != "analysis_record"
                      else y_w.final.value["component_count"])
        new_num = str(final.value if final.kind != "analysis_record"
                      else final.value["component_count"])
        obs = _replace_token(s.observation, old_num, new_num)
        if obs == s.observation:
            obs = s.observation + f" The count comes to {new_num}."
        steps[i] = _with_obs(s, obs)
        return RejectedTrace(tuple(steps), final, category,
                             {"step_index": i + 1, "field": "observation+final"})

    if category == "omitted_steps":
        if len(steps) < 3:
            raise InapplicableCategoryError("trace too short to omit a middle step")
        i = rng.randrange(1, len(steps) - 1)
        del steps[i]
        return RejectedTrace(_renumber(steps), final, category,
                             {"step_index": i + 1, "field": "steps"})

    if category == "element_misrecognition":
        candidates = []
        for i, s in enumerate(steps):
            present = [v for v in g.nodes if _token_in(s.observation, v)]
            if present and len(g.nodes) > 1:
                candidates.append((i, present))
        if not candidates:
            raise InapplicableCategoryError("no node id appears in any observation")
        i, present = candidates[rng.randrange(len(candidates))]
        victim = rng.choice(present)
        others = [v for v in g.nodes if v != victim]
        impostor = rng.choice(others)
        steps[i] = _with_obs(
            steps[i], _replace_token(steps[i].observation, victim, impostor)
        )
        return RejectedTrace(tuple(steps), final, category,
                             {"step_index": i + 1, "field": "observation"})

    if category == "visual_neglect":
        changed = False
        pattern = re.compile(r"\s*(?:in|from) the image\b|\bthe image\b", re.IGNORECASE)
        for i, s in enumerate(steps):
            obs = pattern.sub(
                lambda m: "" if m.group(0).strip().lower().startswith(("in", "from"))
                else "the description",
                s.observation,
            )
            if obs != s.observation:
                steps[i] = _with_obs(s, obs)
                changed = True
        if not changed:
            raise InapplicableCategoryError("no visual reference to strip")
        return RejectedTrace(tuple(steps), final, category,
                             {"step_index": None, "field": "observation"})

    if category == "text_visual_inconsistency":
        candidates = [
            i for i, s in enumerate(steps)
            if s.action is not None and len(s.action.payload) >= 2
            and any(
                _token_in(s.observation, _elem_token(s.action.kind, p))
                for p in s.action.payload
            )
        ]
        if not candidates:
            raise InapplicableCategoryError("no highlighted set is restated in text")
        i = rng.choice(candidates)
        s = steps[i]
        stated = [
            p for p in s.action.payload
            if _token_in(s.observation, _elem_token(s.action.kind, p))
        ]
        dropped = stated[rng.randrange(len(stated))]
        token = _elem_token(s.action.kind, dropped)
        obs = re.sub(
            rf"(?<![A-Za-z0-9_]){re.escape(token)}(?![A-Za-z0-9_]),?\s*", "",
            s.observation, count=1,
        ).rstrip()
        steps[i] = _with_obs(s, obs)  # action untouched: text now disagrees
        return RejectedTrace(tuple(steps), final, category,
                             {"step_index": i + 1, "field": "observation"})

    # visualization_misuse
    candidates = [i for i, s in enumerate(steps) if s.action is not None]
    if not candidates:
        raise InapplicableCategoryError("trace has no visualization calls")
    i = rng.choice(candidates)
    s = steps[i]
    action = s.action
    retarget = (
        action.kind == "highlight_nodes"
        and rng.random() < 0.5
        and len(set(g.nodes) - set(action.payload)) >= 1
    )
    if retarget:
        outside = sorted(set(g.nodes) - set(action.payload), key=node_key)
        impostor = rng.choice(outside)
        victim_idx = rng.randrange(len(action.payload))
        new_payload = tuple(
            impostor if j == victim_idx else v
            for j, v in enumerate(action.payload)
        )
        steps[i] = _with_action(
            s, HighlightAction("highlight_nodes", new_payload, action.color)
        )
        field_name = "action-retargeted"
    else:
        steps[i] = _with_action(s, None)
        field_name = "action-dropped"
    return RejectedTrace(tuple(steps), final, category,
                         {"step_index": i + 1, "field": field_name})


def _token_in(text: str, token: str) -> bool:
    return re.search(
        rf"(?<![A-Za-z0-9_]){re.escape(token)}(?![A-Za-z0-9_])", text
    ) is not None


def _elem_token(kind: str, payload_item) -> str:
    if kind == "highlight_edges":
        return payload_item[0]  # edges are restated via their endpoints
    return payload_item


def traces_differ(y_w: GoldTrace, y_l: RejectedTrace) -> bool:
    if len(y_w.steps) != len(y_l.steps):
        return True
    for a, b in zip(y_w.steps, y_l.steps):
        if a.observation != b.observation or a.action != b.action:
            return True
    return y_w.final != y_l.final


# -- preference pairs ----------------------------------------------------------


@dataclass(frozen=True)
class PreferencePair:
    pair_id: str
    item_id: str
    question: str
    plan: tuple[str, ...]
    subgraph: dict            # JSON graph container of the traced subgraph
    svg_refs: tuple[str, ...]  # content hashes of the chosen path's states
    chosen_steps: tuple[ReasoningStep, ...]
    chosen_final: GoldAnswer
    rejected_steps: tuple[ReasoningStep, ...]
    rejected_final: GoldAnswer
    error_category: str
    edit: dict
    seed: int

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "item_id": self.item_id,
            "question": self.question,
            "plan": list(self.plan),
            "subgraph": self.subgraph,
            "svg_refs": list(self.svg_refs),
            "chosen": {
                "steps": [s.to_json() for s in self.chosen_steps],
                "final": self.chosen_final.to_json(),
            },
            "rejected": {
                "steps": [s.to_json() for s in self.rejected_steps],
                "final": self.rejected_final.to_json(),
            },
            "error_category": self.error_category,
            "edit": self.edit,
            "seed": self.seed,
        }


def category_deck(n: int, mix, seed: int) -> list[str]:
    """A stratified category assignment whose histogram matches the mix
    up to rounding, shuffled deterministically."""
    if mix == "uniform" or mix is None:
        weights = {c: 1.0 for c in ERROR_CATEGORIES}
    else:
        weights = {c: float(mix.get(c, 0.0)) for c in ERROR_CATEGORIES}
    total = sum(weights.values())
    if total <= 0:
        raise ParameterError("category mix must have positive total weight")
    # largest-remainder apportionment
    quotas = {c: n * weights[c] / total for c in ERROR_CATEGORIES}
    counts = {c: int(quotas[c]) for c in ERROR_CATEGORIES}
    remainders = sorted(
        ERROR_CATEGORIES, key=lambda c: (-(quotas[c] - counts[c]), c)
    )
    short = n - sum(counts.values())
    for c in remainders[:short]:
        counts[c] += 1
    deck: list[str] = []
    for c in ERROR_CATEGORIES:
        deck.extend([c] * counts[c])
    random.Random(derive_seed(seed, "deck", n)).shuffle(deck)
    return deck


def build_preference_dataset(
    items,
    graphs: dict[str, Graph],
    mix="uniform",
    seed: int = 0,
    base_cfg: BaseConfig | None = None,
    ext_cfg: ExtractionConfig | None = None,
):
    """Preference pairs for every complex benchmark item.

    Each pair's gold is taken on the extracted subgraph the model would
    see (for local tasks this coincides with the full-graph answer); the
    chosen trace equals that gold and is step-wise oracle-validated, the
    rejected trace is an error-injected copy.  Returns
    (pairs, svg_store, histogram) with svg_store mapping content hash to
    SVG bytes.
    """
    base_cfg = base_cfg or BaseConfig()
    ext_cfg = ext_cfg or ExtractionConfig()
    complex_items = [it for it in items if it.category == "complex"]
    deck = category_deck(len(complex_items), mix, seed)
    bases: dict[str, TieredBase] = {}
    pairs: list[PreferencePair] = []
    svg_store: dict[str, bytes] = {}
    histogram: dict[str, int] = {c: 0 for c in ERROR_CATEGORIES}
    from .render import render_svg

    for idx, item in enumerate(complex_items):
        g = graphs[item.graph_ref]
        base = bases.get(item.graph_ref)
        if base is None:
            base = build_base(g, base_cfg)
            bases[item.graph_ref] = base
        sub = extract_for_task(g, base, item.task, ext_cfg)
        pair_seed = derive_seed(seed, "pair", item.id)
        trace = make_gold_trace(sub, item.task, seed=pair_seed % (2 ** 31))
        violations = validate_trace(trace)
        if violations:
            raise GraphVistaError(
                f"gold trace for {item.id} is unsound: {violations}"
            )  # pragma: no cover
        start = deck[idx]
        order = ERROR_CATEGORIES[ERROR_CATEGORIES.index(start):] + \
            ERROR_CATEGORIES[: ERROR_CATEGORIES.index(start)]
        rejected = None
        for category in order:
            try:
                rejected = inject_error(trace, category, pair_seed)
                break
            except InapplicableCategoryError:
                continue
        if rejected is None:
            raise GraphVistaError(
                f"no applicable error category for {item.id}"
            )  # pragma: no cover
        if not traces_differ(trace, rejected):
            raise GraphVistaError(
                f"rejected trace equals chosen for {item.id}"
            )  # pragma: no cover
        refs = []
        for state in trace.states:
            svg = render_svg(state)
            ref = hashlib.sha256(svg).hexdigest()
            svg_store[ref] = svg
            refs.append(ref)
        histogram[rejected.category] += 1
        pairs.append(
            PreferencePair(
                pair_id=f"pair-{item.id}",
                item_id=item.id,
                question=item.question,
                plan=tuple(s.instruction for s in trace.plan.steps),
                subgraph=to_json_obj(sub.graph),
                svg_refs=tuple(refs),
                chosen_steps=trace.steps,
                chosen_final=trace.final,
                rejected_steps=rejected.steps,
                rejected_final=rejected.final,
                error_category=rejected.category,
                edit=rejected.edit,
                seed=pair_seed,
            )
        )
    return pairs, svg_store, histogram


def write_preference_dataset(out_dir, pairs, svg_store, histogram) -> None:
    out = Path(out_dir)
    (out / "svg").mkdir(parents=True, exist_ok=True)
    with open(out / "pairs.jsonl", "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_json(), sort_keys=True) + "\n")
    for ref in sorted(svg_store):
        (out / "svg" / f"{ref}.svg").write_bytes(svg_store[ref])
    (out / "manifest.json").write_text(
        json.dumps(
            {"pairs": len(pairs), "category_histogram": dict(sorted(histogram.items()))},
            sort_keys=True, indent=2,
        ) + "\n",
        encoding="utf-8",
    )


# -- scripted oracle reasoners --------------------------------------------------


class SingleTaskOracleReasoner:
    """A scripted reasoner bound to one task over one graph.

    Plays a faithful reasoning agent: step replies come from the gold
    trace over the extracted subgraph, text answers and summaries carry
    the oracle answer.  Zero network activity.
    """

    def __init__(self, g: Graph, parsed: ParsedTask, base: TieredBase | None = None,
                 base_cfg: BaseConfig | None = None,
                 ext_cfg: ExtractionConfig | None = None, seed: int = 0):
        from .client import render_action

        self._g = g
        self._parsed = parsed
        self._base = base if base is not None else build_base(g, base_cfg)
        self._ext_cfg = ext_cfg or ExtractionConfig()
        self._seed = seed
        self._trace: GoldTrace | None = None
        self._render_action = render_action
        self.calls = 0

    def _gold_trace(self) -> GoldTrace:
        if self._trace is None:
            sub = extract_for_task(self._g, self._base, self._parsed, self._ext_cfg)
            self._trace = make_gold_trace(sub, self._parsed.to_instance(),
                                          seed=self._seed)
        return self._trace

    def _answer_line(self, gold: GoldAnswer) -> str:
        return "ANSWER: " + json.dumps(gold.to_json(), sort_keys=True)

    def complete(self, req):
        from .client import ReasonerReply, parse_step_reply

        self.calls += 1
        mode = req.tags.get("mode", "")
        if mode == "vgt_step":
            step = self._gold_trace().steps[req.tags["step_index"] - 1]
            text = step.observation
            if step.action is not None:
                text += "\n" + self._render_action(step.action)
        elif mode == "summarize":
            text = "Aggregating the trace.\n" + self._answer_line(
                self._gold_trace().final
            )
        elif mode == "text_answer":
            gold = solve_task(self._g, self._parsed.to_instance())
            text = "Read from the retrieved entries.\n" + self._answer_line(gold)
        elif mode == "parse_fallback":
            t = self._parsed
            text = json.dumps(
                {"task_type": t.task_type, "entities": list(t.entity_list()),
                 "params": dict(t.params)},
                sort_keys=True,
            )
        else:
            raise ParameterError(f"unexpected request mode {mode!r}")
        obs_action = parse_step_reply(text)
        return ReasonerReply(
            text=text,
            structured=obs_action if obs_action[1] is not None else None,
            usage={"scripted": True},
        )


class OracleScriptedReasoner:
    """Benchmark-wide faithful scripted reasoner, keyed by item id tags.

    Binds a SingleTaskOracleReasoner per item on first use; bases are
    cached per graph so repeated items stay cheap.
    """

    def __init__(self, items, graphs: dict[str, Graph],
                 base_cfg: BaseConfig | None = None,
                 ext_cfg: ExtractionConfig | None = None, seed: int = 0):
        self._items = {it.id: it for it in items}
        self._graphs = graphs
        self._base_cfg = base_cfg or BaseConfig()
        self._ext_cfg = ext_cfg or ExtractionConfig()
        self._seed = seed
        self._bases: dict[str, TieredBase] = {}
        self._bound: dict[str, SingleTaskOracleReasoner] = {}
        self.calls = 0

    def _for_item(self, item_id: str) -> SingleTaskOracleReasoner:
        bound = self._bound.get(item_id)
        if bound is None:
            item = self._items[item_id]
            g = self._graphs[item.graph_ref]
            base = self._bases.get(item.graph_ref)
            if base is None:
                base = build_base(g, self._base_cfg)
                self._bases[item.graph_ref] = base
            parsed = ParsedTask(
                question=item.question,
                task_type=item.task.task_type,
                entities=(
                    item.task.entities[0] if item.task.entities else None,
                    item.task.entities[1] if len(item.task.entities) > 1 else None,
                ),
                category=item.category,
                parse_source="template",
                params=dict(item.task.params),
            )
            bound = SingleTaskOracleReasoner(
                g, parsed, base=base, ext_cfg=self._ext_cfg,
                seed=derive_seed(self._seed, "layout", item_id) % (2 ** 31),
            )
            self._bound[item_id] = bound
        return bound

    def complete(self, req):
        self.calls += 1
        item_id = req.tags.get("item_id")
        if item_id is None or item_id not in self._items:
            raise ParameterError(f"scripted reasoner needs a known item_id tag, "
                                 f"got {item_id!r}")
        return self._for_item(item_id).complete(req)
