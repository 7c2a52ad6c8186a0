"""Immutable undirected graphs plus the generators, path and centrality
algorithms the rest of the pipeline consumes.

Node identifiers are opaque strings ordered by ``node_key`` (length, then
lexicographic), so purely numeric labels sort numerically.  Every function
here is a pure function of its inputs and an explicit seed; repeated calls
produce identical results, which the golden tests rely on.
"""

from __future__ import annotations

import heapq
import json
import random
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    ConvergenceError,
    NodeNotFoundError,
    ParameterError,
)


def node_key(v: str) -> tuple[int, str]:
    """Canonical total order for node ids: by length, then lexicographic.

    Numeric labels ("0", "7", "12") therefore sort numerically while
    alphabetic labels sort alphabetically.
    """
    return (len(v), v)


def canonical_edge(u: str, v: str) -> tuple[str, str]:
    """Return the edge endpoints ordered by ``node_key``."""
    return (u, v) if node_key(u) <= node_key(v) else (v, u)


@dataclass(frozen=True)
class PathResult:
    """A path and its length (hop count unweighted, weight sum weighted)."""

    path: tuple[str, ...]
    length: float


@dataclass(frozen=True)
class CentralityScores:
    """Per-node centrality values for one measure."""

    kind: str  # "pagerank" | "betweenness"
    values: dict[str, float] = field(compare=False)

    def top(self, count: int) -> list[str]:
        """Node ids ranked by (score descending, id ascending)."""
        ranked = sorted(self.values, key=lambda v: (-self.values[v], node_key(v)))
        return ranked[:count]


class Graph:
    """Undirected graph, immutable after construction.

    Safe for concurrent reads from any number of workers.  Nodes are held
    in canonical order; adjacency is stored both as id tuples (public) and
    as integer indices (used by the hot loops in centrality and pathing).
    """

    __slots__ = ("_nodes", "_index", "_adj", "_iadj", "_weights", "_edge_count")

    def __init__(self, nodes, edges, weights=None):
        """Build a graph from node ids and unordered edge pairs.

        Args:
            nodes: iterable of node id strings (deduplicated, reordered).
            edges: iterable of (u, v) pairs.
            weights: optional map from edge pair to positive weight; pairs
                may be given in either orientation.  Absent means
                unweighted and every edge counts as weight 1.
        """
        ordered = sorted(set(nodes), key=node_key)
        index = {v: i for i, v in enumerate(ordered)}
        adj_sets: list[set[int]] = [set() for _ in ordered]
        for u, v in edges:
            if u == v:
                raise ParameterError(f"self-loop at {u!r}")
            if u not in index:
                raise NodeNotFoundError(u)
            if v not in index:
                raise NodeNotFoundError(v)
            adj_sets[index[u]].add(index[v])
            adj_sets[index[v]].add(index[u])
        wmap: dict[tuple[int, int], float] | None = None
        if weights:
            wmap = {}
            for (u, v), w in weights.items():
                if u not in index or v not in index:
                    raise NodeNotFoundError(u if u not in index else v)
                iu, iv = index[u], index[v]
                if iv not in adj_sets[iu]:
                    raise ParameterError(f"weight given for missing edge ({u!r}, {v!r})")
                if not (w > 0):
                    raise ParameterError(f"non-positive weight {w} on ({u!r}, {v!r})")
                wmap[(min(iu, iv), max(iu, iv))] = float(w)
            missing = sum(len(s) for s in adj_sets) // 2 - len(wmap)
            if missing:
                raise ParameterError(f"{missing} edges missing weights")
        self._nodes: tuple[str, ...] = tuple(ordered)
        self._index = index
        self._iadj: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in adj_sets
        )
        self._adj: dict[str, tuple[str, ...]] = {
            v: tuple(ordered[j] for j in self._iadj[i]) for i, v in enumerate(ordered)
        }
        self._weights = wmap
        self._edge_count = sum(len(s) for s in adj_sets) // 2

    # -- basic accessors ------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def n(self) -> int:
        return len(self._nodes)

    @property
    def m(self) -> int:
        return self._edge_count

    @property
    def is_weighted(self) -> bool:
        return self._weights is not None

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """All edges in canonical (u, v) order, sorted."""
        out = []
        for i, u in enumerate(self._nodes):
            for j in self._iadj[i]:
                if j > i:
                    out.append((u, self._nodes[j]))
        return tuple(out)

    def __contains__(self, v) -> bool:
        return v in self._index

    def require(self, v: str) -> None:
        if v not in self._index:
            raise NodeNotFoundError(v)

    def neighbors(self, v: str) -> tuple[str, ...]:
        self.require(v)
        return self._adj[v]

    def degree(self, v: str) -> int:
        self.require(v)
        return len(self._adj[v])

    def weighted_degree(self, v: str) -> float:
        self.require(v)
        return sum(self.weight(v, u) for u in self._adj[v])

    def has_edge(self, u: str, v: str) -> bool:
        self.require(u)
        self.require(v)
        return self._index[v] in set(self._iadj[self._index[u]])

    def weight(self, u: str, v: str) -> float:
        """Weight of edge (u, v); 1.0 on unweighted graphs."""
        if not self.has_edge(u, v):
            raise ParameterError(f"no edge ({u!r}, {v!r})")
        if self._weights is None:
            return 1.0
        iu, iv = self._index[u], self._index[v]
        return self._weights[(min(iu, iv), max(iu, iv))]

    def edge_weights(self) -> dict[tuple[str, str], float]:
        """Canonical edge -> weight map (all 1.0 when unweighted)."""
        return {e: self.weight(*e) for e in self.edges}

    def index_of(self, v: str) -> int:
        self.require(v)
        return self._index[v]

    def int_adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Integer adjacency in canonical node order (read-only view)."""
        return self._iadj

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._iadj == other._iadj
            and self._weights == other._weights
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, weighted={self.is_weighted})"


# -- generators ----------------------------------------------------------


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p) with node ids "0".."n-1".

    Identical (n, p, seed) always yields a bit-identical graph.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise ParameterError("p must lie in [0, 1]")
    rng = random.Random(seed)
    nodes = [str(i) for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((nodes[i], nodes[j]))
    return Graph(nodes, edges)


def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Barabási–Albert preferential attachment with node ids "0".."n-1".

    Seeded with a star on the first m+1 nodes (hub "0"), then each new
    node attaches to m distinct existing nodes chosen proportionally to
    degree.  Total edge count is exactly m * (n - m).
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not (1 <= m < n):
        raise ParameterError("m must satisfy 1 <= m < n")
    rng = random.Random(seed)
    nodes = [str(i) for i in range(n)]
    edges = [(nodes[0], nodes[i]) for i in range(1, m + 1)]
    # one entry per endpoint per edge; sampling from it is degree-proportional
    repeated: list[int] = []
    for i in range(1, m + 1):
        repeated.extend((0, i))
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[rng.randrange(len(repeated))])
        for t in sorted(targets):
            edges.append((nodes[t], nodes[new]))
            repeated.extend((t, new))
    return Graph(nodes, edges)


# -- centrality ----------------------------------------------------------


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-9,
             max_iter: int = 200) -> CentralityScores:
    """Power-iteration PageRank with uniform teleport.

    Isolated nodes contribute their mass uniformly (standard dangling-node
    handling).  Raises ConvergenceError carrying the residual when the L1
    change fails to drop below ``tol`` within ``max_iter`` sweeps.
    """
    if not (0.0 < damping < 1.0):
        raise ParameterError("damping must lie strictly in (0, 1)")
    n = g.n
    if n == 0:
        raise ParameterError("pagerank of an empty graph is undefined")
    iadj = g.int_adjacency()
    degs = [len(a) for a in iadj]
    rank = [1.0 / n] * n
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        dangling = sum(rank[i] for i in range(n) if degs[i] == 0)
        spread = base + damping * dangling / n
        nxt = [spread] * n
        for i in range(n):
            if degs[i]:
                share = damping * rank[i] / degs[i]
                for j in iadj[i]:
                    nxt[j] += share
        residual = sum(abs(nxt[i] - rank[i]) for i in range(n))
        rank = nxt
        if residual < tol:
            return CentralityScores(
                "pagerank", {g.nodes[i]: rank[i] for i in range(n)}
            )
    raise ConvergenceError(
        f"pagerank did not converge in {max_iter} iterations", residual
    )


def betweenness(g: Graph) -> CentralityScores:
    """Exact Brandes betweenness over unweighted shortest paths.

    Endpoints are excluded; for this undirected implementation each pair
    is counted once.
    """
    n = g.n
    iadj = g.int_adjacency()
    score = [0.0] * n
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        sigma[s] = 1.0
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v]
            sv = sigma[v]
            for w in iadj[v]:
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                score[w] += delta[w]
    # each unordered pair was accumulated from both endpoints
    values = {g.nodes[i]: score[i] / 2.0 for i in range(n)}
    return CentralityScores("betweenness", values)


# -- paths ---------------------------------------------------------------


def _distances_from(g: Graph, src: int,
                    banned_nodes: frozenset[int] = frozenset(),
                    banned_edges: frozenset[tuple[int, int]] = frozenset()):
    """Distance map from src honoring removals; None where unreachable."""
    n = g.n
    iadj = g.int_adjacency()
    dist: list[float | None] = [None] * n
    if src in banned_nodes:
        return dist
    if not g.is_weighted:
        dist[src] = 0.0
        queue = deque([src])
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for w in iadj[v]:
                if w in banned_nodes or dist[w] is not None:
                    continue
                if (v, w) in banned_edges or (w, v) in banned_edges:
                    continue
                dist[w] = dv + 1.0
                queue.append(w)
        return dist
    nodes = g.nodes
    done = [False] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        dv, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for w in iadj[v]:
            if w in banned_nodes or done[w]:
                continue
            if (v, w) in banned_edges or (w, v) in banned_edges:
                continue
            cand = dv + g.weight(nodes[v], nodes[w])
            if dist[w] is None or cand < dist[w]:
                dist[w] = cand
                heapq.heappush(heap, (cand, w))
    return dist


def _lex_shortest(g: Graph, u: int, v: int,
                  banned_nodes: frozenset[int] = frozenset(),
                  banned_edges: frozenset[tuple[int, int]] = frozenset()):
    """Lexicographically smallest shortest path u -> v, or None.

    Works forward greedily: dist-to-target certifies which neighbors stay
    on some optimal path, and integer node indices follow canonical id
    order, so picking the smallest valid index at each hop yields the
    lexicographically smallest optimal node sequence.
    """
    if u in banned_nodes or v in banned_nodes:
        return None
    if u == v:
        return PathResult((g.nodes[u],), 0.0)
    dist_v = _distances_from(g, v, banned_nodes, banned_edges)
    if dist_v[u] is None:
        return None
    total = dist_v[u]
    nodes = g.nodes
    iadj = g.int_adjacency()
    path = [u]
    cur = u
    walked = 0.0
    eps = 1e-12
    while cur != v:
        nxt = None
        for w in iadj[cur]:
            if w in banned_nodes or dist_v[w] is None:
                continue
            if (cur, w) in banned_edges or (w, cur) in banned_edges:
                continue
            step = g.weight(nodes[cur], nodes[w]) if g.is_weighted else 1.0
            if abs((walked + step + dist_v[w]) - total) <= eps * max(1.0, total):
                nxt = w
                walked += step
                break
        if nxt is None:  # defensive; unreachable given dist certificate
            return None
        path.append(nxt)
        cur = nxt
    return PathResult(tuple(nodes[i] for i in path), total)


def shortest_path(g: Graph, u: str, v: str) -> PathResult | None:
    """Shortest path by BFS (unweighted) or Dijkstra (weighted).

    Ties are broken toward the lexicographically smallest node sequence
    under the canonical id order.  Returns None when u and v are
    disconnected.
    """
    g.require(u)
    g.require(v)
    res = _lex_shortest(g, g.index_of(u), g.index_of(v))
    if res is None:
        return None
    length = res.length
    if not g.is_weighted:
        length = float(int(round(length)))
    return PathResult(res.path, length)


def yen_k_shortest(g: Graph, u: str, v: str, K: int) -> list[PathResult]:
    """Up to K loopless shortest paths in non-decreasing length order.

    Deterministic: candidates of equal length are ordered by the
    lexicographic order of their node sequences.  Returns [] when the pair
    is disconnected.
    """
    g.require(u)
    g.require(v)
    if u == v:
        raise ParameterError("yen_k_shortest requires distinct endpoints")
    if K < 1:
        raise ParameterError("K must be >= 1")
    src, dst = g.index_of(u), g.index_of(v)
    first = _lex_shortest(g, src, dst)
    if first is None:
        return []
    nodes = g.nodes
    idx = {x: i for i, x in enumerate(nodes)}

    def keyed(p: PathResult):
        return (p.length, tuple(node_key(x) for x in p.path))

    accepted = [first]
    candidates: list[PathResult] = []
    seen = {first.path}
    while len(accepted) < K:
        prev = accepted[-1].path
        for i in range(len(prev) - 1):
            spur = idx[prev[i]]
            root = prev[: i + 1]
            root_len = 0.0
            for a, b in zip(root, root[1:]):
                root_len += g.weight(a, b) if g.is_weighted else 1.0
            banned_edges = set()
            for p in accepted:
                if p.path[: i + 1] == root and len(p.path) > i + 1:
                    banned_edges.add((idx[p.path[i]], idx[p.path[i + 1]]))
            banned_nodes = frozenset(idx[x] for x in root[:-1])
            spur_path = _lex_shortest(
                g, spur, dst, banned_nodes, frozenset(banned_edges)
            )
            if spur_path is None:
                continue
            total = root[:-1] + spur_path.path
            if total in seen:
                continue
            seen.add(total)
            candidates.append(PathResult(total, root_len + spur_path.length))
        if not candidates:
            break
        candidates.sort(key=keyed)
        accepted.append(candidates.pop(0))
    if not g.is_weighted:
        accepted = [PathResult(p.path, float(int(round(p.length)))) for p in accepted]
    return accepted[:K]


def k_hop_neighborhood(g: Graph, v: str, k: int) -> set[str]:
    """All nodes within hop distance k of v, including v itself."""
    g.require(v)
    if k < 0:
        raise ParameterError("k must be >= 0")
    iadj = g.int_adjacency()
    start = g.index_of(v)
    seen = {start}
    frontier = [start]
    for _ in range(k):
        nxt = []
        for x in frontier:
            for w in iadj[x]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return {g.nodes[i] for i in seen}


def induced_subgraph(g: Graph, keep) -> Graph:
    """Subgraph on ``keep`` retaining exactly the edges inside it."""
    keep = set(keep)
    for v in keep:
        g.require(v)
    edges = [(a, b) for a, b in g.edges if a in keep and b in keep]
    weights = None
    if g.is_weighted:
        weights = {e: g.weight(*e) for e in edges}
    return Graph(keep, edges, weights)


# -- connectivity helpers used by several modules ------------------------


def connected_components(g: Graph) -> list[set[str]]:
    """Components ordered by (size descending, smallest member id)."""
    iadj = g.int_adjacency()
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = {s}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for w in iadj[x]:
                if not seen[w]:
                    seen[w] = True
                    comp.add(w)
                    queue.append(w)
        comps.append({g.nodes[i] for i in comp})
    comps.sort(key=lambda c: (-len(c), node_key(min(c, key=node_key))))
    return comps


# -- serialization --------------------------------------------------------


def to_edge_list(g: Graph) -> str:
    """Text form, one ``u v [w]`` line per edge; isolated nodes as bare ids."""
    lines = []
    covered = set()
    for u, v in g.edges:
        covered.add(u)
        covered.add(v)
        if g.is_weighted:
            lines.append(f"{u} {v} {g.weight(u, v):g}")
        else:
            lines.append(f"{u} {v}")
    for v in g.nodes:
        if v not in covered:
            lines.append(v)
    return "\n".join(lines) + ("\n" if lines else "")


def from_edge_list(text: str) -> Graph:
    """Parse the ``u v [w]`` edge-list format produced by to_edge_list."""
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    weights: dict[tuple[str, str], float] = {}
    weighted = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            nodes.append(parts[0])
            continue
        u, v = parts[0], parts[1]
        nodes.extend((u, v))
        edges.append((u, v))
        if len(parts) >= 3:
            weighted = True
            weights[canonical_edge(u, v)] = float(parts[2])
    return Graph(nodes, edges, weights if weighted else None)


def to_json_obj(g: Graph) -> dict:
    """JSON container {nodes, edges} with optional per-edge weights."""
    edges = []
    for u, v in g.edges:
        if g.is_weighted:
            edges.append([u, v, g.weight(u, v)])
        else:
            edges.append([u, v])
    return {"nodes": list(g.nodes), "edges": edges}


def from_json_obj(obj: dict) -> Graph:
    nodes = obj["nodes"]
    edges = []
    weights = {}
    weighted = False
    for row in obj["edges"]:
        u, v = row[0], row[1]
        edges.append((u, v))
        if len(row) >= 3 and row[2] is not None:
            weighted = True
            weights[canonical_edge(u, v)] = float(row[2])
    return Graph(nodes, edges, weights if weighted else None)


def dump_graph(g: Graph) -> str:
    return json.dumps(to_json_obj(g), sort_keys=True)


def load_graph(text: str) -> Graph:
    """Load either the JSON container or the plain edge-list format."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_json_obj(json.loads(text))
    return from_edge_list(text)
