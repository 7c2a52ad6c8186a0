"""Deterministic graph visualization: layout, SVG emission, highlights.

Layout is seeded force-directed placement with a fixed iteration count,
snapped to an 8 px grid, with a collision pass that guarantees a minimum
pairwise distance.  Rendering is pure string assembly over canonically
ordered elements, so identical states always produce identical bytes;
the golden-file and replay tests depend on that.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from .errors import ActionError, LayoutError, ParameterError
from .graph import canonical_edge, node_key
from .subgraph import Subgraph

CANVAS = 1024
MARGIN = 12
NODE_RADIUS = 14
MIN_NODE_DISTANCE = 24
GRID = 8
MAX_LAYOUT_NODES = 200
FR_ITERATIONS = 60

# four-color highlight palette
PALETTE = {
    "default": "#c6d4e2",
    "focus": "#f2a93b",
    "frontier": "#63b56c",
    "path": "#d1495b",
}

ACTION_KINDS = ("highlight_nodes", "highlight_edges", "highlight_path", "clear")
DEFAULT_COLOR = {
    "highlight_nodes": "focus",
    "highlight_edges": "frontier",
    "highlight_path": "path",
}


@dataclass(frozen=True)
class Layout:
    positions: dict[str, tuple[int, int]] = field(compare=False)
    canvas: tuple[int, int] = (CANVAS, CANVAS)
    seed: int = 0


@dataclass(frozen=True)
class HighlightAction:
    kind: str
    payload: tuple = ()           # node ids, edge pairs, or a path sequence
    color: str = ""               # palette tag; defaulted per kind

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ParameterError(f"unknown action kind {self.kind!r}")
        if self.kind != "clear" and not self.payload:
            raise ParameterError("action payload must be non-empty")
        if not self.color and self.kind != "clear":
            object.__setattr__(self, "color", DEFAULT_COLOR[self.kind])
        if self.color and self.color not in PALETTE:
            raise ParameterError(f"unknown color tag {self.color!r}")


@dataclass(frozen=True)
class VisualState:
    """One rendered reasoning state: subgraph + layout + highlights."""

    subgraph: Subgraph
    layout: Layout
    node_colors: dict[str, str] = field(default_factory=dict, compare=False)
    edge_colors: dict[tuple[str, str], str] = field(default_factory=dict, compare=False)
    path: tuple[str, ...] | None = None
    revision: int = 0


def layout(sub: Subgraph, seed: int = 0) -> Layout:
    """Seeded force-directed placement, grid-snapped and collision-free.

    Deterministic: same (subgraph, seed) gives identical positions.
    """
    nodes = sub.graph.nodes
    n = len(nodes)
    if n > MAX_LAYOUT_NODES:
        raise LayoutError(f"layout supports at most {MAX_LAYOUT_NODES} nodes, got {n}")
    if n == 0:
        return Layout({}, (CANVAS, CANVAS), seed)
    span = CANVAS - 2 * (MARGIN + NODE_RADIUS)
    center = CANVAS / 2.0
    if n == 1:
        return Layout({nodes[0]: (CANVAS // 2, CANVAS // 2)}, (CANVAS, CANVAS), seed)

    rng = random.Random(seed)
    pos = {v: [center + rng.uniform(-span / 4, span / 4),
               center + rng.uniform(-span / 4, span / 4)] for v in nodes}
    adjacency = {v: sub.graph.neighbors(v) for v in nodes}
    ideal = max(MIN_NODE_DISTANCE * 2.0, span / math.sqrt(n) * 0.9)
    temperature = span / 4.0
    cooling = temperature / (FR_ITERATIONS + 1)
    for _ in range(FR_ITERATIONS):
        disp = {v: [0.0, 0.0] for v in nodes}
        for i, v in enumerate(nodes):
            pv = pos[v]
            for w in nodes[i + 1:]:
                pw = pos[w]
                dx = pv[0] - pw[0]
                dy = pv[1] - pw[1]
                d2 = dx * dx + dy * dy
                if d2 < 1e-9:
                    # deterministic nudge for coincident points
                    dx, dy, d2 = 0.11, 0.07, 0.0170
                d = math.sqrt(d2)
                force = ideal * ideal / d
                disp[v][0] += dx / d * force
                disp[v][1] += dy / d * force
                disp[w][0] -= dx / d * force
                disp[w][1] -= dy / d * force
        for v in nodes:
            pv = pos[v]
            for w in adjacency[v]:
                pw = pos[w]
                dx = pv[0] - pw[0]
                dy = pv[1] - pw[1]
                d = math.sqrt(dx * dx + dy * dy) or 1e-6
                force = d * d / ideal
                disp[v][0] -= dx / d * force
                disp[v][1] -= dy / d * force
        for v in nodes:
            dx, dy = disp[v]
            d = math.sqrt(dx * dx + dy * dy)
            if d > 1e-9:
                step = min(d, temperature)
                pos[v][0] += dx / d * step
                pos[v][1] += dy / d * step
            lo = MARGIN + NODE_RADIUS
            hi = CANVAS - MARGIN - NODE_RADIUS
            pos[v][0] = min(hi, max(lo, pos[v][0]))
            pos[v][1] = min(hi, max(lo, pos[v][1]))
        temperature -= cooling

    # normalize the spread to use the canvas, then snap with collision fix
    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    w = max(xs) - min(xs) or 1.0
    h = max(ys) - min(ys) or 1.0
    scale = min(span / w, span / h)
    lo = MARGIN + NODE_RADIUS
    placed: dict[str, tuple[int, int]] = {}
    for v in nodes:  # canonical order keeps collision resolution stable
        x = lo + (pos[v][0] - min(xs)) * scale
        y = lo + (pos[v][1] - min(ys)) * scale
        placed[v] = _snap_free(x, y, placed.values())
    return Layout(placed, (CANVAS, CANVAS), seed)


def _snap_free(x: float, y: float, taken) -> tuple[int, int]:
    """Snap to the grid; spiral outward until the spot clears every placed
    node by the minimum distance."""
    lo = MARGIN + NODE_RADIUS
    hi = CANVAS - MARGIN - NODE_RADIUS

    def ok(px, py):
        if not (lo <= px <= hi and lo <= py <= hi):
            return False
        for tx, ty in taken:
            if (px - tx) ** 2 + (py - ty) ** 2 < MIN_NODE_DISTANCE ** 2:
                return False
        return True

    gx = round(x / GRID) * GRID
    gy = round(y / GRID) * GRID
    if ok(gx, gy):
        return (gx, gy)
    for ring in range(1, 2 * CANVAS // GRID):
        for dx in range(-ring, ring + 1):
            for dy in range(-ring, ring + 1):
                if max(abs(dx), abs(dy)) != ring:
                    continue
                px, py = gx + dx * GRID, gy + dy * GRID
                if ok(px, py):
                    return (px, py)
    raise LayoutError("no free grid cell found")  # pragma: no cover


def initial_state(sub: Subgraph, seed: int = 0) -> VisualState:
    return VisualState(subgraph=sub, layout=layout(sub, seed))


def apply_action(state: VisualState, action: HighlightAction) -> VisualState:
    """New state with the action's highlights merged in and revision + 1.

    Unknown elements raise ActionError and leave the input untouched;
    callers treating that as "no action" simply keep the old state.
    """
    g = state.subgraph.graph
    if action.kind == "clear":
        return replace(
            state, node_colors={}, edge_colors={}, path=None,
            revision=state.revision + 1,
        )
    node_colors = dict(state.node_colors)
    edge_colors = dict(state.edge_colors)
    path = state.path
    if action.kind == "highlight_nodes":
        for v in action.payload:
            if v not in g:
                raise ActionError(f"unknown node {v!r}")
        for v in action.payload:
            node_colors[v] = action.color
    elif action.kind == "highlight_edges":
        canon = []
        for pair in action.payload:
            u, v = pair
            if u not in g or v not in g or not g.has_edge(u, v):
                raise ActionError(f"unknown edge ({u!r}, {v!r})")
            canon.append(canonical_edge(u, v))
        for e in canon:
            edge_colors[e] = action.color
    elif action.kind == "highlight_path":
        seq = tuple(action.payload)
        for v in seq:
            if v not in g:
                raise ActionError(f"unknown node {v!r}")
        for a, b in zip(seq, seq[1:]):
            if not g.has_edge(a, b):
                raise ActionError(f"path edge ({a!r}, {b!r}) missing")
        path = seq
        for v in seq:
            node_colors[v] = action.color
        for a, b in zip(seq, seq[1:]):
            edge_colors[canonical_edge(a, b)] = action.color
    return VisualState(
        subgraph=state.subgraph,
        layout=state.layout,
        node_colors=node_colors,
        edge_colors=edge_colors,
        path=path,
        revision=state.revision + 1,
    )


def render_svg(state: VisualState) -> bytes:
    """SVG 1.1 document for the state; byte-identical for equal states.

    Element ids follow ``node-<id>`` and ``edge-<u>-<v>`` (canonical
    order) so tests and tools can address them.
    """
    g = state.subgraph.graph
    lay = state.layout
    w, h = lay.canvas
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    path_edges = set()
    if state.path:
        for a, b in zip(state.path, state.path[1:]):
            path_edges.add(canonical_edge(a, b))
    for u, v in g.edges:
        x1, y1 = lay.positions[u]
        x2, y2 = lay.positions[v]
        tag = state.edge_colors.get((u, v), "default")
        stroke = PALETTE[tag]
        width = 5 if (u, v) in path_edges else 2
        cls = f"edge {tag}" if tag != "default" else "edge"
        lines.append(
            f'<line id="edge-{u}-{v}" class="{cls}" x1="{x1}" y1="{y1}" '
            f'x2="{x2}" y2="{y2}" stroke="{stroke}" stroke-width="{width}"/>'
        )
    for v in g.nodes:
        x, y = lay.positions[v]
        tag = state.node_colors.get(v, "default")
        fill = PALETTE[tag]
        cls = f"node {tag}" if tag != "default" else "node"
        lines.append(
            f'<circle id="node-{v}" class="{cls}" cx="{x}" cy="{y}" '
            f'r="{NODE_RADIUS}" fill="{fill}" stroke="#33444f" stroke-width="1.5"/>'
        )
        lines.append(
            f'<text x="{x}" y="{y + 4}" font-size="12" font-family="monospace" '
            f'text-anchor="middle" fill="#1b2733">{v}</text>'
        )
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def replay_actions(sub: Subgraph, actions, seed: int = 0) -> list[VisualState]:
    """All states produced by applying ``actions`` in order to the initial
    rendering; index t is the state after t applied actions."""
    states = [initial_state(sub, seed)]
    for a in actions:
        states.append(apply_action(states[-1], a))
    return states
