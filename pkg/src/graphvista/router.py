"""Question parsing, task categorization, and execution planning.

Parsing is template-first: the 18 known question phrasings (including the
variants the benchmark generator renders) are matched by regex.  When no
template matches and a reasoner handle is supplied, a single few-shot
parsing request is issued and its output validated strictly against the
task schema.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import (
    ClassificationError,
    FallbackParseError,
    NodeNotFoundError,
    PlanError,
    UnparseableQuestionError,
)
from .graph import Graph
from .oracles import TASK_ARITY, TASK_TYPES, TaskInstance

# The 7 lookup-style types answered from stored text; the remaining 11
# need fine-grained topological reasoning and go to the visual branch.
SIMPLE_TYPES = frozenset(
    {
        "node_count",
        "edge_count",
        "node_degree",
        "edge_existence",
        "connectivity_check",
        "highest_degree_neighbor",
        "find_connected_edges",
    }
)
COMPLEX_TYPES = frozenset(TASK_TYPES) - SIMPLE_TYPES


@dataclass(frozen=True)
class ParsedTask:
    """A question resolved to (task type, entities, category)."""

    question: str
    task_type: str
    entities: tuple[str | None, str | None]
    category: str  # "simple" | "complex"
    parse_source: str  # "template" | "semantic_fallback"
    params: dict = field(default_factory=dict)

    def entity_list(self) -> tuple[str, ...]:
        return tuple(e for e in self.entities if e is not None)

    def to_instance(self) -> TaskInstance:
        return TaskInstance(self.task_type, self.entity_list(), dict(self.params))

    def to_json(self) -> dict:
        return {
            "question": self.question,
            "task_type": self.task_type,
            "entities": [self.entities[0], self.entities[1]],
            "category": self.category,
            "parse_source": self.parse_source,
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class PlanStep:
    index: int  # 1-based
    instruction: str
    expected_action: str  # "none" | "highlight_nodes" | "highlight_edges" | "highlight_path"


@dataclass(frozen=True)
class ExecutionPlan:
    steps: tuple[PlanStep, ...]
    modality: str  # "text" | "visual"


def load_routing_table(path) -> dict[str, str]:
    """Optional override of the simple/complex mapping from a JSON file
    of {task_type: "simple"|"complex"}."""
    with open(path, "r", encoding="utf-8") as fh:
        table = json.load(fh)
    for tt, cat in table.items():
        if tt not in TASK_TYPES or cat not in ("simple", "complex"):
            raise ClassificationError(f"bad routing entry {tt!r}: {cat!r}")
    return table


def categorize(task_type: str, routing_table: dict[str, str] | None = None) -> str:
    if routing_table and task_type in routing_table:
        return routing_table[task_type]
    if task_type in SIMPLE_TYPES:
        return "simple"
    if task_type in COMPLEX_TYPES:
        return "complex"
    raise ClassificationError(f"unknown task type {task_type!r}")


# -- question templates ------------------------------------------------------

_ID = r"([A-Za-z0-9_]+)"

# (regex, task_type, entity slots, param extractor); first match wins.
# Canonical generator templates first, then known alternate phrasings.
_PATTERNS: list[tuple[re.Pattern, str, int]] = []


def _pat(rx: str, tt: str, arity: int):
    _PATTERNS.append((re.compile(rx, re.IGNORECASE), tt, arity))


_pat(r"^What is the total number of nodes(?: in this Graph)?\??$", "node_count", 0)
_pat(r"^How many nodes (?:are there|does this graph (?:have|contain))\??$", "node_count", 0)
_pat(r"^What is the total number of edges(?: in this Graph)?\??$", "edge_count", 0)
_pat(r"^How many edges (?:are there|does this graph (?:have|contain))\??$", "edge_count", 0)
_pat(rf"^Return the degree of node {_ID}\.?$", "node_degree", 1)
_pat(rf"^What is the degree of node {_ID}\??$", "node_degree", 1)
_pat(
    rf"^Determine if node {_ID} exists in the graph\. If so, what is its degree\?$",
    "node_degree",
    1,
)
_pat(
    rf"^Is there a direct edge between node {_ID} and node {_ID}\?"
    r"(?: If yes, provide its weight\.)?$",
    "edge_existence",
    2,
)
_pat(r"^Is this graph connected\??$", "connectivity_check", 0)
_pat(r"^Determine whether the graph is connected\.?$", "connectivity_check", 0)
_pat(
    rf"^Which neighbor of node {_ID} has the highest degree\??$",
    "highest_degree_neighbor",
    1,
)
_pat(rf"^List all edges connected to node {_ID}\.?$", "find_connected_edges", 1)
_pat(rf"^Return the set of edges incident to node {_ID}\.?$", "find_connected_edges", 1)
_pat(r"^Is this graph bipartite\??$", "bipartite_detection", 0)
_pat(r"^Determine whether the graph is bipartite\.?$", "bipartite_detection", 0)
_pat(
    r"^Does this graph contain a clique of size (\d+)\??$",
    "clique_detection",
    0,
)
_pat(
    rf"^List all common third-order neighbors of nodes {_ID} and {_ID}\.?$",
    "common_third_order_neighbors",
    2,
)
_pat(
    rf"^Do nodes {_ID} and {_ID} share any third-order neighbors\??$",
    "common_third_order_neighbors",
    2,
)
_pat(
    rf"^How many connected components does this graph have, what are their sizes, "
    rf"and how large is the component containing node {_ID}\??$",
    "connectivity_analysis",
    1,
)
_pat(
    r"^How many connected components does this graph have, and what are their sizes\??$",
    "connectivity_analysis",
    0,
)
_pat(
    r"^Identify all critical nodes \(articulation points\) in this graph\.?$",
    "critical_node_detection",
    0,
)
_pat(r"^Does this graph contain a cycle\??$", "cycle_detection", 0)
_pat(
    rf"^How many edges exist among the neighbors of node {_ID}\??$",
    "neighbor_connections",
    1,
)
_pat(r"^Is this graph planar\??$", "planarity_testing", 0)
_pat(r"^Determine whether the graph is planar\.?$", "planarity_testing", 0)
_pat(
    rf"^Find the shortest path between nodes {_ID} and {_ID}\.?$",
    "shortest_path",
    2,
)
_pat(
    rf"^Find and list the sequence of nodes that form the shortest path "
    rf"between node {_ID} and node {_ID}\.?$",
    "shortest_path",
    2,
)
_pat(
    rf"^List all nodes at distance exactly 3 from node {_ID}\.?$",
    "third_order_neighbors",
    1,
)
_pat(
    rf"^What are the third-order neighbors of node {_ID}\??$",
    "third_order_neighbors",
    1,
)
_pat(
    r"^How many triangles \(3-cycles\) does this graph contain\??$",
    "triangle_counting",
    0,
)
_pat(
    rf"^Does a 3-cycle \(triangle\) involving node {_ID} exist\?"
    r"(?: If so, list the nodes of one such triangle\.)?$",
    "triangle_counting",
    1,
)

QUESTION_TEMPLATES: dict[tuple[str, int], str] = {
    ("node_count", 0): "What is the total number of nodes in this Graph?",
    ("edge_count", 0): "What is the total number of edges in this Graph?",
    ("node_degree", 1): "Return the degree of node {a}.",
    ("edge_existence", 2): "Is there a direct edge between node {a} and node {b}?",
    ("connectivity_check", 0): "Is this graph connected?",
    ("highest_degree_neighbor", 1): "Which neighbor of node {a} has the highest degree?",
    ("find_connected_edges", 1): "List all edges connected to node {a}.",
    ("bipartite_detection", 0): "Is this graph bipartite?",
    ("clique_detection", 0): "Does this graph contain a clique of size {k}?",
    ("common_third_order_neighbors", 2):
        "List all common third-order neighbors of nodes {a} and {b}.",
    ("connectivity_analysis", 1):
        "How many connected components does this graph have, what are their "
        "sizes, and how large is the component containing node {a}?",
    ("connectivity_analysis", 0):
        "How many connected components does this graph have, and what are "
        "their sizes?",
    ("critical_node_detection", 0):
        "Identify all critical nodes (articulation points) in this graph.",
    ("cycle_detection", 0): "Does this graph contain a cycle?",
    ("neighbor_connections", 1):
        "How many edges exist among the neighbors of node {a}?",
    ("planarity_testing", 0): "Is this graph planar?",
    ("shortest_path", 2): "Find the shortest path between nodes {a} and {b}.",
    ("third_order_neighbors", 1):
        "List all nodes at distance exactly 3 from node {a}.",
    ("triangle_counting", 0):
        "How many triangles (3-cycles) does this graph contain?",
    ("triangle_counting", 1): "Does a 3-cycle (triangle) involving node {a} exist?",
}


def render_question(t: TaskInstance) -> str:
    """The canonical question text for a task instance (closed loop with
    parse_question)."""
    key = (t.task_type, len(t.entities))
    template = QUESTION_TEMPLATES.get(key)
    if template is None:
        raise PlanError(f"no question template for {key}")
    subs = {"k": t.params.get("k")}
    if t.entities:
        subs["a"] = t.entities[0]
    if len(t.entities) > 1:
        subs["b"] = t.entities[1]
    return template.format(**subs)


_FALLBACK_SYSTEM = (
    "You convert a natural-language graph question into JSON. Reply with "
    'one line of JSON: {"task_type": <one of the known types>, '
    '"entities": [..], "params": {..}}. Known types: ' + ", ".join(TASK_TYPES) + "."
)

_FALLBACK_SHOTS = (
    'Q: "What is the total number of nodes in this Graph?" -> '
    '{"task_type": "node_count", "entities": [], "params": {}}\n'
    'Q: "Return the degree of node A." -> '
    '{"task_type": "node_degree", "entities": ["A"], "params": {}}\n'
    'Q: "Find the shortest path between nodes A and B." -> '
    '{"task_type": "shortest_path", "entities": ["A", "B"], "params": {}}\n'
    'Q: "Does this graph contain a clique of size 4?" -> '
    '{"task_type": "clique_detection", "entities": [], "params": {"k": 4}}'
)


def parse_question(q: str, g: Graph, fallback=None,
                   routing_table: dict[str, str] | None = None) -> ParsedTask:
    """Resolve a question to a ParsedTask.

    Template match first; otherwise one few-shot request through
    ``fallback`` (a reasoner with a ``complete`` method), whose reply must
    validate against the 18-type schema.  Entity ids must exist in ``g``.
    """
    text = q.strip()
    for rx, tt, arity in _PATTERNS:
        m = rx.match(text)
        if m is None:
            continue
        groups = m.groups()
        params = {}
        if tt == "clique_detection":
            params["k"] = int(groups[0])
            groups = ()
        ents = tuple(x for x in groups if x is not None)[:arity]
        for e in ents:
            if e not in g:
                raise NodeNotFoundError(e)
        e1 = ents[0] if len(ents) > 0 else None
        e2 = ents[1] if len(ents) > 1 else None
        return ParsedTask(
            question=q,
            task_type=tt,
            entities=(e1, e2),
            category=categorize(tt, routing_table),
            parse_source="template",
            params=params,
        )
    if fallback is None:
        raise UnparseableQuestionError(f"no template matched: {q!r}")
    return _parse_via_fallback(q, g, fallback, routing_table)


def _parse_via_fallback(q, g, fallback, routing_table):
    from .client import ReasonerRequest

    req = ReasonerRequest(
        system_prompt=_FALLBACK_SYSTEM,
        user_prompt=_FALLBACK_SHOTS + f'\nQ: "{q}" -> ',
        tags={"mode": "parse_fallback"},
    )
    reply = fallback.complete(req)
    line = reply.text.strip().splitlines()[-1].strip() if reply.text.strip() else ""
    try:
        obj = json.loads(line)
        tt = obj["task_type"]
        ents = tuple(str(e) for e in obj.get("entities", []))
        params = dict(obj.get("params", {}))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FallbackParseError(f"fallback reply not parseable: {reply.text!r}") from exc
    if tt not in TASK_TYPES:
        raise FallbackParseError(f"fallback produced unknown type {tt!r}")
    if len(ents) not in TASK_ARITY[tt]:
        raise FallbackParseError(f"fallback arity {len(ents)} invalid for {tt}")
    if tt == "clique_detection" and not isinstance(params.get("k"), int):
        raise FallbackParseError("fallback missing integer clique size k")
    for e in ents:
        if e not in g:
            raise NodeNotFoundError(e)
    e1 = ents[0] if len(ents) > 0 else None
    e2 = ents[1] if len(ents) > 1 else None
    return ParsedTask(
        question=q,
        task_type=tt,
        entities=(e1, e2),
        category=categorize(tt, routing_table),
        parse_source="semantic_fallback",
        params=params,
    )


# -- execution plans ---------------------------------------------------------

# fixed per-type visual plan shapes: (instruction template, expected action)
_VISUAL_PLANS: dict[str, tuple[tuple[str, str], ...]] = {
    "triangle_counting@1": (
        ("Identify the neighbors of node {a} in the image and highlight them.",
         "highlight_nodes"),
        ("Check the image for edges connecting any two highlighted neighbors "
         "and mark them.", "highlight_edges"),
        ("Confirm whether a triangle through node {a} exists, highlight it, "
         "and summarize the final answer.", "highlight_edges"),
    ),
    "triangle_counting@0": (
        ("Scan the image for mutually connected triples and highlight "
         "candidate nodes.", "highlight_nodes"),
        ("Verify the three edges of each candidate triple in the image.",
         "highlight_edges"),
        ("Count the confirmed triangles and summarize the final answer.",
         "none"),
    ),
    "shortest_path@2": (
        ("Locate and mark the start node {a} and the end node {b} in the "
         "image.", "highlight_nodes"),
        ("Explore the neighbors of the start node in the image and extend a "
         "candidate path one hop.", "highlight_path"),
        ("Extend the candidate path toward the target along promising "
         "edges.", "highlight_path"),
        ("Continue until the target is reached and trace the complete "
         "path.", "highlight_path"),
        ("Verify the traced path is shortest, highlight it, and summarize "
         "the final answer.", "highlight_path"),
    ),
    "find_connected_edges@1": (
        ("Identify the target node {a} in the image and mark it.",
         "highlight_nodes"),
        ("Highlight every node directly connected to node {a} and summarize "
         "the incident edges as the final answer.", "highlight_nodes"),
    ),
    "bipartite_detection@0": (
        ("Two-color the nodes in the image by alternating layers from an "
         "anchor node.", "highlight_nodes"),
        ("Check the image for any edge joining two nodes of the same "
         "color.", "highlight_edges"),
        ("Conclude whether the graph is bipartite and summarize the final "
         "answer.", "none"),
    ),
    "clique_detection@0": (
        ("Highlight the candidate nodes that could form a clique of size "
         "{k}.", "highlight_nodes"),
        ("Check the image for edges between every pair of candidates and "
         "mark them.", "highlight_edges"),
        ("Confirm whether a clique of size {k} exists and summarize the "
         "final answer.", "none"),
    ),
    "common_third_order_neighbors@2": (
        ("Mark the two query nodes {a} and {b} in the image.",
         "highlight_nodes"),
        ("Highlight the nodes at distance exactly 3 from node {a}.",
         "highlight_nodes"),
        ("Highlight the nodes at distance exactly 3 from node {b}.",
         "highlight_nodes"),
        ("Intersect the two highlighted sets and summarize the final "
         "answer.", "highlight_nodes"),
    ),
    "connectivity_analysis@1": (
        ("Flood-fill the component containing a starting node and highlight "
         "it.", "highlight_nodes"),
        ("Repeat for any remaining unvisited region of the image.",
         "highlight_nodes"),
        ("Count the components, note their sizes, and summarize the final "
         "answer.", "none"),
    ),
    "connectivity_analysis@0": (
        ("Flood-fill the component containing a starting node and highlight "
         "it.", "highlight_nodes"),
        ("Repeat for any remaining unvisited region of the image.",
         "highlight_nodes"),
        ("Count the components, note their sizes, and summarize the final "
         "answer.", "none"),
    ),
    "critical_node_detection@0": (
        ("Highlight junction nodes whose removal could split the image into "
         "pieces.", "highlight_nodes"),
        ("For each candidate, check in the image whether its neighbors stay "
         "connected without it.", "highlight_nodes"),
        ("Confirm the articulation points and summarize the final answer.",
         "none"),
    ),
    "cycle_detection@0": (
        ("Traverse the image from an anchor node, highlighting visited "
         "nodes.", "highlight_nodes"),
        ("Look for an edge that closes back onto an already visited node "
         "and mark it.", "highlight_edges"),
        ("Conclude whether a cycle exists and summarize the final answer.",
         "none"),
    ),
    "neighbor_connections@1": (
        ("Highlight all neighbors of node {a} in the image.",
         "highlight_nodes"),
        ("Mark every edge in the image that joins two highlighted "
         "neighbors.", "highlight_edges"),
        ("Count the marked edges and summarize the final answer.", "none"),
    ),
    "planarity_testing@0": (
        ("Inspect the densest region of the image and highlight the "
         "highest-degree nodes.", "highlight_nodes"),
        ("Judge whether the edges could be redrawn without crossings, "
         "checking for K5- or K3,3-like patterns.", "none"),
        ("Conclude whether the graph is planar and summarize the final "
         "answer.", "none"),
    ),
    "third_order_neighbors@1": (
        ("Mark the query node {a} in the image.", "highlight_nodes"),
        ("Highlight everything within two hops of node {a}.",
         "highlight_nodes"),
        ("Highlight the ring of nodes at distance exactly 3 and summarize "
         "the final answer.", "highlight_nodes"),
    ),
}

# visual plan step counts are part of the documented contract
PLAN_STEP_COUNTS = {key: len(steps) for key, steps in _VISUAL_PLANS.items()}


def make_plan(t: ParsedTask) -> ExecutionPlan:
    """Deterministic execution plan for a parsed task.

    Simple tasks get a single retrieve-and-answer text step; complex tasks
    get their fixed per-type visual template, which always ends with a
    summarize step.
    """
    if t.task_type not in TASK_TYPES:
        raise PlanError(f"unknown task type {t.task_type!r}")
    subs = {"a": t.entities[0], "b": t.entities[1], "k": t.params.get("k")}
    if t.category == "simple":
        step = PlanStep(
            1,
            "Retrieve the stored neighborhood facts relevant to the question "
            "and answer it directly.",
            "none",
        )
        return ExecutionPlan((step,), "text")
    key = f"{t.task_type}@{len(t.entity_list())}"
    shape = _VISUAL_PLANS.get(key)
    if shape is None:
        raise PlanError(f"no plan template for {key}")
    steps = tuple(
        PlanStep(i + 1, instr.format(**subs), action)
        for i, (instr, action) in enumerate(shape)
    )
    return ExecutionPlan(steps, "visual")


def visual_plan_for(task_type: str, arity: int, subs: dict) -> ExecutionPlan:
    """Visual plan regardless of routing category (used for gold traces
    of the neighbor-retrieval exemplar, which routes to text at runtime)."""
    key = f"{task_type}@{arity}"
    shape = _VISUAL_PLANS.get(key)
    if shape is None:
        raise PlanError(f"no plan template for {key}")
    steps = tuple(
        PlanStep(i + 1, instr.format(**subs), action)
        for i, (instr, action) in enumerate(shape)
    )
    return ExecutionPlan(steps, "visual")
