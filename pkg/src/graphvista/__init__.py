"""Graph question answering over tiered retrieval and visual stepwise
reasoning, plus the benchmark and preference-dataset generator."""

from .errors import GraphVistaError
from .graph import (
    CentralityScores,
    Graph,
    PathResult,
    betweenness,
    generate_ba,
    generate_er,
    induced_subgraph,
    k_hop_neighborhood,
    pagerank,
    shortest_path,
    yen_k_shortest,
)
from .oracles import GoldAnswer, TaskInstance, solve_task
from .ragbase import BaseConfig, TieredBase, assign_tiers, build_base, retrieve
from .render import HighlightAction, VisualState, apply_action, render_svg
from .router import ExecutionPlan, ParsedTask, categorize, make_plan, parse_question
from .subgraph import ExtractionConfig, Subgraph, extract_ego, extract_multi
from .client import HttpReasoner, ReasonerReply, ReasonerRequest, ScriptedReasoner
from .reasoning import DpoInputs, FinalAnswer, ReasoningSession, dpo_loss, run_vgt
from .grena import BenchConfig, BenchItem, PreferencePair, generate_benchmark
from .evaluate import EvalRecord, Report, aggregate, score
from .suite import PipelineConfig, run_suite

__version__ = "0.1.0"

__all__ = [
    "BaseConfig",
    "BenchConfig",
    "BenchItem",
    "CentralityScores",
    "DpoInputs",
    "EvalRecord",
    "ExecutionPlan",
    "ExtractionConfig",
    "FinalAnswer",
    "GoldAnswer",
    "Graph",
    "GraphVistaError",
    "HighlightAction",
    "HttpReasoner",
    "ParsedTask",
    "PathResult",
    "PipelineConfig",
    "PreferencePair",
    "ReasonerReply",
    "ReasonerRequest",
    "ReasoningSession",
    "Report",
    "ScriptedReasoner",
    "Subgraph",
    "TaskInstance",
    "TieredBase",
    "VisualState",
    "aggregate",
    "apply_action",
    "assign_tiers",
    "betweenness",
    "build_base",
    "categorize",
    "dpo_loss",
    "extract_ego",
    "extract_multi",
    "generate_ba",
    "generate_benchmark",
    "generate_er",
    "induced_subgraph",
    "k_hop_neighborhood",
    "make_plan",
    "pagerank",
    "parse_question",
    "render_svg",
    "retrieve",
    "run_suite",
    "run_vgt",
    "score",
    "shortest_path",
    "solve_task",
    "yen_k_shortest",
]
