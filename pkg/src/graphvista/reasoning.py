"""Stepwise visual reasoning loop, the text-branch answerer, and the
pairwise preference loss.

A reasoning session walks an execution plan: each step feeds the current
rendering, the serialized history, and the step instruction to the
reasoner, parses an optional highlight action from the reply, and updates
the visual state when one applies.  A final aggregation call turns the
trace into a schema-validated answer.  Sessions are single-threaded and
own their state; independent sessions can run concurrently.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .client import ReasonerRequest, parse_step_reply, render_action
from .errors import (
    ActionError,
    AnswerFormatError,
    NumericError,
    ParameterError,
    SessionAbortedError,
    TransportError,
)
from .oracles import ANSWER_KINDS, GoldAnswer, answer_kind
from .ragbase import RetrievedContext
from .render import HighlightAction, VisualState, apply_action, initial_state, render_svg
from .router import ExecutionPlan, ParsedTask
from .subgraph import Subgraph

HISTORY_CAP = 8  # last steps serialized into prompts

_VGT_SYSTEM = (
    "You are a visual graph reasoning agent. You see the current rendering "
    "of a graph. Follow the step instruction, describe what you observe, "
    "and when the step calls for it emit exactly one line "
    "'ACTION: <kind> <elements>' with kind one of highlight_nodes, "
    "highlight_edges (elements as u-v pairs), highlight_path, or clear."
)

_SUMMARIZE_SYSTEM = (
    "You aggregate a stepwise graph reasoning trace into a final answer. "
    'Reply with a final line ANSWER: {"kind": "<kind>", "value": <value>}.'
)

_TEXT_SYSTEM = (
    "You answer graph questions from retrieved context. Use only the "
    "supplied facts. Reply with a final line "
    'ANSWER: {"kind": "<kind>", "value": <value>}.'
)


@dataclass(frozen=True)
class ReasoningStep:
    index: int
    instruction: str
    observation: str
    action: HighlightAction | None
    state_revision_after: int
    action_error: str | None = None

    def to_json(self) -> dict:
        return {
            "t": self.index,
            "instruction": self.instruction,
            "observation": self.observation,
            "action": render_action(self.action) if self.action else None,
            "state_revision_after": self.state_revision_after,
            "action_error": self.action_error,
        }


@dataclass(frozen=True)
class FinalAnswer:
    answer: GoldAnswer
    rationale: str

    def to_json(self) -> dict:
        return {"answer": self.answer.to_json(), "rationale": self.rationale}


@dataclass
class ReasoningSession:
    plan: ExecutionPlan
    states: list[VisualState] = field(default_factory=list)
    history: list[ReasoningStep] = field(default_factory=list)
    final: FinalAnswer | None = None
    journal: list[dict] = field(default_factory=list)

    def journal_lines(self) -> list[str]:
        return [json.dumps(row, sort_keys=True) for row in self.journal]


def serialize_history(history, cap: int = HISTORY_CAP) -> str:
    """Numbered trace lines fed back into prompts, capped to the tail."""
    rows = []
    for step in history[-cap:]:
        line = f"Step {step.index}: {step.instruction} -> {step.observation}"
        if step.action is not None:
            line += f" [{render_action(step.action)}]"
        rows.append(line)
    return "\n".join(rows) if rows else "(no prior steps)"


def svg_hash(state: VisualState) -> str:
    return hashlib.sha256(render_svg(state)).hexdigest()


def run_vgt(plan: ExecutionPlan, sub: Subgraph, reasoner, task: ParsedTask,
            seed: int = 0, journal_tags: dict | None = None) -> ReasoningSession:
    """Execute a visual plan step by step against ``reasoner``.

    Each parsed action updates the visual state (revision + 1); replies
    without a usable action leave the state untouched.  Action errors are
    recorded and treated as no-action.  Transport failures abort the
    session, preserving partial history inside the raised error.  After
    the loop the trace is aggregated into the final answer.
    """
    if plan.modality != "visual":
        raise ParameterError("run_vgt requires a visual plan")
    session = ReasoningSession(plan=plan)
    session.states.append(initial_state(sub, seed))
    base_tags = dict(journal_tags or {})
    n = len(plan.steps)
    for step in plan.steps:
        state = session.states[-1]
        req = ReasonerRequest(
            system_prompt=_VGT_SYSTEM,
            user_prompt=(
                f"Task: {task.question}\n"
                f"Step {step.index} of {n}: {step.instruction}\n\n"
                f"History:\n{serialize_history(session.history)}\n"
            ),
            images=(render_svg(state),),
            tags={**base_tags, "mode": "vgt_step",
                  "task_type": task.task_type, "step_index": step.index},
        )
        try:
            reply = reasoner.complete(req)
        except TransportError as exc:
            raise SessionAbortedError(
                f"reasoner failed at step {step.index}", session, exc
            ) from exc
        observation, action = parse_step_reply(reply.text)
        action_error = None
        if action is not None:
            try:
                session.states.append(apply_action(state, action))
            except ActionError as exc:
                action_error = str(exc)
                action = None  # update rule: unknown elements mean no action
        recorded = ReasoningStep(
            index=step.index,
            instruction=step.instruction,
            observation=observation,
            action=action,
            state_revision_after=session.states[-1].revision,
            action_error=action_error,
        )
        session.history.append(recorded)
        session.journal.append(
            {**recorded.to_json(), "svg_hash": svg_hash(session.states[-1])}
        )
    session.final = summarize(session.history, task, reasoner,
                              journal_tags=base_tags)
    session.journal.append(
        {"t": n + 1, "final": session.final.to_json(), "svg_hash":
         svg_hash(session.states[-1])}
    )
    return session


def summarize(history, task: ParsedTask, reasoner, weighted: bool = False,
              journal_tags: dict | None = None) -> FinalAnswer:
    """One aggregation call over the full trace, schema-validated.

    An invalid reply is retried once with the violation quoted back;
    a second failure raises AnswerFormatError.
    """
    if not history:
        raise ParameterError("summarize needs a non-empty history")
    expected = answer_kind(task.to_instance(), weighted)
    prompt = (
        f"Task: {task.question}\n\nFull reasoning trace:\n"
        f"{serialize_history(history, cap=len(history))}\n\n"
        f"Aggregate the trace and answer. Expected answer kind: {expected}."
    )
    tags = {**(journal_tags or {}), "mode": "summarize",
            "task_type": task.task_type}
    return _ask_for_answer(reasoner, _SUMMARIZE_SYSTEM, prompt, expected, tags)


def answer_text(task: ParsedTask, ctx: RetrievedContext, reasoner,
                weighted: bool = False,
                journal_tags: dict | None = None) -> FinalAnswer:
    """Single-shot text-branch answer from retrieved context."""
    expected = answer_kind(task.to_instance(), weighted)
    warning = ""
    if not ctx.assembled_text:
        warning = "[warning: empty retrieved context] "
    elif ctx.truncated:
        warning = "[warning: context truncated to budget] "
    prompt = (
        f"Question: {task.question}\n\nRetrieved context:\n"
        f"{ctx.assembled_text or '(none)'}\n\n"
        f"Expected answer kind: {expected}."
    )
    tags = {**(journal_tags or {}), "mode": "text_answer",
            "task_type": task.task_type}
    final = _ask_for_answer(reasoner, _TEXT_SYSTEM, prompt, expected, tags)
    if warning:
        final = FinalAnswer(final.answer, warning + final.rationale)
    return final


def _ask_for_answer(reasoner, system, prompt, expected_kind, tags) -> FinalAnswer:
    reply = reasoner.complete(ReasonerRequest(
        system_prompt=system, user_prompt=prompt, tags=tags))
    try:
        return _validate_answer(reply.text, expected_kind)
    except AnswerFormatError as first:
        retry_prompt = (
            prompt + f"\n\nYour previous reply was invalid ({first}). "
            f'Reply again with a final line ANSWER: {{"kind": '
            f'"{expected_kind}", "value": ...}}.'
        )
        reply = reasoner.complete(ReasonerRequest(
            system_prompt=system, user_prompt=retry_prompt,
            tags={**tags, "retry": True}))
        return _validate_answer(reply.text, expected_kind)


def _validate_answer(text: str, expected_kind: str) -> FinalAnswer:
    answer_line = None
    for line in text.splitlines():
        if line.strip().startswith("ANSWER:"):
            answer_line = line.strip()[len("ANSWER:"):].strip()
    if answer_line is None:
        raise AnswerFormatError("no ANSWER line in reply")
    try:
        obj = json.loads(answer_line)
    except json.JSONDecodeError as exc:
        raise AnswerFormatError(f"ANSWER payload is not JSON: {exc}") from exc
    if not isinstance(obj, dict) or "kind" not in obj:
        raise AnswerFormatError("ANSWER payload missing 'kind'")
    if obj["kind"] != expected_kind:
        raise AnswerFormatError(
            f"answer kind {obj['kind']!r} does not match expected {expected_kind!r}"
        )
    answer = coerce_answer(expected_kind, obj.get("value"), obj.get("extra"))
    rationale = "\n".join(
        l for l in text.splitlines() if not l.strip().startswith("ANSWER:")
    ).strip()
    return FinalAnswer(answer, rationale)


def coerce_answer(kind: str, value, extra=None) -> GoldAnswer:
    """Normalize a raw JSON value into a canonical GoldAnswer payload."""
    if kind not in ANSWER_KINDS:
        raise AnswerFormatError(f"unknown answer kind {kind!r}")
    try:
        if kind == "boolean":
            if not isinstance(value, bool):
                raise AnswerFormatError(f"expected boolean, got {value!r}")
        elif kind == "integer":
            if isinstance(value, bool) or not isinstance(value, int):
                raise AnswerFormatError(f"expected integer, got {value!r}")
        elif kind == "real":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise AnswerFormatError(f"expected real, got {value!r}")
            value = float(value)
        elif kind == "node":
            if value is not None and not isinstance(value, str):
                raise AnswerFormatError(f"expected node id or null, got {value!r}")
        elif kind == "node_set":
            from .graph import node_key

            if not isinstance(value, (list, tuple)):
                raise AnswerFormatError(f"expected node list, got {value!r}")
            value = tuple(sorted({str(v) for v in value}, key=node_key))
        elif kind == "node_sequence":
            if value is not None:
                if not isinstance(value, (list, tuple)):
                    raise AnswerFormatError(f"expected node sequence, got {value!r}")
                value = tuple(str(v) for v in value)
        elif kind == "edge_set":
            from .graph import canonical_edge, node_key

            if not isinstance(value, (list, tuple)):
                raise AnswerFormatError(f"expected edge list, got {value!r}")
            pairs = set()
            for pair in value:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise AnswerFormatError(f"bad edge entry {pair!r}")
                pairs.add(canonical_edge(str(pair[0]), str(pair[1])))
            value = tuple(sorted(pairs, key=lambda e: (node_key(e[0]), node_key(e[1]))))
        elif kind == "analysis_record":
            if not isinstance(value, dict) or "component_count" not in value:
                raise AnswerFormatError(f"bad analysis record {value!r}")
            record = {
                "component_count": int(value["component_count"]),
                "sizes_desc": [int(x) for x in value.get("sizes_desc", [])],
            }
            if "component_of_query" in value and value["component_of_query"] is not None:
                record["component_of_query"] = int(value["component_of_query"])
            value = record
    except (TypeError, ValueError) as exc:
        raise AnswerFormatError(f"cannot coerce {value!r} to {kind}") from exc
    return GoldAnswer(kind, value, dict(extra) if extra else None)


# -- preference loss -----------------------------------------------------------


@dataclass(frozen=True)
class DpoInputs:
    """Log-probabilities of the chosen/rejected trajectories under the
    trained policy and the frozen reference, plus the regularization
    strength.  No default beta: callers must choose one."""

    logp_w_policy: float
    logp_l_policy: float
    logp_w_ref: float
    logp_l_ref: float
    beta: float

    def __post_init__(self):
        values = (self.logp_w_policy, self.logp_l_policy,
                  self.logp_w_ref, self.logp_l_ref, self.beta)
        if any(not math.isfinite(x) for x in values):
            raise NumericError("dpo inputs must be finite")
        if self.beta <= 0:
            raise ParameterError("beta must be > 0")
        if any(x > 0 for x in values[:4]):
            raise ParameterError("log-probabilities must be <= 0")


def dpo_margin(inputs: DpoInputs) -> float:
    """Log-probability margin between chosen and rejected trajectories,
    each measured against the reference policy."""
    return (inputs.logp_w_policy - inputs.logp_w_ref) - (
        inputs.logp_l_policy - inputs.logp_l_ref
    )


def _softplus(x: float) -> float:
    # stable: never exponentiates a positive argument
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def dpo_loss_from_margin(margin: float, beta: float) -> float:
    if not math.isfinite(margin) or not math.isfinite(beta):
        raise NumericError("margin and beta must be finite")
    if beta <= 0:
        raise ParameterError("beta must be > 0")
    return _softplus(-beta * margin)


def dpo_loss(inputs: DpoInputs) -> float:
    """-log sigmoid(beta * margin), in softplus form for stability.

    Zero margin gives ln 2; the loss decays to 0 as the margin grows and
    grows linearly with slope beta as it falls.
    """
    return dpo_loss_from_margin(dpo_margin(inputs), inputs.beta)


def dpo_loss_grad_margin(margin: float, beta: float) -> float:
    """d loss / d margin = -beta * sigmoid(-beta * margin)."""
    if not math.isfinite(margin) or not math.isfinite(beta):
        raise NumericError("margin and beta must be finite")
    z = -beta * margin
    if z >= 0:
        sig = 1.0 / (1.0 + math.exp(-z))
    else:
        ez = math.exp(z)
        sig = ez / (1.0 + ez)
    return -beta * sig
