"""Reasoner abstraction: one completion interface, two backends.

The HTTP backend speaks the OpenAI-compatible chat shape with base64
image parts; the scripted backend replays fixture replies keyed by
request tags and never touches the network, which makes the closed-loop
tests bit-deterministic.  Requests are independent, so any number may
run concurrently.
"""

from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass, field

from .errors import ParameterError, ProviderError, ReasonerTimeoutError, TransportError


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.01
    top_p: float = 0.9
    max_tokens: int = 2048

    def __post_init__(self):
        if self.temperature < 0:
            raise ParameterError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ParameterError("max_tokens must be >= 1")


@dataclass(frozen=True)
class ReasonerRequest:
    system_prompt: str
    user_prompt: str
    images: tuple[bytes, ...] = ()
    sampling: SamplingParams = SamplingParams()
    # routing metadata (task type, step index, item id); the HTTP backend
    # ignores it, the scripted backend keys its fixtures on it
    tags: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReasonerReply:
    text: str
    structured: tuple | None = None  # (observation, HighlightAction | None)
    usage: dict = field(default_factory=dict)


# -- step-reply grammar -------------------------------------------------------


def parse_step_reply(text: str):
    """Extract (observation, action) from a step reply.

    The grammar is one ``ACTION: <kind> <elements>`` line; everything else
    is the observation.  Elements are comma-separated node ids, or
    ``u-v`` pairs for edges; an optional trailing ``color=<tag>`` picks
    the palette entry.  Missing or malformed action lines degrade to
    (full text, None) — the caller then leaves the visual state untouched.
    Total: never raises.
    """
    from .render import ACTION_KINDS, PALETTE, HighlightAction

    action = None
    observation_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped.startswith("ACTION:"):
            observation_lines.append(line)
            continue
        body = stripped[len("ACTION:"):].strip()
        parts = body.split(None, 1)
        kind = parts[0] if parts else ""
        rest = parts[1] if len(parts) > 1 else ""
        color = ""
        if "color=" in rest:
            rest, _, tag = rest.rpartition("color=")
            color = tag.strip()
            rest = rest.strip()
        if kind not in ACTION_KINDS or (color and color not in PALETTE):
            observation_lines.append(line)  # malformed: keep as text
            continue
        try:
            if kind == "clear":
                action = HighlightAction("clear")
            elif kind == "highlight_edges":
                payload = tuple(
                    tuple(p.split("-", 1)) for p in _split_elems(rest)
                )
                if any(len(p) != 2 for p in payload):
                    observation_lines.append(line)
                    continue
                action = HighlightAction(kind, payload, color)
            else:
                action = HighlightAction(kind, tuple(_split_elems(rest)), color)
        except ParameterError:
            observation_lines.append(line)
    observation = "\n".join(observation_lines).strip()
    return observation, action


def _split_elems(rest: str) -> list[str]:
    return [x.strip() for x in rest.split(",") if x.strip()]


def render_action(action) -> str:
    """The ACTION line that parse_step_reply maps back to ``action``."""
    if action.kind == "clear":
        return "ACTION: clear"
    if action.kind == "highlight_edges":
        elems = ",".join(f"{u}-{v}" for u, v in action.payload)
    else:
        elems = ",".join(action.payload)
    line = f"ACTION: {action.kind} {elems}"
    from .render import DEFAULT_COLOR

    if action.color and action.color != DEFAULT_COLOR.get(action.kind):
        line += f" color={action.color}"
    return line


def _structured(text: str):
    observation, action = parse_step_reply(text)
    return (observation, action) if action is not None else None


# -- backends -----------------------------------------------------------------


class ScriptedReasoner:
    """Deterministic fixture-backed reasoner; zero network activity.

    The script is either a mapping keyed by (task_type, step_index) from
    the request tags, or a callable receiving the whole request.  Missing
    keys raise ProviderError so tests fail loudly instead of silently.
    """

    def __init__(self, script):
        self._script = script
        self.calls = 0

    @classmethod
    def from_fixtures(cls, fixtures: dict):
        return cls(dict(fixtures))

    def complete(self, req: ReasonerRequest) -> ReasonerReply:
        self.calls += 1
        if callable(self._script):
            text = self._script(req)
        else:
            key = (req.tags.get("task_type"), req.tags.get("step_index"))
            if key not in self._script:
                raise ProviderError(f"no scripted reply for {key!r}")
            text = self._script[key]
        return ReasonerReply(
            text=text,
            structured=_structured(text),
            usage={"prompt_chars": len(req.user_prompt), "completion_chars": len(text)},
        )


class HttpReasoner:
    """OpenAI-compatible chat backend with bounded retries.

    Images are attached as base64 data URLs (SVG by default; a rasterizer
    hook may convert them first).  Transport failures retry with backoff;
    non-2xx responses surface as ProviderError with the body attached;
    requests never run past the configured timeout.
    """

    def __init__(self, url: str, model: str, api_key: str = "",
                 timeout: float = 60.0, max_retries: int = 2,
                 backoff: float = 0.5, rasterizer=None, session=None):
        if not url:
            raise ParameterError("url required")
        self.url = url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.rasterizer = rasterizer
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    @classmethod
    def from_env(cls, **kwargs):
        url = os.environ.get("REASONER_URL", "")
        if not url:
            raise ParameterError("REASONER_URL not set")
        return cls(
            url=url,
            model=os.environ.get("REASONER_MODEL", "default"),
            api_key=os.environ.get("REASONER_API_KEY", ""),
            **kwargs,
        )

    def _payload(self, req: ReasonerRequest) -> dict:
        content: list[dict] = [{"type": "text", "text": req.user_prompt}]
        for image in req.images:
            mime = "image/svg+xml"
            if self.rasterizer is not None:
                image, mime = self.rasterizer(image)
            data = base64.b64encode(image).decode("ascii")
            content.append(
                {"type": "image_url",
                 "image_url": {"url": f"data:{mime};base64,{data}"}}
            )
        return {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": content},
            ],
            "temperature": req.sampling.temperature,
            "top_p": req.sampling.top_p,
            "max_tokens": req.sampling.max_tokens,
        }

    def complete(self, req: ReasonerRequest) -> ReasonerReply:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = self._payload(req)
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._session.post(
                    f"{self.url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
            except requests.Timeout as exc:
                raise ReasonerTimeoutError(
                    f"reasoner timed out after {self.timeout}s"
                ) from exc
            except requests.RequestException as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(self.backoff * (2 ** attempt))
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"provider returned {resp.status_code}",
                    status=resp.status_code,
                    body=resp.text[:2000],
                )
            try:
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(
                    "malformed provider response", body=resp.text[:2000]
                ) from exc
            usage = body.get("usage") or {}
            return ReasonerReply(text=text, structured=_structured(text), usage=usage)
        raise TransportError(
            f"transport failed after {self.max_retries + 1} attempts: {last_exc}"
        )
