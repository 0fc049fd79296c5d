"""LLM fallback: textualize the problem, prompt a chat-completions model
one-shot, and verify whatever comes back by replay.

The client is deliberately generic (endpoint, model name and key come from
configuration); a deterministic mock keyed by prompt hash stands in for
tests and offline runs. Model output is never trusted: it either parses
into the restricted component form and survives replay on every timeline
(Verified) or it is handed to the user flagged Unverified with the reason.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from typing import Optional, Union

from .codegen import ComponentParseError, MatchError, match_component, parse_component
from .errors import DemosynthError
from .extraction import StateTrace
from .sketch import Hole, Text, escape_attr, escape_text
from .synthesis import MissingHandlerError, Pass, replay
from .template import (
    ElaboratedSketch,
    FieldRef,
    ListRegionParam,
    ParamRef,
    RepeatNode,
    ScalarParam,
    TElement,
    Valuation,
)
from .timeline import DemoTimeline
from . import oneshot


class ClientError(DemosynthError):
    pass


class CodeExtractError(DemosynthError):
    pass


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    example_input: str
    example_output: str
    task_text: str


@dataclass(frozen=True)
class Limits:
    max_tokens: int = 2048
    timeout_seconds: float = 60.0


@dataclass(frozen=True)
class LlmOutcome:
    code: str
    verified: bool
    reason: Optional[str] = None


# ---------------------------------------------------------------------------
# Textualization


def _fmt_value(value, param) -> str:
    if isinstance(param, ListRegionParam):
        parts = []
        for record in value:
            inner = ", ".join(f"{f.name}: {_fmt_scalar(record[f.name])}" for f in param.fields)
            parts.append("{" + inner + "}")
        return "[" + ", ".join(parts) + "]"
    return _fmt_scalar(value)


def _fmt_scalar(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    return str(value)


def _fmt_state(state: Valuation, elab: ElaboratedSketch) -> str:
    parts = [f"{p.name}: {_fmt_value(state[p.name], p)}" for p in elab.params]
    return "{" + ", ".join(parts) + "}"


def _attr_text(name: str, value) -> str:
    if isinstance(value, Hole):
        return f"{name}={{${value.id}}}"
    if isinstance(value, ParamRef):
        return f"{name}={{{value.param}}}"
    if isinstance(value, FieldRef):
        return f"{name}={{item.{value.field}}}"
    return f'{name}="{escape_attr(value)}"'


def _template_lines(tnode, depth: int) -> list[str]:
    pad = "  " * depth
    if isinstance(tnode, Text):
        return [pad + escape_text(tnode.value)]
    if isinstance(tnode, ParamRef):
        return [pad + f"{{{tnode.param}}}"]
    if isinstance(tnode, FieldRef):
        return [pad + f"{{item.{tnode.field}}}"]
    if isinstance(tnode, RepeatNode):
        lines = [pad + f"{{{tnode.param}.map((item, i) => ("]
        lines.extend(_template_lines(tnode.item, depth + 1))
        lines.append(pad + "))}")
        return lines
    assert isinstance(tnode, TElement)
    attrs = "".join(" " + _attr_text(a.name, a.value) for a in tnode.attrs)
    if not tnode.children:
        return [f"{pad}<{tnode.tag}{attrs} />"]
    if len(tnode.children) == 1 and isinstance(tnode.children[0], (Text, ParamRef, FieldRef)):
        inner = _template_lines(tnode.children[0], 0)[0]
        return [f"{pad}<{tnode.tag}{attrs}>{inner}</{tnode.tag}>"]
    lines = [f"{pad}<{tnode.tag}{attrs}>"]
    for child in tnode.children:
        lines.extend(_template_lines(child, depth + 1))
    lines.append(f"{pad}</{tnode.tag}>")
    return lines


def textualize(elab: ElaboratedSketch, traces: list[StateTrace]) -> str:
    """Stable plain-text layout of the elaborated sketch, the initial state
    and one block per timeline; steps are numbered from 1 for readability."""
    lines = ["SKETCH:"]
    lines.extend(_template_lines(elab.template, 0))
    lines.append("")
    lines.append("INITIAL STATE:")
    for p in elab.params:
        if isinstance(p, ScalarParam):
            lines.append(f"{p.name} = {_fmt_scalar(p.initial)}")
        else:
            lines.append(f"{p.name} = {_fmt_value(p.initial_records(), p)}")
    for trace in traces:
        lines.append("")
        lines.append(f"TIMELINE {trace.timeline_id}:")
        for k, e in enumerate(trace.entries, start=1):
            if e.payload is not None:
                what = f"INPUT ${e.hole_id} {json.dumps(e.payload)}" if e.hole_id else f"INPUT {json.dumps(e.payload)}"
            else:
                what = f"CLICK ${e.hole_id}"
            if e.item_index is not None:
                what += f" item {e.item_index}"
            lines.append(
                f"step {k}: {what} ; before {_fmt_state(e.state_before, elab)}"
                f" ; after {_fmt_state(e.state_after, elab)}"
            )
    return "\n".join(lines) + "\n"


def build_prompt(task: str) -> PromptBundle:
    """One-shot prompt: the stored counter example pair plus the task."""
    return PromptBundle(
        system_text=oneshot.SYSTEM_TEXT,
        example_input=oneshot.EXAMPLE_INPUT,
        example_output=oneshot.EXAMPLE_OUTPUT,
        task_text=task,
    )


def canonical_prompt_text(bundle: PromptBundle) -> str:
    return (
        "== SYSTEM ==\n"
        + bundle.system_text
        + "\n== EXAMPLE INPUT ==\n"
        + bundle.example_input
        + "\n== EXAMPLE OUTPUT ==\n"
        + bundle.example_output
        + "\n== TASK ==\n"
        + bundle.task_text
    )


def prompt_key(bundle: PromptBundle) -> str:
    return hashlib.sha256(canonical_prompt_text(bundle).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Clients


class MockLlmClient:
    """Bit-deterministic stand-in: responses keyed by prompt hash, with a
    canned fallback that implements the hidden-mode counter."""

    def __init__(self, responses: Optional[dict] = None, fallback: Optional[str] = None):
        self.responses = dict(responses or {})
        self.fallback = oneshot.CANNED_LATENT_RESPONSE if fallback is None else fallback

    def complete(self, bundle: PromptBundle, limits: Limits = Limits()) -> str:
        return self.responses.get(prompt_key(bundle), self.fallback)


class HttpLlmClient:
    """Generic chat-completions client (JSON in, first choice's message out)."""

    def __init__(self, endpoint: str, model: str, api_key: Optional[str] = None):
        if not endpoint:
            raise ClientError("no LLM endpoint configured (RDEMON_LLM_ENDPOINT)")
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key

    def _messages(self, bundle: PromptBundle) -> list[dict]:
        return [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": bundle.example_input},
            {"role": "assistant", "content": bundle.example_output},
            {"role": "user", "content": bundle.task_text},
        ]

    def _request_once(self, bundle: PromptBundle, limits: Limits) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": self._messages(bundle),
            "max_tokens": limits.max_tokens,
        }
        response = httpx.post(
            self.endpoint, json=payload, headers=headers, timeout=limits.timeout_seconds
        )
        response.raise_for_status()
        data = response.json()
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ClientError(f"malformed completion response: {exc}") from exc
        if not isinstance(content, str):
            raise ClientError("completion content is not text")
        return content

    def complete(self, bundle: PromptBundle, limits: Limits = Limits()) -> str:
        import httpx

        last: Exception
        for _attempt in range(2):  # one retry, then surface the error
            try:
                return self._request_once(bundle, limits)
            except (httpx.HTTPError, ClientError) as exc:
                last = exc
        raise ClientError(f"LLM request failed after retry: {last}")


LlmClient = Union[MockLlmClient, HttpLlmClient]


# ---------------------------------------------------------------------------
# Response handling


_FENCE_RE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)


def extract_component(response: str) -> str:
    """Contents of the first fenced code block; bare responses are accepted
    only when they already look like a component."""
    if not response.strip():
        raise CodeExtractError("empty response")
    m = _FENCE_RE.search(response)
    if m:
        return m.group(1)
    stripped = response.strip()
    if stripped.startswith("function") or stripped.startswith("const"):
        return response
    raise CodeExtractError("no code block in response")


def validate_output(
    code: str,
    elab: ElaboratedSketch,
    timelines: list[DemoTimeline],
    sketch,
) -> LlmOutcome:
    """Parse the returned code and replay it; anything short of exact replay
    on every timeline is surfaced as Unverified with the code untouched."""
    try:
        parsed = parse_component(code)
    except ComponentParseError as exc:
        return LlmOutcome(code, False, f"unparseable; returned as-is ({exc})")
    try:
        bound = match_component(parsed, elab)
    except MatchError as exc:
        return LlmOutcome(code, False, f"component mismatch: {exc}")
    for timeline in timelines:
        try:
            outcome = replay(
                elab,
                bound.handlers,
                timeline,
                sketch,
                extra_initial=bound.extra_initial,
                input_programs=bound.input_programs,
            )
        except MissingHandlerError as exc:
            return LlmOutcome(code, False, str(exc))
        if not isinstance(outcome, Pass):
            return LlmOutcome(code, False, f"replay-mismatch step {outcome.step_index + 1}")
    return LlmOutcome(code, True)
