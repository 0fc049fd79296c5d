"""The synthesis pipeline: enumerative first, LLM fallback second.

run_pipeline stitches the stages together and wraps any stage failure in a
PipelineError carrying the stage name. With the LLM disabled or mocked the
whole pipeline is deterministic: byte-identical component text and report
(timings aside) for identical inputs.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Optional

from .codegen import ComponentSource, emit_component
from .errors import DemosynthError
from .extraction import (
    ExtractError,
    elaborate_sketch,
    extract_params,
    state_traces,
)
from .llm import (
    ClientError,
    CodeExtractError,
    HttpLlmClient,
    Limits,
    MockLlmClient,
    build_prompt,
    extract_component,
    textualize,
    validate_output,
)
from .sketch import ParseError, parse_sketch
from .synthesis import Budget, synthesize_enumerative
from .template import TraceError, initial_state, param_to_json
from .timeline import DemoTimeline, validate_timeline


@dataclass
class PipelineConfig:
    llm_mode: str = "off"  # "off" | "mock" | "http"
    max_size: int = 5
    max_candidates: int = 100_000
    component_name: str = "Component"
    llm_endpoint: Optional[str] = None
    llm_model: Optional[str] = None
    llm_api_key: Optional[str] = None
    max_tokens: int = 2048
    timeout_seconds: float = 60.0

    @classmethod
    def from_env(cls, **overrides) -> "PipelineConfig":
        config = cls(**overrides)
        config.llm_endpoint = config.llm_endpoint or os.environ.get("RDEMON_LLM_ENDPOINT")
        config.llm_model = config.llm_model or os.environ.get("RDEMON_LLM_MODEL")
        config.llm_api_key = config.llm_api_key or os.environ.get("RDEMON_LLM_API_KEY")
        return config


@dataclass
class PipelineReport:
    param_summary: list
    per_hole_status: dict
    provenance: str
    verified: bool
    reason: Optional[str]
    candidates_visited: int
    diagnostics: list
    timings: dict

    def to_json(self) -> dict:
        return {
            "params": self.param_summary,
            "perHole": {str(k): v for k, v in sorted(self.per_hole_status.items())},
            "provenance": self.provenance,
            "verified": self.verified,
            "reason": self.reason,
            "candidatesVisited": self.candidates_visited,
            "diagnostics": self.diagnostics,
            "timings": self.timings,
        }


class PipelineError(DemosynthError):
    def __init__(self, stage: str, message: str, diagnostics: Optional[list] = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.reason = message
        self.diagnostics = diagnostics or []


@dataclass
class PipelineResult:
    component: ComponentSource
    report: PipelineReport
    prompt_text: Optional[str] = None
    elaborated: Optional[object] = None
    synthesis: Optional[object] = None


def make_client(config: PipelineConfig):
    if config.llm_mode == "mock":
        return MockLlmClient()
    if config.llm_mode == "http":
        return HttpLlmClient(config.llm_endpoint or "", config.llm_model or "", config.llm_api_key)
    return None


def run_pipeline(
    sketch_source: str,
    timelines: list[DemoTimeline],
    config: PipelineConfig = PipelineConfig(),
    client=None,
) -> PipelineResult:
    timings: dict = {}

    def timed(stage: str, fn):
        start = time.perf_counter()
        out = fn()
        timings[stage] = round(time.perf_counter() - start, 6)
        return out

    try:
        sketch = timed("parse", lambda: parse_sketch(sketch_source))
    except ParseError as exc:
        raise PipelineError("parse", str(exc)) from exc

    diagnostics = []
    for t in timelines:
        for d in validate_timeline(sketch, t):
            where = f"timeline {t.id} step {d.step_index}"
            diagnostics.append(f"{where}: {d.message}")
    if diagnostics:
        raise PipelineError("validate", "timeline validation failed", diagnostics)

    try:
        params = timed("extract", lambda: extract_params(sketch, timelines))
    except ExtractError as exc:
        raise PipelineError("extract", str(exc)) from exc
    elab = timed("elaborate", lambda: elaborate_sketch(sketch, params))
    try:
        traces = timed("trace", lambda: state_traces(elab, timelines))
    except TraceError as exc:
        raise PipelineError("trace", str(exc)) from exc

    budget = Budget(max_size=config.max_size, max_candidates=config.max_candidates)
    synthesis = timed("synthesize", lambda: synthesize_enumerative(elab, traces, budget))
    param_summary = [param_to_json(p) for p in params]

    prompt_text = textualize(elab, traces)

    if synthesis.solved:
        component = timed(
            "codegen",
            lambda: emit_component(
                elab, synthesis.handlers, initial_state(params), config.component_name
            ),
        )
        report = PipelineReport(
            param_summary=param_summary,
            per_hole_status=synthesis.per_hole,
            provenance="enumerative",
            verified=True,
            reason=None,
            candidates_visited=synthesis.candidates_visited,
            diagnostics=synthesis.diagnostics,
            timings=timings,
        )
        return PipelineResult(component, report, prompt_text, elab, synthesis)

    if client is None:
        client = make_client(config)
    if client is None:
        raise PipelineError(
            "synthesize",
            f"enumerative synthesis failed ({synthesis.reason}) and the LLM fallback is off",
            [f"hole ${k}: {v.get('status')}" for k, v in sorted(synthesis.per_hole.items())],
        )

    bundle = build_prompt(prompt_text)
    limits = Limits(max_tokens=config.max_tokens, timeout_seconds=config.timeout_seconds)
    try:
        response = timed("complete", lambda: client.complete(bundle, limits))
    except ClientError as exc:
        raise PipelineError("complete", str(exc)) from exc
    try:
        code = extract_component(response)
    except CodeExtractError as exc:
        raise PipelineError("llm-extract", str(exc)) from exc

    outcome = timed("verify", lambda: validate_output(code, elab, timelines, sketch))
    component = ComponentSource(
        text=outcome.code,
        provenance="llm",
        verified=outcome.verified,
        reason=outcome.reason,
    )
    report = PipelineReport(
        param_summary=param_summary,
        per_hole_status=synthesis.per_hole,
        provenance="llm",
        verified=outcome.verified,
        reason=outcome.reason or f"enumerative: {synthesis.reason}",
        candidates_visited=synthesis.candidates_visited,
        diagnostics=synthesis.diagnostics,
        timings=timings,
    )
    return PipelineResult(component, report, prompt_text, elab, synthesis)
