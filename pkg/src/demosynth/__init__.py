"""demosynth: synthesize stateful React components from mockup demos."""

from .codegen import ComponentSource, emit_component, match_component, parse_component
from .errors import DemosynthError
from .extraction import elaborate_sketch, extract_params, state_traces
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .sketch import SketchTree, collect_holes, parse_sketch, print_sketch, resolve
from .synthesis import replay, synthesize_enumerative
from .template import initial_state, match_state, render_state
from .timeline import (
    DemoTimeline,
    apply_action,
    apply_edit,
    snapshots,
    timeline_from_json,
    timeline_to_json,
    validate_timeline,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentSource",
    "DemoTimeline",
    "DemosynthError",
    "PipelineConfig",
    "PipelineError",
    "SketchTree",
    "apply_action",
    "apply_edit",
    "collect_holes",
    "elaborate_sketch",
    "emit_component",
    "extract_params",
    "initial_state",
    "match_component",
    "match_state",
    "parse_component",
    "parse_sketch",
    "print_sketch",
    "render_state",
    "replay",
    "resolve",
    "run_pipeline",
    "snapshots",
    "state_traces",
    "synthesize_enumerative",
    "timeline_from_json",
    "timeline_to_json",
    "validate_timeline",
]
