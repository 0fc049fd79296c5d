"""Command line interface: a thin wrapper over the pipeline.

Exit codes: 0 success / replay pass, 1 synthesis failure or replay
mismatch (or any domain error), 2 usage errors such as missing files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DemosynthError


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise _Usage(f"cannot read {path}: {exc}") from exc


class _Usage(Exception):
    pass


def _load_config_file(path: str) -> dict:
    data = json.loads(_read_file(path))
    if not isinstance(data, dict):
        raise _Usage(f"{path}: config must be a JSON object")
    return data


def _load_timelines(paths: list[str]):
    from .timeline import timeline_from_json

    timelines = []
    for path in paths:
        try:
            timelines.append(timeline_from_json(json.loads(_read_file(path))))
        except json.JSONDecodeError as exc:
            raise _Usage(f"{path}: not valid JSON: {exc}") from exc
    return timelines


def _pipeline_config(args) -> "PipelineConfig":
    from .pipeline import PipelineConfig

    overrides = {}
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
        mapping = {
            "llm": "llm_mode",
            "maxSize": "max_size",
            "maxCandidates": "max_candidates",
            "componentName": "component_name",
            "llmEndpoint": "llm_endpoint",
            "llmModel": "llm_model",
            "llmApiKey": "llm_api_key",
        }
        for key, value in raw.items():
            if key not in mapping:
                raise _Usage(f"{args.config}: unknown config key {key!r}")
            overrides[mapping[key]] = value
    if getattr(args, "llm", None):
        overrides["llm_mode"] = args.llm
    if getattr(args, "max_size", None) is not None:
        overrides["max_size"] = args.max_size
    if getattr(args, "max_candidates", None) is not None:
        overrides["max_candidates"] = args.max_candidates
    if getattr(args, "component_name", None):
        overrides["component_name"] = args.component_name
    return PipelineConfig.from_env(**overrides)


def _cmd_synth(args) -> int:
    from .llm import build_prompt, canonical_prompt_text
    from .pipeline import PipelineError, run_pipeline
    from .template import elaborated_to_json

    source = _read_file(args.sketch)
    timelines = _load_timelines(args.timeline)
    config = _pipeline_config(args)
    try:
        result = run_pipeline(source, timelines, config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.diagnostics:
            print(f"  {d}", file=sys.stderr)
        return 1

    if args.emit == "elaborated":
        print(json.dumps(elaborated_to_json(result.elaborated), indent=2))
    elif args.emit == "synthesis":
        synth = result.synthesis
        print(
            json.dumps(
                {
                    "status": synth.status,
                    "reason": synth.reason,
                    "candidatesVisited": synth.candidates_visited,
                    "perHole": {str(k): v for k, v in sorted(synth.per_hole.items())},
                    "diagnostics": synth.diagnostics,
                },
                indent=2,
            )
        )
    elif args.emit == "prompt":
        print(canonical_prompt_text(build_prompt(result.prompt_text)))

    out_path = Path(args.out)
    out_path.write_text(result.component.text)
    if args.report:
        Path(args.report).write_text(json.dumps(result.report.to_json(), indent=2) + "\n")
    status = "verified" if result.component.verified else f"unverified ({result.component.reason})"
    if not args.emit:
        print(
            f"{result.component.provenance} component, {status}, "
            f"{result.report.candidates_visited} candidates visited -> {out_path}"
        )
    return 0


def _cmd_verify(args) -> int:
    from .codegen import ComponentParseError, MatchError, match_component, parse_component
    from .extraction import ExtractError, elaborate_sketch, extract_params, state_traces
    from .sketch import parse_sketch
    from .synthesis import MissingHandlerError, Pass, replay
    from .template import TraceError

    source = _read_file(args.sketch)
    timelines = _load_timelines(args.timeline)
    code = _read_file(args.component)
    try:
        sketch = parse_sketch(source)
        params = extract_params(sketch, timelines)
        elab = elaborate_sketch(sketch, params)
        state_traces(elab, timelines)
    except (DemosynthError, ExtractError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        bound = match_component(parse_component(code), elab)
    except ComponentParseError as exc:
        print(f"unparseable component: {exc}")
        return 1
    except MatchError as exc:
        print(f"component does not match the sketch: {exc}")
        return 1
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
            print(f"FAIL: {exc}")
            return 1
        if not isinstance(outcome, Pass):
            print(f"MISMATCH at step {outcome.step_index} (timeline {timeline.id})")
            if outcome.message:
                print(f"  {outcome.message}")
            return 1
    print("PASS")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_fmt(args) -> int:
    from .sketch import ParseError, parse_sketch, print_sketch

    source = _read_file(args.sketch)
    try:
        sys.stdout.write(print_sketch(parse_sketch(source)))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="demosynth",
        description="Synthesize stateful React components from mockup demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a component from a sketch and timelines")
    synth.add_argument("--sketch", required=True, help="path to the .sketch.jsx file")
    synth.add_argument(
        "--timeline", required=True, action="append", help="path to a .timeline.json file (repeatable)"
    )
    synth.add_argument("--llm", choices=["mock", "http", "off"], default=None)
    synth.add_argument("--out", default="Component.jsx", help="output component file")
    synth.add_argument("--report", default=None, help="write the pipeline report JSON here")
    synth.add_argument("--emit", choices=["elaborated", "synthesis", "prompt"], default=None)
    synth.add_argument("--max-size", type=int, default=None, dest="max_size")
    synth.add_argument("--max-candidates", type=int, default=None, dest="max_candidates")
    synth.add_argument("--component-name", default=None, dest="component_name")
    synth.add_argument("--config", default=None, help="JSON config file")
    synth.set_defaults(fn=_cmd_synth)

    verify = sub.add_parser("verify", help="replay a component against timelines")
    verify.add_argument("--sketch", required=True)
    verify.add_argument("--timeline", required=True, action="append")
    verify.add_argument("--component", required=True)
    verify.set_defaults(fn=_cmd_verify)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8400)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--static", default=None, help="serve a studio build from this directory")
    serve.set_defaults(fn=_cmd_serve)

    fmt = sub.add_parser("fmt", help="canonically format a sketch")
    fmt.add_argument("--sketch", required=True)
    fmt.set_defaults(fn=_cmd_fmt)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DemosynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
