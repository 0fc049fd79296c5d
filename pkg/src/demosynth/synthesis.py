"""Enumerative handler synthesis with exact replay verification.

Each hole is solved independently: candidates stream out in nondecreasing
program size (size = AST node count summed over assignments) and the
first one that reproduces every trace entry for that hole, across all
timelines, wins. Ordering inside one size follows grammar production
order, then literal pool order; binary operators iterate their right
operand in the outer loop. The order is part of the contract: identical
inputs give identical results, including the number of candidates
visited.

Literal pools are seeded with {0, 1} and {""} and extended with the
constants observed in the hole's own trace entries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .dsl import (
    EMPTY_PROGRAM,
    Add,
    Append,
    Concat,
    EmptyList,
    EvalError,
    Expr,
    HandlerProgram,
    IntLit,
    ItemIndex,
    Payload,
    Prepend,
    Record,
    RemoveAt,
    StrLit,
    Sub,
    Var,
    eval_program,
    pretty_program,
)
from .errors import DemosynthError
from .extraction import StateTrace, TraceEntry
from .sketch import Element, SketchTree, resolve
from .template import (
    NUM,
    ElaboratedSketch,
    ParamSet,
    RenderError,
    initial_state,
    input_param_at,
    item_index_of,
    render_state,
)
from .timeline import DemoTimeline, TextInput, element_hole, snapshots


class MissingHandlerError(DemosynthError):
    pass


@dataclass(frozen=True)
class HoleContext:
    has_payload: bool = False
    has_item_index: bool = False
    int_pool: tuple[int, ...] = (0, 1)
    str_pool: tuple[str, ...] = ("",)


@dataclass(frozen=True)
class Budget:
    max_size: int = 5
    max_candidates: int = 100_000


@dataclass
class SynthesisResult:
    status: str  # "solved" | "failed"
    handlers: dict  # hole id -> HandlerProgram (complete when solved)
    candidates_visited: int
    reason: Optional[str] = None  # "budget" | "no-candidate" when failed
    per_hole: dict = field(default_factory=dict)  # hole id -> status dict
    diagnostics: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "solved"


@dataclass(frozen=True)
class Pass:
    pass


@dataclass(frozen=True)
class Mismatch:
    step_index: int
    expected: Optional[SketchTree]
    actual: Optional[SketchTree]
    message: str = ""


ReplayOutcome = Union[Pass, Mismatch]


# ---------------------------------------------------------------------------
# Candidate enumeration


class _ExprSpace:
    """Memoized per-type expression enumeration at exact sizes."""

    def __init__(self, params: ParamSet, ctx: HoleContext):
        self.params = params
        self.ctx = ctx
        self.num_params = [p.name for p in params.scalars() if p.value_type == NUM]
        self.str_params = [p.name for p in params.scalars() if p.value_type != NUM]
        self.regions = {p.name: p for p in params.regions()}
        self._cache: dict = {}

    def exprs(self, kind: tuple, size: int) -> list[Expr]:
        key = (kind, size)
        if key not in self._cache:
            self._cache[key] = list(self._build(kind, size))
        return self._cache[key]

    def _binary(self, ctor, left_kind, right_kind, size) -> Iterator[Expr]:
        # right operand in the outer loop: at equal size, param-left forms
        # come before literal-left forms only by construction of size-1
        # ordering, which is what puts s1 + 1 ahead of 1 + s1's mirror image
        for right_size in range(1, size - 1):
            left_size = size - 1 - right_size
            for right in self.exprs(right_kind, right_size):
                for left in self.exprs(left_kind, left_size):
                    yield ctor(left, right)

    def _build(self, kind: tuple, size: int) -> Iterator[Expr]:
        if size < 1:
            return
        if kind[0] == "num":
            if size == 1:
                for n in self.ctx.int_pool:
                    yield IntLit(n)
                for name in self.num_params:
                    yield Var(name)
            else:
                yield from self._binary(Add, ("num",), ("num",), size)
                yield from self._binary(Sub, ("num",), ("num",), size)
        elif kind[0] == "str":
            if size == 1:
                for s in self.ctx.str_pool:
                    yield StrLit(s)
                for name in self.str_params:
                    yield Var(name)
                if self.ctx.has_payload:
                    yield Payload()
            else:
                yield from self._binary(Concat, ("str",), ("str",), size)
        elif kind[0] == "idx":
            if size == 1:
                if self.ctx.has_item_index:
                    yield ItemIndex()
                for n in self.ctx.int_pool:
                    yield IntLit(n)
        elif kind[0] == "item":
            region = self.regions[kind[1]]
            fields = region.fields
            if size < 1 + len(fields):
                return
            for sizes in _compositions(size - 1, len(fields)):
                for combo in self._field_combos(fields, sizes, 0):
                    yield Record(tuple(zip((f.name for f in fields), combo)))
        elif kind[0] == "list":
            region_name = kind[1]
            if size == 1:
                yield Var(region_name)
                yield EmptyList()
            else:
                yield from self._binary(Append, ("list", region_name), ("item", region_name), size)
                yield from self._binary(Prepend, ("list", region_name), ("item", region_name), size)
                yield from self._binary(RemoveAt, ("list", region_name), ("idx",), size)
        else:
            raise ValueError(f"unknown expression kind {kind!r}")

    def _field_combos(self, fields, sizes, i):
        if i == len(fields):
            yield ()
            return
        kind = ("num",) if fields[i].value_type == NUM else ("str",)
        for expr in self.exprs(kind, sizes[i]):
            for rest in self._field_combos(fields, sizes, i + 1):
                yield (expr,) + rest

    def kind_of(self, name: str) -> tuple:
        if name in self.num_params:
            return ("num",)
        if name in self.str_params:
            return ("str",)
        if name in self.regions:
            return ("list", name)
        raise KeyError(name)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to split `total` into `parts` positive integers, first part
    varying slowest in ascending order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_programs(
    params: ParamSet, ctx: HoleContext, max_size: int
) -> Iterator[HandlerProgram]:
    """Well-typed candidate programs in nondecreasing size, deterministic."""
    space = _ExprSpace(params, ctx)
    names = [p.name for p in params]
    yield EMPTY_PROGRAM
    for total in range(1, max_size + 1):
        for subset_size in range(1, len(names) + 1):
            if subset_size > total:
                break
            for subset in itertools.combinations(range(len(names)), subset_size):
                for sizes in _compositions(total, subset_size):
                    chosen = [names[i] for i in subset]
                    for combo in _assignment_combos(space, chosen, sizes, 0):
                        yield HandlerProgram(tuple(zip(chosen, combo)))


def _assignment_combos(space: _ExprSpace, names, sizes, i):
    if i == len(names):
        yield ()
        return
    for expr in space.exprs(space.kind_of(names[i]), sizes[i]):
        for rest in _assignment_combos(space, names, sizes, i + 1):
            yield (expr,) + rest


# ---------------------------------------------------------------------------
# Checking and synthesis


def check_candidate(prog: HandlerProgram, entries: list[TraceEntry]) -> bool:
    """True iff the program maps every entry's before-state (with payload
    and item index) exactly onto its after-state."""
    for entry in entries:
        try:
            result = eval_program(prog, entry.state_before, entry.payload, entry.item_index)
        except EvalError:
            return False
        if result != entry.state_after:
            return False
    return True


def hole_context(params: ParamSet, entries: list[TraceEntry]) -> HoleContext:
    has_payload = bool(entries) and all(e.payload is not None for e in entries)
    has_item_index = bool(entries) and all(e.item_index is not None for e in entries)
    ints: set[int] = set()
    strs: set[str] = set()

    def collect(value):
        if isinstance(value, bool):
            return
        if isinstance(value, int):
            ints.add(value)
        elif isinstance(value, str):
            strs.add(value)
        elif isinstance(value, list):
            for rec in value:
                for v in rec.values():
                    collect(v)

    for e in entries:
        for state in (e.state_before, e.state_after):
            for v in state.values():
                collect(v)
        if e.payload is not None:
            strs.add(e.payload)
        if e.item_index is not None:
            ints.add(e.item_index)

    int_pool = (0, 1) + tuple(sorted(ints - {0, 1}))
    str_pool = ("",) + tuple(sorted(strs - {""}))
    return HoleContext(has_payload, has_item_index, int_pool, str_pool)


def implicit_input_program(param: str) -> HandlerProgram:
    """The controlled-input update assumed for inputs without a handler hole."""
    return HandlerProgram(((param, Payload()),))


def synthesize_enumerative(
    elab: ElaboratedSketch, traces: list[StateTrace], budget: Budget = Budget()
) -> SynthesisResult:
    """Smallest-first search per hole; Solved only when every hole (and every
    implicit input transition) is explained across all timelines."""
    entries_by_hole: dict = {}
    for trace in traces:
        for entry in trace.entries:
            entries_by_hole.setdefault(entry.hole_id, []).append(entry)

    diagnostics: list[str] = []
    per_hole: dict = {}
    handlers: dict = {}
    visited = 0

    # hole-less inputs must follow the fixed controlled-input program
    for entry in entries_by_hole.get(None, []):
        param = _entry_input_param(elab, entry)
        expected = dict(entry.state_before)
        expected[param] = entry.payload
        if expected != entry.state_after:
            return SynthesisResult(
                status="failed",
                handlers={},
                candidates_visited=0,
                reason="no-candidate",
                per_hole={},
                diagnostics=[
                    f"text input on a hole-less input (param {param}) caused changes the "
                    "controlled-input update cannot explain"
                ],
            )

    hole_ids = sorted({site.hole_id for site in elab.holes})
    for hole_id in hole_ids:
        entries = entries_by_hole.get(hole_id, [])
        if not entries:
            handlers[hole_id] = EMPTY_PROGRAM
            per_hole[hole_id] = {"status": "empty", "program": pretty_program(EMPTY_PROGRAM)}
            diagnostics.append(f"hole ${hole_id} was never exercised; leaving it a no-op")
            continue
        ctx = hole_context(elab.params, entries)
        found = None
        for prog in enumerate_programs(elab.params, ctx, budget.max_size):
            visited += 1
            if visited > budget.max_candidates:
                per_hole[hole_id] = {"status": "budget"}
                return SynthesisResult(
                    status="failed",
                    handlers=handlers,
                    candidates_visited=visited,
                    reason="budget",
                    per_hole=per_hole,
                    diagnostics=diagnostics,
                )
            if check_candidate(prog, entries):
                found = prog
                break
        if found is None:
            per_hole[hole_id] = {"status": "no-candidate"}
            return SynthesisResult(
                status="failed",
                handlers=handlers,
                candidates_visited=visited,
                reason="no-candidate",
                per_hole=per_hole,
                diagnostics=diagnostics,
            )
        handlers[hole_id] = found
        per_hole[hole_id] = {
            "status": "solved",
            "program": pretty_program(found),
            "size": found.size(),
        }
    return SynthesisResult(
        status="solved",
        handlers=handlers,
        candidates_visited=visited,
        per_hole=per_hole,
        diagnostics=diagnostics,
    )


def _entry_input_param(elab: ElaboratedSketch, entry: TraceEntry) -> str:
    tree = render_state(elab, entry.state_before)
    param = input_param_at(elab, tree, entry.occurrence_path)
    if param is None:
        raise MissingHandlerError(
            f"text input at {list(entry.occurrence_path)} hits an input with no value parameter"
        )
    return param


# ---------------------------------------------------------------------------
# Replay verification


def replay(
    elab: ElaboratedSketch,
    handlers: dict,
    timeline: DemoTimeline,
    sketch: SketchTree,
    extra_initial: Optional[dict] = None,
    input_programs: Optional[dict] = None,
) -> ReplayOutcome:
    """Execute handlers over the timeline's actions and compare each rendered
    tree with the recorded snapshot; exact equality or Mismatch.

    `extra_initial` seeds state variables beyond the extracted parameters
    (latent state in foreign components); `input_programs` overrides the
    controlled-input update per value parameter.
    """
    expected = snapshots(sketch, timeline)
    state = initial_state(elab.params)
    if extra_initial:
        state.update(extra_initial)
    rendered = render_state(elab, state)

    for i, step in enumerate(timeline.steps):
        action = step.action
        target = resolve(rendered, action.path)
        if not isinstance(target, Element):
            return Mismatch(i, expected[i + 1], None, "action target is not an element")
        payload: Optional[str] = None
        if isinstance(action, TextInput):
            payload = action.value
            hole = element_hole(target, "onChange")
        else:
            hole = element_hole(target, "onClick")
        item_index = item_index_of(elab, rendered, action.path)

        if hole is not None:
            if hole not in handlers:
                raise MissingHandlerError(f"no handler for hole ${hole}")
            prog = handlers[hole]
        elif isinstance(action, TextInput):
            param = input_param_at(elab, rendered, action.path)
            if param is None:
                return Mismatch(i, expected[i + 1], None, "typed into an input with no value parameter")
            prog = (input_programs or {}).get(param, implicit_input_program(param))
        else:
            return Mismatch(i, expected[i + 1], None, "click on an element with no handler")

        try:
            state = eval_program(prog, state, payload, item_index)
            rendered = render_state(elab, state)
        except (EvalError, RenderError) as exc:
            return Mismatch(i, expected[i + 1], None, f"handler evaluation failed: {exc}")
        if rendered != expected[i + 1]:
            return Mismatch(i, expected[i + 1], rendered, "rendered tree differs from snapshot")
    return Pass()
