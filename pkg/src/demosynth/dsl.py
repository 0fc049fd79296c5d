"""The typed state-update DSL that handler synthesis searches over.

Expressions are small on purpose: integer arithmetic limited to + and -,
string concatenation, and list append/prepend/remove-at. There are no
conditionals; behavior that needs hidden modes is out of reach of this
language by design and routes to the LLM fallback.

A handler program is a partial map from parameter names to expressions;
parameters it does not mention are left unchanged (frame condition).
Evaluation is dynamically typed and turns every type error into EvalError
so candidate checking can treat failures as plain rejections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Payload:
    pass


@dataclass(frozen=True)
class ItemIndex:
    pass


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Concat:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class EmptyList:
    pass


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, "Expr"], ...]


@dataclass(frozen=True)
class Append:
    items: "Expr"
    item: Record


@dataclass(frozen=True)
class Prepend:
    items: "Expr"
    item: Record


@dataclass(frozen=True)
class RemoveAt:
    items: "Expr"
    index: "Expr"


Expr = Union[
    IntLit, StrLit, Var, Payload, ItemIndex, Add, Sub, Concat, EmptyList, Record, Append, Prepend, RemoveAt
]


def expr_size(e: Expr) -> int:
    if isinstance(e, (IntLit, StrLit, Var, Payload, ItemIndex, EmptyList)):
        return 1
    if isinstance(e, (Add, Sub, Concat)):
        return 1 + expr_size(e.left) + expr_size(e.right)
    if isinstance(e, Record):
        return 1 + sum(expr_size(v) for _, v in e.fields)
    if isinstance(e, (Append, Prepend)):
        return 1 + expr_size(e.items) + expr_size(e.item)
    if isinstance(e, RemoveAt):
        return 1 + expr_size(e.items) + expr_size(e.index)
    raise TypeError(f"unknown expression {e!r}")


@dataclass(frozen=True)
class HandlerProgram:
    """Assignments in canonical parameter order; absent params are unchanged."""

    assignments: tuple[tuple[str, Expr], ...] = ()

    def size(self) -> int:
        return sum(expr_size(e) for _, e in self.assignments)


EMPTY_PROGRAM = HandlerProgram(())


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"expected an integer, got {v!r}")
    return v


def _as_str(v) -> str:
    if not isinstance(v, str):
        raise EvalError(f"expected a string, got {v!r}")
    return v


def _as_list(v) -> list:
    if not isinstance(v, list):
        raise EvalError(f"expected a list, got {v!r}")
    return v


def eval_expr(e: Expr, state: dict, payload: Optional[str], item_index: Optional[int]):
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, StrLit):
        return e.value
    if isinstance(e, Var):
        if e.name not in state:
            raise EvalError(f"unknown state variable {e.name}")
        return state[e.name]
    if isinstance(e, Payload):
        if payload is None:
            raise EvalError("no payload for this event")
        return payload
    if isinstance(e, ItemIndex):
        if item_index is None:
            raise EvalError("no item index for this event")
        return item_index
    if isinstance(e, Add):
        return _as_int(eval_expr(e.left, state, payload, item_index)) + _as_int(
            eval_expr(e.right, state, payload, item_index)
        )
    if isinstance(e, Sub):
        return _as_int(eval_expr(e.left, state, payload, item_index)) - _as_int(
            eval_expr(e.right, state, payload, item_index)
        )
    if isinstance(e, Concat):
        return _as_str(eval_expr(e.left, state, payload, item_index)) + _as_str(
            eval_expr(e.right, state, payload, item_index)
        )
    if isinstance(e, EmptyList):
        return []
    if isinstance(e, Record):
        return {name: eval_expr(v, state, payload, item_index) for name, v in e.fields}
    if isinstance(e, Append):
        items = _as_list(eval_expr(e.items, state, payload, item_index))
        return items + [eval_expr(e.item, state, payload, item_index)]
    if isinstance(e, Prepend):
        items = _as_list(eval_expr(e.items, state, payload, item_index))
        return [eval_expr(e.item, state, payload, item_index)] + items
    if isinstance(e, RemoveAt):
        items = _as_list(eval_expr(e.items, state, payload, item_index))
        index = _as_int(eval_expr(e.index, state, payload, item_index))
        if not 0 <= index < len(items):
            raise EvalError(f"remove index {index} out of bounds")
        return items[:index] + items[index + 1 :]
    raise EvalError(f"unknown expression {e!r}")


def eval_program(
    prog: HandlerProgram, state: dict, payload: Optional[str] = None, item_index: Optional[int] = None
) -> dict:
    """New state after the handler; every expression reads the old state."""
    new_state = dict(state)
    for name, expr in prog.assignments:
        new_state[name] = eval_expr(expr, state, payload, item_index)
    return new_state


# ---------------------------------------------------------------------------
# Pretty-printing (reports, prompts, debug dumps)


def pretty_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        import json

        return json.dumps(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Payload):
        return "payload"
    if isinstance(e, ItemIndex):
        return "index"
    if isinstance(e, (Add, Sub, Concat)):
        op = "-" if isinstance(e, Sub) else "+"
        right = pretty_expr(e.right)
        if isinstance(e.right, (Add, Sub, Concat)):
            right = f"({right})"
        return f"{pretty_expr(e.left)} {op} {right}"
    if isinstance(e, EmptyList):
        return "[]"
    if isinstance(e, Record):
        inner = ", ".join(f"{n}: {pretty_expr(v)}" for n, v in e.fields)
        return "{" + inner + "}"
    if isinstance(e, Append):
        return f"append({pretty_expr(e.items)}, {pretty_expr(e.item)})"
    if isinstance(e, Prepend):
        return f"prepend({pretty_expr(e.items)}, {pretty_expr(e.item)})"
    if isinstance(e, RemoveAt):
        return f"removeAt({pretty_expr(e.items)}, {pretty_expr(e.index)})"
    raise TypeError(f"unknown expression {e!r}")


def pretty_program(prog: HandlerProgram) -> str:
    if not prog.assignments:
        return "(no change)"
    return "; ".join(f"{name} = {pretty_expr(e)}" for name, e in prog.assignments)
