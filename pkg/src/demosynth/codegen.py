"""Deterministic React component emission and its verification inverse.

emit_component prints a single function component in a fixed, restricted
shape: useState declarations in canonical parameter order, one arrow
handler per hole, and one JSX return whose reactive slots mirror the
elaborated template. Output is byte-identical across runs.

parse_component accepts exactly that restricted shape (modulo whitespace,
reordered state declarations, extra state variables, and any handler body
expressible in the update DSL) and match_component binds a parsed
component back onto an elaborated sketch so replay can verify foreign
code, LLM output included. Components that fall outside the shape raise
ComponentParseError / MatchError naming the first unsupported construct;
callers surface those as Unverified rather than crashing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Union

from .dsl import (
    Add,
    Append,
    Concat,
    EmptyList,
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
)
from .errors import DemosynthError
from .sketch import Hole, NAMED_ENTITIES, Text
from .template import (
    NUM,
    ElaboratedSketch,
    FieldRef,
    ListRegionParam,
    ParamRef,
    RepeatNode,
    ScalarParam,
    TAttr,
    TElement,
    TNode,
)

COMPONENT_NAME_RE = re.compile(r"[A-Z][A-Za-z0-9_]*$")


class CodegenError(DemosynthError):
    pass


class ComponentParseError(DemosynthError):
    pass


class MatchError(DemosynthError):
    pass


@dataclass(frozen=True)
class ComponentSource:
    text: str
    provenance: str  # "enumerative" | "llm"
    verified: bool
    reason: Optional[str] = None


@dataclass(frozen=True)
class BoundComponent:
    """A foreign component bound onto an elaborated sketch for replay."""

    handlers: dict  # hole id -> HandlerProgram
    extra_initial: dict  # latent state vars -> initial value
    input_programs: dict  # value param -> HandlerProgram


# ---------------------------------------------------------------------------
# Emission


def _setter(name: str) -> str:
    return "set" + name[0].upper() + name[1:]


def _uses(expr: Expr, kind) -> bool:
    if isinstance(expr, kind):
        return True
    if isinstance(expr, (Add, Sub, Concat)):
        return _uses(expr.left, kind) or _uses(expr.right, kind)
    if isinstance(expr, Record):
        return any(_uses(v, kind) for _, v in expr.fields)
    if isinstance(expr, (Append, Prepend)):
        return _uses(expr.items, kind) or _uses(expr.item, kind)
    if isinstance(expr, RemoveAt):
        return _uses(expr.items, kind) or _uses(expr.index, kind)
    return False


def _program_uses(prog: HandlerProgram, kind) -> bool:
    return any(_uses(e, kind) for _, e in prog.assignments)


def _js_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return json.dumps(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Payload):
        return "e.target.value"
    if isinstance(e, ItemIndex):
        return "i"
    if isinstance(e, (Add, Sub, Concat)):
        op = "-" if isinstance(e, Sub) else "+"
        right = _js_expr(e.right)
        if isinstance(e.right, (Add, Sub, Concat)):
            right = f"({right})"
        return f"{_js_expr(e.left)} {op} {right}"
    if isinstance(e, EmptyList):
        return "[]"
    if isinstance(e, Record):
        inner = ", ".join(f"{n}: {_js_expr(v)}" for n, v in e.fields)
        return "{ " + inner + " }"
    if isinstance(e, Append):
        return f"[...{_js_expr(e.items)}, {_js_expr(e.item)}]"
    if isinstance(e, Prepend):
        return f"[{_js_expr(e.item)}, ...{_js_expr(e.items)}]"
    if isinstance(e, RemoveAt):
        return f"{_js_expr(e.items)}.filter((_, j) => j !== {_js_expr(e.index)})"
    raise CodegenError(f"cannot emit expression {e!r}")


def _js_literal(value) -> str:
    if isinstance(value, bool):
        raise CodegenError("boolean state is not supported")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        parts = []
        for rec in value:
            inner = ", ".join(f"{k}: {_js_literal(v)}" for k, v in rec.items())
            parts.append("{ " + inner + " }")
        return "[" + ", ".join(parts) + "]"
    raise CodegenError(f"cannot emit initial value {value!r}")


def _escape_jsx_text(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace("{", "&#123;")
        .replace("}", "&#125;")
    )


def _escape_jsx_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;")


def _hole_ref(hole_id: int, handlers: dict, in_repeat: bool) -> str:
    prog = handlers[hole_id]
    uses_payload = _program_uses(prog, Payload)
    uses_index = _program_uses(prog, ItemIndex)
    name = f"h{hole_id}"
    if in_repeat and uses_index:
        return f"{{(e) => {name}(e, i)}}" if uses_payload else f"{{() => {name}(i)}}"
    return f"{{{name}}}"


def _attr_text(a: TAttr, handlers: dict, in_repeat: bool) -> str:
    if isinstance(a.value, Hole):
        return f"{a.name}={_hole_ref(a.value.id, handlers, in_repeat)}"
    if isinstance(a.value, ParamRef):
        return f"{a.name}={{{a.value.param}}}"
    if isinstance(a.value, FieldRef):
        return f"{a.name}={{item.{a.value.field}}}"
    return f'{a.name}="{_escape_jsx_attr(a.value)}"'


def _inline_child(child: TNode) -> Optional[str]:
    if isinstance(child, Text):
        return _escape_jsx_text(child.value)
    if isinstance(child, ParamRef):
        return f"{{{child.param}}}"
    if isinstance(child, FieldRef):
        return f"{{item.{child.field}}}"
    return None


def _jsx_lines(
    tel: TElement, handlers: dict, depth: int, in_repeat: bool, inject_key: bool = False
) -> list[str]:
    pad = "  " * depth
    attr_parts = []
    if inject_key:
        attr_parts.append("key={i}")
    attr_parts += [_attr_text(a, handlers, in_repeat) for a in tel.attrs]
    if _needs_change_handler(tel):
        value_param = next(
            a.value.param for a in tel.attrs if a.name == "value" and isinstance(a.value, ParamRef)
        )
        attr_parts.append(f"onChange={{(e) => {_setter(value_param)}(e.target.value)}}")
    open_tag = f"<{tel.tag}" + ("" if not attr_parts else " " + " ".join(attr_parts))
    if not tel.children:
        return [f"{pad}{open_tag} />"]
    if len(tel.children) == 1:
        inline = _inline_child(tel.children[0])
        if inline is not None:
            return [f"{pad}{open_tag}>{inline}</{tel.tag}>"]
    lines = [f"{pad}{open_tag}>"]
    for child in tel.children:
        if isinstance(child, RepeatNode):
            assert isinstance(child.item, TElement)
            lines.append(f"{pad}  {{{child.param}.map((item, i) => (")
            lines.extend(_jsx_lines(child.item, handlers, depth + 2, True, inject_key=True))
            lines.append(f"{pad}  ))}}")
        elif isinstance(child, TElement):
            lines.extend(_jsx_lines(child, handlers, depth + 1, in_repeat))
        else:
            inline = _inline_child(child)
            assert inline is not None
            lines.append(f"{pad}  {inline}")
    lines.append(f"{pad}</{tel.tag}>")
    return lines


def _needs_change_handler(tel: TElement) -> bool:
    if tel.tag not in ("input", "textarea"):
        return False
    has_value_param = any(
        a.name == "value" and isinstance(a.value, ParamRef) for a in tel.attrs
    )
    has_handler = any(a.name.startswith("on") for a in tel.attrs)
    return has_value_param and not has_handler


def emit_component(
    elab: ElaboratedSketch,
    handlers: dict,
    initial: dict,
    name: str = "Component",
) -> ComponentSource:
    """Emit the synthesized component; byte-identical for identical inputs."""
    if not COMPONENT_NAME_RE.match(name):
        raise CodegenError(f"invalid component name {name!r}")
    hole_ids = sorted({site.hole_id for site in elab.holes})
    for hole_id in hole_ids:
        if hole_id not in handlers:
            raise CodegenError(f"no handler for hole ${hole_id}")

    lines = [f"function {name}() {{"]
    for p in elab.params:
        lines.append(f"  const [{p.name}, {_setter(p.name)}] = useState({_js_literal(initial[p.name])});")
    for hole_id in hole_ids:
        prog = handlers[hole_id]
        params = []
        if _program_uses(prog, Payload):
            params.append("e")
        if _program_uses(prog, ItemIndex):
            params.append("i")
        sig = ", ".join(params)
        if not prog.assignments:
            lines.append(f"  const h{hole_id} = ({sig}) => {{}};")
            continue
        lines.append(f"  const h{hole_id} = ({sig}) => {{")
        for pname, expr in prog.assignments:
            lines.append(f"    {_setter(pname)}({_js_expr(expr)});")
        lines.append("  };")
    lines.append("  return (")
    lines.extend(_jsx_lines(elab.template, handlers, 2, False))
    lines.append("  );")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    return ComponentSource(text=text, provenance="enumerative", verified=True)


# ---------------------------------------------------------------------------
# Parsing (restricted component form)


@dataclass(frozen=True)
class JNum:
    value: int


@dataclass(frozen=True)
class JStr:
    value: str


@dataclass(frozen=True)
class JVar:
    name: str


@dataclass(frozen=True)
class JTargetValue:
    var: str


@dataclass(frozen=True)
class JBin:
    op: str  # "+" | "-"
    left: "JsExpr"
    right: "JsExpr"


@dataclass(frozen=True)
class JArray:
    parts: tuple  # ("spread", JsExpr) | ("item", JsExpr)


@dataclass(frozen=True)
class JObject:
    fields: tuple  # (name, JsExpr)


@dataclass(frozen=True)
class JFilter:
    items: "JsExpr"
    index_var: str
    compare: "JsExpr"


JsExpr = Union[JNum, JStr, JVar, JTargetValue, JBin, JArray, JObject, JFilter]


@dataclass
class ParsedHandler:
    params: list[str]
    calls: list[tuple[str, JsExpr]]  # (setter name, argument)


@dataclass
class PElement:
    tag: str
    attrs: list  # (name, str | XExpr)
    children: list  # PElement | PText | XExpr


@dataclass
class PText:
    value: str


@dataclass(frozen=True)
class XVar:
    name: str


@dataclass(frozen=True)
class XField:
    obj: str
    prop: str


@dataclass
class XMap:
    list_var: str
    item_var: str
    index_var: Optional[str]
    element: PElement


@dataclass
class XArrow:
    params: list[str]
    calls: list[tuple[str, list]]  # (callee, [JsExpr args])


XExpr = Union[XVar, XField, XMap, XArrow]


@dataclass
class ParsedComponent:
    name: str
    state: list[tuple[str, object]]
    handlers: dict
    template: PElement


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+|//[^\n]*|/\*.*?\*/)
      | (?P<arrow>=>)
      | (?P<neq>!==)
      | (?P<spread>\.\.\.)
      | (?P<num>\d+)
      | (?P<str>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
      | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
      | (?P<punct>[()\[\]{},;:.=+\-<>/!])
    """,
    re.VERBOSE | re.DOTALL,
)


class _Tok:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos


class _Cursor:
    """Token reader over the source that can also hand character-level
    control to the JSX parser at the same position."""

    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def error(self, message: str) -> ComponentParseError:
        line = self.src.count("\n", 0, self.pos) + 1
        return ComponentParseError(f"line {line}: {message}")

    def _scan(self, pos: int) -> Optional[_Tok]:
        while pos < len(self.src):
            m = _TOKEN_RE.match(self.src, pos)
            if m is None:
                raise self.error(f"unsupported construct: {self.src[pos]!r}")
            if m.lastgroup == "ws":
                pos = m.end()
                continue
            return _Tok(m.lastgroup, m.group(), pos)
        return None

    def peek(self) -> Optional[_Tok]:
        return self._scan(self.pos)

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos = tok.pos + len(tok.value)
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.value == value

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.next()
            return True
        return False

    def expect(self, value: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.value != value:
            got = tok.value if tok else "end of input"
            raise self.error(f"expected {value!r}, got {got!r}")
        return self.next()

    def expect_ident(self) -> str:
        tok = self.peek()
        if tok is None or tok.kind != "ident":
            got = tok.value if tok else "end of input"
            raise self.error(f"expected identifier, got {got!r}")
        self.next()
        return tok.value

    # character-level helpers for JSX mode
    def skip_ws_chars(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek_char(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def next_char(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        return ch


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            esc = body[i + 1]
            out.append({"n": "\n", "t": "\t", "r": "\r"}.get(esc, esc))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _parse_js_expr(cur: _Cursor) -> JsExpr:
    left = _parse_js_unary(cur)
    while True:
        if cur.at("+") or cur.at("-"):
            op = cur.next().value
            right = _parse_js_unary(cur)
            left = JBin(op, left, right)
        else:
            return left


def _parse_js_unary(cur: _Cursor) -> JsExpr:
    if cur.at("-"):
        cur.next()
        tok = cur.peek()
        if tok is None or tok.kind != "num":
            raise cur.error("expected a number after unary minus")
        cur.next()
        return JNum(-int(tok.value))
    return _parse_js_postfix(cur)


def _parse_js_postfix(cur: _Cursor) -> JsExpr:
    expr = _parse_js_primary(cur)
    while cur.at("."):
        cur.next()
        prop = cur.expect_ident()
        if prop == "target":
            cur.expect(".")
            prop2 = cur.expect_ident()
            if prop2 != "value" or not isinstance(expr, JVar):
                raise cur.error("unsupported construct: member access")
            expr = JTargetValue(expr.name)
        elif prop == "filter":
            cur.expect("(")
            cur.expect("(")
            cur.expect_ident()  # element binding, ignored
            cur.expect(",")
            index_var = cur.expect_ident()
            cur.expect(")")
            cur.expect("=>")
            lhs = cur.expect_ident()
            if lhs != index_var:
                raise cur.error("unsupported filter predicate")
            tok = cur.peek()
            if tok is None or tok.value != "!==":
                raise cur.error("unsupported filter predicate")
            cur.next()
            compare = _parse_js_expr(cur)
            cur.expect(")")
            expr = JFilter(expr, index_var, compare)
        else:
            raise cur.error(f"unsupported construct: .{prop}")
    return expr


def _parse_js_primary(cur: _Cursor) -> JsExpr:
    tok = cur.peek()
    if tok is None:
        raise cur.error("unexpected end of expression")
    if tok.kind == "num":
        cur.next()
        return JNum(int(tok.value))
    if tok.kind == "str":
        cur.next()
        return JStr(_unquote(tok.value))
    if tok.kind == "ident":
        cur.next()
        return JVar(tok.value)
    if tok.value == "(":
        cur.next()
        inner = _parse_js_expr(cur)
        cur.expect(")")
        return inner
    if tok.value == "[":
        cur.next()
        parts = []
        while not cur.at("]"):
            if cur.accept("..."):
                parts.append(("spread", _parse_js_expr(cur)))
            else:
                parts.append(("item", _parse_js_expr(cur)))
            if not cur.accept(","):
                break
        cur.expect("]")
        return JArray(tuple(parts))
    if tok.value == "{":
        cur.next()
        fields = []
        while not cur.at("}"):
            name = cur.expect_ident()
            cur.expect(":")
            fields.append((name, _parse_js_expr(cur)))
            if not cur.accept(","):
                break
        cur.expect("}")
        return JObject(tuple(fields))
    raise cur.error(f"unsupported construct: {tok.value!r}")


def _parse_literal(expr: JsExpr, cur: _Cursor):
    if isinstance(expr, JNum):
        return expr.value
    if isinstance(expr, JStr):
        return expr.value
    if isinstance(expr, JArray):
        records = []
        for kind, part in expr.parts:
            if kind != "item" or not isinstance(part, JObject):
                raise cur.error("state initializers must be literals")
            rec = {}
            for name, value in part.fields:
                if not isinstance(value, (JNum, JStr)):
                    raise cur.error("state initializers must be literals")
                rec[name] = value.value
            records.append(rec)
        return records
    raise cur.error("state initializers must be literals")


def _parse_handler_calls(cur: _Cursor) -> list[tuple[str, list]]:
    """Bodies of arrow functions: either one call expression or a block of
    call statements. Each call is callee(arg, ...)."""
    calls: list[tuple[str, list]] = []
    if cur.accept("{"):
        while not cur.at("}"):
            calls.append(_parse_call(cur))
            cur.accept(";")
        cur.expect("}")
    else:
        calls.append(_parse_call(cur))
    return calls


def _parse_call(cur: _Cursor) -> tuple[str, list]:
    callee = cur.expect_ident()
    cur.expect("(")
    args = []
    while not cur.at(")"):
        args.append(_parse_js_expr(cur))
        if not cur.accept(","):
            break
    cur.expect(")")
    return callee, args


def parse_component(code: str) -> ParsedComponent:
    """Parse the restricted component form; ComponentParseError otherwise."""
    # imports carry no behavior for verification purposes; drop leading ones
    lines = code.split("\n")
    start = 0
    while start < len(lines) and (
        not lines[start].strip() or lines[start].strip().startswith("import ")
    ):
        start += 1
    cur = _Cursor("\n" * start + "\n".join(lines[start:]))
    cur.accept("export")
    cur.accept("default")

    if cur.accept("function"):
        name = cur.expect_ident()
        cur.expect("(")
        cur.expect(")")
        cur.expect("{")
    elif cur.accept("const"):
        name = cur.expect_ident()
        cur.expect("=")
        cur.expect("(")
        cur.expect(")")
        cur.expect("=>")
        cur.expect("{")
    else:
        tok = cur.peek()
        got = tok.value if tok else "end of input"
        raise cur.error(f"unsupported construct: {got!r} (expected a function component)")

    state: list[tuple[str, object]] = []
    handlers: dict = {}
    while True:
        if cur.at("return"):
            break
        if not cur.at("const"):
            tok = cur.peek()
            got = tok.value if tok else "end of input"
            raise cur.error(f"unsupported construct: {got!r}")
        cur.next()
        if cur.at("["):
            cur.next()
            var = cur.expect_ident()
            cur.expect(",")
            setter = cur.expect_ident()
            cur.expect("]")
            cur.expect("=")
            hook = cur.expect_ident()
            if hook != "useState":
                raise cur.error(f"unsupported construct: {hook}")
            cur.expect("(")
            literal = _parse_literal(_parse_js_expr(cur), cur)
            cur.expect(")")
            cur.accept(";")
            if setter != _setter(var):
                raise cur.error(f"setter {setter} does not match state variable {var}")
            state.append((var, literal))
        else:
            hname = cur.expect_ident()
            cur.expect("=")
            cur.expect("(")
            params = []
            while not cur.at(")"):
                params.append(cur.expect_ident())
                if not cur.accept(","):
                    break
            cur.expect(")")
            cur.expect("=>")
            calls = _parse_handler_calls(cur)
            cur.accept(";")
            for callee, args in calls:
                if not callee.startswith("set"):
                    raise cur.error(f"unsupported construct: call to {callee}")
                if len(args) != 1:
                    raise cur.error(f"{callee} takes exactly one argument")
            handlers[hname] = ParsedHandler(params, [(c, a[0]) for c, a in calls])

    cur.expect("return")
    cur.expect("(")
    cur.skip_ws_chars()
    template = _parse_jsx(cur)
    cur.expect(")")
    cur.accept(";")
    cur.expect("}")
    if cur.peek() is not None:
        raise cur.error("content after the component")
    return ParsedComponent(name, state, handlers, template)


# JSX mode -------------------------------------------------------------------


def _decode_entities(raw: str, cur: _Cursor) -> str:
    def sub(m):
        body = m.group(1)
        if body.startswith("#"):
            try:
                return chr(int(body[1:]))
            except ValueError:
                raise cur.error(f"malformed entity &{body};") from None
        if body in NAMED_ENTITIES:
            return NAMED_ENTITIES[body]
        raise cur.error(f"unknown entity &{body};")

    return re.sub(r"&([A-Za-z#0-9]+);", sub, raw)


def _parse_jsx(cur: _Cursor) -> PElement:
    if cur.peek_char() != "<":
        raise cur.error("expected a JSX element")
    cur.next_char()
    tag = _read_jsx_name(cur)
    attrs: list = []
    while True:
        cur.skip_ws_chars()
        ch = cur.peek_char()
        if ch == "/":
            cur.next_char()
            if cur.peek_char() != ">":
                raise cur.error("expected '>' after '/'")
            cur.next_char()
            return PElement(tag, attrs, [])
        if ch == ">":
            cur.next_char()
            children = _parse_jsx_children(cur, tag)
            return PElement(tag, attrs, children)
        name = _read_jsx_name(cur)
        cur.skip_ws_chars()
        if cur.peek_char() != "=":
            raise cur.error(f"attribute {name} needs a value")
        cur.next_char()
        cur.skip_ws_chars()
        if cur.peek_char() in "\"'":
            quote = cur.next_char()
            start = cur.pos
            while cur.peek_char() != quote:
                if not cur.peek_char():
                    raise cur.error("unterminated attribute string")
                cur.next_char()
            raw = cur.src[start : cur.pos]
            cur.next_char()
            attrs.append((name, _decode_entities(raw, cur)))
        elif cur.peek_char() == "{":
            cur.next_char()
            attrs.append((name, _parse_jsx_expr(cur)))
            cur.skip_ws_chars()
            if cur.peek_char() != "}":
                raise cur.error("expected '}' after expression")
            cur.next_char()
        else:
            raise cur.error(f"expected a value for attribute {name}")


def _read_jsx_name(cur: _Cursor) -> str:
    start = cur.pos
    while cur.peek_char() and (cur.peek_char().isalnum() or cur.peek_char() in "-_$"):
        cur.next_char()
    if cur.pos == start:
        raise cur.error("expected a name")
    return cur.src[start : cur.pos]


def _parse_jsx_children(cur: _Cursor, tag: str) -> list:
    children: list = []
    buf: list[str] = []

    def flush():
        raw = "".join(buf)
        buf.clear()
        trimmed = raw.strip()
        if trimmed:
            children.append(PText(_decode_entities(trimmed, cur)))

    while True:
        ch = cur.peek_char()
        if not ch:
            raise cur.error(f"unclosed element <{tag}>")
        if ch == "<":
            if cur.peek_char(1) == "/":
                flush()
                cur.next_char()
                cur.next_char()
                close = _read_jsx_name(cur)
                if close != tag:
                    raise cur.error(f"mismatched closing tag </{close}>")
                cur.skip_ws_chars()
                if cur.peek_char() != ">":
                    raise cur.error("expected '>'")
                cur.next_char()
                return children
            flush()
            children.append(_parse_jsx(cur))
        elif ch == "{":
            flush()
            cur.next_char()
            children.append(_parse_jsx_expr(cur))
            cur.skip_ws_chars()
            if cur.peek_char() != "}":
                raise cur.error("expected '}' after expression")
            cur.next_char()
        else:
            buf.append(cur.next_char())


def _parse_jsx_expr(cur: _Cursor) -> XExpr:
    """Expressions allowed inside template braces: state/handler refs,
    item.field, list.map((item, i) => (<el/>)), and small arrows."""
    cur.skip_ws_chars()
    if cur.peek_char() == "(":
        # arrow like (e) => ... or () => ...
        cur.expect("(")
        params = []
        while not cur.at(")"):
            params.append(cur.expect_ident())
            if not cur.accept(","):
                break
        cur.expect(")")
        cur.expect("=>")
        calls = _parse_handler_calls(cur)
        return XArrow(params, calls)
    name = cur.expect_ident()
    if cur.at("."):
        cur.next()
        prop = cur.expect_ident()
        if prop == "map":
            cur.expect("(")
            cur.expect("(")
            item_var = cur.expect_ident()
            index_var = None
            if cur.accept(","):
                index_var = cur.expect_ident()
            cur.expect(")")
            cur.expect("=>")
            cur.expect("(")
            cur.skip_ws_chars()
            element = _parse_jsx(cur)
            cur.expect(")")
            cur.expect(")")
            return XMap(name, item_var, index_var, element)
        return XField(name, prop)
    return XVar(name)


# ---------------------------------------------------------------------------
# Binding a parsed component onto an elaborated sketch


@dataclass
class _Scope:
    item_var: str
    index_var: Optional[str]
    region: ListRegionParam
    field_map: dict  # field name -> item property


@dataclass
class _Binding:
    var_to_param: dict
    param_to_var: dict
    holes: dict  # hole id -> ("named", name, handler) | ("inline", XArrow)
    inputs: list  # (param name, descriptor)


def match_component(parsed: ParsedComponent, elab: ElaboratedSketch) -> BoundComponent:
    """Bind state variables, handlers and fields of a parsed component onto
    the elaborated sketch; MatchError when the shapes disagree."""
    binding = _Binding({}, {}, {}, [])
    _match_template(elab.template, parsed.template, parsed, elab, binding, None)

    declared = dict(parsed.state)
    extra_initial: dict = {}
    latent_types: dict = {}
    for var, literal in parsed.state:
        param_name = binding.var_to_param.get(var)
        if param_name is None:
            if isinstance(literal, list):
                raise MatchError(f"latent list state {var} is not supported")
            extra_initial[var] = literal
            latent_types[var] = NUM if isinstance(literal, int) else "str"
    for p in elab.params:
        var = binding.param_to_var.get(p.name)
        if var is None:
            raise MatchError(f"parameter {p.name} is not bound to any state variable")
        if var not in declared:
            raise MatchError(f"state variable {var} is used but never declared")
        _check_initial(p, declared[var], var)

    ctx = _ConvertCtx(
        params=elab.params,
        var_to_param=binding.var_to_param,
        latent_types=latent_types,
        order={p.name: i for i, p in enumerate(elab.params)},
    )

    hole_ids = sorted({site.hole_id for site in elab.holes})
    handlers: dict = {}
    for hole_id in hole_ids:
        if hole_id not in binding.holes:
            raise MatchError(f"no handler bound for hole ${hole_id}")
        handlers[hole_id] = _descriptor_program(binding.holes[hole_id], parsed, ctx)

    input_programs: dict = {}
    for param, descriptor in binding.inputs:
        input_programs[param] = _descriptor_program(descriptor, parsed, ctx)

    return BoundComponent(handlers=handlers, extra_initial=extra_initial, input_programs=input_programs)


def _check_initial(p, literal, var: str) -> None:
    if isinstance(p, ScalarParam):
        expected = p.initial
        if literal != expected or isinstance(literal, bool) or type(literal) is not type(expected):
            raise MatchError(f"initial value of {var} does not match the demos")
        return
    if not isinstance(literal, list):
        raise MatchError(f"initial value of {var} must be a list")
    expected_records = p.initial_records()
    if len(literal) != len(expected_records):
        raise MatchError(f"initial value of {var} does not match the demos")
    for rec, want in zip(literal, expected_records):
        if rec != want:
            raise MatchError(f"initial value of {var} does not match the demos")


def _match_template(tel, pel, parsed, elab, binding: _Binding, scope, at_item_root=False) -> None:
    if isinstance(tel, Text):
        if not isinstance(pel, PText) or pel.value != tel.value:
            raise MatchError(f"template text {tel.value!r} is missing or different")
        return
    if isinstance(tel, ParamRef):
        if not isinstance(pel, XVar):
            raise MatchError(f"expected a state reference for {tel.param}")
        _bind_var(binding, pel.name, tel.param)
        return
    if isinstance(tel, FieldRef):
        if not isinstance(pel, XField) or scope is None or pel.obj != scope.item_var:
            raise MatchError(f"expected an item field reference for {tel.field}")
        _bind_field(scope, tel.field, pel.prop)
        return
    assert isinstance(tel, TElement)
    if not isinstance(pel, PElement) or pel.tag != tel.tag:
        got = pel.tag if isinstance(pel, PElement) else pel
        raise MatchError(f"expected <{tel.tag}>, got {got!r}")
    _match_attrs(tel, pel, binding, scope, at_item_root)

    tchildren = list(tel.children)
    pchildren = list(pel.children)
    if len(tchildren) != len(pchildren):
        raise MatchError(f"<{tel.tag}> has {len(pchildren)} children, expected {len(tchildren)}")
    for tchild, pchild in zip(tchildren, pchildren):
        if isinstance(tchild, RepeatNode):
            if not isinstance(pchild, XMap):
                raise MatchError(f"expected a .map over {tchild.param}")
            region = elab.params.get(tchild.param)
            _bind_var(binding, pchild.list_var, tchild.param)
            inner = _Scope(pchild.item_var, pchild.index_var, region, {})
            _match_template(tchild.item, pchild.element, parsed, elab, binding, inner, True)
        else:
            _match_template(tchild, pchild, parsed, elab, binding, scope)


def _match_attrs(tel: TElement, pel: PElement, binding: _Binding, scope, at_item_root: bool) -> None:
    expected = list(tel.attrs)
    ei = 0
    is_inputish = tel.tag in ("input", "textarea")
    value_param = next(
        (a.value.param for a in tel.attrs if a.name == "value" and isinstance(a.value, ParamRef)),
        None,
    )
    template_has_handler = any(a.name.startswith("on") for a in tel.attrs)
    for name, value in pel.attrs:
        if ei < len(expected) and expected[ei].name == name:
            _match_attr_value(expected[ei], value, binding, scope, tel.tag)
            ei += 1
            continue
        if name == "key" and at_item_root:
            if scope is None or scope.index_var is None or value != XVar(scope.index_var):
                raise MatchError("key must be the map index")
            continue
        if (
            name.startswith("on")
            and is_inputish
            and value_param is not None
            and not template_has_handler
        ):
            if not isinstance(value, (XVar, XArrow)):
                raise MatchError(f"unsupported handler for {name}")
            binding.inputs.append((value_param, value))
            continue
        raise MatchError(f"unexpected attribute {name} on <{tel.tag}>")
    if ei != len(expected):
        raise MatchError(f"missing attribute {expected[ei].name} on <{tel.tag}>")


def _match_attr_value(tattr: TAttr, value, binding: _Binding, scope, tag: str) -> None:
    where = f"{tag}.{tattr.name}"
    if isinstance(tattr.value, str):
        if value != tattr.value:
            raise MatchError(f"{where}: expected {tattr.value!r}")
        return
    if isinstance(tattr.value, Hole):
        if not isinstance(value, (XVar, XArrow)):
            raise MatchError(f"{where}: expected a handler reference")
        hole_id = tattr.value.id
        descriptor = value
        if hole_id in binding.holes:
            if binding.holes[hole_id] != descriptor:
                raise MatchError(f"hole ${hole_id} is bound to different handlers")
        else:
            binding.holes[hole_id] = descriptor
        return
    if isinstance(tattr.value, ParamRef):
        if not isinstance(value, XVar):
            raise MatchError(f"{where}: expected a state reference")
        _bind_var(binding, value.name, tattr.value.param)
        return
    if not isinstance(value, XField) or scope is None or value.obj != scope.item_var:
        raise MatchError(f"{where}: expected an item field reference")
    _bind_field(scope, tattr.value.field, value.prop)


def _bind_var(binding: _Binding, var: str, param: str) -> None:
    if binding.var_to_param.get(var, param) != param or binding.param_to_var.get(param, var) != var:
        raise MatchError(f"state variable {var} binds inconsistently")
    binding.var_to_param[var] = param
    binding.param_to_var[param] = var


def _bind_field(scope: _Scope, fieldname: str, prop: str) -> None:
    for f, p in scope.field_map.items():
        if (f == fieldname) != (p == prop):
            raise MatchError(f"item field {prop} binds inconsistently")
    scope.field_map[fieldname] = prop


# ---------------------------------------------------------------------------
# Handler body conversion into the update DSL


@dataclass
class _ConvertCtx:
    params: object  # ParamSet
    var_to_param: dict
    latent_types: dict
    order: dict


def _descriptor_program(descriptor, parsed: ParsedComponent, ctx: _ConvertCtx) -> HandlerProgram:
    if isinstance(descriptor, XVar):
        handler = parsed.handlers.get(descriptor.name)
        if handler is None:
            raise MatchError(f"handler {descriptor.name} is not defined")
        return _convert_handler(handler.params, handler.calls, ctx)
    assert isinstance(descriptor, XArrow)
    calls = descriptor.calls
    if len(calls) == 1 and not calls[0][0].startswith("set"):
        name, args = calls[0]
        handler = parsed.handlers.get(name)
        if handler is None:
            raise MatchError(f"handler {name} is not defined")
        if len(args) != len(handler.params):
            raise MatchError(f"handler {name} called with {len(args)} arguments")
        for arg in args:
            if not isinstance(arg, JVar):
                raise MatchError(f"handler {name} must be called with plain arguments")
        return _convert_handler(handler.params, handler.calls, ctx)
    setter_calls = []
    for name, args in calls:
        if not name.startswith("set"):
            raise MatchError(f"unsupported call to {name} in an inline handler")
        if len(args) != 1:
            raise MatchError(f"{name} takes exactly one argument")
        setter_calls.append((name, args[0]))
    return _convert_handler(descriptor.params, setter_calls, ctx)


def _convert_handler(params: list[str], calls: list[tuple[str, JsExpr]], ctx: _ConvertCtx) -> HandlerProgram:
    payload_params: set = set()
    index_params: set = set()
    for _, expr in calls:
        _scan_roles(expr, set(params), payload_params, index_params)
    if payload_params & index_params:
        raise MatchError("a handler argument is used both as event and as index")

    assignments = []
    seen = set()
    for setter, expr in calls:
        var = setter[3].lower() + setter[4:] if len(setter) > 3 else ""
        if not var:
            raise MatchError(f"unsupported setter {setter}")
        target = ctx.var_to_param.get(var, var)
        if target in seen:
            raise MatchError(f"{setter} is called twice in one handler")
        seen.add(target)
        want = _target_type(target, ctx)
        converted = _to_dsl(expr, want, ctx, payload_params, index_params)
        assignments.append((target, converted))

    def sort_key(item):
        name = item[0]
        return (0, ctx.order[name]) if name in ctx.order else (1, name)

    assignments.sort(key=sort_key)
    return HandlerProgram(tuple(assignments))


def _target_type(target: str, ctx: _ConvertCtx):
    try:
        p = ctx.params.get(target)
    except KeyError:
        if target not in ctx.latent_types:
            raise MatchError(f"setter targets undeclared state {target}") from None
        return ("num",) if ctx.latent_types[target] == NUM else ("str",)
    if isinstance(p, ScalarParam):
        return ("num",) if p.value_type == NUM else ("str",)
    return ("list", p)


def _scan_roles(expr: JsExpr, params: set, payload: set, index: set) -> None:
    if isinstance(expr, JTargetValue):
        if expr.var in params:
            payload.add(expr.var)
        return
    if isinstance(expr, JVar):
        if expr.name in params:
            index.add(expr.name)
        return
    if isinstance(expr, JBin):
        _scan_roles(expr.left, params, payload, index)
        _scan_roles(expr.right, params, payload, index)
    elif isinstance(expr, JArray):
        for _, part in expr.parts:
            _scan_roles(part, params, payload, index)
    elif isinstance(expr, JObject):
        for _, value in expr.fields:
            _scan_roles(value, params, payload, index)
    elif isinstance(expr, JFilter):
        _scan_roles(expr.items, params, payload, index)
        _scan_roles(expr.compare, params, payload, index)


def _resolve_var(name: str, want, ctx: _ConvertCtx) -> Expr:
    target = ctx.var_to_param.get(name, name)
    actual = _target_type(target, ctx)
    if actual != want:
        raise MatchError(f"{name} has the wrong type here")
    return Var(target)


def _to_dsl(expr: JsExpr, want, ctx: _ConvertCtx, payload: set, index: set) -> Expr:
    kind = want[0]
    if isinstance(expr, JNum):
        if kind != "num":
            raise MatchError("unexpected number")
        return IntLit(expr.value)
    if isinstance(expr, JStr):
        if kind != "str":
            raise MatchError("unexpected string literal")
        return StrLit(expr.value)
    if isinstance(expr, JTargetValue):
        if expr.var not in payload:
            raise MatchError(f"{expr.var} is not a handler argument")
        if kind != "str":
            raise MatchError("event payloads are strings")
        return Payload()
    if isinstance(expr, JVar):
        if expr.name in index or expr.name in payload:
            raise MatchError("handler arguments may only index list removals")
        return _resolve_var(expr.name, want, ctx)
    if isinstance(expr, JBin):
        if kind == "num":
            left = _to_dsl(expr.left, want, ctx, payload, index)
            right = _to_dsl(expr.right, want, ctx, payload, index)
            return Add(left, right) if expr.op == "+" else Sub(left, right)
        if kind == "str" and expr.op == "+":
            return Concat(
                _to_dsl(expr.left, want, ctx, payload, index),
                _to_dsl(expr.right, want, ctx, payload, index),
            )
        raise MatchError(f"operator {expr.op} is not supported here")
    if isinstance(expr, JArray):
        if kind != "list":
            raise MatchError("unexpected array")
        region = want[1]
        parts = list(expr.parts)
        if not parts:
            return EmptyList()
        if len(parts) == 1 and parts[0][0] == "spread":
            return _to_dsl(parts[0][1], want, ctx, payload, index)
        if len(parts) == 2 and parts[0][0] == "spread" and parts[1][0] == "item":
            return Append(
                _to_dsl(parts[0][1], want, ctx, payload, index),
                _to_record(parts[1][1], region, ctx, payload, index),
            )
        if len(parts) == 2 and parts[0][0] == "item" and parts[1][0] == "spread":
            return Prepend(
                _to_dsl(parts[1][1], want, ctx, payload, index),
                _to_record(parts[0][1], region, ctx, payload, index),
            )
        raise MatchError("unsupported list construction")
    if isinstance(expr, JFilter):
        if kind != "list":
            raise MatchError("unexpected filter")
        items = _to_dsl(expr.items, want, ctx, payload, index)
        cmp = expr.compare
        if isinstance(cmp, JVar) and cmp.name in index:
            return RemoveAt(items, ItemIndex())
        if isinstance(cmp, JNum):
            return RemoveAt(items, IntLit(cmp.value))
        raise MatchError("unsupported removal index")
    raise MatchError(f"unsupported expression {expr!r}")


def _to_record(expr: JsExpr, region: ListRegionParam, ctx: _ConvertCtx, payload: set, index: set) -> Record:
    if not isinstance(expr, JObject):
        raise MatchError("list items must be object literals")
    by_name = dict(expr.fields)
    if set(by_name) != {f.name for f in region.fields}:
        raise MatchError("item fields do not match the list region")
    converted = []
    for f in region.fields:
        want = ("num",) if f.value_type == NUM else ("str",)
        converted.append((f.name, _to_dsl(by_name[f.name], want, ctx, payload, index)))
    return Record(tuple(converted))
