"""Mockup sketch trees: a JSX subset with numbered event-handler holes.

The sketch language is deliberately static: lowercase tags, string
attribute values, and `{$N}` hole tokens that may only appear as the value
of an attribute whose name starts with ``on``. There are no embedded
expressions, fragments, comments or namespaces.

Text is normalized at parse time: runs that are all whitespace are
dropped, other runs keep their content with surrounding whitespace
trimmed. Together with entity escaping in the printer this makes
``parse_sketch(print_sketch(t)) == t`` hold for every valid tree.

The full grammar lives in docs/sketch-grammar.md.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import DemosynthError

TAG_RE = re.compile(r"[a-z][a-z0-9]*$")
ATTR_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9-]*$")

NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}


class ParseError(DemosynthError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class PathError(DemosynthError):
    """Raised when a path does not resolve; carries the first failing depth."""

    def __init__(self, message: str, depth: int):
        super().__init__(f"{message} (at depth {depth})")
        self.message = message
        self.depth = depth


Path = tuple[int, ...]


@dataclass(frozen=True)
class Hole:
    id: int

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 1:
            raise ValueError(f"hole id must be a positive integer, got {self.id!r}")


@dataclass(frozen=True)
class Attr:
    name: str
    value: Union[str, Hole]

    def __post_init__(self):
        if not ATTR_NAME_RE.match(self.name):
            raise ValueError(f"invalid attribute name {self.name!r}")
        if isinstance(self.value, Hole) and not self.name.startswith("on"):
            raise ValueError(f"hole in non-handler attribute {self.name}")


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Element:
    tag: str
    attrs: tuple[Attr, ...] = ()
    children: tuple["Node", ...] = ()

    def __post_init__(self):
        if not TAG_RE.match(self.tag):
            raise ValueError(f"invalid tag name {self.tag!r}")
        names = [a.name for a in self.attrs]
        if len(names) != len(set(names)):
            dup = next(n for n in names if names.count(n) > 1)
            raise ValueError(f"duplicate attribute {dup}")

    def attr(self, name: str) -> Optional[Attr]:
        for a in self.attrs:
            if a.name == name:
                return a
        return None


Node = Union[Element, Text]


@dataclass(frozen=True)
class SketchTree:
    root: Element


@dataclass(frozen=True)
class HoleSite:
    hole_id: int
    path: Path
    attr_name: str


# ---------------------------------------------------------------------------
# Parsing


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.src)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def advance(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.col)

    def expect(self, ch: str, what: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise self.error(f"expected {what}, got {got!r}")
        self.advance()

    def skip_ws(self) -> None:
        while not self.at_end() and self.peek().isspace():
            self.advance()

    def read_while(self, pattern: str) -> str:
        out = []
        while not self.at_end() and re.match(pattern, self.peek()):
            out.append(self.advance())
        return "".join(out)

    def read_entity(self) -> str:
        # positioned on '&'
        self.advance()
        body = []
        while not self.at_end() and self.peek() != ";":
            if len(body) > 8 or self.peek() in "<>&\n":
                raise self.error("malformed entity")
            body.append(self.advance())
        if self.at_end():
            raise self.error("unterminated entity")
        self.advance()  # ';'
        name = "".join(body)
        if name.startswith("#"):
            try:
                return chr(int(name[1:]))
            except ValueError:
                raise self.error(f"malformed numeric entity &{name};") from None
        if name in NAMED_ENTITIES:
            return NAMED_ENTITIES[name]
        raise self.error(f"unknown entity &{name};")


def parse_sketch(source: str) -> SketchTree:
    """Parse sketch source into a tree, raising ParseError with line/column."""
    s = _Scanner(source)
    s.skip_ws()
    if s.peek() != "<":
        raise s.error("expected an element")
    root = _parse_element(s)
    s.skip_ws()
    if not s.at_end():
        raise s.error("content after root element")
    return SketchTree(root)


def _parse_element(s: _Scanner) -> Element:
    s.expect("<", "'<'")
    if not re.match(r"[a-z]", s.peek()):
        raise s.error("expected tag name")
    tag = s.read_while(r"[a-z0-9]")
    attrs: list[Attr] = []
    seen: set[str] = set()
    while True:
        s.skip_ws()
        ch = s.peek()
        if ch == "/":
            s.advance()
            s.expect(">", "'>' after '/'")
            return Element(tag, tuple(attrs), ())
        if ch == ">":
            s.advance()
            children = _parse_children(s, tag)
            return Element(tag, tuple(attrs), children)
        if not re.match(r"[a-zA-Z]", ch):
            got = ch or "end of input"
            raise s.error(f"expected attribute name or '>' in <{tag}>, got {got!r}")
        name = s.read_while(r"[a-zA-Z0-9-]")
        if name in seen:
            raise s.error(f"duplicate attribute {name}")
        seen.add(name)
        s.skip_ws()
        s.expect("=", f"'=' after attribute {name}")
        s.skip_ws()
        value = _parse_attr_value(s, name)
        attrs.append(Attr(name, value))


def _parse_attr_value(s: _Scanner, name: str) -> Union[str, Hole]:
    ch = s.peek()
    if ch in "\"'":
        quote = s.advance()
        out = []
        while s.peek() != quote:
            if s.at_end():
                raise s.error("unterminated attribute string")
            if s.peek() == "&":
                out.append(s.read_entity())
            elif s.peek() == "<":
                raise s.error("raw '<' in attribute string")
            else:
                out.append(s.advance())
        s.advance()
        return "".join(out)
    if ch == "{":
        s.advance()
        if s.peek() != "$":
            raise s.error("embedded expressions are not supported (only {$N} holes)")
        s.advance()
        digits = s.read_while(r"[0-9]")
        if not digits or digits[0] == "0":
            raise s.error("malformed hole token")
        s.expect("}", "'}' after hole")
        if not name.startswith("on"):
            raise s.error(f"hole in non-handler attribute {name}")
        return Hole(int(digits))
    raise s.error(f"expected attribute value for {name}")


def _parse_children(s: _Scanner, tag: str) -> tuple[Node, ...]:
    children: list[Node] = []
    buf: list[str] = []

    def flush():
        raw = "".join(buf)
        buf.clear()
        trimmed = raw.strip()
        if trimmed:
            children.append(Text(trimmed))

    while True:
        if s.at_end():
            raise s.error(f"unclosed element <{tag}>")
        ch = s.peek()
        if ch == "<":
            if s.peek(1) == "/":
                flush()
                s.advance()
                s.advance()
                close = s.read_while(r"[a-z0-9]")
                if close != tag:
                    raise s.error(f"mismatched closing tag </{close}>, expected </{tag}>")
                s.skip_ws()
                s.expect(">", "'>' in closing tag")
                return tuple(children)
            flush()
            children.append(_parse_element(s))
        elif ch == "{":
            if s.peek(1) == "$":
                raise s.error("hole outside handler attribute")
            raise s.error("embedded expressions are not supported in text")
        elif ch == "}":
            raise s.error("stray '}' in text")
        elif ch == "&":
            buf.append(s.read_entity())
        else:
            buf.append(s.advance())


# ---------------------------------------------------------------------------
# Printing


def escape_text(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace("{", "&#123;")
        .replace("}", "&#125;")
    )


def escape_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;")


def print_sketch(tree: SketchTree) -> str:
    """Canonical pretty-print: 2-space indent, holes as {$N}, trailing newline."""
    return "\n".join(_print_element(tree.root, 0)) + "\n"


def _open_tag(el: Element) -> str:
    parts = [el.tag]
    for a in el.attrs:
        if isinstance(a.value, Hole):
            parts.append(f"{a.name}={{${a.value.id}}}")
        else:
            parts.append(f'{a.name}="{escape_attr(a.value)}"')
    return "<" + " ".join(parts)


def _print_element(el: Element, depth: int) -> list[str]:
    pad = "  " * depth
    open_tag = _open_tag(el)
    if not el.children:
        return [f"{pad}{open_tag} />"]
    if len(el.children) == 1 and isinstance(el.children[0], Text):
        inner = escape_text(el.children[0].value)
        return [f"{pad}{open_tag}>{inner}</{el.tag}>"]
    lines = [f"{pad}{open_tag}>"]
    for child in el.children:
        if isinstance(child, Text):
            lines.append("  " * (depth + 1) + escape_text(child.value))
        else:
            lines.extend(_print_element(child, depth + 1))
    lines.append(f"{pad}</{el.tag}>")
    return lines


# ---------------------------------------------------------------------------
# Addressing


def resolve(tree: SketchTree, path: Path) -> Node:
    node: Node = tree.root
    for depth, index in enumerate(path):
        if not isinstance(node, Element):
            raise PathError("cannot descend into a text node", depth)
        if index < 0 or index >= len(node.children):
            raise PathError(f"child index {index} out of bounds", depth)
        node = node.children[index]
    return node


def collect_holes(tree: SketchTree) -> list[HoleSite]:
    """Every hole occurrence in document order (same id may repeat)."""
    sites: list[HoleSite] = []

    def walk(node: Node, path: Path) -> None:
        if isinstance(node, Text):
            return
        for a in node.attrs:
            if isinstance(a.value, Hole):
                sites.append(HoleSite(a.value.id, path, a.name))
        for i, child in enumerate(node.children):
            walk(child, path + (i,))

    walk(tree.root, ())
    return sites


def iter_nodes(tree: SketchTree) -> Iterator[tuple[Path, Node]]:
    def walk(node: Node, path: Path) -> Iterator[tuple[Path, Node]]:
        yield path, node
        if isinstance(node, Element):
            for i, child in enumerate(node.children):
                yield from walk(child, path + (i,))

    return walk(tree.root, ())


# ---------------------------------------------------------------------------
# JSON encoding of nodes. Two flavours share one codec: the timeline file
# schema forbids holes inside inserted subtrees, the service/API tree form
# allows them so the studio can render hole affordances.


def node_to_json(node: Node) -> dict:
    if isinstance(node, Text):
        return {"text": node.value}
    attrs = []
    for a in node.attrs:
        if isinstance(a.value, Hole):
            attrs.append({"name": a.name, "hole": a.value.id})
        else:
            attrs.append({"name": a.name, "value": a.value})
    return {
        "tag": node.tag,
        "attrs": attrs,
        "children": [node_to_json(c) for c in node.children],
    }


def node_from_json(data: object, allow_holes: bool = True, where: str = "node") -> Node:
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected an object")
    if set(data) == {"text"}:
        if not isinstance(data["text"], str):
            raise ValueError(f"{where}.text: expected a string")
        return Text(data["text"])
    expected = {"tag", "attrs", "children"}
    if set(data) != expected:
        unknown = set(data) - expected
        if unknown:
            raise ValueError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        raise ValueError(f"{where}: missing field {sorted(expected - set(data))[0]!r}")
    attrs = []
    if not isinstance(data["attrs"], list):
        raise ValueError(f"{where}.attrs: expected a list")
    for i, item in enumerate(data["attrs"]):
        loc = f"{where}.attrs[{i}]"
        if not isinstance(item, dict) or "name" not in item:
            raise ValueError(f"{loc}: expected an object with a name")
        if not isinstance(item["name"], str):
            raise ValueError(f"{loc}.name: expected a string")
        if set(item) == {"name", "value"} and isinstance(item["value"], str):
            value: Union[str, Hole] = item["value"]
        elif set(item) == {"name", "hole"} and allow_holes:
            if not isinstance(item["hole"], int) or isinstance(item["hole"], bool):
                raise ValueError(f"{loc}.hole: expected an integer")
            value = Hole(item["hole"])
        else:
            raise ValueError(f"{loc}: expected {{name, value}} with a string value")
        try:
            attrs.append(Attr(item["name"], value))
        except ValueError as exc:
            raise ValueError(f"{loc}: {exc}") from None
    if not isinstance(data["children"], list):
        raise ValueError(f"{where}.children: expected a list")
    children = tuple(
        node_from_json(c, allow_holes, f"{where}.children[{i}]")
        for i, c in enumerate(data["children"])
    )
    if not isinstance(data["tag"], str):
        raise ValueError(f"{where}.tag: expected a string")
    try:
        return Element(data["tag"], tuple(attrs), children)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from None


def tree_to_json(tree: SketchTree) -> dict:
    return node_to_json(tree.root)


def tree_from_json(data: object) -> SketchTree:
    node = node_from_json(data, allow_holes=True, where="tree")
    if not isinstance(node, Element):
        raise ValueError("tree: root must be an element")
    return SketchTree(node)
