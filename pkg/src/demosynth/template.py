"""State-parameterized templates: the elaborated form of a sketch.

An elaborated sketch replaces every reactive slot of the mockup with a
reference: text and attribute slots become ParamRef / FieldRef leaves and
each list region becomes a RepeatNode over an item template. Substituting
a well-typed valuation (render_state) gives back a concrete tree;
match_state is its exact inverse and recovers the valuation from a
snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import DemosynthError
from .sketch import Attr, Element, Hole, HoleSite, Node, Path, SketchTree, Text

Value = Union[int, str]
Valuation = dict  # param name -> int | str | list[dict[field, Value]]

NUM = "num"
STR = "str"


class RenderError(DemosynthError):
    pass


class TraceError(DemosynthError):
    pass


def is_canonical_int(value: str) -> bool:
    """True when the string is the canonical decimal form of an integer
    (no superfluous leading zeros, no plus sign, no minus zero)."""
    try:
        return str(int(value)) == value
    except ValueError:
        return False


@dataclass(frozen=True)
class ParamRef:
    param: str


@dataclass(frozen=True)
class FieldRef:
    field: str


@dataclass(frozen=True)
class TAttr:
    name: str
    value: Union[str, Hole, ParamRef, FieldRef]


@dataclass(frozen=True)
class RepeatNode:
    param: str
    item: "TNode"


@dataclass(frozen=True)
class TElement:
    tag: str
    attrs: tuple[TAttr, ...] = ()
    children: tuple["TNode", ...] = ()


TNode = Union[TElement, Text, ParamRef, FieldRef, RepeatNode]


@dataclass(frozen=True)
class FieldSpec:
    name: str
    value_type: str  # NUM or STR


@dataclass(frozen=True)
class ScalarParam:
    name: str
    path: Path
    attr: Optional[str]  # None = text node slot
    value_type: str
    initial: Value


@dataclass(frozen=True)
class ListRegionParam:
    name: str
    parent_path: Path
    span: tuple[int, int]  # [start, end) over the initial sketch's children
    item_template: TNode
    fields: tuple[FieldSpec, ...]
    initial: tuple[tuple[Value, ...], ...]  # records aligned with fields

    def initial_records(self) -> list[dict]:
        return [dict(zip((f.name for f in self.fields), rec)) for rec in self.initial]


Param = Union[ScalarParam, ListRegionParam]


@dataclass(frozen=True)
class ParamSet:
    params: tuple[Param, ...] = ()

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def get(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def scalars(self) -> list[ScalarParam]:
        return [p for p in self.params if isinstance(p, ScalarParam)]

    def regions(self) -> list[ListRegionParam]:
        return [p for p in self.params if isinstance(p, ListRegionParam)]


@dataclass(frozen=True)
class ElaboratedSketch:
    template: TElement
    params: ParamSet
    holes: tuple[HoleSite, ...]


def initial_state(params: ParamSet) -> Valuation:
    state: Valuation = {}
    for p in params:
        if isinstance(p, ScalarParam):
            state[p.name] = p.initial
        else:
            state[p.name] = p.initial_records()
    return state


# ---------------------------------------------------------------------------
# Rendering


def _format_scalar(value, value_type: str, where: str) -> str:
    if value_type == NUM:
        if not isinstance(value, int) or isinstance(value, bool):
            raise RenderError(f"{where}: expected an integer, got {value!r}")
        return str(value)
    if not isinstance(value, str):
        raise RenderError(f"{where}: expected a string, got {value!r}")
    return value


def render_state(elab: ElaboratedSketch, state: Valuation) -> SketchTree:
    """Substitute a valuation into the template; total for well-typed states."""
    root = _render_node(elab.template, elab.params, state, None)
    assert isinstance(root, Element)
    return SketchTree(root)


def _scalar_type(params: ParamSet, name: str) -> str:
    p = params.get(name)
    if not isinstance(p, ScalarParam):
        raise RenderError(f"{name} is not a scalar parameter")
    return p.value_type


def _render_attr_value(value, params, state, fields) -> Union[str, Hole]:
    if isinstance(value, (str, Hole)):
        return value
    if isinstance(value, ParamRef):
        return _format_scalar(state[value.param], _scalar_type(params, value.param), value.param)
    field_env, field_types = fields or ({}, {})
    if value.field not in field_env:
        raise RenderError(f"field {value.field} used outside its list region")
    return _format_scalar(field_env[value.field], field_types[value.field], value.field)


def _render_node(tnode: TNode, params: ParamSet, state: Valuation, fields) -> Node:
    if isinstance(tnode, Text):
        return tnode
    if isinstance(tnode, ParamRef):
        return Text(_format_scalar(state[tnode.param], _scalar_type(params, tnode.param), tnode.param))
    if isinstance(tnode, FieldRef):
        field_env, field_types = fields or ({}, {})
        if tnode.field not in field_env:
            raise RenderError(f"field {tnode.field} used outside its list region")
        return Text(_format_scalar(field_env[tnode.field], field_types[tnode.field], tnode.field))
    if isinstance(tnode, RepeatNode):
        raise RenderError("repeat node outside an element")
    assert isinstance(tnode, TElement)
    attrs = tuple(
        Attr(a.name, _render_attr_value(a.value, params, state, fields)) for a in tnode.attrs
    )
    children: list[Node] = []
    for child in tnode.children:
        if isinstance(child, RepeatNode):
            region = params.get(child.param)
            if not isinstance(region, ListRegionParam):
                raise RenderError(f"{child.param} is not a list region")
            value = state[child.param]
            if not isinstance(value, list):
                raise RenderError(f"{child.param}: expected a list, got {value!r}")
            field_types = {f.name: f.value_type for f in region.fields}
            for record in value:
                if not isinstance(record, dict) or set(record) != set(field_types):
                    raise RenderError(f"{child.param}: malformed item record {record!r}")
                children.append(_render_node(child.item, params, state, (record, field_types)))
        else:
            children.append(_render_node(child, params, state, fields))
    return Element(tnode.tag, attrs, tuple(children))


# ---------------------------------------------------------------------------
# Matching (inverse of render_state)


def template_structure_key(tnode: TNode) -> tuple:
    """Structure key of the trees a template node can produce; references
    render as text/string slots."""
    if isinstance(tnode, (Text, ParamRef, FieldRef)):
        return ("t",)
    if isinstance(tnode, RepeatNode):
        raise ValueError("repeat nodes have no single structure key")
    attr_shape = tuple(
        (a.name, ("h", a.value.id) if isinstance(a.value, Hole) else "s") for a in tnode.attrs
    )
    return (
        "e",
        tnode.tag,
        attr_shape,
        tuple(template_structure_key(c) for c in tnode.children),
    )


def _node_structure_key(node: Node) -> tuple:
    from .diffing import structure_key

    return structure_key(node)


def _parse_scalar(text: str, value_type: str, where: str) -> Value:
    if value_type == NUM:
        if not is_canonical_int(text):
            raise TraceError(f"{where}: {text!r} is not a canonical integer")
        return int(text)
    return text


def match_state(elab: ElaboratedSketch, tree: SketchTree) -> Valuation:
    """Recover the valuation that renders to `tree`; TraceError when the
    snapshot does not fit the template."""
    state: Valuation = {}
    _match_node(elab.template, tree.root, elab.params, state, None)
    for p in elab.params:
        if p.name not in state:
            raise TraceError(f"snapshot never constrained {p.name}")
    return state


def _bind(state: Valuation, name: str, value, where: str) -> None:
    if name in state and state[name] != value:
        raise TraceError(f"{where}: conflicting values for {name}: {state[name]!r} vs {value!r}")
    state[name] = value


def _match_attr(tvalue, avalue, params, state, fields, where):
    if isinstance(tvalue, (str, Hole)):
        if tvalue != avalue:
            raise TraceError(f"{where}: expected {tvalue!r}, got {avalue!r}")
        return
    if isinstance(avalue, Hole):
        raise TraceError(f"{where}: unexpected hole")
    if isinstance(tvalue, ParamRef):
        value = _parse_scalar(avalue, _scalar_type(params, tvalue.param), where)
        _bind(state, tvalue.param, value, where)
    else:
        record, field_types = fields
        value = _parse_scalar(avalue, field_types[tvalue.field], where)
        if tvalue.field in record and record[tvalue.field] != value:
            raise TraceError(f"{where}: conflicting values for {tvalue.field}")
        record[tvalue.field] = value


def _match_node(tnode: TNode, node: Node, params: ParamSet, state: Valuation, fields) -> None:
    if isinstance(tnode, Text):
        if node != tnode:
            raise TraceError(f"expected text {tnode.value!r}, got {node!r}")
        return
    if isinstance(tnode, ParamRef):
        if not isinstance(node, Text):
            raise TraceError(f"expected a text slot for {tnode.param}")
        _bind(state, tnode.param, _parse_scalar(node.value, _scalar_type(params, tnode.param), tnode.param), tnode.param)
        return
    if isinstance(tnode, FieldRef):
        if not isinstance(node, Text):
            raise TraceError(f"expected a text slot for {tnode.field}")
        record, field_types = fields
        value = _parse_scalar(node.value, field_types[tnode.field], tnode.field)
        if tnode.field in record and record[tnode.field] != value:
            raise TraceError(f"conflicting values for {tnode.field}")
        record[tnode.field] = value
        return
    assert isinstance(tnode, TElement)
    if not isinstance(node, Element) or node.tag != tnode.tag:
        raise TraceError(f"expected <{tnode.tag}>, got {node!r}")
    if len(node.attrs) != len(tnode.attrs):
        raise TraceError(f"<{node.tag}>: attribute count mismatch")
    for tattr, attr in zip(tnode.attrs, node.attrs):
        if tattr.name != attr.name:
            raise TraceError(f"<{node.tag}>: expected attribute {tattr.name}, got {attr.name}")
        _match_attr(tattr.value, attr.value, params, state, fields, f"{node.tag}.{attr.name}")
    _match_children(tnode, node, params, state, fields)


def _match_children(tnode: TElement, node: Element, params, state, fields) -> None:
    pos = 0
    concrete = node.children
    for tchild in tnode.children:
        if isinstance(tchild, RepeatNode):
            region = params.get(tchild.param)
            assert isinstance(region, ListRegionParam)
            item_key = template_structure_key(tchild.item)
            field_types = {f.name: f.value_type for f in region.fields}
            records = []
            while pos < len(concrete) and _node_structure_key(concrete[pos]) == item_key:
                record: dict = {}
                _match_node(tchild.item, concrete[pos], params, state, (record, field_types))
                for f in region.fields:
                    record.setdefault(f.name, None)
                records.append(record)
                pos += 1
            _bind(state, tchild.param, records, tchild.param)
        else:
            if pos >= len(concrete):
                raise TraceError(f"<{node.tag}>: missing child {pos}")
            _match_node(tchild, concrete[pos], params, state, fields)
            pos += 1
    if pos != len(concrete):
        raise TraceError(f"<{node.tag}>: {len(concrete) - pos} unexpected trailing children")


def item_index_of(elab: ElaboratedSketch, tree: SketchTree, path: Path) -> Optional[int]:
    """Index of the list item containing `path`, when the path crosses a
    repeat region; None otherwise."""
    tnode: TNode = elab.template
    node: Node = tree.root
    index: Optional[int] = None
    for child_idx in path:
        if not isinstance(tnode, TElement) or not isinstance(node, Element):
            raise TraceError("path descends below the template")
        concrete = node.children
        pos = 0
        matched = None
        for tchild in tnode.children:
            if isinstance(tchild, RepeatNode):
                item_key = template_structure_key(tchild.item)
                count = 0
                while pos + count < len(concrete) and _node_structure_key(concrete[pos + count]) == item_key:
                    count += 1
                if pos <= child_idx < pos + count:
                    matched = tchild.item
                    index = child_idx - pos
                    break
                pos += count
            else:
                if child_idx == pos:
                    matched = tchild
                    break
                pos += 1
        if matched is None:
            raise TraceError(f"path index {child_idx} does not land in the template")
        tnode = matched
        node = concrete[child_idx]
    return index


def input_param_at(elab: ElaboratedSketch, tree: SketchTree, path: Path) -> Optional[str]:
    """Name of the scalar bound to the value attribute of the element the
    path points at, when there is one."""
    tnode: TNode = elab.template
    node: Node = tree.root
    for child_idx in path:
        if not isinstance(tnode, TElement) or not isinstance(node, Element):
            raise TraceError("path descends below the template")
        concrete = node.children
        pos = 0
        matched = None
        for tchild in tnode.children:
            if isinstance(tchild, RepeatNode):
                item_key = template_structure_key(tchild.item)
                count = 0
                while pos + count < len(concrete) and _node_structure_key(concrete[pos + count]) == item_key:
                    count += 1
                if pos <= child_idx < pos + count:
                    matched = tchild.item
                    break
                pos += count
            else:
                if child_idx == pos:
                    matched = tchild
                    break
                pos += 1
        if matched is None:
            raise TraceError(f"path index {child_idx} does not land in the template")
        tnode = matched
        node = concrete[child_idx]
    if isinstance(tnode, TElement):
        for a in tnode.attrs:
            if a.name == "value" and isinstance(a.value, ParamRef):
                return a.value.param
    return None


# ---------------------------------------------------------------------------
# Debug JSON (stable dump for --emit elaborated)


def template_to_json(tnode: TNode) -> dict:
    if isinstance(tnode, Text):
        return {"text": tnode.value}
    if isinstance(tnode, ParamRef):
        return {"param": tnode.param}
    if isinstance(tnode, FieldRef):
        return {"field": tnode.field}
    if isinstance(tnode, RepeatNode):
        return {"repeat": tnode.param, "item": template_to_json(tnode.item)}
    attrs = []
    for a in tnode.attrs:
        if isinstance(a.value, Hole):
            attrs.append({"name": a.name, "hole": a.value.id})
        elif isinstance(a.value, ParamRef):
            attrs.append({"name": a.name, "param": a.value.param})
        elif isinstance(a.value, FieldRef):
            attrs.append({"name": a.name, "field": a.value.field})
        else:
            attrs.append({"name": a.name, "value": a.value})
    return {
        "tag": tnode.tag,
        "attrs": attrs,
        "children": [template_to_json(c) for c in tnode.children],
    }


def param_to_json(p: Param) -> dict:
    if isinstance(p, ScalarParam):
        return {
            "name": p.name,
            "kind": "scalar",
            "path": list(p.path),
            "attr": p.attr,
            "valueType": p.value_type,
            "initial": p.initial,
        }
    return {
        "name": p.name,
        "kind": "listRegion",
        "parentPath": list(p.parent_path),
        "span": list(p.span),
        "fields": [{"name": f.name, "valueType": f.value_type} for f in p.fields],
        "itemTemplate": template_to_json(p.item_template),
        "initial": p.initial_records(),
    }


def elaborated_to_json(elab: ElaboratedSketch) -> dict:
    return {
        "template": template_to_json(elab.template),
        "params": [param_to_json(p) for p in elab.params],
        "holes": [
            {"holeId": h.hole_id, "path": list(h.path), "attr": h.attr_name} for h in elab.holes
        ],
    }
