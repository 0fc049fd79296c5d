"""Demo timelines: recorded actions plus the structural edits they cause.

A timeline is one interaction scenario. Each step pairs an action (click
or text input) with an ordered list of edits that demonstrate the tree the
user expects after that action. All operations are persistent: they build
a new tree and never touch their input.

Edits are interpreted against the current intermediate tree, in recorded
order, which matches how a structural editor records them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import DemosynthError
from .sketch import (
    Attr,
    Element,
    Hole,
    Node,
    Path,
    PathError,
    SketchTree,
    Text,
    node_from_json,
    node_to_json,
    resolve,
)


class EditError(DemosynthError):
    pass


class ActionError(DemosynthError):
    pass


class ReplayError(DemosynthError):
    """A step failed during replay; carries the 0-based step index."""

    def __init__(self, step_index: int, message: str):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index
        self.reason = message


class TimelineFormatError(DemosynthError):
    pass


@dataclass(frozen=True)
class Click:
    path: Path


@dataclass(frozen=True)
class TextInput:
    path: Path
    value: str


Action = Union[Click, TextInput]


@dataclass(frozen=True)
class ReplaceString:
    path: Path
    attr: Optional[str]
    value: str


@dataclass(frozen=True)
class DeleteNode:
    path: Path


@dataclass(frozen=True)
class CopyNode:
    path: Path


@dataclass(frozen=True)
class InsertNode:
    parent_path: Path
    index: int
    subtree: Node


Edit = Union[ReplaceString, DeleteNode, CopyNode, InsertNode]


@dataclass(frozen=True)
class Step:
    action: Action
    edits: tuple[Edit, ...] = ()


@dataclass(frozen=True)
class DemoTimeline:
    id: str
    steps: tuple[Step, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    step_index: int
    source: str  # "action" or "edit"
    edit_index: Optional[int]
    message: str


# ---------------------------------------------------------------------------
# Structural rewriting helpers


def _rebuild(root: Element, path: Path, fn) -> Element:
    """Replace the node at path with fn(node), rebuilding the spine."""
    if not path:
        out = fn(root)
        if not isinstance(out, Element):
            raise EditError("root must remain an element")
        return out
    node = root
    for depth, index in enumerate(path):
        if not isinstance(node, Element):
            raise PathError("cannot descend into a text node", depth)
        if index < 0 or index >= len(node.children):
            raise PathError(f"child index {index} out of bounds", depth)
        node = node.children[index]

    def rec(current: Node, remaining: Path) -> Node:
        if not remaining:
            return fn(current)
        assert isinstance(current, Element)
        i = remaining[0]
        children = list(current.children)
        children[i] = rec(children[i], remaining[1:])
        return Element(current.tag, current.attrs, tuple(children))

    return rec(root, path)  # type: ignore[return-value]


def _with_attr(el: Element, name: str, value: str) -> Element:
    attrs = list(el.attrs)
    for i, a in enumerate(attrs):
        if a.name == name:
            if isinstance(a.value, Hole):
                raise EditError(f"cannot replace handler hole in attribute {name}")
            attrs[i] = Attr(name, value)
            return Element(el.tag, tuple(attrs), el.children)
    attrs.append(Attr(name, value))
    return Element(el.tag, tuple(attrs), el.children)


def apply_edit(tree: SketchTree, edit: Edit) -> SketchTree:
    """Apply one edit, returning a new tree (the input is never mutated)."""
    if isinstance(edit, ReplaceString):
        target = resolve(tree, edit.path)
        if edit.attr is None:
            if not isinstance(target, Text):
                raise EditError("replaceString without attr targets a non-text node")
            new_root = _rebuild(tree.root, edit.path, lambda _n: Text(edit.value))
        else:
            if not isinstance(target, Element):
                raise EditError("text nodes have no attributes")
            new_root = _rebuild(tree.root, edit.path, lambda n: _with_attr(n, edit.attr, edit.value))
        return SketchTree(new_root)

    if isinstance(edit, DeleteNode):
        if not edit.path:
            raise EditError("cannot delete root")
        resolve(tree, edit.path)
        parent_path, index = edit.path[:-1], edit.path[-1]

        def drop(el: Node) -> Node:
            assert isinstance(el, Element)
            children = list(el.children)
            del children[index]
            return Element(el.tag, el.attrs, tuple(children))

        return SketchTree(_rebuild(tree.root, parent_path, drop))

    if isinstance(edit, CopyNode):
        if not edit.path:
            raise EditError("cannot copy root")
        resolve(tree, edit.path)
        parent_path, index = edit.path[:-1], edit.path[-1]

        def dup(el: Node) -> Node:
            assert isinstance(el, Element)
            children = list(el.children)
            children.insert(index + 1, children[index])
            return Element(el.tag, el.attrs, tuple(children))

        return SketchTree(_rebuild(tree.root, parent_path, dup))

    if isinstance(edit, InsertNode):
        parent = resolve(tree, edit.parent_path)
        if not isinstance(parent, Element):
            raise EditError("insert target is not an element")
        if edit.index < 0 or edit.index > len(parent.children):
            raise EditError(f"insert index {edit.index} out of bounds")

        def ins(el: Node) -> Node:
            assert isinstance(el, Element)
            children = list(el.children)
            children.insert(edit.index, edit.subtree)
            return Element(el.tag, el.attrs, tuple(children))

        return SketchTree(_rebuild(tree.root, edit.parent_path, ins))

    raise EditError(f"unknown edit {edit!r}")


def element_hole(el: Element, prefer: str) -> Optional[int]:
    """Hole id fired by an interaction: the preferred on* attr, else the
    first hole-valued on* attr in document order."""
    a = el.attr(prefer)
    if a is not None and isinstance(a.value, Hole):
        return a.value.id
    for a in el.attrs:
        if a.name.startswith("on") and isinstance(a.value, Hole):
            return a.value.id
    return None


def apply_action(tree: SketchTree, action: Action) -> SketchTree:
    """Clicks are pure markers; text input writes the value attribute so the
    typed string participates in tree diffs."""
    if isinstance(action, Click):
        target = resolve(tree, action.path)
        if not isinstance(target, Element) or element_hole(target, "onClick") is None:
            raise ActionError("no handler hole on target")
        return tree
    if isinstance(action, TextInput):
        target = resolve(tree, action.path)
        if not isinstance(target, Element) or target.tag not in ("input", "textarea"):
            raise ActionError("text input targets must be input or textarea elements")
        new_root = _rebuild(tree.root, action.path, lambda n: _with_attr(n, "value", action.value))
        return SketchTree(new_root)
    raise ActionError(f"unknown action {action!r}")


def apply_step(tree: SketchTree, step: Step) -> SketchTree:
    tree = apply_action(tree, step.action)
    for edit in step.edits:
        tree = apply_edit(tree, edit)
    return tree


def snapshots(sketch: SketchTree, timeline: DemoTimeline) -> list[SketchTree]:
    """[t0, t1, ..., tn] with t0 = sketch; raises ReplayError at the first
    failing step (0-based)."""
    out = [sketch]
    current = sketch
    for i, step in enumerate(timeline.steps):
        try:
            current = apply_step(current, step)
        except (PathError, EditError, ActionError) as exc:
            raise ReplayError(i, str(exc)) from exc
        out.append(current)
    return out


def validate_timeline(sketch: SketchTree, timeline: DemoTimeline) -> list[Diagnostic]:
    """Best-effort validation; returns every diagnostic, not just the first.

    A failed action leaves the tree unchanged, a failed edit is skipped, so
    later steps are still checked against a meaningful intermediate tree.
    """
    diags: list[Diagnostic] = []
    current = sketch
    for i, step in enumerate(timeline.steps):
        try:
            current = apply_action(current, step.action)
        except (PathError, ActionError) as exc:
            diags.append(Diagnostic(i, "action", None, str(exc)))
        for j, edit in enumerate(step.edits):
            try:
                current = apply_edit(current, edit)
            except (PathError, EditError) as exc:
                diags.append(Diagnostic(i, "edit", j, str(exc)))
    return diags


# ---------------------------------------------------------------------------
# JSON wire format (.timeline.json). Unknown fields are rejected.


def _path_from_json(data: object, where: str) -> Path:
    if not isinstance(data, list) or not all(
        isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in data
    ):
        raise TimelineFormatError(f"{where}: expected a list of non-negative integers")
    return tuple(data)


def _require_keys(data: dict, keys: set[str], where: str) -> None:
    if set(data) != keys:
        unknown = set(data) - keys
        if unknown:
            raise TimelineFormatError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        raise TimelineFormatError(f"{where}: missing field {sorted(keys - set(data))[0]!r}")


def _action_from_json(data: object, where: str) -> Action:
    if not isinstance(data, dict) or "kind" not in data:
        raise TimelineFormatError(f"{where}: expected an action object with a kind")
    kind = data["kind"]
    if kind == "click":
        _require_keys(data, {"kind", "path"}, where)
        return Click(_path_from_json(data["path"], f"{where}.path"))
    if kind == "textInput":
        _require_keys(data, {"kind", "path", "value"}, where)
        if not isinstance(data["value"], str):
            raise TimelineFormatError(f"{where}.value: expected a string")
        return TextInput(_path_from_json(data["path"], f"{where}.path"), data["value"])
    raise TimelineFormatError(f"{where}.kind: unknown action kind {kind!r}")


def _edit_from_json(data: object, where: str) -> Edit:
    if not isinstance(data, dict) or "kind" not in data:
        raise TimelineFormatError(f"{where}: expected an edit object with a kind")
    kind = data["kind"]
    if kind == "replaceString":
        keys = {"kind", "path", "value"} | ({"attr"} if "attr" in data else set())
        _require_keys(data, keys, where)
        attr = data.get("attr")
        if attr is not None and not isinstance(attr, str):
            raise TimelineFormatError(f"{where}.attr: expected a string")
        if not isinstance(data["value"], str):
            raise TimelineFormatError(f"{where}.value: expected a string")
        return ReplaceString(_path_from_json(data["path"], f"{where}.path"), attr, data["value"])
    if kind == "deleteNode":
        _require_keys(data, {"kind", "path"}, where)
        return DeleteNode(_path_from_json(data["path"], f"{where}.path"))
    if kind == "copyNode":
        _require_keys(data, {"kind", "path"}, where)
        return CopyNode(_path_from_json(data["path"], f"{where}.path"))
    if kind == "insertNode":
        _require_keys(data, {"kind", "parentPath", "index", "subtree"}, where)
        if not isinstance(data["index"], int) or isinstance(data["index"], bool) or data["index"] < 0:
            raise TimelineFormatError(f"{where}.index: expected a non-negative integer")
        try:
            subtree = node_from_json(data["subtree"], allow_holes=False, where=f"{where}.subtree")
        except ValueError as exc:
            raise TimelineFormatError(str(exc)) from None
        return InsertNode(
            _path_from_json(data["parentPath"], f"{where}.parentPath"), data["index"], subtree
        )
    raise TimelineFormatError(f"{where}.kind: unknown edit kind {kind!r}")


def timeline_from_json(data: object) -> DemoTimeline:
    if not isinstance(data, dict):
        raise TimelineFormatError("timeline: expected an object")
    _require_keys(data, {"id", "steps"}, "timeline")
    if not isinstance(data["id"], str):
        raise TimelineFormatError("timeline.id: expected a string")
    if not isinstance(data["steps"], list):
        raise TimelineFormatError("timeline.steps: expected a list")
    steps = []
    for i, raw in enumerate(data["steps"]):
        where = f"timeline.steps[{i}]"
        if not isinstance(raw, dict):
            raise TimelineFormatError(f"{where}: expected an object")
        _require_keys(raw, {"action", "edits"}, where)
        action = _action_from_json(raw["action"], f"{where}.action")
        if not isinstance(raw["edits"], list):
            raise TimelineFormatError(f"{where}.edits: expected a list")
        edits = tuple(
            _edit_from_json(e, f"{where}.edits[{j}]") for j, e in enumerate(raw["edits"])
        )
        steps.append(Step(action, edits))
    return DemoTimeline(data["id"], tuple(steps))


def _action_to_json(action: Action) -> dict:
    if isinstance(action, Click):
        return {"kind": "click", "path": list(action.path)}
    return {"kind": "textInput", "path": list(action.path), "value": action.value}


def _edit_to_json(edit: Edit) -> dict:
    if isinstance(edit, ReplaceString):
        out: dict = {"kind": "replaceString", "path": list(edit.path), "value": edit.value}
        if edit.attr is not None:
            out["attr"] = edit.attr
        return out
    if isinstance(edit, DeleteNode):
        return {"kind": "deleteNode", "path": list(edit.path)}
    if isinstance(edit, CopyNode):
        return {"kind": "copyNode", "path": list(edit.path)}
    return {
        "kind": "insertNode",
        "parentPath": list(edit.parent_path),
        "index": edit.index,
        "subtree": node_to_json(edit.subtree),
    }


def timeline_to_json(timeline: DemoTimeline) -> dict:
    return {
        "id": timeline.id,
        "steps": [
            {"action": _action_to_json(s.action), "edits": [_edit_to_json(e) for e in s.edits]}
            for s in timeline.steps
        ],
    }
