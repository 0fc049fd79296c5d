"""Reactive parameter extraction and state traces.

Node identity is tracked through the recorded edits themselves (not by
re-diffing): every node of the initial sketch gets an id, copies and
inserts mint fresh ids, and each snapshot is walked in parallel with its
id skeleton. A position whose observed string ever changes becomes a
scalar parameter; a parent whose child list ever changes becomes a list
region whose items must stay structurally isomorphic modulo strings.
Anything that cannot be anchored this way is an ExtractError: the tool
fails loudly instead of guessing.

State traces are recovered by matching every snapshot against the
elaborated template, which is exact because extraction turned every
changing position into a parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .diffing import structure_key
from .errors import DemosynthError
from .sketch import Element, Hole, Node, Path, SketchTree, Text, collect_holes, resolve
from .template import (
    NUM,
    STR,
    ElaboratedSketch,
    FieldRef,
    FieldSpec,
    ListRegionParam,
    Param,
    ParamRef,
    ParamSet,
    RepeatNode,
    ScalarParam,
    TAttr,
    TElement,
    TNode,
    Valuation,
    initial_state,
    is_canonical_int,
    item_index_of,
    match_state,
    render_state,
)
from .timeline import (
    CopyNode,
    DeleteNode,
    DemoTimeline,
    InsertNode,
    TextInput,
    apply_action,
    apply_edit,
    element_hole,
    snapshots,
    validate_timeline,
)


class ExtractError(DemosynthError):
    pass


@dataclass
class TraceEntry:
    state_before: Valuation
    hole_id: Optional[int]
    payload: Optional[str]
    occurrence_path: Path
    item_index: Optional[int]
    state_after: Valuation


@dataclass
class StateTrace:
    timeline_id: str
    entries: list[TraceEntry]


# ---------------------------------------------------------------------------
# Tracked replay: id skeletons evolve alongside snapshots.


@dataclass
class _Skel:
    nid: int
    children: list["_Skel"] = field(default_factory=list)

    def clone(self) -> "_Skel":
        return _Skel(self.nid, [c.clone() for c in self.children])

    def at(self, path: Path) -> "_Skel":
        node = self
        for i in path:
            node = node.children[i]
        return node


def _initial_skeleton(root: Node) -> tuple[_Skel, int]:
    counter = 0

    def build(node: Node) -> _Skel:
        nonlocal counter
        skel = _Skel(counter)
        counter += 1
        if isinstance(node, Element):
            skel.children = [build(c) for c in node.children]
        return skel

    return build(root), counter


def _fresh_skeleton(node: Node, alloc) -> _Skel:
    skel = _Skel(next(alloc))
    if isinstance(node, Element):
        skel.children = [_fresh_skeleton(c, alloc) for c in node.children]
    return skel


def _refresh_ids(skel: _Skel, alloc) -> _Skel:
    return _Skel(next(alloc), [_refresh_ids(c, alloc) for c in skel.children])


def _tracked_snapshots(sketch: SketchTree, timeline: DemoTimeline, base: int):
    """[(tree, skeleton)] per snapshot; fresh ids start at `base`."""
    alloc = itertools.count(base)
    skel, _count = _initial_skeleton(sketch.root)
    tree = sketch
    out = [(tree, skel.clone())]
    for step in timeline.steps:
        tree = apply_action(tree, step.action)
        for edit in step.edits:
            tree = apply_edit(tree, edit)
            if isinstance(edit, DeleteNode):
                parent = skel.at(edit.path[:-1])
                del parent.children[edit.path[-1]]
            elif isinstance(edit, CopyNode):
                parent = skel.at(edit.path[:-1])
                copy = _refresh_ids(parent.children[edit.path[-1]], alloc)
                parent.children.insert(edit.path[-1] + 1, copy)
            elif isinstance(edit, InsertNode):
                parent = skel.at(edit.parent_path)
                parent.children.insert(edit.index, _fresh_skeleton(edit.subtree, alloc))
        out.append((tree, skel.clone()))
    return out


@dataclass
class _Observations:
    initial_count: int
    initial_skel: _Skel
    node_paths: dict  # initial nid -> Path
    node_initial: dict  # initial nid -> Node
    text_values: dict  # nid -> set[str]
    attr_values: dict  # (nid, attr name) -> set[str]
    attr_created: set  # (nid, attr name) created during a demo
    children_hist: dict  # parent nid -> list of child-nid lists, one per snapshot
    node_at: dict  # (timeline idx, snapshot idx) -> {nid: Node}
    snapshot_keys: list
    text_input_nids: set


def _observe(sketch: SketchTree, timelines: list[DemoTimeline]) -> _Observations:
    skel0, count = _initial_skeleton(sketch.root)
    node_paths: dict = {}
    node_initial: dict = {}

    def index_initial(node: Node, skel: _Skel, path: Path) -> None:
        node_paths[skel.nid] = path
        node_initial[skel.nid] = node
        if isinstance(node, Element):
            for i, child in enumerate(node.children):
                index_initial(child, skel.children[i], path + (i,))

    index_initial(sketch.root, skel0, ())

    obs = _Observations(
        initial_count=count,
        initial_skel=skel0,
        node_paths=node_paths,
        node_initial=node_initial,
        text_values={},
        attr_values={},
        attr_created=set(),
        children_hist={},
        node_at={},
        snapshot_keys=[],
        text_input_nids=set(),
    )

    for ti, timeline in enumerate(timelines):
        tracked = _tracked_snapshots(sketch, timeline, base=count + ti * 1_000_000)
        for k, (tree, skel) in enumerate(tracked):
            at: dict = {}
            obs.node_at[(ti, k)] = at
            obs.snapshot_keys.append((ti, k))

            def walk(node: Node, sk: _Skel) -> None:
                at[sk.nid] = node
                if isinstance(node, Text):
                    obs.text_values.setdefault(sk.nid, set()).add(node.value)
                    return
                for a in node.attrs:
                    if isinstance(a.value, str):
                        obs.attr_values.setdefault((sk.nid, a.name), set()).add(a.value)
                        if sk.nid < count:
                            initial = node_initial[sk.nid]
                            if isinstance(initial, Element) and initial.attr(a.name) is None:
                                obs.attr_created.add((sk.nid, a.name))
                obs.children_hist.setdefault(sk.nid, []).append([c.nid for c in sk.children])
                for i, child in enumerate(node.children):
                    walk(child, sk.children[i])

            walk(tree.root, skel)
        for idx, step in enumerate(timeline.steps):
            if isinstance(step.action, TextInput):
                pre_skel = tracked[idx][1]
                obs.text_input_nids.add(pre_skel.at(step.action.path).nid)
    return obs


# ---------------------------------------------------------------------------
# List region detection


def _item_slots(node: Node, rel: Path = ()) -> list[tuple[Path, Optional[str]]]:
    """String slots of an item subtree in canonical (preorder) order."""
    slots: list[tuple[Path, Optional[str]]] = []
    if isinstance(node, Text):
        slots.append((rel, None))
        return slots
    for a in node.attrs:
        if isinstance(a.value, str):
            slots.append((rel, a.name))
    for i, child in enumerate(node.children):
        slots.extend(_item_slots(child, rel + (i,)))
    return slots


def _node_at_rel(node: Node, rel: Path) -> Node:
    for i in rel:
        node = node.children[i]  # type: ignore[union-attr]
    return node


def _slot_value(node: Node, slot: tuple[Path, Optional[str]]) -> str:
    rel, attr = slot
    target = _node_at_rel(node, rel)
    if attr is None:
        assert isinstance(target, Text)
        return target.value
    assert isinstance(target, Element)
    a = target.attr(attr)
    assert a is not None and isinstance(a.value, str)
    return a.value


@dataclass
class _Region:
    parent_path: Path
    span: tuple[int, int]
    member_nids: set
    fields: list[tuple[Path, Optional[str]]]
    constants: dict
    initial_members: list[int]


def _detect_regions(obs: _Observations) -> list[_Region]:
    count_changed = []
    for nid, hist in obs.children_hist.items():
        if nid >= obs.initial_count:
            continue
        if any(lst != hist[0] for lst in hist):
            count_changed.append(nid)
    count_changed.sort(key=lambda nid: obs.node_paths[nid])

    regions: list[_Region] = []
    for parent in count_changed:
        path = obs.node_paths[parent]
        all_lists = obs.children_hist[parent]
        initial_children = all_lists[0]

        ever_members: set = set()
        for lst in all_lists:
            ever_members.update(nid for nid in lst if nid >= obs.initial_count)
        for nid in initial_children:
            if any(nid not in lst for lst in all_lists):
                ever_members.add(nid)
        if not ever_members:
            raise ExtractError(f"child order changed without churn under {list(path)}")

        sigs = set()
        for key in obs.snapshot_keys:
            at = obs.node_at[key]
            for nid in ever_members:
                if nid in at:
                    sigs.add(structure_key(at[nid]))
        if len(sigs) != 1:
            raise ExtractError(
                f"non-isomorphic sibling churn under {list(path)}: items must share one structure"
            )
        template_sig = sigs.pop()
        if template_sig == ("t",):
            raise ExtractError(f"cannot infer a list region over text nodes under {list(path)}")

        matches = [
            i
            for i, nid in enumerate(initial_children)
            if structure_key(obs.node_initial[nid]) == template_sig
        ]
        if not matches:
            raise ExtractError(
                f"list region under {list(path)} has no matching item in the initial sketch"
            )
        start, end = matches[0], matches[-1] + 1
        if matches != list(range(start, end)):
            raise ExtractError(f"ambiguous list region under {list(path)}: matches not contiguous")

        member_set = set(initial_children[start:end]) | ever_members
        prefix = initial_children[:start]
        suffix = initial_children[end:]
        for lst in all_lists:
            if lst[: len(prefix)] != prefix or (suffix and lst[-len(suffix) :] != suffix):
                raise ExtractError(f"fixed siblings around the list region under {list(path)} moved")
            middle = lst[len(prefix) : len(lst) - len(suffix)]
            if any(nid not in member_set for nid in middle):
                raise ExtractError(
                    f"non-isomorphic sibling churn under {list(path)}: unexpected child"
                )
        for key in obs.snapshot_keys:
            at = obs.node_at[key]
            for nid in member_set:
                if nid in at and structure_key(at[nid]) != template_sig:
                    raise ExtractError(
                        f"non-isomorphic sibling churn under {list(path)}: item structure drifted"
                    )

        slots = _item_slots(obs.node_initial[initial_children[start]])
        varying: list[tuple[Path, Optional[str]]] = []
        constants: dict = {}
        for slot in slots:
            values = set()
            for key in obs.snapshot_keys:
                at = obs.node_at[key]
                for nid in member_set:
                    if nid in at:
                        values.add(_slot_value(at[nid], slot))
            if len(values) > 1:
                varying.append(slot)
            else:
                constants[slot] = values.pop()

        regions.append(
            _Region(
                parent_path=path,
                span=(start, end),
                member_nids=member_set,
                fields=varying,
                constants=constants,
                initial_members=initial_children[start:end],
            )
        )

    for r in regions:
        for other in regions:
            if other is r:
                continue
            for i in range(other.span[0], other.span[1]):
                member_path = other.parent_path + (i,)
                if r.parent_path[: len(member_path)] == member_path:
                    raise ExtractError(
                        "nested list regions are not supported "
                        f"({list(r.parent_path)} inside an item of {list(other.parent_path)})"
                    )
    return regions


def _build_item_template(node: Node, region: _Region, field_names: dict, rel: Path = ()) -> TNode:
    if isinstance(node, Text):
        slot = (rel, None)
        if slot in field_names:
            return FieldRef(field_names[slot])
        return Text(region.constants[slot])
    attrs = []
    for a in node.attrs:
        if isinstance(a.value, Hole):
            attrs.append(TAttr(a.name, a.value))
        else:
            slot = (rel, a.name)
            if slot in field_names:
                attrs.append(TAttr(a.name, FieldRef(field_names[slot])))
            else:
                attrs.append(TAttr(a.name, region.constants[slot]))
    children = tuple(
        _build_item_template(c, region, field_names, rel + (i,))
        for i, c in enumerate(node.children)
    )
    return TElement(node.tag, tuple(attrs), children)


def _initial_subtree_nids(skel: _Skel) -> set:
    ids = {skel.nid}
    for c in skel.children:
        ids.update(_initial_subtree_nids(c))
    return ids


# ---------------------------------------------------------------------------
# Extraction entry points


def extract_params(sketch: SketchTree, timelines: list[DemoTimeline]) -> ParamSet:
    """Infer the reactive parameters demonstrated by the timelines.

    The result is canonical (s1..sn by document position) and independent
    of the order of the timelines list.
    """
    for t in timelines:
        diags = validate_timeline(sketch, t)
        if diags:
            d = diags[0]
            raise ExtractError(f"timeline {t.id} is invalid at step {d.step_index}: {d.message}")

    obs = _observe(sketch, timelines)
    regions = _detect_regions(obs)

    excluded_initial: set = set()
    for r in regions:
        for nid in r.initial_members:
            excluded_initial.update(_initial_subtree_nids(obs.initial_skel.at(obs.node_paths[nid])))

    candidates: list[tuple[tuple, Param]] = []

    for r in regions:
        field_names: dict = {}
        field_specs: list[FieldSpec] = []
        for i, slot in enumerate(r.fields):
            name = f"f{i + 1}"
            field_names[slot] = name
            values = set()
            for key in obs.snapshot_keys:
                at = obs.node_at[key]
                for nid in r.member_nids:
                    if nid in at:
                        values.add(_slot_value(at[nid], slot))
            vtype = NUM if values and all(is_canonical_int(v) for v in values) else STR
            field_specs.append(FieldSpec(name, vtype))
        template = _build_item_template(obs.node_initial[r.initial_members[0]], r, field_names)
        initial_records = []
        for nid in r.initial_members:
            node = obs.node_initial[nid]
            rec = tuple(
                int(_slot_value(node, slot)) if spec.value_type == NUM else _slot_value(node, slot)
                for slot, spec in zip(r.fields, field_specs)
            )
            initial_records.append(rec)
        key = (r.parent_path + (r.span[0],), -1)
        candidates.append(
            (
                key,
                ListRegionParam("", r.parent_path, r.span, template, tuple(field_specs), tuple(initial_records)),
            )
        )

    for nid in range(obs.initial_count):
        if nid in excluded_initial:
            continue
        node = obs.node_initial[nid]
        path = obs.node_paths[nid]
        if isinstance(node, Text):
            values = obs.text_values.get(nid, set()) | {node.value}
            if len(values) > 1:
                vtype = NUM if all(is_canonical_int(v) for v in values) else STR
                initial = int(node.value) if vtype == NUM else node.value
                candidates.append(((path, -1), ScalarParam("", path, None, vtype, initial)))
            continue
        for name in sorted(n for (i, n) in obs.attr_created if i == nid):
            if name == "value" and node.tag in ("input", "textarea"):
                raise ExtractError(
                    f"input at {list(path)} needs an explicit value attribute in the sketch"
                )
            raise ExtractError(
                f"attribute {name} at {list(path)} was created during a demo and cannot be anchored"
            )
        forced_value = nid in obs.text_input_nids
        for attr_idx, a in enumerate(node.attrs):
            if isinstance(a.value, Hole):
                continue
            values = obs.attr_values.get((nid, a.name), set()) | {a.value}
            if len(values) > 1 or (forced_value and a.name == "value"):
                vtype = NUM if all(is_canonical_int(v) for v in values) else STR
                initial = int(a.value) if vtype == NUM else a.value
                candidates.append(((path, attr_idx), ScalarParam("", path, a.name, vtype, initial)))

    candidates.sort(key=lambda kv: kv[0])
    params: list[Param] = []
    for i, (_key, p) in enumerate(candidates):
        name = f"s{i + 1}"
        if isinstance(p, ScalarParam):
            params.append(ScalarParam(name, p.path, p.attr, p.value_type, p.initial))
        else:
            params.append(
                ListRegionParam(name, p.parent_path, p.span, p.item_template, p.fields, p.initial)
            )
    return ParamSet(tuple(params))


def elaborate_sketch(sketch: SketchTree, params: ParamSet) -> ElaboratedSketch:
    """Rewrite the sketch over the extracted parameters; rendering the
    initial state gives back the original sketch."""
    scalar_text = {p.path: p.name for p in params.scalars() if p.attr is None}
    scalar_attr = {(p.path, p.attr): p.name for p in params.scalars() if p.attr is not None}
    regions_by_parent: dict = {}
    for r in params.regions():
        regions_by_parent.setdefault(r.parent_path, []).append(r)

    def build(node: Node, path: Path) -> TNode:
        if isinstance(node, Text):
            if path in scalar_text:
                return ParamRef(scalar_text[path])
            return node
        attrs = []
        for a in node.attrs:
            if isinstance(a.value, Hole):
                attrs.append(TAttr(a.name, a.value))
            elif (path, a.name) in scalar_attr:
                attrs.append(TAttr(a.name, ParamRef(scalar_attr[(path, a.name)])))
            else:
                attrs.append(TAttr(a.name, a.value))
        regions = regions_by_parent.get(path, [])
        children: list[TNode] = []
        i = 0
        while i < len(node.children):
            region = next((r for r in regions if r.span[0] == i), None)
            if region is not None:
                children.append(RepeatNode(region.name, region.item_template))
                i = region.span[1]
            else:
                children.append(build(node.children[i], path + (i,)))
                i += 1
        return TElement(node.tag, tuple(attrs), tuple(children))

    template = build(sketch.root, ())
    assert isinstance(template, TElement)
    return ElaboratedSketch(template, params, tuple(collect_holes(sketch)))


def state_traces(elab: ElaboratedSketch, timelines: list[DemoTimeline]) -> list[StateTrace]:
    """Per-step state transitions recovered by matching snapshots against
    the template; TraceError signals an extraction inconsistency."""
    sketch = render_state(elab, initial_state(elab.params))
    traces = []
    for timeline in timelines:
        snaps = snapshots(sketch, timeline)
        entries = []
        for i, step in enumerate(timeline.steps):
            before = match_state(elab, snaps[i])
            after = match_state(elab, snaps[i + 1])
            target = resolve(snaps[i], step.action.path)
            assert isinstance(target, Element)
            if isinstance(step.action, TextInput):
                hole = element_hole(target, "onChange")
                payload: Optional[str] = step.action.value
            else:
                hole = element_hole(target, "onClick")
                payload = None
            entries.append(
                TraceEntry(
                    state_before=before,
                    hole_id=hole,
                    payload=payload,
                    occurrence_path=step.action.path,
                    item_index=item_index_of(elab, snaps[i], step.action.path),
                    state_after=after,
                )
            )
        traces.append(StateTrace(timeline.id, entries))
    return traces
