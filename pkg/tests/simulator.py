"""Whole-pipeline fuzz harness: random sketches with random ground-truth
handlers, simulated into timelines whose edits come from diff scripts.

The ground truth drives simulation only; extraction, tracing, synthesis
and replay then run with no knowledge of it. Ground-truth literals are
restricted to {0, 1} and "" because those are the only constants an
observation-seeded literal pool is guaranteed to contain.
"""

from dataclasses import dataclass
from typing import Optional

from hypothesis import strategies as st

from demosynth.diffing import diff_trees
from demosynth.dsl import (
    Add,
    Append,
    Concat,
    EmptyList,
    EvalError,
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
)
from demosynth.extraction import elaborate_sketch
from demosynth.sketch import Attr, Element, Hole, SketchTree, Text
from demosynth.template import (
    NUM,
    STR,
    FieldSpec,
    ListRegionParam,
    ParamSet,
    ScalarParam,
    initial_state,
    render_state,
)
from demosynth.timeline import Click, DemoTimeline, Step, TextInput, apply_action

LABELS = ["alpha", "beta", "gamma", "delta"]
TYPED = ["hello", "world", "abc", "xy"]


@dataclass
class Scenario:
    sketch: SketchTree
    timelines: list
    ground: dict  # hole id -> HandlerProgram
    item_hole: Optional[int]


@st.composite
def scenarios(draw):
    num_count = draw(st.integers(min_value=0, max_value=2))
    with_input = draw(st.booleans())
    with_list = draw(st.booleans())
    if num_count == 0 and not with_input and not with_list:
        num_count = 1
    button_count = draw(st.integers(min_value=1, max_value=2))

    children = []
    params = []
    hole = 0
    for _i in range(num_count):
        init = draw(st.integers(min_value=0, max_value=3))
        path = (len(children),)
        children.append(Element("span", (), (Text(str(init)),)))
        name = f"g{len(params)}"
        params.append(ScalarParam(name, path + (0,), None, NUM, init))

    input_param = None
    input_hole = None
    if with_input:
        hole += 1
        input_hole = hole
        path = (len(children),)
        children.append(
            Element("input", (Attr("value", ""), Attr("onChange", Hole(input_hole))), ())
        )
        input_param = f"g{len(params)}"
        params.append(ScalarParam(input_param, path, "value", STR, ""))

    list_param = None
    item_hole = None
    if with_list:
        hole += 1
        item_hole = hole
        count = draw(st.integers(min_value=1, max_value=2))
        labels = [draw(st.sampled_from(LABELS)) for _ in range(count)]
        lis = tuple(
            Element(
                "li",
                (),
                (
                    Element("span", (), (Text(label),)),
                    Element("button", (Attr("onClick", Hole(item_hole)),), (Text("x"),)),
                ),
            )
            for label in labels
        )
        parent_path = (len(children),)
        children.append(Element("ul", (), lis))
        list_param = f"g{len(params)}"
        from demosynth.template import FieldRef, TAttr, TElement

        item_template = TElement(
            "li",
            (),
            (
                TElement("span", (), (FieldRef("label"),)),
                TElement("button", (TAttr("onClick", Hole(item_hole)),), (Text("x"),)),
            ),
        )
        params.append(
            ListRegionParam(
                list_param,
                parent_path,
                (0, count),
                item_template,
                (FieldSpec("label", STR),),
                tuple((label,) for label in labels),
            )
        )

    button_holes = []
    for _i in range(button_count):
        hole += 1
        button_holes.append(hole)
        children.append(
            Element("button", (Attr("onClick", Hole(hole)),), (Text(f"b{hole}"),))
        )

    sketch = SketchTree(Element("div", (), tuple(children)))
    param_set = ParamSet(tuple(params))
    ground_elab = elaborate_sketch(sketch, param_set)

    def num_expr(target, depth=0):
        # numeric reads are restricted to the assigned parameter itself: a
        # *different* never-changing sibling would act as a hidden constant
        # that no observation-seeded literal pool can recover
        choice = draw(st.integers(min_value=0, max_value=5 if depth == 0 else 2))
        if choice <= 1:
            return IntLit(choice)
        if choice == 2:
            return Var(target)
        left = num_expr(target, depth + 1)
        right = num_expr(target, depth + 1)
        return Add(left, right) if choice == 3 else Sub(left, right)

    def str_expr(payload_ok, depth=0):
        options = ["empty", "var", "payload", "concat"] if depth == 0 else ["empty", "var", "payload"]
        choice = draw(st.sampled_from(options))
        if choice == "payload" and payload_ok:
            return Payload()
        if choice == "var" and input_param:
            return Var(input_param)
        if choice == "concat" and input_param:
            return Concat(str_expr(payload_ok, 1), str_expr(payload_ok, 1))
        return StrLit("")

    def list_expr(index_ok):
        choice = draw(st.sampled_from(["append", "prepend", "remove", "keep", "clear"]))
        if choice == "append":
            return Append(Var(list_param), Record((("label", str_expr(False, 1)),)))
        if choice == "prepend":
            return Prepend(Var(list_param), Record((("label", str_expr(False, 1)),)))
        if choice == "remove":
            if index_ok and draw(st.booleans()):
                return RemoveAt(Var(list_param), ItemIndex())
            return RemoveAt(Var(list_param), IntLit(draw(st.integers(min_value=0, max_value=1))))
        if choice == "clear":
            return EmptyList()
        return Var(list_param)

    def ground_program(hole_id):
        payload_ok = hole_id == input_hole
        index_ok = hole_id == item_hole
        assignable = [p.name for p in params]
        if not assignable:
            return HandlerProgram(())
        count = draw(st.integers(min_value=0, max_value=min(2, len(assignable))))
        chosen = sorted(
            draw(
                st.lists(
                    st.sampled_from(assignable), min_size=count, max_size=count, unique=True
                )
            )
        )
        assignments = []
        for name in chosen:
            p = param_set.get(name)
            if isinstance(p, ScalarParam) and p.value_type == NUM:
                assignments.append((name, num_expr(name)))
            elif isinstance(p, ScalarParam):
                assignments.append((name, str_expr(payload_ok)))
            else:
                assignments.append((name, list_expr(index_ok)))
        prog = HandlerProgram(tuple(assignments))
        if prog.size() > 4:
            prog = HandlerProgram(prog.assignments[:1])
        if prog.size() > 4:
            prog = HandlerProgram(())
        return prog

    ground = {}
    for hole_id in button_holes:
        ground[hole_id] = ground_program(hole_id)
    if input_hole is not None:
        setter = draw(st.booleans())
        prog = HandlerProgram(((input_param, Payload()),)) if setter else ground_program(input_hole)
        ground[input_hole] = prog
    if item_hole is not None:
        ground[item_hole] = ground_program(item_hole)

    timelines = []
    timeline_count = draw(st.integers(min_value=1, max_value=2))
    total_steps = 0
    for t_index in range(timeline_count):
        state = initial_state(param_set)
        current = render_state(ground_elab, state)
        steps = []
        for _step in range(draw(st.integers(min_value=1, max_value=4))):
            actions = []
            for hole_id in button_holes:
                path = _find_hole_path(current, hole_id)
                if path is not None:
                    actions.append(("click", hole_id, path, None, None))
            if input_hole is not None:
                typed = draw(st.sampled_from(TYPED))
                path = _find_tag_path(current, "input")
                actions.append(("input", input_hole, path, typed, None))
            if item_hole is not None and list_param is not None and state[list_param]:
                idx = draw(st.integers(min_value=0, max_value=len(state[list_param]) - 1))
                parent = _find_tag_path(current, "ul")
                actions.append(("click", item_hole, parent + (idx, 1), None, idx))
            order = draw(st.permutations(range(len(actions))))
            done = False
            for pick in order:
                kind, hole_id, path, typed, idx = actions[pick]
                prog = ground[hole_id]
                try:
                    new_state = eval_program(prog, state, typed, idx)
                    after = render_state(ground_elab, new_state)
                except EvalError:
                    continue
                action = TextInput(path, typed) if kind == "input" else Click(path)
                acted = apply_action(current, action)
                edits = diff_trees(acted, after)
                steps.append(Step(action, tuple(edits)))
                state, current = new_state, after
                done = True
                break
            if not done:
                break
        if steps:
            timelines.append(DemoTimeline(f"sim{t_index}", tuple(steps)))
            total_steps += len(steps)
    if not timelines:
        # no executable step at all; degenerate but still well-formed
        timelines.append(DemoTimeline("sim0", ()))
    return Scenario(sketch, timelines, ground, item_hole)


def _find_hole_path(tree: SketchTree, hole_id: int):
    from demosynth.sketch import collect_holes

    for site in collect_holes(tree):
        if site.hole_id == hole_id:
            return site.path
    return None


def _find_tag_path(tree: SketchTree, tag: str):
    from demosynth.sketch import iter_nodes

    for path, node in iter_nodes(tree):
        if isinstance(node, Element) and node.tag == tag:
            return path
    return None
