import pytest

from demosynth.codegen import (
    CodegenError,
    ComponentParseError,
    MatchError,
    emit_component,
    match_component,
    parse_component,
)
from demosynth.dsl import HandlerProgram
from demosynth.extraction import elaborate_sketch, extract_params, state_traces
from demosynth.synthesis import Pass, replay, synthesize_enumerative
from demosynth.template import initial_state


def pipeline_parts(sketch, timelines):
    params = extract_params(sketch, timelines)
    elab = elaborate_sketch(sketch, params)
    traces = state_traces(elab, timelines)
    result = synthesize_enumerative(elab, traces)
    assert result.solved
    return elab, result.handlers


COUNTER_GOLDEN = """function Counter() {
  const [s1, setS1] = useState(0);
  const h1 = () => {
    setS1(s1 + 1);
  };
  return (
    <div>
      <span>{s1}</span>
      <button onClick={h1}>+</button>
    </div>
  );
}
"""

TODO_GOLDEN = """function TodoApp() {
  const [s1, setS1] = useState("");
  const [s2, setS2] = useState([{ f1: "Buy milk" }, { f1: "Walk dog" }]);
  const h1 = (e) => {
    setS1(e.target.value);
  };
  const h2 = () => {
    setS1("");
    setS2([...s2, { f1: s1 }]);
  };
  const h3 = (i) => {
    setS2(s2.filter((_, j) => j !== i));
  };
  return (
    <div>
      <input value={s1} onChange={h1} />
      <button onClick={h2}>Add</button>
      <ul>
        {s2.map((item, i) => (
          <li key={i}>
            <span>{item.f1}</span>
            <button onClick={() => h3(i)}>x</button>
          </li>
        ))}
      </ul>
    </div>
  );
}
"""


class TestEmit:
    def test_counter_golden(self, counter_sketch, counter_timelines):
        elab, handlers = pipeline_parts(counter_sketch, counter_timelines)
        source = emit_component(elab, handlers, initial_state(elab.params), "Counter")
        assert source.text == COUNTER_GOLDEN
        assert source.provenance == "enumerative"
        assert source.verified

    def test_todo_golden(self, todo_sketch, todo_timelines):
        elab, handlers = pipeline_parts(todo_sketch, todo_timelines)
        source = emit_component(elab, handlers, initial_state(elab.params), "TodoApp")
        assert source.text == TODO_GOLDEN

    def test_static_component_without_params(self, counter_sketch):
        from demosynth.template import ParamSet

        elab = elaborate_sketch(counter_sketch, ParamSet())
        source = emit_component(elab, {1: HandlerProgram(())}, {}, "Static")
        assert "useState" not in source.text
        assert "<span>0</span>" in source.text

    def test_deterministic(self, todo_sketch, todo_timelines):
        elab, handlers = pipeline_parts(todo_sketch, todo_timelines)
        a = emit_component(elab, handlers, initial_state(elab.params), "TodoApp")
        b = emit_component(elab, handlers, initial_state(elab.params), "TodoApp")
        assert a.text == b.text

    def test_uncovered_hole_rejected(self, counter_sketch, counter_timelines):
        elab, _handlers = pipeline_parts(counter_sketch, counter_timelines)
        with pytest.raises(CodegenError, match="no handler"):
            emit_component(elab, {}, initial_state(elab.params), "Counter")

    def test_invalid_name_rejected(self, counter_sketch, counter_timelines):
        elab, handlers = pipeline_parts(counter_sketch, counter_timelines)
        with pytest.raises(CodegenError, match="invalid component name"):
            emit_component(elab, handlers, initial_state(elab.params), "counter")


class TestParse:
    def test_counter_round_trip(self, counter_sketch, counter_timelines):
        elab, handlers = pipeline_parts(counter_sketch, counter_timelines)
        parsed = parse_component(COUNTER_GOLDEN)
        bound = match_component(parsed, elab)
        assert bound.handlers == handlers
        assert bound.extra_initial == {}

    def test_todo_round_trip_replays(self, todo_sketch, todo_timelines):
        elab, handlers = pipeline_parts(todo_sketch, todo_timelines)
        parsed = parse_component(TODO_GOLDEN)
        bound = match_component(parsed, elab)
        for t in todo_timelines:
            outcome = replay(
                todo_sketch and elab,
                bound.handlers,
                t,
                todo_sketch,
                extra_initial=bound.extra_initial,
                input_programs=bound.input_programs,
            )
            assert isinstance(outcome, Pass)

    def test_whitespace_perturbation_same_result(self, counter_sketch, counter_timelines):
        elab, _ = pipeline_parts(counter_sketch, counter_timelines)
        squashed = COUNTER_GOLDEN.replace("\n", " ").replace("  ", " ")
        a = match_component(parse_component(COUNTER_GOLDEN), elab)
        b = match_component(parse_component(squashed), elab)
        assert a == b

    def test_reordered_state_decls_accepted(self, todo_sketch, todo_timelines):
        elab, handlers = pipeline_parts(todo_sketch, todo_timelines)
        lines = TODO_GOLDEN.split("\n")
        lines[1], lines[2] = lines[2], lines[1]
        bound = match_component(parse_component("\n".join(lines)), elab)
        assert bound.handlers == handlers

    def test_unsupported_construct_named(self):
        code = """function C() {
  useEffect(() => {}, []);
  return (
    <div>x</div>
  );
}
"""
        with pytest.raises(ComponentParseError, match="unsupported construct"):
            parse_component(code)

    def test_import_lines_ignored(self, counter_sketch, counter_timelines):
        elab, handlers = pipeline_parts(counter_sketch, counter_timelines)
        code = 'import { useState } from "react";\n\n' + COUNTER_GOLDEN
        bound = match_component(parse_component(code), elab)
        assert bound.handlers == handlers

    def test_const_arrow_component_form(self, counter_sketch, counter_timelines):
        elab, handlers = pipeline_parts(counter_sketch, counter_timelines)
        code = COUNTER_GOLDEN.replace("function Counter() {", "const Counter = () => {")
        bound = match_component(parse_component(code), elab)
        assert bound.handlers == handlers

    def test_prose_rejected(self):
        with pytest.raises(ComponentParseError):
            parse_component("Sure! Here is the component you asked for.")


class TestMatch:
    def test_latent_state_component(self, hidden_sketch, hidden_timelines):
        params = extract_params(hidden_sketch, hidden_timelines)
        elab = elaborate_sketch(hidden_sketch, params)
        code = """function Counter() {
  const [s1, setS1] = useState(0);
  const [mode, setMode] = useState(1);
  const h1 = () => {
    setS1(s1 + mode);
    setMode(3 - mode);
  };
  return (
    <div>
      <span>{s1}</span>
      <button onClick={h1}>+</button>
    </div>
  );
}
"""
        bound = match_component(parse_component(code), elab)
        assert bound.extra_initial == {"mode": 1}
        for t in hidden_timelines:
            outcome = replay(
                elab, bound.handlers, t, hidden_sketch, extra_initial=bound.extra_initial
            )
            assert isinstance(outcome, Pass)

    def test_wrong_initial_rejected(self, counter_sketch, counter_timelines):
        elab, _ = pipeline_parts(counter_sketch, counter_timelines)
        code = COUNTER_GOLDEN.replace("useState(0)", "useState(5)")
        with pytest.raises(MatchError, match="initial value"):
            match_component(parse_component(code), elab)

    def test_template_mismatch_rejected(self, counter_sketch, counter_timelines):
        elab, _ = pipeline_parts(counter_sketch, counter_timelines)
        code = COUNTER_GOLDEN.replace("<span>{s1}</span>", "<p>{s1}</p>")
        with pytest.raises(MatchError, match="expected <span>"):
            match_component(parse_component(code), elab)

    def test_missing_handler_rejected(self, counter_sketch, counter_timelines):
        elab, _ = pipeline_parts(counter_sketch, counter_timelines)
        code = COUNTER_GOLDEN.replace("onClick={h1}", 'id="plus"')
        with pytest.raises(MatchError):
            match_component(parse_component(code), elab)

    def test_wrong_behavior_still_binds_then_fails_replay(
        self, counter_sketch, counter_timelines
    ):
        elab, _ = pipeline_parts(counter_sketch, counter_timelines)
        code = COUNTER_GOLDEN.replace("setS1(s1 + 1)", "setS1(s1 - 1)")
        bound = match_component(parse_component(code), elab)
        outcome = replay(elab, bound.handlers, counter_timelines[0], counter_sketch)
        assert not isinstance(outcome, Pass)
        assert outcome.step_index == 0
