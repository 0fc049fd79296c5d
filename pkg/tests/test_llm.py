import json

import httpx
import pytest

from demosynth import oneshot
from demosynth.extraction import elaborate_sketch, extract_params, state_traces
from demosynth.llm import (
    ClientError,
    CodeExtractError,
    HttpLlmClient,
    Limits,
    MockLlmClient,
    build_prompt,
    canonical_prompt_text,
    extract_component,
    prompt_key,
    textualize,
    validate_output,
)


def setup(sketch, timelines):
    params = extract_params(sketch, timelines)
    elab = elaborate_sketch(sketch, params)
    traces = state_traces(elab, timelines)
    return elab, traces


class TestTextualize:
    def test_counter_golden_line(self, counter_sketch, counter_timelines):
        elab, traces = setup(counter_sketch, counter_timelines)
        text = textualize(elab, traces)
        assert "step 1: CLICK $1 ; before {s1: 0} ; after {s1: 1}" in text
        assert text.startswith("SKETCH:\n<div>\n")

    def test_matches_stored_oneshot_input(self, counter_sketch, counter_timelines):
        elab, traces = setup(counter_sketch, counter_timelines)
        assert textualize(elab, traces) == oneshot.EXAMPLE_INPUT

    def test_todo_mentions_item_index(self, todo_sketch, todo_timelines):
        elab, traces = setup(todo_sketch, todo_timelines)
        text = textualize(elab, traces)
        assert "CLICK $3 item 0" in text
        assert 'INPUT $1 "Buy eggs"' in text
        assert 's2 = [{f1: "Buy milk"}, {f1: "Walk dog"}]' in text

    def test_empty_traces_sections_only(self, counter_sketch, counter_timelines):
        elab, _ = setup(counter_sketch, counter_timelines)
        text = textualize(elab, [])
        assert "SKETCH:" in text and "INITIAL STATE:" in text
        assert "TIMELINE" not in text

    def test_deterministic(self, todo_sketch, todo_timelines):
        elab, traces = setup(todo_sketch, todo_timelines)
        assert textualize(elab, traces) == textualize(elab, traces)


class TestBuildPrompt:
    def test_embeds_stored_example(self):
        bundle = build_prompt("TASK")
        assert bundle.example_input == oneshot.EXAMPLE_INPUT
        assert bundle.example_output == oneshot.EXAMPLE_OUTPUT
        assert bundle.task_text == "TASK"

    def test_empty_task_still_well_formed(self):
        bundle = build_prompt("")
        assert bundle.system_text
        assert canonical_prompt_text(bundle)

    def test_backticks_in_task_survive(self):
        bundle = build_prompt("weird ``` task")
        assert "weird ``` task" in canonical_prompt_text(bundle)

    def test_prompt_determinism(self, counter_sketch, counter_timelines):
        elab, traces = setup(counter_sketch, counter_timelines)
        a = build_prompt(textualize(elab, traces))
        b = build_prompt(textualize(elab, traces))
        assert a == b
        assert prompt_key(a) == prompt_key(b)


class TestExtractComponent:
    def test_single_fenced_block(self):
        assert extract_component("hi\n```jsx\nfunction A() {}\n```\nbye") == "function A() {}\n"

    def test_first_of_two_blocks(self):
        text = "```\nfirst\n```\nmore\n```\nsecond\n```"
        assert extract_component(text) == "first\n"

    def test_bare_function_accepted(self):
        assert extract_component("function A() {}").startswith("function")

    def test_prose_rejected(self):
        with pytest.raises(CodeExtractError):
            extract_component("I am sorry, I cannot help with that.")

    def test_empty_rejected(self):
        with pytest.raises(CodeExtractError):
            extract_component("   \n")


class TestMockClient:
    def test_keyed_response(self):
        bundle = build_prompt("x")
        client = MockLlmClient({prompt_key(bundle): "CANNED"})
        assert client.complete(bundle) == "CANNED"

    def test_fallback_is_latent_component(self):
        client = MockLlmClient()
        out = client.complete(build_prompt("anything"))
        assert out == oneshot.CANNED_LATENT_RESPONSE

    def test_bit_deterministic(self):
        client = MockLlmClient()
        bundle = build_prompt("t")
        assert client.complete(bundle) == client.complete(bundle)


class TestHttpClient:
    def _transport_client(self, handler):
        # route httpx.post through a mock transport via monkeypatching
        return httpx.Client(transport=httpx.MockTransport(handler))

    def test_wire_format_and_extraction(self, monkeypatch):
        seen = {}

        def handler(request):
            seen["json"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "the code"}}]}
            )

        client = HttpLlmClient("http://llm.local/v1/chat/completions", "test-model", "KEY")
        with self._transport_client(handler) as http:
            monkeypatch.setattr(httpx, "post", http.post)
            out = client.complete(build_prompt("TASK"), Limits(max_tokens=99))
        assert out == "the code"
        assert seen["json"]["model"] == "test-model"
        assert seen["json"]["max_tokens"] == 99
        roles = [m["role"] for m in seen["json"]["messages"]]
        assert roles == ["system", "user", "assistant", "user"]
        assert seen["json"]["messages"][3]["content"] == "TASK"
        assert seen["auth"] == "Bearer KEY"

    def test_one_retry_then_error(self, monkeypatch):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(500)

        client = HttpLlmClient("http://llm.local/x", "m")
        with self._transport_client(handler) as http:
            monkeypatch.setattr(httpx, "post", http.post)
            with pytest.raises(ClientError, match="after retry"):
                client.complete(build_prompt("t"))
        assert calls["n"] == 2


class TestValidateOutput:
    def test_canonical_counter_verified(self, counter_sketch, counter_timelines):
        from test_codegen import COUNTER_GOLDEN

        elab, _ = setup(counter_sketch, counter_timelines)
        outcome = validate_output(COUNTER_GOLDEN, elab, counter_timelines, counter_sketch)
        assert outcome.verified

    def test_decrement_unverified_step_one(self, counter_sketch, counter_timelines):
        from test_codegen import COUNTER_GOLDEN

        elab, _ = setup(counter_sketch, counter_timelines)
        bad = COUNTER_GOLDEN.replace("s1 + 1", "s1 - 1")
        outcome = validate_output(bad, elab, counter_timelines, counter_sketch)
        assert not outcome.verified
        assert outcome.reason == "replay-mismatch step 1"

    def test_exotic_code_unparseable(self, counter_sketch, counter_timelines):
        elab, _ = setup(counter_sketch, counter_timelines)
        outcome = validate_output(
            "class Widget extends Component {}", elab, counter_timelines, counter_sketch
        )
        assert not outcome.verified
        assert outcome.reason.startswith("unparseable")
        assert outcome.code == "class Widget extends Component {}"

    def test_latent_canned_component_verifies(self, hidden_sketch, hidden_timelines):
        elab, _ = setup(hidden_sketch, hidden_timelines)
        code = extract_component(oneshot.CANNED_LATENT_RESPONSE)
        outcome = validate_output(code, elab, hidden_timelines, hidden_sketch)
        assert outcome.verified
