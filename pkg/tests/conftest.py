import json
from pathlib import Path

import pytest
from hypothesis import settings

from demosynth.sketch import SketchTree, parse_sketch
from demosynth.timeline import DemoTimeline, timeline_from_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile("unit", max_examples=100)
settings.register_profile("acceptance", max_examples=1000, deadline=None)
settings.load_profile("unit")


def load_sketch(name: str) -> SketchTree:
    return parse_sketch((FIXTURES / name).read_text())


def load_timeline(name: str) -> DemoTimeline:
    return timeline_from_json(json.loads((FIXTURES / name).read_text()))


@pytest.fixture
def counter_sketch() -> SketchTree:
    return load_sketch("counter.sketch.jsx")


@pytest.fixture
def counter_timelines() -> list[DemoTimeline]:
    return [load_timeline("counter-a.timeline.json"), load_timeline("counter-b.timeline.json")]


@pytest.fixture
def counter2_sketch() -> SketchTree:
    return load_sketch("counter2.sketch.jsx")


@pytest.fixture
def counter2_timelines() -> list[DemoTimeline]:
    return [load_timeline("counter2.timeline.json")]


@pytest.fixture
def todo_sketch() -> SketchTree:
    return load_sketch("todo.sketch.jsx")


@pytest.fixture
def todo_timelines() -> list[DemoTimeline]:
    return [load_timeline("todo-a.timeline.json"), load_timeline("todo-b.timeline.json")]


@pytest.fixture
def hidden_sketch() -> SketchTree:
    return load_sketch("hidden.sketch.jsx")


@pytest.fixture
def hidden_timelines() -> list[DemoTimeline]:
    return [load_timeline("hidden.timeline.json")]
