import json

import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings
from hypothesis import strategies as st

from demosynth.service import create_app

COUNTER_SOURCE = open("fixtures/counter.sketch.jsx").read()
COUNTER_TIMELINE = json.load(open("fixtures/counter-a.timeline.json"))


@pytest.fixture
def client():
    return TestClient(create_app())


def make_session(client, source=COUNTER_SOURCE):
    sid = client.post("/sessions").json()["id"]
    assert client.put(f"/sessions/{sid}/sketch", json={"source": source}).status_code == 200
    return sid


class TestLifecycle:
    def test_counter_end_to_end(self, client):
        sid = make_session(client)
        assert client.post(f"/sessions/{sid}/lock").json() == {"lockState": "demo"}
        tid = client.post(f"/sessions/{sid}/timelines", json={"id": "counter-a"}).json()[
            "timelineId"
        ]
        assert tid == "counter-a"
        for step in COUNTER_TIMELINE["steps"]:
            r = client.post(f"/sessions/{sid}/timelines/{tid}/steps", json=step)
            assert r.status_code == 200, r.text
        r = client.post(f"/sessions/{sid}/synthesize", json={"llm": "off"})
        assert r.status_code == 200
        body = r.json()
        assert body["component"]["provenance"] == "enumerative"
        assert body["component"]["verified"] is True
        assert "setS1(s1 + 1);" in body["component"]["text"]
        session = client.get(f"/sessions/{sid}").json()
        assert session["timelines"][0] == {"id": "counter-a", **COUNTER_TIMELINE, "id": "counter-a"}
        assert session["lastResult"]["verified"] is True

    def test_step_response_is_post_step_tree(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        tid = client.post(f"/sessions/{sid}/timelines").json()["timelineId"]
        r = client.post(
            f"/sessions/{sid}/timelines/{tid}/steps", json=COUNTER_TIMELINE["steps"][0]
        )
        tree = r.json()["tree"]
        assert tree["children"][0]["children"][0] == {"text": "1"}

    def test_amend_last_step(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        tid = client.post(f"/sessions/{sid}/timelines").json()["timelineId"]
        for step in COUNTER_TIMELINE["steps"]:
            client.post(f"/sessions/{sid}/timelines/{tid}/steps", json=step)
        r = client.delete(f"/sessions/{sid}/timelines/{tid}/steps/last")
        assert r.status_code == 200
        assert r.json()["tree"]["children"][0]["children"][0] == {"text": "1"}
        session = client.get(f"/sessions/{sid}").json()
        assert len(session["timelines"][0]["steps"]) == 1

    def test_session_import(self, client):
        r = client.post(
            "/sessions",
            json={"sketchSource": COUNTER_SOURCE, "timelines": [COUNTER_TIMELINE]},
        )
        sid = r.json()["id"]
        session = client.get(f"/sessions/{sid}").json()
        assert session["timelines"] == [COUNTER_TIMELINE]


class TestErrors:
    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_unknown_timeline_404(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        r = client.post(f"/sessions/{sid}/timelines/nope/steps", json=COUNTER_TIMELINE["steps"][0])
        assert r.status_code == 404

    def test_sketch_put_while_locked_409(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        r = client.put(f"/sessions/{sid}/sketch", json={"source": "<div />"})
        assert r.status_code == 409

    def test_record_while_editing_409(self, client):
        sid = make_session(client)
        assert client.post(f"/sessions/{sid}/timelines").status_code == 409

    def test_double_lock_409(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        assert client.post(f"/sessions/{sid}/lock").status_code == 409

    def test_synthesize_without_timelines_422(self, client):
        sid = make_session(client)
        assert client.post(f"/sessions/{sid}/synthesize", json={"llm": "off"}).status_code == 422

    def test_invalid_sketch_422_with_location(self, client):
        sid = client.post("/sessions").json()["id"]
        r = client.put(f"/sessions/{sid}/sketch", json={"source": "<div id={$1}/>"})
        assert r.status_code == 422
        assert "hole in non-handler attribute" in r.json()["detail"]["message"]

    def test_bad_step_422(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        tid = client.post(f"/sessions/{sid}/timelines").json()["timelineId"]
        bad = {"action": {"kind": "click", "path": [9]}, "edits": []}
        r = client.post(f"/sessions/{sid}/timelines/{tid}/steps", json=bad)
        assert r.status_code == 422

    def test_unknown_step_field_422(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/lock")
        tid = client.post(f"/sessions/{sid}/timelines").json()["timelineId"]
        bad = {"action": {"kind": "click", "path": [1], "x": 1}, "edits": []}
        r = client.post(f"/sessions/{sid}/timelines/{tid}/steps", json=bad)
        assert r.status_code == 422

    def test_pipeline_failure_surfaces_stage(self, client):
        source = open("fixtures/hidden.sketch.jsx").read()
        timeline = json.load(open("fixtures/hidden.timeline.json"))
        r = client.post("/sessions", json={"sketchSource": source, "timelines": [timeline]})
        sid = r.json()["id"]
        resp = client.post(f"/sessions/{sid}/synthesize", json={"llm": "off", "maxSize": 4})
        assert resp.status_code == 422
        assert "stage synthesize" in resp.json()["detail"]["message"]


class TestLockDiscipline:
    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.sampled_from(["lock", "unlock", "sketch", "timeline", "step"]),
            max_size=12,
        )
    )
    def test_locked_sketch_never_mutates(self, calls):
        client = TestClient(create_app())
        sid = make_session(client)
        source = COUNTER_SOURCE
        locked = False
        tid = None
        for call in calls:
            if call == "lock":
                r = client.post(f"/sessions/{sid}/lock")
                locked = locked or r.status_code == 200
            elif call == "unlock":
                r = client.post(f"/sessions/{sid}/unlock")
                if r.status_code == 200:
                    locked = False
            elif call == "sketch":
                r = client.put(f"/sessions/{sid}/sketch", json={"source": "<p>new</p>"})
                if locked:
                    assert r.status_code == 409
                elif r.status_code == 200:
                    source = "<p>new</p>"
            elif call == "timeline":
                r = client.post(f"/sessions/{sid}/timelines")
                if not locked:
                    assert r.status_code == 409
                elif r.status_code == 200:
                    tid = r.json()["timelineId"]
            elif call == "step" and tid is not None:
                client.post(
                    f"/sessions/{sid}/timelines/{tid}/steps",
                    json={"action": {"kind": "click", "path": [1]}, "edits": []},
                )
            state = client.get(f"/sessions/{sid}").json()
            assert state["sketchSource"] == source
