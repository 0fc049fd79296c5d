"""HTTP/JSON service for the demo studio.

Sessions are in-memory and single-process. The sketch is editable only
while unlocked; timelines are recordable only in demo mode. The step
endpoint applies edits server-side and returns the resulting tree, so the
studio never re-implements edit semantics. Schemas are documented in
docs/api.md.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field as dataclass_field
from typing import Annotated, Literal, Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict, Field

from .errors import DemosynthError
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .sketch import ParseError, parse_sketch, tree_to_json
from .timeline import (
    DemoTimeline,
    ReplayError,
    Step,
    apply_step,
    snapshots,
    timeline_from_json,
    timeline_to_json,
)

EDITING = "editing"
DEMO = "demo"


class SketchPut(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source: str


class ClickAction(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["click"]
    path: list[int]


class TextInputAction(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["textInput"]
    path: list[int]
    value: str


ActionModel = Annotated[Union[ClickAction, TextInputAction], Field(discriminator="kind")]


class ReplaceStringEdit(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["replaceString"]
    path: list[int]
    attr: Optional[str] = None
    value: str


class DeleteNodeEdit(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["deleteNode"]
    path: list[int]


class CopyNodeEdit(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["copyNode"]
    path: list[int]


class InsertNodeEdit(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["insertNode"]
    parentPath: list[int]
    index: int
    subtree: dict


EditModel = Annotated[
    Union[ReplaceStringEdit, DeleteNodeEdit, CopyNodeEdit, InsertNodeEdit],
    Field(discriminator="kind"),
]


class StepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    action: ActionModel
    edits: list[EditModel] = []


class TimelineCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: Optional[str] = None


class SessionImport(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sketchSource: Optional[str] = None
    lockState: Optional[Literal["editing", "demo"]] = None
    timelines: list[dict] = []


class SynthesizeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    llm: Literal["off", "mock", "http"] = "off"
    maxSize: int = 5
    maxCandidates: int = 100_000
    componentName: str = "Component"


DEFAULT_SKETCH = "<div />\n"


@dataclass
class Session:
    id: str
    sketch_source: str = DEFAULT_SKETCH
    lock_state: str = EDITING
    timelines: list = dataclass_field(default_factory=list)
    last_result: Optional[dict] = None
    busy: bool = False
    next_timeline: int = 1
    lock: threading.RLock = dataclass_field(default_factory=threading.RLock)

    def to_json(self) -> dict:
        sketch = parse_sketch(self.sketch_source)
        timeline_trees = {}
        for t in self.timelines:
            try:
                timeline_trees[t.id] = tree_to_json(snapshots(sketch, t)[-1])
            except ReplayError:
                pass  # stale after a sketch edit; the timeline itself is kept
        return {
            "id": self.id,
            "lockState": self.lock_state,
            "sketchSource": self.sketch_source,
            "tree": tree_to_json(sketch),
            "timelines": [timeline_to_json(t) for t in self.timelines],
            "timelineTrees": timeline_trees,
            "lastResult": self.last_result,
        }


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self) -> Session:
        with self._lock:
            sid = uuid.uuid4().hex[:12]
            session = Session(id=sid)
            self._sessions[sid] = session
            return session

    def get(self, sid: str) -> Session:
        session = self._sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"unknown session {sid}")
        return session


def _fail(status: int, message: str, diagnostics: Optional[list] = None):
    detail: dict = {"message": message}
    if diagnostics:
        detail["diagnostics"] = diagnostics
    raise HTTPException(status, detail)


def create_app(static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="demosynth", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    app.state.store = store

    @app.post("/sessions")
    def create_session(body: Optional[SessionImport] = None):
        session = store.create()
        if body is not None:
            if body.sketchSource is not None:
                try:
                    parse_sketch(body.sketchSource)
                except ParseError as exc:
                    _fail(422, f"sketchSource does not parse: {exc}")
                session.sketch_source = body.sketchSource
            try:
                session.timelines = [timeline_from_json(t) for t in body.timelines]
            except DemosynthError as exc:
                _fail(422, str(exc))
            if body.lockState is not None:
                session.lock_state = body.lockState
        return {"id": session.id}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return store.get(sid).to_json()

    @app.put("/sessions/{sid}/sketch")
    def put_sketch(sid: str, body: SketchPut):
        session = store.get(sid)
        with session.lock:
            if session.busy:
                _fail(409, "synthesis in progress")
            if session.lock_state != EDITING:
                _fail(409, "sketch is locked; unlock to edit")
            try:
                tree = parse_sketch(body.source)
            except ParseError as exc:
                _fail(422, f"sketch does not parse: {exc}")
            session.sketch_source = body.source
            return {"tree": tree_to_json(tree)}

    @app.post("/sessions/{sid}/lock")
    def lock(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.lock_state == DEMO:
                _fail(409, "already in demo mode")
            session.lock_state = DEMO
            return {"lockState": session.lock_state}

    @app.post("/sessions/{sid}/unlock")
    def unlock(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.lock_state == EDITING:
                _fail(409, "already editing")
            session.lock_state = EDITING
            return {"lockState": session.lock_state}

    @app.post("/sessions/{sid}/timelines")
    def create_timeline(sid: str, body: Optional[TimelineCreate] = None):
        session = store.get(sid)
        with session.lock:
            if session.busy:
                _fail(409, "synthesis in progress")
            if session.lock_state != DEMO:
                _fail(409, "enter demo mode to record timelines")
            tid = body.id if body is not None and body.id else f"t{session.next_timeline}"
            session.next_timeline += 1
            if any(t.id == tid for t in session.timelines):
                _fail(409, f"timeline {tid} already exists")
            session.timelines.append(DemoTimeline(tid, ()))
            return {"timelineId": tid}

    def _find_timeline(session: Session, tid: str) -> int:
        for i, t in enumerate(session.timelines):
            if t.id == tid:
                return i
        _fail(404, f"unknown timeline {tid}")

    @app.post("/sessions/{sid}/timelines/{tid}/steps")
    def record_step(sid: str, tid: str, body: StepRequest):
        session = store.get(sid)
        with session.lock:
            if session.busy:
                _fail(409, "synthesis in progress")
            if session.lock_state != DEMO:
                _fail(409, "enter demo mode to record steps")
            index = _find_timeline(session, tid)
            timeline = session.timelines[index]
            step_json = body.model_dump(exclude_none=True)
            try:
                probe = timeline_from_json(
                    {"id": tid, "steps": [step_json]}
                )
            except DemosynthError as exc:
                _fail(422, str(exc))
            step: Step = probe.steps[0]
            sketch = parse_sketch(session.sketch_source)
            try:
                snaps = snapshots(sketch, timeline)
                tree = apply_step(snaps[-1], step)
            except (DemosynthError, ReplayError) as exc:
                _fail(422, f"step does not apply: {exc}")
            session.timelines[index] = DemoTimeline(tid, timeline.steps + (step,))
            return {"tree": tree_to_json(tree)}

    @app.delete("/sessions/{sid}/timelines/{tid}/steps/last")
    def amend_last_step(sid: str, tid: str):
        session = store.get(sid)
        with session.lock:
            if session.busy:
                _fail(409, "synthesis in progress")
            if session.lock_state != DEMO:
                _fail(409, "enter demo mode to amend timelines")
            index = _find_timeline(session, tid)
            timeline = session.timelines[index]
            if not timeline.steps:
                _fail(422, "timeline has no steps")
            session.timelines[index] = DemoTimeline(tid, timeline.steps[:-1])
            sketch = parse_sketch(session.sketch_source)
            tree = snapshots(sketch, session.timelines[index])[-1]
            return {"tree": tree_to_json(tree)}

    @app.post("/sessions/{sid}/synthesize")
    def synthesize(sid: str, body: Optional[SynthesizeRequest] = None):
        session = store.get(sid)
        body = body or SynthesizeRequest()
        with session.lock:
            if session.busy:
                _fail(409, "synthesis in progress")
            if not session.timelines or all(not t.steps for t in session.timelines):
                _fail(422, "record at least one timeline before synthesizing")
            session.busy = True
            sketch_source = session.sketch_source
            timelines = [t for t in session.timelines if t.steps]
        try:
            config = PipelineConfig.from_env(
                llm_mode=body.llm,
                max_size=body.maxSize,
                max_candidates=body.maxCandidates,
                component_name=body.componentName,
            )
            result = run_pipeline(sketch_source, timelines, config)
        except PipelineError as exc:
            with session.lock:
                session.busy = False
            _fail(
                422,
                f"pipeline failed at stage {exc.stage}: {exc.reason}",
                exc.diagnostics,
            )
        except Exception:
            with session.lock:
                session.busy = False
            raise
        payload = {
            "component": {
                "text": result.component.text,
                "provenance": result.component.provenance,
                "verified": result.component.verified,
                "reason": result.component.reason,
            },
            "report": result.report.to_json(),
        }
        with session.lock:
            session.last_result = payload["component"]
            session.busy = False
        return payload

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="studio")

    return app
