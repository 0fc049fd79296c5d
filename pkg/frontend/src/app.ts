// Three-pane studio: sketch editor with a demo-mode lock, the rendered
// mockup with recording widgets, timelines, and the synthesized code
// pane. All tree state comes from the server; mutations are serialized
// client-side (one in flight per session).

import { ApiError, StudioApi } from "./api";
import {
  PendingStep,
  addEdit,
  canonicalJson,
  mergeTextInput,
  nodeAt,
  nodeOptions,
  removeLastEdit,
  startClick,
  toStep,
} from "./recorder";
import { renderTree } from "./tree";
import type { Edit, Path, SessionState, SynthesizeResponse, TreeNode } from "./types";
import { isText } from "./types";

export const APP_HTML = `
<div id="studio">
  <div class="top">
    <section id="sketch-pane" class="pane">
      <h2>Sketch</h2>
      <textarea id="sketch-source" rows="14" spellcheck="false"></textarea>
      <div class="row">
        <button id="apply-sketch">Apply sketch</button>
        <button id="lock-toggle">Lock for demo</button>
        <span id="sketch-status" class="status"></span>
      </div>
    </section>
    <section id="mockup-pane" class="pane">
      <h2>Mockup</h2>
      <div id="mockup"></div>
      <div id="recorder" hidden>
        <div class="row">
          <select id="active-timeline"></select>
          <input id="timeline-name" placeholder="timeline name" />
          <button id="add-timeline">Add timeline</button>
          <button id="amend-last">Amend last step</button>
        </div>
        <div id="pending" class="pending">no action recorded</div>
        <div class="row">
          <select id="edit-node"></select>
          <select id="edit-kind">
            <option value="replaceString">replace string</option>
            <option value="deleteNode">delete node</option>
            <option value="copyNode">copy node</option>
            <option value="insertNode">insert node</option>
          </select>
          <input id="edit-attr" placeholder="attr (optional)" />
          <input id="edit-value" placeholder="value" />
          <input id="edit-index" placeholder="index" size="3" />
        </div>
        <div class="row">
          <textarea id="edit-subtree" rows="2" placeholder='subtree JSON for insertNode'></textarea>
        </div>
        <div class="row">
          <button id="add-edit">Add edit</button>
          <button id="undo-edit">Undo edit</button>
          <button id="commit-step" disabled>Commit step</button>
          <span id="recorder-status" class="status"></span>
        </div>
      </div>
    </section>
  </div>
  <div class="bottom">
    <section id="timelines-pane" class="pane">
      <h2>Timelines</h2>
      <div id="timelines"></div>
      <div class="row floating">
        <select id="llm-mode">
          <option value="off">llm: off</option>
          <option value="mock">llm: mock</option>
          <option value="http">llm: http</option>
        </select>
        <button id="synthesize" disabled>Synthesize</button>
        <span id="synth-status" class="status"></span>
      </div>
    </section>
    <section id="synthesized-pane" class="pane">
      <h2>Synthesized</h2>
      <div class="row">
        <span id="provenance-badge" class="badge"></span>
        <span id="verified-badge" class="badge"></span>
      </div>
      <div id="synth-reason" class="status"></div>
      <pre id="component-code"></pre>
      <div id="diagnostics"></div>
    </section>
  </div>
</div>`;

export class Studio {
  readonly api: StudioApi;
  session: SessionState | null = null;
  pending: PendingStep | null = null;
  activeTimeline: string | null = null;
  lastSynthesis: SynthesizeResponse | null = null;

  private queue: Promise<unknown> = Promise.resolve();
  private readonly doc: Document;

  constructor(doc: Document, baseUrl: string) {
    this.doc = doc;
    this.api = new StudioApi(baseUrl);
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.doc.getElementById(id);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }

  /** Serialize mutations; tests await settled() after dispatching events. */
  run<T>(fn: () => Promise<T>): Promise<T> {
    const next = this.queue.then(fn);
    this.queue = next.catch(() => undefined);
    return next;
  }

  settled(): Promise<unknown> {
    return this.queue;
  }

  async start(): Promise<void> {
    const { id } = await this.api.createSession();
    this.session = await this.api.getSession(id);
    this.renderAll();
  }

  get locked(): boolean {
    return this.session?.lockState === "demo";
  }

  // ----- sketch pane -------------------------------------------------

  async applySketch(): Promise<void> {
    if (!this.session) return;
    const status = this.el<HTMLElement>("sketch-status");
    if (this.locked) {
      status.textContent = "locked: unlock to edit the sketch";
      return;
    }
    const source = this.el<HTMLTextAreaElement>("sketch-source").value;
    try {
      await this.api.putSketch(this.session.id, source);
      this.session = await this.api.getSession(this.session.id);
      status.textContent = "applied";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderAll();
  }

  async toggleLock(): Promise<void> {
    if (!this.session) return;
    const status = this.el<HTMLElement>("sketch-status");
    try {
      if (this.locked) await this.api.unlock(this.session.id);
      else await this.api.lock(this.session.id);
      this.session = await this.api.getSession(this.session.id);
      this.pending = null;
      status.textContent = "";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderAll();
  }

  // ----- recording ---------------------------------------------------

  async addTimeline(): Promise<void> {
    if (!this.session) return;
    const name = this.el<HTMLInputElement>("timeline-name").value.trim();
    const status = this.el<HTMLElement>("recorder-status");
    try {
      const { timelineId } = await this.api.createTimeline(this.session.id, name || undefined);
      this.session = await this.api.getSession(this.session.id);
      this.activeTimeline = timelineId;
      this.el<HTMLInputElement>("timeline-name").value = "";
      status.textContent = "";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderAll();
  }

  onHoleClick(path: Path): void {
    if (!this.locked) return;
    this.pending = startClick(path);
    this.renderRecorder();
  }

  onTextInput(path: Path, value: string): void {
    if (!this.locked) return;
    this.pending = mergeTextInput(this.pending, path, value);
    this.renderRecorder();
  }

  addEditFromForm(): void {
    const status = this.el<HTMLElement>("recorder-status");
    if (!this.pending) {
      status.textContent = "record an action first";
      return;
    }
    try {
      this.pending = addEdit(this.pending, this.editFromForm());
      status.textContent = "";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderRecorder();
  }

  undoEdit(): void {
    if (this.pending) {
      this.pending = removeLastEdit(this.pending);
      this.renderRecorder();
    }
  }

  private editFromForm(): Edit {
    const kind = this.el<HTMLSelectElement>("edit-kind").value;
    const path = this.selectedPath();
    if (kind === "replaceString") {
      const attr = this.el<HTMLInputElement>("edit-attr").value.trim();
      const value = this.el<HTMLInputElement>("edit-value").value;
      return attr ? { kind, path, attr, value } : { kind, path, value };
    }
    if (kind === "deleteNode") return { kind, path };
    if (kind === "copyNode") return { kind, path };
    const index = Number(this.el<HTMLInputElement>("edit-index").value || "0");
    const raw = this.el<HTMLTextAreaElement>("edit-subtree").value;
    const subtree = JSON.parse(raw) as TreeNode;
    return { kind: "insertNode", parentPath: path, index, subtree };
  }

  private selectedPath(): Path {
    const raw = this.el<HTMLSelectElement>("edit-node").value;
    return raw === "" ? [] : raw.split(",").map(Number);
  }

  async commitStep(): Promise<void> {
    if (!this.session || !this.pending || !this.activeTimeline) return;
    const status = this.el<HTMLElement>("recorder-status");
    try {
      await this.api.recordStep(this.session.id, this.activeTimeline, toStep(this.pending));
      this.session = await this.api.getSession(this.session.id);
      this.pending = null;
      status.textContent = "step recorded";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderAll();
  }

  async amendLastStep(): Promise<void> {
    if (!this.session || !this.activeTimeline) return;
    const status = this.el<HTMLElement>("recorder-status");
    try {
      await this.api.amendLastStep(this.session.id, this.activeTimeline);
      this.session = await this.api.getSession(this.session.id);
      status.textContent = "last step removed";
    } catch (error) {
      status.textContent = describe(error);
    }
    this.renderAll();
  }

  // ----- synthesis ---------------------------------------------------

  async synthesize(): Promise<void> {
    if (!this.session) return;
    const status = this.el<HTMLElement>("synth-status");
    const llm = this.el<HTMLSelectElement>("llm-mode").value as "off" | "mock" | "http";
    status.textContent = "synthesizing...";
    try {
      this.lastSynthesis = await this.api.synthesize(this.session.id, { llm });
      this.session = await this.api.getSession(this.session.id);
      status.textContent = "";
    } catch (error) {
      this.lastSynthesis = null;
      status.textContent = describe(error);
      this.renderDiagnostics(error);
    }
    this.renderAll();
  }

  private renderDiagnostics(error: unknown): void {
    const box = this.el<HTMLElement>("diagnostics");
    box.textContent = "";
    if (error instanceof ApiError && error.detail.diagnostics) {
      for (const line of error.detail.diagnostics) {
        const div = this.doc.createElement("div");
        div.textContent = line;
        box.appendChild(div);
      }
    }
  }

  // ----- rendering ---------------------------------------------------

  renderAll(): void {
    if (!this.session) return;
    const source = this.el<HTMLTextAreaElement>("sketch-source");
    if (this.doc.activeElement !== source) source.value = this.session.sketchSource;
    source.disabled = this.locked;
    this.el<HTMLButtonElement>("apply-sketch").disabled = this.locked;
    this.el<HTMLButtonElement>("lock-toggle").textContent = this.locked
      ? "Unlock sketch"
      : "Lock for demo";
    this.el<HTMLElement>("recorder").hidden = !this.locked;

    // in demo mode the mockup shows the end of the active timeline; the
    // server computes that tree, never the client
    const display =
      (this.locked && this.activeTimeline
        ? this.session.timelineTrees[this.activeTimeline]
        : null) ?? this.session.tree;
    const mockup = this.el<HTMLElement>("mockup");
    mockup.textContent = "";
    mockup.appendChild(
      renderTree(display, {
        demoMode: this.locked,
        onHoleClick: (path) => this.onHoleClick(path),
        onTextInput: (path, value) => this.onTextInput(path, value),
      }),
    );

    const picker = this.el<HTMLSelectElement>("edit-node");
    const previous = picker.value;
    picker.textContent = "";
    for (const option of nodeOptions(display)) {
      const el = this.doc.createElement("option");
      el.value = option.path.join(",");
      el.textContent = option.label;
      picker.appendChild(el);
    }
    if ([...picker.options].some((o) => o.value === previous)) picker.value = previous;

    const timelinePicker = this.el<HTMLSelectElement>("active-timeline");
    timelinePicker.textContent = "";
    for (const timeline of this.session.timelines) {
      const el = this.doc.createElement("option");
      el.value = timeline.id;
      el.textContent = timeline.id;
      timelinePicker.appendChild(el);
    }
    if (this.activeTimeline) timelinePicker.value = this.activeTimeline;

    const list = this.el<HTMLElement>("timelines");
    list.textContent = "";
    for (const timeline of this.session.timelines) {
      const box = this.doc.createElement("div");
      box.className = "timeline";
      const title = this.doc.createElement("strong");
      title.textContent = `${timeline.id} (${timeline.steps.length} steps)`;
      box.appendChild(title);
      timeline.steps.forEach((step, i) => {
        const row = this.doc.createElement("div");
        row.className = "step";
        row.textContent = `step ${i + 1}: ${describeStepAction(step.action)} + ${step.edits.length} edits`;
        box.appendChild(row);
      });
      list.appendChild(box);
    }
    this.el<HTMLButtonElement>("synthesize").disabled = !this.session.timelines.some(
      (t) => t.steps.length > 0,
    );

    this.renderRecorder();
    this.renderSynthesized();
  }

  renderRecorder(): void {
    const pendingBox = this.el<HTMLElement>("pending");
    if (!this.pending) {
      pendingBox.textContent = "no action recorded";
    } else {
      const action = describeStepAction(this.pending.action);
      const edits = this.pending.edits
        .map((e) => `  ${describeEdit(e, this.session?.tree ?? null)}`)
        .join("\n");
      pendingBox.textContent = `${action}\n${edits}`.trimEnd();
    }
    this.el<HTMLButtonElement>("commit-step").disabled =
      this.pending === null || this.activeTimeline === null;
  }

  renderSynthesized(): void {
    const provenance = this.el<HTMLElement>("provenance-badge");
    const verified = this.el<HTMLElement>("verified-badge");
    const reason = this.el<HTMLElement>("synth-reason");
    const code = this.el<HTMLElement>("component-code");
    const result = this.lastSynthesis?.component ?? this.session?.lastResult ?? null;
    if (!result) {
      provenance.textContent = "";
      verified.textContent = "";
      reason.textContent = "";
      code.textContent = "";
      return;
    }
    provenance.textContent = result.provenance;
    provenance.className = `badge badge-${result.provenance}`;
    verified.textContent = result.verified ? "verified" : "unverified";
    verified.className = `badge ${result.verified ? "badge-ok" : "badge-warn"}`;
    reason.textContent = result.verified
      ? ""
      : `${result.reason ?? "unverified"}; amend or append demo timelines and re-synthesize`;
    code.textContent = result.text;
  }

  /** Canonical JSON of a recorded timeline, as stored by the server. */
  timelineJson(id: string): string | null {
    const timeline = this.session?.timelines.find((t) => t.id === id);
    return timeline ? canonicalJson(timeline) : null;
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.detail.message}`;
  return String(error);
}

function describeStepAction(action: { kind: string; path: Path; value?: string }): string {
  if (action.kind === "click") return `CLICK [${action.path.join(",")}]`;
  return `INPUT [${action.path.join(",")}] ${JSON.stringify(action.value ?? "")}`;
}

function describeEdit(edit: Edit, tree: TreeNode | null): string {
  switch (edit.kind) {
    case "replaceString": {
      const target = edit.attr ? `@${edit.attr}` : "text";
      const old = tree ? previewNode(nodeAt(tree, edit.path)) : "";
      return `replace ${target} at [${edit.path.join(",")}] ${old}-> ${JSON.stringify(edit.value)}`;
    }
    case "deleteNode":
      return `delete [${edit.path.join(",")}]`;
    case "copyNode":
      return `copy [${edit.path.join(",")}]`;
    case "insertNode":
      return `insert at [${edit.parentPath.join(",")}]:${edit.index}`;
  }
}

function previewNode(node: TreeNode | null): string {
  if (node === null) return "";
  if (isText(node)) return `${JSON.stringify(node.text)} `;
  return `<${node.tag}> `;
}

export function setupApp(doc: Document, baseUrl: string): Studio {
  const mount = doc.getElementById("app") ?? doc.body;
  mount.innerHTML = APP_HTML;
  const studio = new Studio(doc, baseUrl);

  const on = (id: string, event: string, handler: () => unknown) => {
    const el = doc.getElementById(id);
    if (el) el.addEventListener(event, () => handler());
  };
  on("apply-sketch", "click", () => studio.run(() => studio.applySketch()));
  on("lock-toggle", "click", () => studio.run(() => studio.toggleLock()));
  on("add-timeline", "click", () => studio.run(() => studio.addTimeline()));
  on("amend-last", "click", () => studio.run(() => studio.amendLastStep()));
  on("commit-step", "click", () => studio.run(() => studio.commitStep()));
  on("synthesize", "click", () => studio.run(() => studio.synthesize()));
  on("add-edit", "click", () => studio.addEditFromForm());
  on("undo-edit", "click", () => studio.undoEdit());
  const timelinePicker = doc.getElementById("active-timeline") as HTMLSelectElement | null;
  timelinePicker?.addEventListener("change", () => {
    studio.activeTimeline = timelinePicker.value || null;
    studio.renderRecorder();
  });
  return studio;
}
