// Generic mockup renderer: tree JSON from the server into DOM, with hole
// affordances and recording hooks in demo mode. This is a renderer of the
// server's tree, never a live mount of user code.

import type { Path, TreeElement, TreeNode } from "./types";
import { isText } from "./types";

export interface RenderHooks {
  demoMode: boolean;
  onHoleClick(path: Path): void;
  onTextInput(path: Path, value: string): void;
}

const VOID_RENDERED = new Set(["input", "textarea"]);

export function renderTree(root: TreeElement, hooks: RenderHooks): HTMLElement {
  return renderElement(root, [], hooks);
}

function renderElement(node: TreeElement, path: Path, hooks: RenderHooks): HTMLElement {
  const el = document.createElement(node.tag === "button" ? "button" : safeTag(node.tag));
  el.dataset.path = path.join(",");
  el.classList.add("mock-node");
  let hole: number | undefined;
  for (const attr of node.attrs) {
    if (attr.hole !== undefined) {
      if (attr.name.startsWith("on")) hole = hole ?? attr.hole;
      continue;
    }
    applyAttr(el, attr.name, attr.value ?? "");
  }
  if (hole !== undefined) {
    el.classList.add("hole-target");
    const badge = document.createElement("span");
    badge.className = "hole-badge";
    badge.textContent = `$${hole}`;
    el.appendChild(badge);
    if (hooks.demoMode && node.tag !== "input" && node.tag !== "textarea") {
      el.addEventListener("click", (event) => {
        event.stopPropagation();
        event.preventDefault();
        hooks.onHoleClick(path);
      });
    }
  }
  if (node.tag === "input" || node.tag === "textarea") {
    const input = el as HTMLInputElement;
    if (hooks.demoMode) {
      input.addEventListener("input", () => hooks.onTextInput(path, input.value));
    } else {
      input.readOnly = true;
    }
  }
  if (!VOID_RENDERED.has(node.tag)) {
    node.children.forEach((child, i) => {
      el.appendChild(renderChild(child, [...path, i], hooks));
    });
  }
  return el;
}

function renderChild(node: TreeNode, path: Path, hooks: RenderHooks): Node {
  if (isText(node)) {
    const span = document.createElement("span");
    span.className = "mock-text";
    span.dataset.path = path.join(",");
    span.textContent = node.text;
    return span;
  }
  return renderElement(node, path, hooks);
}

function applyAttr(el: HTMLElement, name: string, value: string): void {
  if (name === "value" && (el instanceof HTMLInputElement || el instanceof HTMLTextAreaElement)) {
    el.value = value;
    return;
  }
  if (name === "class") {
    el.className = `mock-node ${value}`;
    return;
  }
  try {
    el.setAttribute(name, value);
  } catch {
    // ignore names the DOM rejects; the tree stays authoritative
  }
}

function safeTag(tag: string): string {
  return /^[a-z][a-z0-9]*$/.test(tag) ? tag : "div";
}
