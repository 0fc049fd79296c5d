// Pending-step assembly: pure state transitions, kept separate from the
// DOM so they can be unit-tested. A step starts with an action; edits
// queue up behind it until the step is committed to the server.

import type { Action, Edit, Path, Step, TreeElement, TreeNode } from "./types";
import { isText } from "./types";

export interface PendingStep {
  action: Action;
  edits: Edit[];
}

export function startClick(path: Path): PendingStep {
  return { action: { kind: "click", path }, edits: [] };
}

export function startTextInput(path: Path, value: string): PendingStep {
  return { action: { kind: "textInput", path, value }, edits: [] };
}

/** Typing again into the same input updates the pending action in place
 * (the committed action carries the final text); typing elsewhere starts
 * a fresh step. */
export function mergeTextInput(
  pending: PendingStep | null,
  path: Path,
  value: string,
): PendingStep {
  if (
    pending &&
    pending.action.kind === "textInput" &&
    samePath(pending.action.path, path) &&
    pending.edits.length === 0
  ) {
    return { action: { kind: "textInput", path, value }, edits: pending.edits };
  }
  return startTextInput(path, value);
}

export function addEdit(pending: PendingStep, edit: Edit): PendingStep {
  return { action: pending.action, edits: [...pending.edits, edit] };
}

export function removeLastEdit(pending: PendingStep): PendingStep {
  return { action: pending.action, edits: pending.edits.slice(0, -1) };
}

export function toStep(pending: PendingStep): Step {
  return { action: pending.action, edits: pending.edits };
}

export function samePath(a: Path, b: Path): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

export function nodeAt(root: TreeNode, path: Path): TreeNode | null {
  let node: TreeNode = root;
  for (const index of path) {
    if (isText(node)) return null;
    const child: TreeNode | undefined = node.children[index];
    if (child === undefined) return null;
    node = child;
  }
  return node;
}

export function holeIdsOf(node: TreeNode): number[] {
  if (isText(node)) return [];
  return node.attrs.filter((a) => a.hole !== undefined).map((a) => a.hole as number);
}

export function isClickTarget(node: TreeNode): boolean {
  if (isText(node)) return false;
  return node.attrs.some((a) => a.hole !== undefined && a.name.startsWith("on"));
}

export function isTextInputTarget(node: TreeNode): boolean {
  return !isText(node) && (node.tag === "input" || node.tag === "textarea");
}

/** Human-readable option list of every node, for the edit widget picker. */
export function nodeOptions(root: TreeElement): { path: Path; label: string }[] {
  const out: { path: Path; label: string }[] = [];
  const walk = (node: TreeNode, path: Path, depth: number) => {
    const pad = " ".repeat(depth * 2);
    if (isText(node)) {
      out.push({ path, label: `${pad}"${truncate(node.text)}"` });
      return;
    }
    out.push({ path, label: `${pad}<${node.tag}> [${path.join(",")}]` });
    node.children.forEach((child, i) => walk(child, [...path, i], depth + 1));
  };
  walk(root, [], 0);
  return out;
}

function truncate(text: string): string {
  return text.length > 18 ? `${text.slice(0, 15)}...` : text;
}

/** Canonical JSON with sorted keys, for timeline comparisons. */
export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .filter(([, v]) => v !== undefined)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
    return Object.fromEntries(entries.map(([k, v]) => [k, sortKeys(v)]));
  }
  return value;
}
