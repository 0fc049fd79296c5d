// Wire types mirroring docs/api.md.

export type Path = number[];

export interface TreeAttr {
  name: string;
  value?: string;
  hole?: number;
}

export interface TreeElement {
  tag: string;
  attrs: TreeAttr[];
  children: TreeNode[];
}

export interface TreeText {
  text: string;
}

export type TreeNode = TreeElement | TreeText;

export function isText(node: TreeNode): node is TreeText {
  return (node as TreeText).text !== undefined;
}

export type Action =
  | { kind: "click"; path: Path }
  | { kind: "textInput"; path: Path; value: string };

export type Edit =
  | { kind: "replaceString"; path: Path; attr?: string; value: string }
  | { kind: "deleteNode"; path: Path }
  | { kind: "copyNode"; path: Path }
  | { kind: "insertNode"; parentPath: Path; index: number; subtree: TreeNode };

export interface Step {
  action: Action;
  edits: Edit[];
}

export interface Timeline {
  id: string;
  steps: Step[];
}

export type LockState = "editing" | "demo";

export interface SessionState {
  id: string;
  lockState: LockState;
  sketchSource: string;
  tree: TreeElement;
  timelines: Timeline[];
  timelineTrees: Record<string, TreeElement>;
  lastResult: ComponentResult | null;
}

export interface ComponentResult {
  text: string;
  provenance: "enumerative" | "llm";
  verified: boolean;
  reason: string | null;
}

export interface SynthesisReport {
  params: unknown[];
  perHole: Record<string, { status: string; program?: string }>;
  provenance: string;
  verified: boolean;
  reason: string | null;
  candidatesVisited: number;
  diagnostics: string[];
  timings: Record<string, number>;
}

export interface SynthesizeResponse {
  component: ComponentResult;
  report: SynthesisReport;
}

export interface ApiErrorDetail {
  message: string;
  diagnostics?: string[];
}
