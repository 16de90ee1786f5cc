import { AnnotationApi, ApiError } from "./api.js";
import { TaskState } from "./state.js";
import type { Stage } from "./types.js";
import {
  handleShortcut,
  renderRetryBanner,
  renderStatsPanel,
  renderTask,
} from "./views.js";

/** App shell: one task in flight, optimistic submit, stats refresh on submit. */

const api = new AnnotationApi("");

interface AppState {
  annotator: string;
  stage: Stage;
  current: TaskState | null;
}

const app: AppState = { annotator: "", stage: "full", current: null };

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function swap(node: HTMLElement, child: HTMLElement): void {
  node.replaceChildren(child);
}

async function refreshStats(): Promise<void> {
  try {
    swap(byId("stats"), renderStatsPanel(await api.stats()));
  } catch {
    swap(byId("stats"), renderStatsPanel(null));
  }
}

function showRetry(message: string, retry: () => void): void {
  swap(byId("banner"), renderRetryBanner(message, retry));
}

function clearBanner(): void {
  byId("banner").replaceChildren();
}

function redraw(): void {
  if (app.current === null) {
    const empty = document.createElement("p");
    empty.className = "no-task";
    empty.textContent = `No open ${app.stage} tasks for ${app.annotator}.`;
    swap(byId("task"), empty);
    return;
  }
  swap(
    byId("task"),
    renderTask(app.current, { onChanged: redraw, onSubmit: submitCurrent }),
  );
}

async function submitCurrent(): Promise<void> {
  const state = app.current;
  if (state === null) return;
  redraw(); // shows the submitting note; local state survives a failed POST
  try {
    await api.submitLabel(app.annotator, state.task.instance_id, state.label());
    clearBanner();
    app.current = null;
    await refreshStats();
    await loadNext();
  } catch (e) {
    showRetry(`submit failed (${e instanceof ApiError ? e.message : e})`, submitCurrent);
  }
}

async function loadNext(): Promise<void> {
  try {
    const task = await api.nextTask(app.annotator, app.stage);
    clearBanner();
    app.current = task === null ? null : new TaskState(task);
    redraw();
  } catch (e) {
    showRetry(`cannot reach the service (${e instanceof ApiError ? e.message : e})`, loadNext);
  }
}

function bindControls(): void {
  const annotatorInput = byId("annotator") as HTMLInputElement;
  const stageSelect = byId("stage") as HTMLSelectElement;
  byId("start").addEventListener("click", () => {
    app.annotator = annotatorInput.value.trim() || "anonymous";
    app.stage = stageSelect.value as Stage;
    void loadNext();
  });
  document.addEventListener("keydown", (e) => {
    if (app.current && !(e.target instanceof HTMLInputElement)) {
      if (handleShortcut(app.current, e.key, { onChanged: redraw, onSubmit: submitCurrent })) {
        e.preventDefault();
      }
    }
  });
}

export function start(): void {
  bindControls();
  void refreshStats();
}

if (typeof document !== "undefined" && document.getElementById("task")) {
  start();
}
