import type { ClueType, Stats } from "./types.js";
import { CLUE_TYPES } from "./types.js";
import type { TaskState } from "./state.js";

/** DOM builders: each render* returns a detached element for the app shell. */

export interface TaskHandlers {
  onSubmit: () => void;
  onChanged: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(label: string, className: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", className, label);
  b.addEventListener("click", onClick);
  return b;
}

export function formatKappa(kappa: number | null): string {
  return kappa === null ? "insufficient data" : kappa.toFixed(2);
}

/** Question rendered as selectable tokens (click-drag range selection). */
function questionTokens(state: TaskState, selectable: boolean, onRange: (a: number, b: number) => void): HTMLElement {
  const box = el("div", "question-tokens");
  let anchor: number | null = null;
  let head: number | null = null;

  const paint = () => {
    const [lo, hi] =
      anchor === null || head === null
        ? [-1, -2]
        : [Math.min(anchor, head), Math.max(anchor, head)];
    box.querySelectorAll<HTMLElement>(".token").forEach((t, i) => {
      t.classList.toggle("dragging", lo <= i && i <= hi);
    });
  };

  state.task.question.tokens.forEach((tok, i) => {
    const span = el("span", "token", tok);
    span.dataset.idx = String(i);
    if (selectable) {
      span.addEventListener("mousedown", (e) => {
        e.preventDefault();
        anchor = head = i;
        paint();
      });
      span.addEventListener("mouseenter", () => {
        if (anchor !== null) {
          head = i;
          paint();
        }
      });
      span.addEventListener("mouseup", () => {
        if (anchor !== null && head !== null) {
          onRange(Math.min(anchor, head), Math.max(anchor, head) + 1);
        }
        anchor = head = null;
        paint();
      });
    }
    box.appendChild(span);
  });
  return box;
}

function clueList(state: TaskState, editable: boolean, onChanged: () => void): HTMLElement {
  const list = el("ul", "clue-list");
  for (const clue of state.currentClues()) {
    const item = el("li", "clue-item");
    item.appendChild(el("span", "clue-text", clue.text));
    item.appendChild(el("span", `clue-type clue-type-${clue.type}`, clue.type));
    if (editable) {
      item.appendChild(
        button("remove", "clue-remove", () => {
          state.removeClue(clue.tokenStart);
          onChanged();
        }),
      );
    }
    list.appendChild(item);
  }
  return list;
}

function verifyAnswersView(state: TaskState, handlers: TaskHandlers): HTMLElement {
  const root = el("section", "step step-verify-answers");
  root.appendChild(el("h2", undefined, "Step 1 of 3: check the answer form"));
  root.appendChild(el("p", "question-raw", state.task.question.raw));
  const answers = el("ul", "answer-list");
  for (const a of state.task.answers) {
    answers.appendChild(el("li", "answer", a));
  }
  root.appendChild(answers);
  if (state.task.stage === "verify_recalled" && state.task.detected_clues?.length) {
    root.appendChild(
      el(
        "p",
        "detected-note",
        "Auto-detected clue words: " +
          state.task.detected_clues.map((c) => `${c.text} (${c.type})`).join(", "),
      ),
    );
  }
  root.appendChild(
    button("Answers look valid [1]", "primary answers-ok", () => {
      state.answersOk();
      handlers.onChanged();
    }),
  );
  root.appendChild(
    button("Bad annotation [3]", "danger mark-bad", () => {
      state.markBadAnnotation();
      handlers.onSubmit();
    }),
  );
  return root;
}

function classifyView(state: TaskState, handlers: TaskHandlers): HTMLElement {
  // question only: no passage, no answers in this subtree
  const root = el("section", "step step-classify");
  root.appendChild(el("h2", undefined, "Step 2 of 3: judge from the question alone"));
  root.appendChild(
    el("p", "hint", "Can the number of answers be determined from the question only?"),
  );
  root.appendChild(el("p", "question-raw", state.task.question.raw));
  root.appendChild(
    button("Question-dependent [1]", "primary choose-question-dependent", () => {
      state.chooseQuestionDependent();
      handlers.onChanged();
    }),
  );
  root.appendChild(
    button("Passage-dependent [2]", "primary choose-passage-dependent", () => {
      state.choosePassageDependent();
      handlers.onSubmit();
    }),
  );
  return root;
}

function extractCluesView(state: TaskState, handlers: TaskHandlers): HTMLElement {
  const root = el("section", "step step-extract-clues");
  root.appendChild(el("h2", undefined, "Step 3 of 3: mark the clue words"));
  root.appendChild(
    el("p", "hint", "Drag across question tokens, pick a type, or finish with none."),
  );

  const picker = el("select", "clue-type-picker") as HTMLSelectElement;
  for (const t of CLUE_TYPES) {
    const opt = el("option", undefined, t) as HTMLOptionElement;
    opt.value = t;
    picker.appendChild(opt);
  }

  root.appendChild(
    questionTokens(state, true, (start, end) => {
      state.addClue(start, end, picker.value as ClueType);
      handlers.onChanged();
    }),
  );
  root.appendChild(picker);
  root.appendChild(clueList(state, true, handlers.onChanged));
  root.appendChild(
    button("Submit clues", "primary finish-clues", () => {
      state.finishClues();
      handlers.onSubmit();
    }),
  );
  return root;
}

export function renderTask(state: TaskState, handlers: TaskHandlers): HTMLElement {
  const root = el("div", "task");
  const meta = el(
    "p",
    "task-meta",
    `instance ${state.task.instance_id} · stage ${state.task.stage}`,
  );
  root.appendChild(meta);
  if (state.task.stage === "adjudication" && state.task.labels) {
    const note = el(
      "p",
      "adjudication-note",
      "Conflicting labels: " + state.task.labels.map((l) => l.label).join(" vs "),
    );
    root.appendChild(note);
  }
  switch (state.step) {
    case "verify_answers":
      root.appendChild(verifyAnswersView(state, handlers));
      break;
    case "classify_question_only":
      root.appendChild(classifyView(state, handlers));
      break;
    case "extract_clues":
      root.appendChild(extractCluesView(state, handlers));
      break;
    case "done":
      root.appendChild(el("p", "done-note", "Submitting..."));
      break;
  }
  return root;
}

/** Keyboard shortcuts for the three labels (1/2/3) on the active step. */
export function handleShortcut(state: TaskState, key: string, handlers: TaskHandlers): boolean {
  if (state.step === "verify_answers") {
    if (key === "1") {
      state.answersOk();
      handlers.onChanged();
      return true;
    }
    if (key === "3") {
      state.markBadAnnotation();
      handlers.onSubmit();
      return true;
    }
  } else if (state.step === "classify_question_only") {
    if (key === "1") {
      state.chooseQuestionDependent();
      handlers.onChanged();
      return true;
    }
    if (key === "2") {
      state.choosePassageDependent();
      handlers.onSubmit();
      return true;
    }
  }
  return false;
}

export function renderStatsPanel(stats: Stats | null): HTMLElement {
  const root = el("aside", "stats-panel");
  root.appendChild(el("h2", undefined, "Session agreement"));
  if (stats === null) {
    root.appendChild(el("p", "stats-unavailable", "stats unavailable"));
    return root;
  }
  const badge = el(
    "span",
    stats.kappa === null ? "kappa-badge kappa-missing" : "kappa-badge",
    formatKappa(stats.kappa),
  );
  const kappaLine = el("p", "kappa-line", "Cohen's kappa: ");
  kappaLine.appendChild(badge);
  kappaLine.appendChild(el("span", "pair-count", ` over ${stats.n_pairs} pairs`));
  root.appendChild(kappaLine);

  const bars = el("div", "label-bars");
  const total = Object.values(stats.label_counts).reduce((a, b) => a + b, 0);
  for (const [label, count] of Object.entries(stats.label_counts)) {
    const row = el("div", "label-bar-row");
    row.appendChild(el("span", "label-name", label));
    const bar = el("div", "label-bar");
    bar.style.width = total ? `${(100 * count) / total}%` : "0%";
    row.appendChild(bar);
    row.appendChild(el("span", "label-count", String(count)));
    bars.appendChild(row);
  }
  root.appendChild(bars);

  const queues = el("p", "queues");
  queues.textContent =
    `queues · first: ${stats.queues.awaiting_first} · ` +
    `second: ${stats.queues.awaiting_second} · ` +
    `adjudication: ${stats.queues.adjudication} · ` +
    `finalized: ${stats.queues.finalized}`;
  root.appendChild(queues);
  return root;
}

export function renderRetryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "retry-banner");
  banner.appendChild(el("span", "retry-message", message));
  banner.appendChild(button("Retry", "retry-button", onRetry));
  return banner;
}
