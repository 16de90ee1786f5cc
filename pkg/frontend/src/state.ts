import type { ClueMark, ClueType, LabelPayload, Task } from "./types.js";

/**
 * Sub-step machine for one annotation task.
 *
 * verify_answers (answers shown, bad-annotation check)
 *   -> classify_question_only (question only; answers must not render)
 *   -> extract_clues (only after a question-dependent choice)
 *   -> done
 *
 * A bad-annotation call on the first step, or a passage-dependent choice on
 * the second, jumps straight to done. Adjudication tasks reuse the
 * classification path (no answer-form re-check).
 */

export type SubStep =
  | "verify_answers"
  | "classify_question_only"
  | "extract_clues"
  | "done";

export interface ClueSelection {
  tokenStart: number;
  tokenEnd: number; // half-open
  type: ClueType;
  text: string;
}

export class TaskState {
  step: SubStep;
  private clues: ClueSelection[] = [];
  private result: LabelPayload | null = null;

  constructor(readonly task: Task) {
    this.step = task.stage === "adjudication" ? "classify_question_only" : "verify_answers";
    // stage-1 verification starts from the auto-detected clues
    if (task.stage === "verify_recalled" && task.detected_clues) {
      for (const mark of task.detected_clues) {
        if (mark.token_start !== undefined && mark.token_end !== undefined) {
          this.clues.push({
            tokenStart: mark.token_start,
            tokenEnd: mark.token_end,
            type: mark.type,
            text: mark.text,
          });
        }
      }
    }
  }

  private expect(step: SubStep): void {
    if (this.step !== step) {
      throw new Error(`action requires step ${step}, current step is ${this.step}`);
    }
  }

  answersOk(): void {
    this.expect("verify_answers");
    this.step = "classify_question_only";
  }

  markBadAnnotation(): void {
    this.expect("verify_answers");
    this.result = { label: "bad_annotation" };
    this.step = "done";
  }

  choosePassageDependent(): void {
    this.expect("classify_question_only");
    this.result = { label: "passage_dependent" };
    this.step = "done";
  }

  chooseQuestionDependent(): void {
    this.expect("classify_question_only");
    this.step = "extract_clues";
  }

  addClue(tokenStart: number, tokenEnd: number, type: ClueType): ClueSelection {
    this.expect("extract_clues");
    const n = this.task.question.tokens.length;
    if (!(0 <= tokenStart && tokenStart < tokenEnd && tokenEnd <= n)) {
      throw new Error(`clue range [${tokenStart}, ${tokenEnd}) outside question of ${n} tokens`);
    }
    const selection: ClueSelection = {
      tokenStart,
      tokenEnd,
      type,
      text: this.task.question.tokens.slice(tokenStart, tokenEnd).join(" "),
    };
    this.clues = this.clues.filter(
      (c) => c.tokenEnd <= tokenStart || tokenEnd <= c.tokenStart,
    );
    this.clues.push(selection);
    this.clues.sort((a, b) => a.tokenStart - b.tokenStart);
    return selection;
  }

  removeClue(tokenStart: number): void {
    this.expect("extract_clues");
    this.clues = this.clues.filter((c) => c.tokenStart !== tokenStart);
  }

  currentClues(): ClueSelection[] {
    return [...this.clues];
  }

  finishClues(): void {
    this.expect("extract_clues");
    this.result = {
      label: "question_dependent",
      clues: this.clues.map(
        (c): ClueMark => ({
          text: c.text,
          type: c.type,
          token_start: c.tokenStart,
          token_end: c.tokenEnd,
        }),
      ),
    };
    this.step = "done";
  }

  label(): LabelPayload {
    if (this.step !== "done" || this.result === null) {
      throw new Error("task is not finished");
    }
    return this.result;
  }
}
