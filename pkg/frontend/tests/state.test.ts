import { describe, expect, it } from "vitest";

import { TaskState } from "../src/state.js";
import type { Task } from "../src/types.js";

function fullTask(): Task {
  return {
    instance_id: "i1",
    stage: "full",
    question: { raw: "name the two grand rivers there", tokens: ["name", "the", "two", "grand", "rivers", "there"] },
    answers: ["volga", "donau"],
  };
}

function recalledTask(): Task {
  return {
    ...fullTask(),
    stage: "verify_recalled",
    detected_clues: [{ text: "two", type: "cardinal", token_start: 2, token_end: 3 }],
  };
}

describe("TaskState transitions", () => {
  it("walks the three-step happy path to a question-dependent label", () => {
    const s = new TaskState(fullTask());
    expect(s.step).toBe("verify_answers");
    s.answersOk();
    expect(s.step).toBe("classify_question_only");
    s.chooseQuestionDependent();
    expect(s.step).toBe("extract_clues");
    s.addClue(2, 3, "cardinal");
    s.finishClues();
    expect(s.label()).toEqual({
      label: "question_dependent",
      clues: [{ text: "two", type: "cardinal", token_start: 2, token_end: 3 }],
    });
  });

  it("bad annotation short-circuits from the first step", () => {
    const s = new TaskState(fullTask());
    s.markBadAnnotation();
    expect(s.step).toBe("done");
    expect(s.label()).toEqual({ label: "bad_annotation" });
  });

  it("passage-dependent submits without a clue screen", () => {
    const s = new TaskState(fullTask());
    s.answersOk();
    s.choosePassageDependent();
    expect(s.step).toBe("done");
    expect(s.label()).toEqual({ label: "passage_dependent" });
  });

  it("clue extraction is unreachable before a question-dependent choice", () => {
    const s = new TaskState(fullTask());
    expect(() => s.addClue(0, 1, "cardinal")).toThrow(/requires step extract_clues/);
    s.answersOk();
    expect(() => s.finishClues()).toThrow(/requires step extract_clues/);
  });

  it("question-dependent with no clues is a legal label (without-clue-words)", () => {
    const s = new TaskState(fullTask());
    s.answersOk();
    s.chooseQuestionDependent();
    s.finishClues();
    expect(s.label()).toEqual({ label: "question_dependent", clues: [] });
  });

  it("rejects clue ranges outside the question", () => {
    const s = new TaskState(fullTask());
    s.answersOk();
    s.chooseQuestionDependent();
    expect(() => s.addClue(4, 7, "cardinal")).toThrow(/outside question/);
    expect(() => s.addClue(-1, 1, "cardinal")).toThrow(/outside question/);
    expect(() => s.addClue(3, 3, "cardinal")).toThrow(/outside question/);
  });

  it("overlapping clue selections replace older ones", () => {
    const s = new TaskState(fullTask());
    s.answersOk();
    s.chooseQuestionDependent();
    s.addClue(2, 4, "cardinal");
    s.addClue(3, 5, "other_semantics");
    expect(s.currentClues()).toEqual([
      { tokenStart: 3, tokenEnd: 5, type: "other_semantics", text: "grand rivers" },
    ]);
  });

  it("verify_recalled tasks start from the detected clues", () => {
    const s = new TaskState(recalledTask());
    s.answersOk();
    s.chooseQuestionDependent();
    expect(s.currentClues()).toEqual([
      { tokenStart: 2, tokenEnd: 3, type: "cardinal", text: "two" },
    ]);
    s.finishClues();
    expect(s.label().clues).toHaveLength(1);
  });

  it("adjudication tasks skip the answer-form check", () => {
    const task: Task = { ...fullTask(), stage: "adjudication", labels: [] };
    const s = new TaskState(task);
    expect(s.step).toBe("classify_question_only");
  });

  it("label() refuses unfinished tasks", () => {
    const s = new TaskState(fullTask());
    expect(() => s.label()).toThrow(/not finished/);
  });
});
