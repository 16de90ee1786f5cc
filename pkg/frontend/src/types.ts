/** Wire types for the annotation service API (see docs/annotation_api.md). */

export type LabelKind =
  | "passage_dependent"
  | "question_dependent"
  | "bad_annotation";

export type ClueType =
  | "cardinal"
  | "ordinal"
  | "comp_super"
  | "alternative"
  | "other_semantics";

export const CLUE_TYPES: ClueType[] = [
  "cardinal",
  "ordinal",
  "comp_super",
  "alternative",
  "other_semantics",
];

export type Stage = "verify_recalled" | "full" | "adjudication";

export interface ClueMark {
  text: string;
  type: ClueType;
  token_start?: number;
  token_end?: number;
}

export interface LabelPayload {
  label: LabelKind;
  clues?: ClueMark[];
}

export interface Task {
  instance_id: string;
  stage: Stage;
  question: { raw: string; tokens: string[] };
  answers: string[];
  detected_clues?: ClueMark[];
  labels?: LabelPayload[];
}

export interface Stats {
  kappa: number | null;
  insufficient_data: boolean;
  n_pairs: number;
  label_counts: Record<string, number>;
  queues: {
    awaiting_first: number;
    awaiting_second: number;
    adjudication: number;
    finalized: number;
  };
}

export interface SubmitResult {
  status: "recorded" | "duplicate";
  instance_id: string;
  finalized?: boolean;
  needs_adjudication?: boolean;
}
