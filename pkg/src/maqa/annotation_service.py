"""Two-stage annotation backend: task queues, label persistence, conflict
routing, and live agreement statistics, exposed as a small HTTP JSON API.

All state changes flow through an append-only event log (assignments and
labels); replaying the log rebuilds queues and finalized labels exactly, so a
crashed service resumes from its log file. Instances with auto-detected clue
words enter the verify_recalled stage, the rest the full stage; every instance
needs two initial annotations, any bad-annotation vote finalizes immediately,
and disagreements queue for a third annotator.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from maqa.core import (
    KIND_BAD_ANNOTATION,
    Instance,
    TaxonomyLabel,
    taxonomy_from_dict,
    taxonomy_to_dict,
)
from maqa.taxonomy import (
    Lexicon,
    NeedsAdjudication,
    adjudicate,
    AnnotatorRecord,
    cohens_kappa,
    detect_clue_words,
    default_lexicon,
)

STAGES = ("verify_recalled", "full", "adjudication")


class SubmitError(ValueError):
    def __init__(self, status: int, reason: str):
        super().__init__(reason)
        self.status = status
        self.reason = reason


@dataclass
class _InstanceState:
    instance: Instance
    stage: str  # verify_recalled | full
    detected: list = field(default_factory=list)
    records: list[AnnotatorRecord] = field(default_factory=list)
    timestamps: dict[tuple[str, str], float] = field(default_factory=dict)
    assignments: dict[tuple[str, str], str] = field(default_factory=dict)  # (annotator, phase) -> open|done
    final: TaxonomyLabel | None = None
    needs_adjudication: bool = False

    def initial_records(self):
        return [r for r in self.records if r.round in ("first", "second")]


class AnnotationStore:
    """In-memory annotation state fed exclusively by log events.

    Passing log_path persists every event; ``replay`` rebuilds an identical
    store from the file. A single lock serializes mutations.
    """

    def __init__(self, corpus, lexicon: Lexicon | None = None, log_path=None, seed: int = 0):
        self._lock = threading.Lock()
        self._rng = random.Random(seed)
        self._lexicon = lexicon or default_lexicon()
        self._log_path = Path(log_path) if log_path else None
        self._log_file = None
        self.instances: dict[str, _InstanceState] = {}
        for inst in corpus:
            detected = detect_clue_words(inst.question, self._lexicon)
            stage = "verify_recalled" if detected else "full"
            if inst.id in self.instances:
                raise ValueError(f"duplicate instance id: {inst.id}")
            self.instances[inst.id] = _InstanceState(
                instance=inst, stage=stage, detected=detected
            )
        if self._log_path:
            self._log_file = open(self._log_path, "a", encoding="utf-8")

    # ------------------------------------------------------------------ events

    def _emit(self, event: dict) -> None:
        self._apply(event)
        if self._log_file:
            self._log_file.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._log_file.flush()

    def _apply(self, event: dict) -> None:
        state = self.instances[event["instance_id"]]
        if event["event"] == "assign":
            state.assignments[(event["annotator"], event["phase"])] = "open"
            return
        if event["event"] == "label":
            key = (event["annotator"], event["phase"])
            state.assignments[key] = "done"
            record = AnnotatorRecord(
                annotator_id=event["annotator"],
                instance_id=event["instance_id"],
                label=taxonomy_from_dict(event["label"]),
                round=event["round"],
            )
            state.records.append(record)
            state.timestamps[(record.annotator_id, record.round)] = event["ts"]
            self._refinalize(state)
            return
        raise ValueError(f"unknown event type: {event['event']!r}")

    def _refinalize(self, state: _InstanceState) -> None:
        state.needs_adjudication = False
        if any(r.label.kind == KIND_BAD_ANNOTATION for r in state.records):
            state.final = TaxonomyLabel(kind=KIND_BAD_ANNOTATION)
            return
        if len(state.initial_records()) < 2:
            state.final = None
            return
        try:
            state.final = adjudicate(state.records)
        except NeedsAdjudication:
            state.final = None
            state.needs_adjudication = True

    @classmethod
    def replay(cls, corpus, log_path, lexicon: Lexicon | None = None, seed: int = 0):
        """Rebuild a store from its event log (and keep appending to it)."""
        store = cls(corpus, lexicon=lexicon, seed=seed)
        path = Path(log_path)
        if path.exists():
            with open(path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        store._apply(json.loads(line))
        store._log_path = path
        store._log_file = open(path, "a", encoding="utf-8")
        return store

    def close(self):
        if self._log_file:
            self._log_file.close()
            self._log_file = None

    # ------------------------------------------------------------------- tasks

    def _task_payload(self, state: _InstanceState, stage: str) -> dict:
        payload = {
            "instance_id": state.instance.id,
            "stage": stage,
            "question": {
                "raw": state.instance.question.raw,
                "tokens": list(state.instance.question.tokens),
            },
            "answers": state.instance.gold.texts(),
        }
        if stage == "verify_recalled":
            payload["detected_clues"] = [
                {
                    "text": m.text,
                    "type": m.type,
                    "token_start": m.token_range[0],
                    "token_end": m.token_range[1],
                }
                for m in state.detected
            ]
        if stage == "adjudication":
            payload["labels"] = [
                taxonomy_to_dict(r.label) for r in state.initial_records()
            ]
        return payload

    def _eligible_initial(self, state: _InstanceState, annotator: str, stage: str) -> bool:
        if state.stage != stage or state.final is not None or state.needs_adjudication:
            return False
        if (annotator, "initial") in state.assignments:
            return False
        if any(r.annotator_id == annotator for r in state.records):
            return False
        open_or_done = sum(
            1 for (a, phase), _ in state.assignments.items() if phase == "initial"
        )
        return open_or_done < 2

    def _eligible_adjudication(self, state: _InstanceState, annotator: str) -> bool:
        if not state.needs_adjudication:
            return False
        if any(r.annotator_id == annotator for r in state.records):
            return False
        if (annotator, "adjudication") in state.assignments:
            return False
        # only one adjudicator at a time
        return not any(
            phase == "adjudication" and status == "open"
            for (a, phase), status in state.assignments.items()
        )

    def next_task(self, annotator: str, stage: str) -> dict | None:
        """Serve (and log) a task for this annotator, or None when drained."""
        if stage not in STAGES:
            raise ValueError(f"unknown stage: {stage!r}")
        with self._lock:
            if stage == "adjudication":
                pool = [
                    s
                    for s in self.instances.values()
                    if self._eligible_adjudication(s, annotator)
                ]
                phase = "adjudication"
            else:
                pool = [
                    s
                    for s in self.instances.values()
                    if self._eligible_initial(s, annotator, stage)
                ]
                phase = "initial"
            if not pool:
                return None
            state = self._rng.choice(sorted(pool, key=lambda s: s.instance.id))
            self._emit(
                {
                    "event": "assign",
                    "instance_id": state.instance.id,
                    "annotator": annotator,
                    "phase": phase,
                    "ts": time.time(),
                }
            )
            return self._task_payload(state, stage)

    # ------------------------------------------------------------------ labels

    def submit_label(self, annotator: str, instance_id: str, label: TaxonomyLabel) -> dict:
        """Record a label for an assigned open task.

        A repeat submit on a done assignment is rejected idempotently; a
        submit without any assignment is an authorization error.
        """
        with self._lock:
            state = self.instances.get(instance_id)
            if state is None:
                raise SubmitError(404, f"unknown instance: {instance_id}")
            n_tokens = len(state.instance.question.tokens)
            for mark in label.clues:
                if mark.token_range is not None:
                    s, e = mark.token_range
                    if not (0 <= s < e <= n_tokens):
                        raise SubmitError(
                            400,
                            f"clue range [{s}, {e}) outside question of {n_tokens} tokens",
                        )
            phase = None
            for candidate in ("initial", "adjudication"):
                if (annotator, candidate) in state.assignments:
                    phase = candidate
            if phase is None:
                raise SubmitError(403, "no task assigned to this annotator")
            if state.assignments[(annotator, phase)] == "done":
                return {"status": "duplicate", "instance_id": instance_id}
            if phase == "adjudication":
                round_name = "adjudication"
            else:
                round_name = "first" if not state.initial_records() else "second"
            self._emit(
                {
                    "event": "label",
                    "instance_id": instance_id,
                    "annotator": annotator,
                    "phase": phase,
                    "round": round_name,
                    "label": taxonomy_to_dict(label),
                    "ts": time.time(),
                }
            )
            return {
                "status": "recorded",
                "instance_id": instance_id,
                "finalized": state.final is not None,
                "needs_adjudication": state.needs_adjudication,
            }

    # ------------------------------------------------------------------- stats

    def first_round_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for state in self.instances.values():
            kinds = {r.round: r.label.kind for r in state.initial_records()}
            if "first" in kinds and "second" in kinds:
                pairs.append((kinds["first"], kinds["second"]))
        return pairs

    def stats(self) -> dict:
        with self._lock:
            pairs = self.first_round_pairs()
            kappa = cohens_kappa(pairs) if pairs else None
            label_counts: dict[str, int] = {}
            queues = {
                "awaiting_first": 0,
                "awaiting_second": 0,
                "adjudication": 0,
                "finalized": 0,
            }
            for state in self.instances.values():
                if state.final is not None:
                    queues["finalized"] += 1
                    key = state.final.kind
                    if state.final.kind == "question_dependent":
                        key += "_with_clues" if state.final.clues else "_without_clues"
                    label_counts[key] = label_counts.get(key, 0) + 1
                elif state.needs_adjudication:
                    queues["adjudication"] += 1
                elif state.initial_records():
                    queues["awaiting_second"] += 1
                else:
                    queues["awaiting_first"] += 1
            return {
                "kappa": kappa,
                "insufficient_data": not pairs,
                "n_pairs": len(pairs),
                "label_counts": dict(sorted(label_counts.items())),
                "queues": queues,
            }

    def conflicts(self) -> list[dict]:
        with self._lock:
            out = []
            for state in self.instances.values():
                if state.needs_adjudication:
                    out.append(
                        {
                            "instance_id": state.instance.id,
                            "labels": [
                                {
                                    "annotator": r.annotator_id,
                                    "label": taxonomy_to_dict(r.label),
                                }
                                for r in state.initial_records()
                            ],
                        }
                    )
            return sorted(out, key=lambda c: c["instance_id"])

    def final_labels(self) -> dict[str, TaxonomyLabel]:
        with self._lock:
            return {
                iid: s.final for iid, s in self.instances.items() if s.final is not None
            }

    def snapshot(self) -> dict:
        """Full comparable state dump (used by crash-replay tests)."""
        with self._lock:
            out = {}
            for iid, s in sorted(self.instances.items()):
                out[iid] = {
                    "stage": s.stage,
                    "assignments": dict(sorted(s.assignments.items())),
                    "records": [
                        (
                            r.annotator_id,
                            r.round,
                            taxonomy_to_dict(r.label),
                            s.timestamps[(r.annotator_id, r.round)],
                        )
                        for r in s.records
                    ],
                    "final": None if s.final is None else taxonomy_to_dict(s.final),
                    "needs_adjudication": s.needs_adjudication,
                }
            return out


def create_app(store: AnnotationStore, ui_dir=None):
    """FastAPI app over a store: /api/task, /api/label, /api/stats, /api/conflicts."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    app = FastAPI(title="maqa annotation service")

    @app.get("/api/task")
    def get_task(annotator: str, stage: str = "full"):
        if stage not in STAGES:
            raise HTTPException(status_code=400, detail=f"unknown stage: {stage}")
        task = store.next_task(annotator, stage)
        return {"task": task}

    @app.post("/api/label")
    def post_label(body: dict):
        try:
            annotator = body["annotator"]
            instance_id = body["instance_id"]
            label = taxonomy_from_dict(body["label"])
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(status_code=400, detail=f"bad label payload: {e}")
        try:
            return store.submit_label(annotator, instance_id, label)
        except SubmitError as e:
            raise HTTPException(status_code=e.status, detail=e.reason)

    @app.get("/api/stats")
    def get_stats():
        return store.stats()

    @app.get("/api/conflicts")
    def get_conflicts():
        return {"conflicts": store.conflicts()}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return JSONResponse(
                {"service": "maqa annotation", "ui": "not bundled; see /api/*"}
            )

    return app
