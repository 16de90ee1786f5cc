"""Prediction-file plumbing: JSONL with one {instance_id, spans} object per line."""

from __future__ import annotations

import json

from maqa.core import PredictionSet


def parse_predictions(text: str) -> dict[str, PredictionSet]:
    preds: dict[str, PredictionSet] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            iid = str(rec["instance_id"])
            spans = tuple(str(s) for s in rec["spans"])
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ValueError(f"predictions line {lineno}: {e}") from e
        if iid in preds:
            raise ValueError(f"predictions line {lineno}: duplicate instance_id {iid!r}")
        scores = rec.get("scores")
        preds[iid] = PredictionSet(
            instance_id=iid,
            spans=spans,
            scores=None if scores is None else tuple(float(s) for s in scores),
            producer=rec.get("producer", ""),
        )
    return preds


def load_predictions(path) -> dict[str, PredictionSet]:
    with open(path, encoding="utf-8") as f:
        return parse_predictions(f.read())


def format_predictions(preds) -> str:
    """Serialize PredictionSets (iterable or id-map) to JSONL, sorted by id."""
    if isinstance(preds, dict):
        preds = [preds[k] for k in sorted(preds)]
    lines = []
    for p in preds:
        rec: dict = {"instance_id": p.instance_id, "spans": list(p.spans)}
        if p.scores is not None:
            rec["scores"] = list(p.scores)
        if p.producer:
            rec["producer"] = p.producer
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")
