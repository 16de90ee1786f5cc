"""Loaders for DROP, Quoref, and MultiSpanQA native formats, plus the unified
JSONL corpus format and released taxonomy-annotation files.

Only span-type answers are kept: DROP number/date answers are skipped and
counted. Records that cannot yield a valid instance (missing fields, empty or
duplicate answer texts, broken label sequences) are skipped and counted as
malformed; source character offsets are kept when they match the passage and
re-derived by normalized-text grounding otherwise.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

from maqa.core import (
    DATASETS,
    KIND_QUESTION_DEPENDENT,
    TAXONOMY_KINDS,
    AnswerSet,
    AnswerSpan,
    ClueMark,
    Instance,
    TaxonomyLabel,
    TokenizedText,
    instance_to_json,
    make_span,
    taxonomy_from_dict,
    tokenize,
)

FORMATS = ("drop", "quoref", "multispanqa", "unified")


class LoadError(ValueError):
    """Fatal container-level parse failure."""


@dataclass(frozen=True)
class LoaderReport:
    loaded: int
    skipped_non_span: int
    skipped_malformed: int
    source_format: str

    @property
    def total(self) -> int:
        return self.loaded + self.skipped_non_span + self.skipped_malformed


class _RecordError(Exception):
    pass


class _Collector:
    """Accumulates instances, rejecting duplicate ids (unique within a corpus)."""

    def __init__(self):
        self.instances: list[Instance] = []
        self._ids: set[str] = set()

    def add(self, inst: Instance) -> None:
        if inst.id in self._ids:
            raise _RecordError(f"duplicate instance id {inst.id!r}")
        self._ids.add(inst.id)
        self.instances.append(inst)

    def __len__(self) -> int:
        return len(self.instances)


def _as_text(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise LoadError(f"{source}: invalid JSON at byte offset {e.pos}: {e.msg}") from e


def _build_answer_set(passage: TokenizedText, wants) -> AnswerSet:
    """wants: list of (text, optional char_range). Raises _RecordError on junk."""
    spans = []
    for text, char_range in wants:
        if not isinstance(text, str) or not text.strip():
            raise _RecordError("empty answer text")
        spans.append(make_span(passage, text, char_range))
    try:
        return AnswerSet(spans=tuple(spans))
    except ValueError as e:
        raise _RecordError(str(e)) from e


def load(fmt: str, data) -> tuple[list[Instance], LoaderReport]:
    """Load a corpus from one of the supported formats."""
    text = _as_text(data)
    if fmt == "drop":
        return _load_drop(text)
    if fmt == "quoref":
        return _load_quoref(text)
    if fmt == "multispanqa":
        return _load_multispanqa(text)
    if fmt == "unified":
        return _load_unified(text)
    raise ValueError(f"unknown format: {fmt!r} (expected one of {FORMATS})")


def load_path(path, fmt: str) -> tuple[list[Instance], LoaderReport]:
    with open(path, "rb") as f:
        return load(fmt, f.read())


def _date_filled(date) -> bool:
    return isinstance(date, dict) and any(str(v).strip() for v in date.values())


def _load_drop(text: str) -> tuple[list[Instance], LoaderReport]:
    doc = _parse_json(text, "drop")
    if not isinstance(doc, dict):
        raise LoadError("drop: top level must be a passage-keyed object")
    out = _Collector()
    non_span = malformed = 0
    for passage_id, entry in doc.items():
        try:
            passage = tokenize(entry["passage"])
            qa_pairs = entry["qa_pairs"]
        except (TypeError, KeyError) as e:
            raise LoadError(f"drop: passage {passage_id!r} missing field {e}") from e
        for qa in qa_pairs:
            try:
                question = qa["question"]
                query_id = qa["query_id"]
                answer = qa["answer"]
                number = str(answer.get("number", "")).strip()
                spans = answer.get("spans", [])
                if number or _date_filled(answer.get("date")):
                    non_span += 1
                    continue
                if not spans:
                    non_span += 1
                    continue
                gold = _build_answer_set(passage, [(s, None) for s in spans])
                out.add(
                    Instance(
                        id=str(query_id),
                        dataset="DROP",
                        question=tokenize(question),
                        passage=passage,
                        gold=gold,
                    )
                )
            except (_RecordError, TypeError, KeyError, AttributeError):
                malformed += 1
    return out.instances, LoaderReport(len(out), non_span, malformed, "drop")


def _load_quoref(text: str) -> tuple[list[Instance], LoaderReport]:
    doc = _parse_json(text, "quoref")
    try:
        articles = doc["data"]
    except (TypeError, KeyError) as e:
        raise LoadError("quoref: missing top-level 'data' array") from e
    out = _Collector()
    malformed = 0
    for article in articles:
        for para in article.get("paragraphs", []):
            try:
                passage = tokenize(para["context"])
                qas = para["qas"]
            except (TypeError, KeyError):
                malformed += 1
                continue
            for qa in qas:
                try:
                    wants = []
                    for ans in qa["answers"]:
                        start = ans.get("answer_start")
                        char_range = None
                        if isinstance(start, int) and start >= 0:
                            char_range = (start, start + len(ans["text"]))
                        wants.append((ans["text"], char_range))
                    if not wants:
                        raise _RecordError("no answers")
                    gold = _build_answer_set(passage, wants)
                    out.add(
                        Instance(
                            id=str(qa["id"]),
                            dataset="Quoref",
                            question=tokenize(qa["question"]),
                            passage=passage,
                            gold=gold,
                        )
                    )
                except (_RecordError, TypeError, KeyError, AttributeError):
                    malformed += 1
    return out.instances, LoaderReport(len(out), 0, malformed, "quoref")


def decode_bio(labels) -> list[tuple[int, int]]:
    """Token ranges of BIO label runs; a stray I after O opens a new span."""
    spans = []
    start = None
    for i, tag in enumerate(labels):
        if tag == "B":
            if start is not None:
                spans.append((start, i))
            start = i
        elif tag == "I":
            if start is None:
                start = i
        elif tag == "O":
            if start is not None:
                spans.append((start, i))
                start = None
        else:
            raise _RecordError(f"unknown BIO tag {tag!r}")
    if start is not None:
        spans.append((start, len(labels)))
    return spans


def _load_multispanqa(text: str) -> tuple[list[Instance], LoaderReport]:
    doc = _parse_json(text, "multispanqa")
    records = doc.get("data") if isinstance(doc, dict) else doc
    if not isinstance(records, list):
        raise LoadError("multispanqa: expected a 'data' array of records")
    out = _Collector()
    non_span = malformed = 0
    for rec in records:
        try:
            q_tokens = [t for t in rec["question"] if t.strip()]
            c_tokens = rec["context"]
            labels = rec["label"]
            if len(labels) != len(c_tokens):
                raise _RecordError("label/context length mismatch")
            if any(not t.strip() for t in c_tokens):
                raise _RecordError("empty context token")
            passage = tokenize(" ".join(c_tokens))
            ranges = decode_bio(labels)
            if not ranges:
                non_span += 1
                continue
            spans = []
            for s, e in ranges:
                spans.append(
                    AnswerSpan(
                        text=passage.slice((s, e)),
                        char_range=(passage.offsets[s][0], passage.offsets[e - 1][1]),
                        token_range=(s, e),
                    )
                )
            gold = AnswerSet(spans=tuple(spans))
            out.add(
                Instance(
                    id=str(rec["id"]),
                    dataset="MultiSpanQA",
                    question=tokenize(" ".join(q_tokens)),
                    passage=passage,
                    gold=gold,
                )
            )
        except (_RecordError, ValueError, TypeError, KeyError, AttributeError):
            malformed += 1
    return out.instances, LoaderReport(len(out), non_span, malformed, "multispanqa")


def _load_unified(text: str) -> tuple[list[Instance], LoaderReport]:
    out = _Collector()
    malformed = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise LoadError(f"unified: line {lineno}: invalid JSON: {e.msg}") from e
        try:
            if rec["dataset"] not in DATASETS:
                raise _RecordError(f"unknown dataset {rec['dataset']!r}")
            passage = tokenize(rec["passage"])
            wants = []
            for ans in rec["answers"]:
                char_range = None
                if "char_start" in ans and "char_end" in ans:
                    char_range = (int(ans["char_start"]), int(ans["char_end"]))
                wants.append((ans["text"], char_range))
            if not wants:
                raise _RecordError("no answers")
            gold = _build_answer_set(passage, wants)
            taxonomy = None
            if "taxonomy" in rec and rec["taxonomy"] is not None:
                taxonomy = taxonomy_from_dict(rec["taxonomy"])
            out.add(
                Instance(
                    id=str(rec["id"]),
                    dataset=rec["dataset"],
                    question=tokenize(rec["question"]),
                    passage=passage,
                    gold=gold,
                    taxonomy=taxonomy,
                )
            )
        except (_RecordError, ValueError, TypeError, KeyError, AttributeError):
            malformed += 1
    return out.instances, LoaderReport(len(out), 0, malformed, "unified")


def export(corpus) -> str:
    """Unified JSONL for a corpus; load("unified", export(c)) reproduces c."""
    buf = io.StringIO()
    for inst in corpus:
        buf.write(instance_to_json(inst))
        buf.write("\n")
    return buf.getvalue()


_LABEL_ALIASES = {k: k for k in TAXONOMY_KINDS}


def load_annotations(data) -> dict[str, TaxonomyLabel]:
    """Released per-instance taxonomy labels: JSONL {id, label, clue?}.

    clue, when present, is {"spans": [surface, ...], "types": [type, ...]}
    with parallel lists. Unknown labels and duplicate ids are fatal.
    """
    text = _as_text(data)
    labels: dict[str, TaxonomyLabel] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise LoadError(f"annotations: line {lineno}: invalid JSON: {e.msg}") from e
        rid = str(rec.get("id"))
        kind = rec.get("label")
        if kind not in _LABEL_ALIASES:
            raise LoadError(f"annotations: line {lineno}: unknown label {kind!r}")
        if rid in labels:
            raise LoadError(f"annotations: line {lineno}: duplicate id {rid!r}")
        clues: list[ClueMark] = []
        clue = rec.get("clue")
        if clue:
            spans = clue.get("spans", [])
            types = clue.get("types", [])
            if len(spans) != len(types):
                raise LoadError(
                    f"annotations: line {lineno}: clue spans/types length mismatch"
                )
            for surface, clue_type in zip(spans, types):
                clues.append(ClueMark(text=surface, type=clue_type))
        if clues and kind != KIND_QUESTION_DEPENDENT:
            raise LoadError(
                f"annotations: line {lineno}: clues given for non-question-dependent label"
            )
        labels[rid] = TaxonomyLabel(kind=kind, clues=tuple(clues))
    return labels


def _resolve_clues(question: TokenizedText, label: TaxonomyLabel) -> TaxonomyLabel:
    from maqa.core import ground_span  # local import to avoid cycle noise

    if not label.clues:
        return label
    resolved = []
    for mark in label.clues:
        if mark.token_range is not None:
            resolved.append(mark)
            continue
        token_range = ground_span(question, mark.text)
        resolved.append(ClueMark(text=mark.text, type=mark.type, token_range=token_range))
    return TaxonomyLabel(kind=label.kind, clues=tuple(resolved))


def attach_annotations(corpus, labels) -> tuple[list[Instance], list[str]]:
    """Attach loaded labels to a corpus by id.

    Clue surfaces are resolved to question token ranges where they occur.
    Returns the labeled corpus and the label ids that matched no instance.
    """
    by_id = dict(labels)
    out = []
    for inst in corpus:
        label = by_id.pop(inst.id, None)
        if label is None:
            out.append(inst)
        else:
            out.append(
                Instance(
                    id=inst.id,
                    dataset=inst.dataset,
                    question=inst.question,
                    passage=inst.passage,
                    gold=inst.gold,
                    taxonomy=_resolve_clues(inst.question, label),
                )
            )
    return out, sorted(by_id)
