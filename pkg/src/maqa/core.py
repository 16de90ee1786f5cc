"""Shared data model: tokenized text, answer spans and sets, instances, predictions.

Everything here is immutable after construction and all operations are pure,
so corpora can be shared read-only across worker threads.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass

DATASETS = ("DROP", "Quoref", "MultiSpanQA", "Other")

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_ARTICLES = frozenset({"a", "an", "the"})
_TOKEN_RE = re.compile(r"\S+")


def normalize(text: str) -> str:
    """Canonical answer form: lowercase, strip punctuation, drop articles, collapse whitespace.

    Total and idempotent; this is the equality used by exact match, grounding,
    and ensembling.
    """
    stripped = text.lower().translate(_PUNCT_TABLE)
    return " ".join(w for w in stripped.split() if w not in _ARTICLES)


def normalized_tokens(text: str) -> list[str]:
    return normalize(text).split()


@dataclass(frozen=True)
class TokenizedText:
    """A string plus its whitespace tokenization with exact character offsets.

    Tokens are maximal non-whitespace runs; ``raw[offsets[i][0]:offsets[i][1]]``
    is always ``tokens[i]``.
    """

    raw: str
    tokens: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...]

    def slice(self, token_range: tuple[int, int]) -> str:
        """Raw text spanned by a half-open token range."""
        start, end = token_range
        if start >= end:
            return ""
        return self.raw[self.offsets[start][0] : self.offsets[end - 1][1]]


def tokenize(raw: str) -> TokenizedText:
    """Split on whitespace, keeping per-token character offsets."""
    tokens = []
    offsets = []
    for m in _TOKEN_RE.finditer(raw):
        tokens.append(m.group())
        offsets.append((m.start(), m.end()))
    return TokenizedText(raw=raw, tokens=tuple(tokens), offsets=tuple(offsets))


@dataclass(frozen=True)
class AnswerSpan:
    """One grounded (or text-only) answer span.

    ``char_range`` / ``token_range`` index into the owning passage and are
    half-open; either may be absent when the source gives only answer text.
    """

    text: str
    char_range: tuple[int, int] | None = None
    token_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class AnswerSet:
    """The complete, unordered set of answers to one question.

    Two spans with equal normalized text are disallowed: exact duplicates in
    gold data are an annotation defect, not a bigger answer set.
    """

    spans: tuple[AnswerSpan, ...]

    def __post_init__(self):
        if not self.spans:
            raise ValueError("answer set must contain at least one span")
        seen = set()
        for span in self.spans:
            key = normalize(span.text)
            if key in seen:
                raise ValueError(f"duplicate normalized answer text: {span.text!r}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.spans)

    def texts(self) -> list[str]:
        return [s.text for s in self.spans]


@dataclass(frozen=True)
class ClueMark:
    """A clue-word hit in a question: surface text, optional token range, type."""

    text: str
    type: str
    token_range: tuple[int, int] | None = None


KIND_PASSAGE_DEPENDENT = "passage_dependent"
KIND_QUESTION_DEPENDENT = "question_dependent"
KIND_BAD_ANNOTATION = "bad_annotation"
TAXONOMY_KINDS = (
    KIND_PASSAGE_DEPENDENT,
    KIND_QUESTION_DEPENDENT,
    KIND_BAD_ANNOTATION,
)


@dataclass(frozen=True)
class TaxonomyLabel:
    """Answer-count taxonomy label.

    ``clues`` may be nonempty only for question-dependent labels; a
    question-dependent label with no clues is the without-clue-words subtype.
    """

    kind: str
    clues: tuple[ClueMark, ...] = ()

    def __post_init__(self):
        if self.kind not in TAXONOMY_KINDS:
            raise ValueError(f"unknown taxonomy kind: {self.kind!r}")
        if self.clues and self.kind != KIND_QUESTION_DEPENDENT:
            raise ValueError(f"{self.kind} labels carry no clues")

    @property
    def with_clues(self) -> bool:
        return self.kind == KIND_QUESTION_DEPENDENT and bool(self.clues)


@dataclass(frozen=True)
class Instance:
    """One question/passage/gold-answer-set triple with dataset provenance."""

    id: str
    dataset: str
    question: TokenizedText
    passage: TokenizedText
    gold: AnswerSet
    taxonomy: TaxonomyLabel | None = None

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset: {self.dataset!r}")


@dataclass(frozen=True)
class PredictionSet:
    """A model's answer spans for one instance, in prediction order."""

    instance_id: str
    spans: tuple[str, ...]
    scores: tuple[float, ...] | None = None
    producer: str = ""

    def __post_init__(self):
        if self.scores is not None:
            if len(self.scores) != len(self.spans):
                raise ValueError("scores must parallel spans")
            for s in self.scores:
                if s != s or s in (float("inf"), float("-inf")):
                    raise ValueError("scores must be finite")


def ground_span(passage: TokenizedText, answer_text: str) -> tuple[int, int] | None:
    """First token range whose normalized tokens equal the normalized answer.

    Returns None when the answer does not occur (or normalizes to nothing).
    The range is tight: its first and last tokens contribute to the match.
    """
    want = normalized_tokens(answer_text)
    if not want:
        return None
    norm = [normalize(t) for t in passage.tokens]
    n = len(norm)
    for i in range(n):
        if norm[i] != want[0]:
            continue
        matched, j = 1, i + 1
        while matched < len(want) and j < n:
            word = norm[j]
            j += 1
            if word:
                if word != want[matched]:
                    break
                matched += 1
        if matched == len(want):
            return (i, j)
    return None


def token_range_for_chars(
    passage: TokenizedText, char_start: int, char_end: int
) -> tuple[int, int] | None:
    """Token range exactly covering a character range, if the boundaries align."""
    start_tok = end_tok = None
    for i, (s, e) in enumerate(passage.offsets):
        if s == char_start:
            start_tok = i
        if e == char_end:
            end_tok = i
    if start_tok is None or end_tok is None or end_tok < start_tok:
        return None
    return (start_tok, end_tok + 1)


def make_span(
    passage: TokenizedText,
    text: str,
    char_range: tuple[int, int] | None = None,
) -> AnswerSpan:
    """Build an AnswerSpan with ranges canonicalized against the passage.

    A char range is kept only when the raw slice matches the text exactly;
    otherwise (and when no range is given) the span is re-grounded by
    normalized text, which fills both ranges when it succeeds.
    """
    if char_range is not None:
        s, e = char_range
        if 0 <= s <= e <= len(passage.raw) and passage.raw[s:e] == text:
            return AnswerSpan(
                text=text,
                char_range=(s, e),
                token_range=token_range_for_chars(passage, s, e),
            )
    token_range = ground_span(passage, text)
    if token_range is None:
        return AnswerSpan(text=text)
    s, e = token_range
    return AnswerSpan(
        text=text,
        char_range=(passage.offsets[s][0], passage.offsets[e - 1][1]),
        token_range=token_range,
    )


def instance_to_dict(inst: Instance) -> dict:
    """Unified-format dict for one instance (id, dataset, question, passage, answers, taxonomy?)."""
    answers = []
    for span in inst.gold.spans:
        entry: dict = {"text": span.text}
        if span.char_range is not None:
            entry["char_start"], entry["char_end"] = span.char_range
        answers.append(entry)
    out = {
        "id": inst.id,
        "dataset": inst.dataset,
        "question": inst.question.raw,
        "passage": inst.passage.raw,
        "answers": answers,
    }
    if inst.taxonomy is not None:
        out["taxonomy"] = taxonomy_to_dict(inst.taxonomy)
    return out


def taxonomy_to_dict(label: TaxonomyLabel) -> dict:
    out: dict = {"label": label.kind}
    if label.clues:
        clues = []
        for mark in label.clues:
            c: dict = {"text": mark.text, "type": mark.type}
            if mark.token_range is not None:
                c["token_start"], c["token_end"] = mark.token_range
            clues.append(c)
        out["clues"] = clues
    return out


def taxonomy_from_dict(d: dict) -> TaxonomyLabel:
    clues = []
    for c in d.get("clues", []):
        token_range = None
        if "token_start" in c and "token_end" in c:
            token_range = (int(c["token_start"]), int(c["token_end"]))
        clues.append(ClueMark(text=c["text"], type=c["type"], token_range=token_range))
    return TaxonomyLabel(kind=d["label"], clues=tuple(clues))


def instance_to_json(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), ensure_ascii=False)
