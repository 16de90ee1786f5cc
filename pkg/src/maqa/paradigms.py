"""Non-neural halves of the four multi-answer extraction paradigms, plus the
answer-count prompt-sentence formats used for paradigm fusion.

Model forward passes are delegated to maqa.model_client; everything here is a
pure decoder, serializer, or loop driver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from maqa.core import Instance, PredictionSet, TokenizedText, normalize

K_MAX = 8  # answer-count classifier cap; also the iterative loop's default budget


@dataclass(frozen=True)
class CandidateSpan:
    """A scored candidate token range from an extractive model."""

    start: int
    end: int
    score: float

    def overlaps(self, other: "CandidateSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class GenOutput:
    """Parsed generation output: optional count declarations plus answers."""

    answers: tuple[str, ...]
    declared_count: int | None = None
    remaining_count: int | None = None


def tagging_decode(probs, threshold: float = 0.5) -> list[tuple[int, int]]:
    """Maximal runs of tokens with P(inside) >= threshold, in passage order."""
    spans = []
    start = None
    for i, p in enumerate(probs):
        if p >= threshold:
            if start is None:
                start = i
        elif start is not None:
            spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(probs)))
    return spans


def tagging_decode_texts(
    passage: TokenizedText, probs, threshold: float = 0.5
) -> list[str]:
    """Decode a token labeling into passage span texts."""
    if len(probs) != len(passage.tokens):
        raise ValueError(
            f"labeling length {len(probs)} != passage token count {len(passage.tokens)}"
        )
    return [passage.slice(r) for r in tagging_decode(probs, threshold)]


def numpred_select(candidates, k: int) -> list[CandidateSpan]:
    """Greedy top-k non-overlapping selection.

    Candidates are visited in descending score (ties: smaller start, then
    shorter span); one is kept iff it overlaps no previously kept span, and
    selection stops once k spans are kept.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ordered = sorted(candidates, key=lambda c: (-c.score, c.start, c.end - c.start))
    kept: list[CandidateSpan] = []
    for cand in ordered:
        if len(kept) >= k:
            break
        if all(not cand.overlaps(done) for done in kept):
            kept.append(cand)
    return kept


def iterative_rewrite(question: str, found) -> str:
    """Append already-extracted answers to the question after "except"."""
    found = list(found)
    if not found:
        return question
    return question + " except " + ", ".join(found)


class IterativeAborted(RuntimeError):
    """Client transport failed mid-loop; .partial holds answers found so far."""

    def __init__(self, partial: PredictionSet, cause: Exception):
        super().__init__(f"iterative run aborted: {cause}")
        self.partial = partial
        self.cause = cause


def iterative_run(client, instance: Instance, max_iters: int = K_MAX) -> PredictionSet:
    """Extract answers one at a time, excluding previous ones in the question.

    Stops when the model returns no span or repeats an answer (normalized),
    or after max_iters client calls. Answers keep extraction order.
    """
    from maqa.model_client import ModelRequest, TransportError

    found: list[str] = []
    seen: set[str] = set()
    for step in range(max_iters):
        question = iterative_rewrite(instance.question.raw, found)
        request = ModelRequest(
            request_id=f"{instance.id}#it{step}",
            mode="extract_one",
            question=question,
            passage=instance.passage.raw,
        )
        try:
            response = client.query(request)
        except TransportError as e:
            raise IterativeAborted(
                PredictionSet(instance.id, tuple(found), producer="iterative"), e
            ) from e
        span = response.span
        if span is None:
            break
        text = span[0]
        key = normalize(text)
        if key in seen:
            break
        seen.add(key)
        found.append(text)
    return PredictionSet(instance.id, tuple(found), producer="iterative")


def count_sentence(k: int) -> str:
    """Answer-count sentence: "There are N answers" / "There is only one answer"."""
    if k < 1:
        raise ValueError("answer count must be >= 1")
    if k == 1:
        return "There is only one answer"
    return f"There are {k} answers"


def remaining_sentence(r: int) -> str:
    if r < 1:
        raise ValueError("remaining count must be >= 1")
    return f"The number of remaining answers is {r}"


NO_ANSWER = "No answer"

GEN_MODES = ("none", "count", "remaining")


def _check_serializable(answer: str) -> str:
    if ";" in answer:
        raise ValueError(f"answer contains a semicolon, unrepresentable: {answer!r}")
    if not answer or answer != answer.strip():
        raise ValueError(f"answer is empty or has surrounding whitespace: {answer!r}")
    return answer


def gen_serialize(answers, mode: str = "none", remaining: int | None = None) -> str:
    """Target/output string for generation models.

    none -> "a1; a2"; count -> answer-count sentence, then ": ", then answers;
    remaining -> remaining-count sentence the same way. An empty answer list
    (allowed outside count mode) serializes as the no-answer string.
    """
    answers = [_check_serializable(a) for a in answers]
    if mode == "none":
        return "; ".join(answers) if answers else NO_ANSWER
    if mode == "count":
        if not answers:
            raise ValueError("count mode requires at least one answer")
        return count_sentence(len(answers)) + ": " + "; ".join(answers)
    if mode == "remaining":
        if not answers:
            return NO_ANSWER
        if remaining is None:
            remaining = len(answers)
        return remaining_sentence(remaining) + ": " + "; ".join(answers)
    raise ValueError(f"unknown mode: {mode!r} (expected one of {GEN_MODES})")


_COUNT_SENTENCES = (
    re.compile(r"^\s*There are (\d+) answers?\s*[:.]\s*", re.IGNORECASE),
    re.compile(r"^\s*There is only one answer\s*[:.]\s*", re.IGNORECASE),
    re.compile(r"^\s*The number of answers is (\d+)\s*[:.]\s*", re.IGNORECASE),
)
_REMAINING_SENTENCE = re.compile(
    r"^\s*The number of remaining answers is (\d+)\s*[:.]\s*", re.IGNORECASE
)
_NO_ANSWER_RE = re.compile(r"^\s*no answers?\s*\.?\s*$", re.IGNORECASE)


def gen_parse(text: str) -> GenOutput:
    """Best-effort inverse of gen_serialize; total over arbitrary strings.

    Strips one leading count/remaining sentence if present, splits the rest on
    semicolons, trims, and drops empties. The no-answer string parses to an
    empty answer list.
    """
    declared = remaining = None
    rest = text
    m = _REMAINING_SENTENCE.match(rest)
    if m:
        value = int(m.group(1))
        remaining = value if value >= 1 else None
        rest = rest[m.end() :]
    else:
        for pattern in _COUNT_SENTENCES:
            m = pattern.match(rest)
            if m:
                value = int(m.group(1)) if m.groups() else 1
                declared = value if value >= 1 else None
                rest = rest[m.end() :]
                break
    if _NO_ANSWER_RE.match(rest):
        return GenOutput(answers=(), declared_count=declared, remaining_count=remaining)
    answers = tuple(a.strip() for a in rest.split(";") if a.strip())
    return GenOutput(answers=answers, declared_count=declared, remaining_count=remaining)


_ONESHOT_CONTEXT = (
    "Laura Horton is a fictional character from the NBC soap opera , Days of Our "
    "Lives , a long - running serial drama about working class life in the "
    "fictional , United States town of Salem . Created by writer Peggy Phillips , "
    "the role was originated by actress Floy Dean on June 30 , 1966 till October "
    "21 , 1966 . Susan Flannery stepped into the role from November 22 , 1966 to "
    "May 27 , 1975 . Susan Oliver briefly stepped into the role from October 10 , "
    "1975 , to June 9 , 1976 , followed by Rosemary Forsyth from August 24 , 1976 "
    ", to March 25 , 1980 ."
)
_ONESHOT_QUESTION = "who played laura horton on days of our lives"
_ONESHOT_ANSWERS = "Floy Dean; Susan Flannery; Susan Oliver; Rosemary Forsyth"

VANILLA_ONESHOT_TEMPLATE = (
    "Answer the question based on the given context. Each question has more than "
    "one answer. Please give all the answers and separate them with a semicolon.\n"
    f"Context: {_ONESHOT_CONTEXT}\n"
    f"Question: {_ONESHOT_QUESTION}\n"
    f"Answers: {_ONESHOT_ANSWERS}\n"
    "\n"
    "Following the example above and answer the following multi-answer question. "
    "Please give all the answers and separate them with a semicolon.\n"
    "Context: {context}\n"
    "Question: {question}\n"
    "Answers: "
)

NUMPRED_ONESHOT_TEMPLATE = (
    "Answer the question based on the given context. Each question has more than "
    "one answer. Please predict the number of answers first, then give all the "
    "answers and separate them with a semicolon.\n"
    f"Context: {_ONESHOT_CONTEXT}\n"
    f"Question: {_ONESHOT_QUESTION}\n"
    f"Answers: The number of answers is 4: {_ONESHOT_ANSWERS}\n"
    "\n"
    "Following the example above and answer the following multi-answer question. "
    "Please predict the number of answers first, then give all the answers and "
    "separate them with a semicolon.\n"
    "Context: {context}\n"
    "Question: {question}\n"
    "Answers: "
)

PROMPT_MODES = ("vanilla_oneshot", "numpred_oneshot", "pipeline_input")


def build_prompt(
    mode: str, instance: Instance, predicted_count: int | None = None
) -> str:
    """One-shot prompt text, or the count-augmented question for pipeline input."""
    if mode == "vanilla_oneshot":
        return VANILLA_ONESHOT_TEMPLATE.format(
            context=instance.passage.raw, question=instance.question.raw
        )
    if mode == "numpred_oneshot":
        return NUMPRED_ONESHOT_TEMPLATE.format(
            context=instance.passage.raw, question=instance.question.raw
        )
    if mode == "pipeline_input":
        if predicted_count is None:
            raise ValueError("pipeline_input requires predicted_count")
        return instance.question.raw + " " + count_sentence(predicted_count) + "."
    raise ValueError(f"unknown prompt mode: {mode!r} (expected one of {PROMPT_MODES})")
