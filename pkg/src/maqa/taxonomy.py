"""Question taxonomy machinery: clue-word detection, stage-1 recall,
label adjudication, and inter-annotator agreement.

Clue detection is lexicon-driven (see data/clue_lexicon.tsv) plus a
morphological rule for regular comparative/superlative forms. Interrogative
quantity patterns ("how many", "how much") and name collocations
("first name(s)", "last name(s)") are stop-patterns: tokens inside them never
fire, so questions like "1 light year equal to how many km?" stay clue-free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from maqa.core import (
    KIND_BAD_ANNOTATION,
    KIND_QUESTION_DEPENDENT,
    ClueMark,
    TaxonomyLabel,
    TokenizedText,
    normalize,
)

CLUE_TYPES = ("cardinal", "ordinal", "comp_super", "alternative", "other_semantics")

DEFAULT_STOP_PATTERNS = (
    "how many",
    "how much",
    "first name",
    "first names",
    "last name",
    "last names",
)

# Base adjectives accepted by the -er/-est morphology rule. The stem of the
# suffixed token (after undoing e-drop, consonant doubling, and y->i) must be
# in this set, which keeps "river", "number", or "forest" from firing.
_BASE_ADJECTIVES = frozenset(
    """
    big small large great high low long short old young new late early
    strong weak fast slow quick deep shallow tall rich poor heavy light
    near close far wide narrow cheap easy hard happy busy hot cold warm
    cool safe simple few tough smart thick thin loud quiet bright dark
    soft tight loose clean dry wet full fat slim fair rare common dense
    steep sharp flat smooth rough calm wild proud brave wise tiny grand
    mild plain fresh sweet sour pale young old fancy noble gentle humble
    """.split()
)

_SUFFIX_RULES = (("est", "comp_super"), ("er", "comp_super"))


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    """Clue-word surfaces (normalized word tuples) and full-token regexes."""

    surfaces: dict[tuple[str, ...], str]
    regexes: tuple[tuple[re.Pattern, str], ...]

    @property
    def max_surface_len(self) -> int:
        return max((len(s) for s in self.surfaces), default=1)


def parse_lexicon(text: str) -> Lexicon:
    surfaces: dict[tuple[str, ...], str] = {}
    regexes: list[tuple[re.Pattern, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"line {lineno}: expected surface<TAB>type, got {line!r}")
        surface, clue_type = parts
        if clue_type not in CLUE_TYPES:
            raise LexiconError(f"line {lineno}: unknown clue type {clue_type!r}")
        if surface.startswith("re:"):
            try:
                regexes.append((re.compile(surface[3:]), clue_type))
            except re.error as e:
                raise LexiconError(f"line {lineno}: bad regex: {e}") from e
        else:
            words = tuple(normalize(surface).split())
            if not words:
                raise LexiconError(f"line {lineno}: surface normalizes to nothing")
            surfaces[words] = clue_type
    return Lexicon(surfaces=surfaces, regexes=tuple(regexes))


def load_lexicon(path) -> Lexicon:
    with open(path, encoding="utf-8") as f:
        return parse_lexicon(f.read())


def default_lexicon() -> Lexicon:
    text = resources.files("maqa.data").joinpath("clue_lexicon.tsv").read_text("utf-8")
    return parse_lexicon(text)


def _morph_comp_super(word: str) -> bool:
    for suffix, _ in _SUFFIX_RULES:
        if len(word) > len(suffix) + 2 and word.endswith(suffix):
            stem = word[: -len(suffix)]
            candidates = {stem, stem + "e"}
            if len(stem) >= 2 and stem[-1] == stem[-2]:
                candidates.add(stem[:-1])  # bigg -> big
            if stem.endswith("i"):
                candidates.add(stem[:-1] + "y")  # easi -> easy
            if candidates & _BASE_ADJECTIVES:
                return True
    return False


def detect_clue_words(
    question: TokenizedText,
    lexicon: Lexicon | None = None,
    stop_patterns=DEFAULT_STOP_PATTERNS,
) -> list[ClueMark]:
    """All clue-word hits in a question, as non-overlapping token-range marks.

    Matching runs over the nonempty normalized words (so articles and
    punctuation-only tokens inside a phrase do not break it). Longer lexicon
    surfaces win over shorter ones; words covered by a stop pattern never
    fire. Marks are returned in question order.
    """
    if lexicon is None:
        lexicon = default_lexicon()
    words = [normalize(t) for t in question.tokens]
    content = [(i, w) for i, w in enumerate(words) if w]
    seq = [w for _, w in content]
    n = len(seq)

    blocked = [False] * len(words)
    for pattern_text in stop_patterns:
        pat = tuple(normalize(pattern_text).split())
        if not pat:
            continue
        for k in range(n - len(pat) + 1):
            if tuple(seq[k : k + len(pat)]) == pat:
                for idx, _ in content[k : k + len(pat)]:
                    blocked[idx] = True

    claimed = [False] * len(words)
    marks: list[ClueMark] = []

    def claim(start: int, end: int, clue_type: str) -> None:
        for k in range(start, end):
            claimed[k] = True
        marks.append(
            ClueMark(
                text=question.slice((start, end)),
                type=clue_type,
                token_range=(start, end),
            )
        )

    # multi-word surfaces first, longest match wins
    for length in range(lexicon.max_surface_len, 1, -1):
        for k in range(n - length + 1):
            clue_type = lexicon.surfaces.get(tuple(seq[k : k + length]))
            if clue_type is None:
                continue
            start, end = content[k][0], content[k + length - 1][0] + 1
            if any(blocked[i] or claimed[i] for i in range(start, end)):
                continue
            claim(start, end, clue_type)

    for i, word in content:
        if blocked[i] or claimed[i]:
            continue
        clue_type = lexicon.surfaces.get((word,))
        if clue_type is None:
            for pattern, regex_type in lexicon.regexes:
                if pattern.fullmatch(word):
                    clue_type = regex_type
                    break
        if clue_type is None and _morph_comp_super(word):
            clue_type = "comp_super"
        if clue_type is not None:
            claim(i, i + 1, clue_type)

    marks.sort(key=lambda m: m.token_range)
    return marks


def recall_stage1(corpus, lexicon: Lexicon | None = None):
    """Split a corpus into (recalled, remaining) by presence of detected clues."""
    if lexicon is None:
        lexicon = default_lexicon()
    recalled, remaining = [], []
    for inst in corpus:
        if detect_clue_words(inst.question, lexicon):
            recalled.append(inst)
        else:
            remaining.append(inst)
    return recalled, remaining


@dataclass(frozen=True)
class AnnotatorRecord:
    annotator_id: str
    instance_id: str
    label: TaxonomyLabel
    round: str  # first | second | adjudication


class NeedsAdjudication(Exception):
    """Two initial labels conflict and no adjudication record exists yet."""


def _merge_clues(a: TaxonomyLabel, b: TaxonomyLabel) -> tuple[ClueMark, ...]:
    merged = list(a.clues)
    seen = {(m.text, m.type, m.token_range) for m in merged}
    for m in b.clues:
        key = (m.text, m.type, m.token_range)
        if key not in seen:
            merged.append(m)
            seen.add(key)
    return tuple(merged)


def adjudicate(records) -> TaxonomyLabel:
    """Final label for one instance from its annotator records.

    Any bad-annotation vote wins outright. Otherwise the two initial records
    must agree on the kind (clues are unioned); a disagreement is settled by
    the adjudication-round record, and raises NeedsAdjudication when that
    record is missing.
    """
    records = list(records)
    if any(r.label.kind == KIND_BAD_ANNOTATION for r in records):
        return TaxonomyLabel(kind=KIND_BAD_ANNOTATION)
    initial = [r for r in records if r.round in ("first", "second")]
    if len(initial) < 2:
        raise ValueError("need at least two initial records")
    a, b = initial[0], initial[1]
    if a.label.kind == b.label.kind:
        if a.label.kind == KIND_QUESTION_DEPENDENT:
            return TaxonomyLabel(
                kind=KIND_QUESTION_DEPENDENT, clues=_merge_clues(a.label, b.label)
            )
        return TaxonomyLabel(kind=a.label.kind)
    final = [r for r in records if r.round == "adjudication"]
    if not final:
        raise NeedsAdjudication(a.instance_id)
    return final[0].label


def cohens_kappa(pairs) -> float:
    """Cohen's kappa over paired labels.

    Chance agreement comes from each side's marginal frequencies. When chance
    agreement is 1 (both sides constant), kappa is 1 for perfect observed
    agreement and 0 otherwise.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("kappa needs at least one pair")
    n = len(pairs)
    observed = sum(1 for a, b in pairs if a == b) / n
    left: dict = {}
    right: dict = {}
    for a, b in pairs:
        left[a] = left.get(a, 0) + 1
        right[b] = right.get(b, 0) + 1
    expected = sum(left[k] * right.get(k, 0) for k in left) / (n * n)
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)
