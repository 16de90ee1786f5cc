"""Exact-match and partial-match evaluation, micro-averaged over a corpus.

Partial match scores every prediction/gold pair by the longest contiguous
common token run (LCS) relative to each side's length; exact match counts a
maximum one-to-one matching under normalized-text equality, so duplicate
predictions cannot inflate recall. All reported values are percentages.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from maqa.core import normalize
from maqa.lcs import lcs_len

MODES = ("token", "char")


@dataclass(frozen=True)
class PartialScorePair:
    s_ret: float
    s_rel: float


@dataclass(frozen=True)
class QuestionScore:
    """Per-question numerators and denominators for micro-averaging."""

    em_matched: int
    n_pred: int
    m_gold: int
    pm_ret_sum: float
    pm_rel_sum: float


@dataclass(frozen=True)
class MetricTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ScoreReport:
    """Corpus-level EM and PM precision/recall/F1 plus the raw micro sums."""

    em: MetricTriple
    pm: MetricTriple
    n_questions: int
    n_pred: int
    m_gold: int
    em_matched: int
    pm_ret_sum: float
    pm_rel_sum: float

    def to_dict(self) -> dict:
        return {
            "em": {"precision": self.em.precision, "recall": self.em.recall, "f1": self.em.f1},
            "pm": {"precision": self.pm.precision, "recall": self.pm.recall, "f1": self.pm.f1},
            "n_questions": self.n_questions,
            "n_pred": self.n_pred,
            "m_gold": self.m_gold,
        }


def _units(text: str, mode: str):
    """Comparison units of a span: normalized tokens, or characters in char mode."""
    norm = normalize(text)
    if mode == "token":
        return norm.split()
    if mode == "char":
        return list(norm)
    raise ValueError(f"unknown LCS mode: {mode!r}")


def partial_scores(pred_text: str, gold_text: str, mode: str = "token") -> PartialScorePair:
    """LCS length over the prediction length and over the gold length.

    A span that normalizes to nothing scores zero on both sides (it still
    counts toward the denominators); scoring is total.
    """
    p = _units(pred_text, mode)
    g = _units(gold_text, mode)
    if not p or not g:
        return PartialScorePair(0.0, 0.0)
    common = lcs_len(p, g)
    return PartialScorePair(common / len(p), common / len(g))


def score_question(pred_texts, gold_texts, mode: str = "token") -> QuestionScore:
    """Score one question's predictions against its gold answer set.

    EM pairs are consumed one-to-one (multiset intersection of nonempty
    normalized texts). Each prediction keeps its best retrieved score over
    all golds; each gold keeps its best relevant score over all predictions.
    """
    if not gold_texts:
        raise ValueError("gold answer set must be nonempty")
    preds = list(pred_texts)
    golds = list(gold_texts)

    pred_norm = [normalize(t) for t in preds]
    gold_norm = [normalize(t) for t in golds]
    em = sum(
        (
            Counter(t for t in pred_norm if t)
            & Counter(t for t in gold_norm if t)
        ).values()
    )

    pred_units = [_units(t, mode) for t in preds]
    gold_units = [_units(t, mode) for t in golds]
    lcs = [
        [lcs_len(p, g) if p and g else 0 for g in gold_units]
        for p in pred_units
    ]

    pm_ret = 0.0
    for i, p in enumerate(pred_units):
        if p:
            pm_ret += max(lcs[i][j] / len(p) for j in range(len(golds)))
    pm_rel = 0.0
    for j, g in enumerate(gold_units):
        if g and preds:
            pm_rel += max(lcs[i][j] / len(g) for i in range(len(preds)))

    return QuestionScore(
        em_matched=em,
        n_pred=len(preds),
        m_gold=len(golds),
        pm_ret_sum=pm_ret,
        pm_rel_sum=pm_rel,
    )


def _prf(numer_p: float, denom_p: int, numer_r: float, denom_r: int) -> MetricTriple:
    precision = 100.0 * numer_p / denom_p if denom_p else 0.0
    recall = 100.0 * numer_r / denom_r if denom_r else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricTriple(precision, recall, f1)


def corpus_report(scores) -> ScoreReport:
    """Micro-average a list of QuestionScores into one report."""
    scores = list(scores)
    if not scores:
        raise ValueError("no question scores to aggregate")
    n_pred = sum(s.n_pred for s in scores)
    m_gold = sum(s.m_gold for s in scores)
    em = sum(s.em_matched for s in scores)
    ret = sum(s.pm_ret_sum for s in scores)
    rel = sum(s.pm_rel_sum for s in scores)
    return ScoreReport(
        em=_prf(em, n_pred, em, m_gold),
        pm=_prf(ret, n_pred, rel, m_gold),
        n_questions=len(scores),
        n_pred=n_pred,
        m_gold=m_gold,
        em_matched=em,
        pm_ret_sum=ret,
        pm_rel_sum=rel,
    )


def evaluate(corpus, predictions, mode: str = "token") -> ScoreReport:
    """Score a prediction map (instance_id -> list of span texts) against a corpus.

    Instances missing from the prediction map are scored as empty predictions.
    """
    by_id = dict(predictions)
    scores = []
    for inst in corpus:
        preds = by_id.get(inst.id, [])
        scores.append(score_question(preds, inst.gold.texts(), mode=mode))
    return corpus_report(scores)
