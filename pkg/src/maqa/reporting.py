"""Distributional analyses and per-type metric breakdowns over labeled corpora.

Tables: taxonomy-kind distributions, clue-type distributions (a question may
land in several cells), answer-count cross-tabs with buckets {1, 2, 3, >3},
corpus statistics, and per-stratum score reports. Unlabeled instances always
appear in an explicit column rather than being dropped.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from maqa.core import (
    KIND_BAD_ANNOTATION,
    KIND_PASSAGE_DEPENDENT,
    Instance,
    tokenize,
)
from maqa.metrics import ScoreReport, corpus_report, score_question
from maqa.taxonomy import CLUE_TYPES

COUNT_BUCKETS = ("1", "2", "3", ">3")

TYPE_COLUMNS = (
    "passage_dependent",
    "question_dependent",
    "with_clue_words",
    "without_clue_words",
    "bad_annotation",
    "unlabeled",
)


@dataclass(frozen=True)
class DistributionTable:
    """Counts per (row, column); percentages are derived from row denominators."""

    title: str
    columns: tuple[str, ...]
    rows: tuple[str, ...]
    cells: dict[tuple[str, str], int]
    denominators: dict[str, int]

    def count(self, row: str, col: str) -> int:
        return self.cells.get((row, col), 0)

    def pct(self, row: str, col: str) -> float:
        denom = self.denominators.get(row, 0)
        return 100.0 * self.count(row, col) / denom if denom else 0.0


def _bucket(n: int) -> str:
    return str(n) if n <= 3 else ">3"


def _row_groups(corpus) -> dict[str, list[Instance]]:
    groups: dict[str, list[Instance]] = {}
    for inst in corpus:
        groups.setdefault(inst.dataset, []).append(inst)
    ordered = {name: groups[name] for name in sorted(groups)}
    if len(ordered) != 1:
        ordered["Total"] = list(corpus)
    return ordered


def _type_cells(instances) -> dict[str, int]:
    counts = dict.fromkeys(TYPE_COLUMNS, 0)
    for inst in instances:
        label = inst.taxonomy
        if label is None:
            counts["unlabeled"] += 1
        elif label.kind == KIND_PASSAGE_DEPENDENT:
            counts["passage_dependent"] += 1
        elif label.kind == KIND_BAD_ANNOTATION:
            counts["bad_annotation"] += 1
        else:
            counts["question_dependent"] += 1
            if label.clues:
                counts["with_clue_words"] += 1
            else:
                counts["without_clue_words"] += 1
    return counts


def distribution(corpus, dimension: str) -> list[DistributionTable]:
    """Distribution tables for one dimension: types | clues | counts."""
    corpus = list(corpus)
    if dimension == "types":
        return [_distribution_types(corpus)]
    if dimension == "clues":
        return [_distribution_clues(corpus)]
    if dimension == "counts":
        return [_counts_by_type(corpus), _counts_by_clue(corpus)]
    raise ValueError(f"unknown dimension: {dimension!r}")


def _distribution_types(corpus) -> DistributionTable:
    groups = _row_groups(corpus)
    cells = {}
    denoms = {}
    for row, instances in groups.items():
        denoms[row] = len(instances)
        for col, n in _type_cells(instances).items():
            cells[(row, col)] = n
    return DistributionTable(
        title="Instance types",
        columns=TYPE_COLUMNS,
        rows=tuple(groups),
        cells=cells,
        denominators=denoms,
    )


def _clue_types_of(inst: Instance) -> set[str]:
    if inst.taxonomy is None:
        return set()
    return {mark.type for mark in inst.taxonomy.clues}


def _distribution_clues(corpus) -> DistributionTable:
    """Clue-type counts among with-clue-word questions (multi-membership)."""
    groups = _row_groups(corpus)
    cells = {}
    denoms = {}
    for row, instances in groups.items():
        with_clue = [i for i in instances if i.taxonomy is not None and i.taxonomy.with_clues]
        denoms[row] = len(with_clue)
        for col in CLUE_TYPES:
            cells[(row, col)] = sum(1 for i in with_clue if col in _clue_types_of(i))
    return DistributionTable(
        title="Clue word types (among with-clue-word questions)",
        columns=CLUE_TYPES,
        rows=tuple(groups),
        cells=cells,
        denominators=denoms,
    )


def _counts_by_type(corpus) -> DistributionTable:
    """Answer-count buckets crossed with taxonomy columns, rows per dataset+bucket."""
    groups = _row_groups(corpus)
    columns = TYPE_COLUMNS
    cells = {}
    denoms = {}
    rows = []
    for group, instances in groups.items():
        for bucket in COUNT_BUCKETS:
            row = f"{group} #Ans {bucket}"
            rows.append(row)
            in_bucket = [i for i in instances if _bucket(len(i.gold)) == bucket]
            denoms[row] = len(in_bucket)
            for col, n in _type_cells(in_bucket).items():
                cells[(row, col)] = n
    return DistributionTable(
        title="Instance types by number of answers",
        columns=columns,
        rows=tuple(rows),
        cells=cells,
        denominators=denoms,
    )


def _counts_by_clue(corpus) -> DistributionTable:
    groups = _row_groups(corpus)
    cells = {}
    denoms = {}
    rows = []
    for group, instances in groups.items():
        for bucket in COUNT_BUCKETS:
            row = f"{group} #Ans {bucket}"
            rows.append(row)
            in_bucket = [
                i
                for i in instances
                if _bucket(len(i.gold)) == bucket
                and i.taxonomy is not None
                and i.taxonomy.with_clues
            ]
            denoms[row] = len(in_bucket)
            for col in CLUE_TYPES:
                cells[(row, col)] = sum(1 for i in in_bucket if col in _clue_types_of(i))
    return DistributionTable(
        title="Clue word types by number of answers",
        columns=CLUE_TYPES,
        rows=tuple(rows),
        cells=cells,
        denominators=denoms,
    )


@dataclass(frozen=True)
class CorpusStats:
    """Token-based corpus statistics (lengths are raw whitespace tokens)."""

    n_instances: int
    mean_question_len: float
    mean_context_len: float
    mean_answer_len: float
    mean_answers: float
    mean_answers_multi: float | None
    mean_answer_distance: float | None
    n_distance_excluded: int

    def to_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "mean_question_len": self.mean_question_len,
            "mean_context_len": self.mean_context_len,
            "mean_answer_len": self.mean_answer_len,
            "mean_answers": self.mean_answers,
            "mean_answers_multi": self.mean_answers_multi,
            "mean_answer_distance": self.mean_answer_distance,
            "n_distance_excluded": self.n_distance_excluded,
        }


def corpus_stats(corpus) -> CorpusStats:
    """Length/count/distance means over a corpus.

    The inter-answer distance is the token gap between one grounded span's end
    and the next span's start, pooled over adjacent pairs of every
    multi-answer instance whose spans are all grounded; instances with
    ungrounded spans are excluded from the mean and counted.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty corpus")
    q_total = c_total = 0
    answer_lens: list[int] = []
    counts: list[int] = []
    gaps: list[int] = []
    excluded = 0
    for inst in corpus:
        q_total += len(inst.question.tokens)
        c_total += len(inst.passage.tokens)
        counts.append(len(inst.gold))
        for span in inst.gold.spans:
            answer_lens.append(len(tokenize(span.text).tokens))
        if len(inst.gold) >= 2:
            ranges = [s.token_range for s in inst.gold.spans]
            if any(r is None for r in ranges):
                excluded += 1
                continue
            ordered = sorted(ranges)
            for (s1, e1), (s2, e2) in zip(ordered, ordered[1:]):
                gaps.append(max(0, s2 - e1))
    multi = [c for c in counts if c >= 2]
    return CorpusStats(
        n_instances=len(corpus),
        mean_question_len=q_total / len(corpus),
        mean_context_len=c_total / len(corpus),
        mean_answer_len=sum(answer_lens) / len(answer_lens),
        mean_answers=sum(counts) / len(counts),
        mean_answers_multi=sum(multi) / len(multi) if multi else None,
        mean_answer_distance=sum(gaps) / len(gaps) if gaps else None,
        n_distance_excluded=excluded,
    )


BREAKDOWN_STRATA = (
    "all",
    "passage_dependent",
    "question_dependent",
    "with_clue_words",
    "without_clue_words",
    "bad_annotation",
    "unlabeled",
)


def _strata_of(inst: Instance) -> set[str]:
    strata = {"all"}
    label = inst.taxonomy
    if label is None:
        strata.add("unlabeled")
    elif label.kind == KIND_PASSAGE_DEPENDENT:
        strata.add("passage_dependent")
    elif label.kind == KIND_BAD_ANNOTATION:
        strata.add("bad_annotation")
    else:
        strata.add("question_dependent")
        strata.add("with_clue_words" if label.clues else "without_clue_words")
    return strata


def breakdown_report(corpus, predictions, mode: str = "token") -> dict[str, ScoreReport | None]:
    """Score reports per taxonomy stratum (micro-averaging confined to each).

    predictions: {instance_id: [span text, ...]}. Empty strata map to None.
    """
    by_stratum: dict[str, list] = {s: [] for s in BREAKDOWN_STRATA}
    for inst in corpus:
        score = score_question(
            predictions.get(inst.id, []), inst.gold.texts(), mode=mode
        )
        for stratum in _strata_of(inst):
            by_stratum[stratum].append(score)
    return {
        stratum: corpus_report(scores) if scores else None
        for stratum, scores in by_stratum.items()
    }


# ---------------------------------------------------------------------------
# rendering


def _fmt_cell(count: int, pct: float) -> str:
    return f"{count:,} ({pct:.1f}%)"


def render_distribution(table: DistributionTable) -> str:
    """Aligned text table with "count (pct%)" cells."""
    header = [table.title] + [str(c) for c in table.columns] + ["n"]
    body = []
    for row in table.rows:
        cells = [_fmt_cell(table.count(row, c), table.pct(row, c)) for c in table.columns]
        body.append([row] + cells + [f"{table.denominators.get(row, 0):,}"])
    widths = [
        max(len(line[i]) for line in [header] + body) for i in range(len(header))
    ]
    lines = []
    for line in [header] + body:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            ).rstrip()
        )
    lines.insert(1, "-" * max(len(l) for l in lines))
    return "\n".join(lines) + "\n"


def distribution_to_json(tables) -> str:
    out = []
    for t in tables:
        out.append(
            {
                "title": t.title,
                "columns": list(t.columns),
                "rows": [
                    {
                        "row": row,
                        "n": t.denominators.get(row, 0),
                        "cells": {c: t.count(row, c) for c in t.columns},
                    }
                    for row in t.rows
                ],
            }
        )
    return json.dumps(out, indent=2, ensure_ascii=False)


def distribution_to_csv(tables) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for t in tables:
        writer.writerow([t.title])
        writer.writerow(["row", "n"] + [str(c) for c in t.columns])
        for row in t.rows:
            writer.writerow(
                [row, t.denominators.get(row, 0)]
                + [t.count(row, c) for c in t.columns]
            )
    return buf.getvalue()


def stats_to_csv(stats_by_group: dict[str, CorpusStats]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fields = [
        "group", "n_instances", "mean_question_len", "mean_context_len",
        "mean_answer_len", "mean_answers", "mean_answers_multi",
        "mean_answer_distance", "n_distance_excluded",
    ]
    writer.writerow(fields)
    for group, s in stats_by_group.items():
        d = s.to_dict()
        writer.writerow([group] + [d[f] if d[f] is not None else "" for f in fields[1:]])
    return buf.getvalue()


def scores_to_csv(reports: dict[str, ScoreReport | None]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stratum", "em_p", "em_r", "em_f1", "pm_p", "pm_r", "pm_f1", "n"])
    for name, r in reports.items():
        if r is None:
            writer.writerow([name, "", "", "", "", "", "", 0])
        else:
            writer.writerow(
                [
                    name,
                    f"{r.em.precision:.2f}", f"{r.em.recall:.2f}", f"{r.em.f1:.2f}",
                    f"{r.pm.precision:.2f}", f"{r.pm.recall:.2f}", f"{r.pm.f1:.2f}",
                    r.n_questions,
                ]
            )
    return buf.getvalue()


def render_score_table(reports: dict[str, ScoreReport | None]) -> str:
    """P/R/F1 table, one row per label, EM block then PM block."""
    header = ["", "EM P", "EM R", "EM F1", "PM P", "PM R", "PM F1", "n"]
    body = []
    for name, report in reports.items():
        if report is None:
            body.append([name, "-", "-", "-", "-", "-", "-", "0"])
            continue
        body.append(
            [name]
            + [
                f"{v:.2f}"
                for v in (
                    report.em.precision,
                    report.em.recall,
                    report.em.f1,
                    report.pm.precision,
                    report.pm.recall,
                    report.pm.f1,
                )
            ]
            + [str(report.n_questions)]
        )
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = []
    for line in [header] + body:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            ).rstrip()
        )
    lines.insert(1, "-" * max(len(l) for l in lines))
    return "\n".join(lines) + "\n"


def render_stats(stats_by_group: dict[str, CorpusStats]) -> str:
    rows = (
        ("Instances", lambda s: f"{s.n_instances:,}"),
        ("Length of Question", lambda s: f"{s.mean_question_len:.1f}"),
        ("Length of Context", lambda s: f"{s.mean_context_len:.1f}"),
        ("Length of Answer", lambda s: f"{s.mean_answer_len:.1f}"),
        ("#Answers", lambda s: f"{s.mean_answers:.1f}"),
        ("#Answers (Multi)", lambda s: "-" if s.mean_answers_multi is None else f"{s.mean_answers_multi:.1f}"),
        ("Distance Between Ans.", lambda s: "-" if s.mean_answer_distance is None else f"{s.mean_answer_distance:.1f}"),
        ("Distance Excluded", lambda s: f"{s.n_distance_excluded:,}"),
    )
    groups = list(stats_by_group)
    header = [""] + groups
    body = [[name] + [fmt(stats_by_group[g]) for g in groups] for name, fmt in rows]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = []
    for line in [header] + body:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            ).rstrip()
        )
    lines.insert(1, "-" * max(len(l) for l in lines))
    return "\n".join(lines) + "\n"
