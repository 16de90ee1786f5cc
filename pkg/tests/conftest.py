"""Shared corpus-building helpers for the test suite."""

import os
import random
from pathlib import Path

import pytest

from maqa.core import AnswerSet, Instance, make_span, tokenize

GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

# filled by the acceptance suite; printed after the run by the hook below
CRITERION_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(CRITERION_RESULTS):
            terminalreporter.write_line(CRITERION_RESULTS[num])


class _Golden:
    """Golden-file comparison; set GOLDEN_UPDATE=1 to (re)write the files."""

    def check(self, name: str, actual: str) -> None:
        path = GOLDEN_DIR / name
        if os.environ.get("GOLDEN_UPDATE"):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(actual, encoding="utf-8")
        assert path.exists(), f"golden file missing: {path} (run with GOLDEN_UPDATE=1)"
        assert actual == path.read_text(encoding="utf-8")


@pytest.fixture
def golden():
    return _Golden()


def build_instance(iid, question, passage, answers, dataset="Other", taxonomy=None):
    """Instance whose gold spans are grounded in the passage where possible."""
    passage_tt = tokenize(passage)
    spans = tuple(make_span(passage_tt, a) for a in answers)
    return Instance(
        id=iid,
        dataset=dataset,
        question=tokenize(question),
        passage=passage_tt,
        gold=AnswerSet(spans=spans),
        taxonomy=taxonomy,
    )


_WORDS = (
    "danube river flows through germany austria slovakia hungary croatia serbia "
    "romania bulgaria moldova ukraine english french spanish touchdown quarter "
    "player game score field yard pass season city country language people"
).split()


def random_corpus(rng: random.Random, n_instances: int, max_gold: int = 4):
    """Small random corpus with unique, groundable gold answers per instance."""
    corpus = []
    for i in range(n_instances):
        vocab = rng.sample(_WORDS, k=rng.randint(6, 12))
        n_gold = rng.randint(1, min(max_gold, len(vocab)))
        answers = vocab[:n_gold]
        filler = [rng.choice(_WORDS) for _ in range(rng.randint(3, 8))]
        passage_words = []
        for a in answers:
            passage_words.append(a)
            passage_words.extend(rng.sample(filler, k=min(2, len(filler))))
        passage = " ".join(passage_words)
        question = "what are the " + " ".join(rng.sample(_WORDS, k=3)) + f" q{i}"
        corpus.append(
            build_instance(f"inst{i}", question, passage, answers)
        )
    return corpus


@pytest.fixture
def tiny_corpus():
    return [
        build_instance(
            "q0",
            "What's Canada's official language?",
            "Both English and French , are the official languages of the Government of Canada .",
            ["English", "French"],
        ),
        build_instance(
            "q1",
            "Who won the game?",
            "The Patriots won the game 24-21 over the Eagles .",
            ["Patriots"],
        ),
    ]
