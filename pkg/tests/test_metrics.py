import random

import pytest

from maqa.lcs import lcs_len
from maqa.metrics import (
    PartialScorePair,
    corpus_report,
    evaluate,
    partial_scores,
    score_question,
)


def lcs_brute(a, b):
    """Independent oracle: enumerate every contiguous substring pair."""
    subs = {tuple(a[i:j]) for i in range(len(a)) for j in range(i + 1, len(a) + 1)}
    best = 0
    for i in range(len(b)):
        for j in range(i + 1, len(b) + 1):
            if j - i > best and tuple(b[i:j]) in subs:
                best = j - i
    return best


class TestLcsLen:
    def test_identity(self):
        seq = ["a", "b", "c", "d", "e"]
        assert lcs_len(seq, seq) == 5

    def test_partial_overlap(self):
        a = ["official", "language"]
        b = ["official", "languages", "of", "puerto", "rico"]
        assert lcs_brute(a, b) == 1
        assert lcs_len(a, b) == 1

    def test_disjoint(self):
        assert lcs_len(["x", "y"], ["p", "q"]) == 0

    def test_empty(self):
        assert lcs_len([], ["a"]) == 0
        assert lcs_len(["a"], []) == 0

    def test_matches_brute_force(self):
        rng = random.Random(7)
        vocab = list("abcdef")
        for _ in range(300):
            a = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
            b = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
            assert lcs_len(a, b) == lcs_brute(a, b), (a, b)

    def test_symmetry(self):
        rng = random.Random(11)
        vocab = ["w1", "w2", "w3"]
        for _ in range(200):
            a = [rng.choice(vocab) for _ in range(rng.randint(0, 10))]
            b = [rng.choice(vocab) for _ in range(rng.randint(0, 10))]
            assert lcs_len(a, b) == lcs_len(b, a)

    def test_backends_agree(self):
        from maqa import _lcs_py
        from maqa.lcs import _impl

        rng = random.Random(13)
        for _ in range(200):
            a = [rng.randint(0, 5) for _ in range(rng.randint(0, 15))]
            b = [rng.randint(0, 5) for _ in range(rng.randint(0, 15))]
            assert _impl.lcs_len_ids(a, b) == _lcs_py.lcs_len_ids(a, b)


class TestPartialScores:
    def test_exact(self):
        pair = partial_scores("English", "English")
        assert (pair.s_ret, pair.s_rel) == (1.0, 1.0)

    def test_ratio_pair(self):
        pair = partial_scores("official language", "official languages of Puerto Rico")
        assert pair.s_ret == pytest.approx(1 / 2)
        assert pair.s_rel == pytest.approx(1 / 5)

    def test_contiguous_half(self):
        pair = partial_scores("puerto rico", "languages of puerto rico")
        assert pair.s_ret == pytest.approx(1.0)
        assert pair.s_rel == pytest.approx(1 / 2)

    def test_empty_normalized_is_zero(self):
        assert partial_scores("the", "English") == PartialScorePair(0.0, 0.0)
        assert partial_scores("English", "...") == PartialScorePair(0.0, 0.0)

    def test_char_mode(self):
        pair = partial_scores("abcd", "ab", mode="char")
        assert pair.s_ret == pytest.approx(1 / 2)
        assert pair.s_rel == pytest.approx(1.0)


class TestScoreQuestion:
    def test_perfect(self):
        s = score_question(["English", "French"], ["English", "French"])
        assert (s.em_matched, s.pm_ret_sum, s.pm_rel_sum) == (2, 2.0, 2.0)

    def test_half_recall(self):
        s = score_question(["English"], ["English", "French"])
        assert s.em_matched == 1
        assert s.pm_ret_sum == pytest.approx(1.0)
        assert s.pm_rel_sum == pytest.approx(1.0)

    def test_duplicate_prediction_asymmetry(self):
        s = score_question(["English", "English"], ["English"])
        assert s.em_matched == 1
        assert s.pm_ret_sum == pytest.approx(2.0)
        assert s.pm_rel_sum == pytest.approx(1.0)

    def test_empty_predictions(self):
        s = score_question([], ["English"])
        assert (s.em_matched, s.n_pred, s.pm_ret_sum, s.pm_rel_sum) == (0, 0, 0.0, 0.0)

    def test_empty_gold_rejected(self):
        with pytest.raises(ValueError):
            score_question(["x"], [])

    def test_em_is_normalized(self):
        s = score_question(["the patriots!"], ["Patriots"])
        assert s.em_matched == 1

    def test_permutation_invariance(self):
        rng = random.Random(3)
        preds = ["alpha beta", "gamma", "delta epsilon zeta"]
        golds = ["beta", "delta epsilon", "eta"]
        base = score_question(preds, golds)
        for _ in range(10):
            p, g = preds[:], golds[:]
            rng.shuffle(p)
            rng.shuffle(g)
            assert score_question(p, g) == base


class TestCorpusReport:
    def test_all_perfect(self):
        scores = [score_question(["a b"], ["a b"]) for _ in range(5)]
        r = corpus_report(scores)
        for triple in (r.em, r.pm):
            assert (triple.precision, triple.recall, triple.f1) == (100.0, 100.0, 100.0)

    def test_duplicate_fixture(self):
        r = corpus_report([score_question(["English", "English"], ["English"])])
        assert r.em.precision == pytest.approx(50.0)
        assert r.em.recall == pytest.approx(100.0)
        assert r.em.f1 == pytest.approx(66.67, abs=0.01)
        assert (r.pm.precision, r.pm.recall, r.pm.f1) == (100.0, 100.0, 100.0)

    def test_micro_average_two_questions(self):
        scores = [
            score_question(["x"], ["x"]),
            score_question([], ["y"]),
        ]
        r = corpus_report(scores)
        assert r.em.precision == pytest.approx(100.0)
        assert r.em.recall == pytest.approx(50.0)
        assert r.em.f1 == pytest.approx(66.67, abs=0.01)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            corpus_report([])

    def test_zero_precision_denominator(self):
        r = corpus_report([score_question([], ["x"])])
        assert r.em.precision == 0.0
        assert r.em.f1 == 0.0


def random_eval_case(rng):
    vocab = ["red", "green", "blue", "one", "two", "three", "the", "a", ".."]
    golds = []
    seen = set()
    for _ in range(rng.randint(1, 4)):
        g = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
        from maqa.core import normalize

        if normalize(g) not in seen:
            seen.add(normalize(g))
            golds.append(g)
    if not golds:
        golds = ["red"]
    preds = [
        " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 4)))
        for _ in range(rng.randint(0, 5))
    ]
    return preds, golds


class TestDominance:
    def test_pm_dominates_em_on_fuzzed_corpora(self):
        rng = random.Random(42)
        for _ in range(60):
            scores = [
                score_question(*random_eval_case(rng))
                for _ in range(rng.randint(1, 30))
            ]
            r = corpus_report(scores)
            assert r.pm.precision >= r.em.precision - 1e-9
            assert r.pm.recall >= r.em.recall - 1e-9
            assert r.pm.f1 >= r.em.f1 - 1e-9

    def test_bounds(self):
        rng = random.Random(17)
        for _ in range(40):
            scores = [score_question(*random_eval_case(rng)) for _ in range(5)]
            r = corpus_report(scores)
            for v in (
                r.em.precision, r.em.recall, r.em.f1,
                r.pm.precision, r.pm.recall, r.pm.f1,
            ):
                assert 0.0 <= v <= 100.0


class TestEvaluate:
    def test_missing_predictions_count_as_empty(self, tiny_corpus):
        r = evaluate(tiny_corpus, {"q0": ["English", "French"]})
        assert r.n_questions == 2
        assert r.em.recall == pytest.approx(100 * 2 / 3)

    def test_perfect_run(self, tiny_corpus):
        preds = {i.id: i.gold.texts() for i in tiny_corpus}
        r = evaluate(tiny_corpus, preds)
        assert r.em.f1 == 100.0 and r.pm.f1 == 100.0
