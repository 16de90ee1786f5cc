#!/usr/bin/env python3
"""Benchmark: compiled LCS kernel vs the pure-Python fallback.

The token-LCS dynamic program runs once per prediction/gold pair during
partial-match scoring, which makes it the hot loop of corpus evaluation.
Run after `pip install -e . --no-build-isolation`:

    python benchmarks/bench_lcs.py
"""

import random
import time

from maqa import _lcs_py
from maqa.lcs import LCS_BACKEND

try:
    from maqa import _lcs_c
except ImportError:
    _lcs_c = None

WORKLOADS = (
    ("short spans (answer-sized, len 2-8)", 2, 8, 40_000),
    ("medium spans (len 10-40)", 10, 40, 8_000),
    ("long spans (len 50-200)", 50, 200, 400),
)


def make_pairs(rng, lo, hi, n_pairs, vocab=50):
    pairs = []
    for _ in range(n_pairs):
        a = [rng.randrange(vocab) for _ in range(rng.randint(lo, hi))]
        b = [rng.randrange(vocab) for _ in range(rng.randint(lo, hi))]
        pairs.append((a, b))
    return pairs


def bench(kernel, pairs):
    start = time.perf_counter()
    checksum = 0
    for a, b in pairs:
        checksum += kernel(a, b)
    return time.perf_counter() - start, checksum


def main():
    print(f"selected backend at import: {LCS_BACKEND}")
    if _lcs_c is None:
        print("compiled kernel not built; benchmarking pure Python only")
    rng = random.Random(12345)
    header = f"{'workload':<38}{'pairs':>8}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, lo, hi, n_pairs in WORKLOADS:
        pairs = make_pairs(rng, lo, hi, n_pairs)
        py_time, py_sum = bench(_lcs_py.lcs_len_ids, pairs)
        if _lcs_c is not None:
            c_time, c_sum = bench(_lcs_c.lcs_len_ids, pairs)
            assert py_sum == c_sum, "kernels disagree"
            print(
                f"{name:<38}{n_pairs:>8}{py_time:>11.3f}s{c_time:>11.3f}s"
                f"{py_time / c_time:>9.1f}x"
            )
        else:
            print(f"{name:<38}{n_pairs:>8}{py_time:>11.3f}s{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
