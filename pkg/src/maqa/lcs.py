"""LCS kernel selection: compiled extension when available, pure Python otherwise.

``LCS_BACKEND`` reports which kernel was picked at import time; the benchmark
in benchmarks/bench_lcs.py compares the two.
"""

from maqa import _lcs_py

try:
    from maqa import _lcs_c as _impl

    LCS_BACKEND = "c"
except ImportError:  # extension not built; pure Python is fully equivalent
    _impl = _lcs_py
    LCS_BACKEND = "python"


def lcs_len_ids(a: list[int], b: list[int]) -> int:
    return _impl.lcs_len_ids(a, b)


def lcs_len(a, b) -> int:
    """Longest contiguous common run between two hashable-item sequences."""
    if not a or not b:
        return 0
    ids: dict = {}
    aa = [ids.setdefault(x, len(ids)) for x in a]
    # items absent from `a` can never match; -1 keeps the dict small
    bb = [ids.get(x, -1) for x in b]
    return _impl.lcs_len_ids(aa, bb)
