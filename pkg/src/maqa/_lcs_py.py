"""Pure-Python longest-common-substring kernel (fallback for the C extension)."""


def lcs_len_ids(a: list[int], b: list[int]) -> int:
    """Length of the longest contiguous common run between two id sequences.

    Rolling single-row dynamic program, O(len(a) * len(b)) time, O(len(b)) space.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    if n < m:  # iterate over the shorter row
        a, b = b, a
        n, m = m, n
    best = 0
    row = [0] * (m + 1)
    for i in range(n):
        ai = a[i]
        prev = 0  # row[j] from the previous i (the diagonal)
        for j in range(m):
            cur = row[j + 1]
            if ai == b[j]:
                v = prev + 1
                row[j + 1] = v
                if v > best:
                    best = v
            else:
                row[j + 1] = 0
            prev = cur
    return best
