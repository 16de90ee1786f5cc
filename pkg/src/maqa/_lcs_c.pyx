# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled longest-common-substring kernel over integer id sequences."""

from libc.stdlib cimport free, malloc


def lcs_len_ids(a, b):
    """Length of the longest contiguous common run between two id sequences."""
    cdef Py_ssize_t n = len(a)
    cdef Py_ssize_t m = len(b)
    if n == 0 or m == 0:
        return 0

    cdef long *aa = <long *> malloc(n * sizeof(long))
    cdef long *bb = <long *> malloc(m * sizeof(long))
    cdef long *row = <long *> malloc((m + 1) * sizeof(long))
    if aa == NULL or bb == NULL or row == NULL:
        free(aa)
        free(bb)
        free(row)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef long best = 0, prev, cur, v
    try:
        for i in range(n):
            aa[i] = a[i]
        for j in range(m):
            bb[j] = b[j]
        for j in range(m + 1):
            row[j] = 0
        for i in range(n):
            prev = 0
            for j in range(m):
                cur = row[j + 1]
                if aa[i] == bb[j]:
                    v = prev + 1
                    row[j + 1] = v
                    if v > best:
                        best = v
                else:
                    row[j + 1] = 0
                prev = cur
    finally:
        free(aa)
        free(bb)
        free(row)
    return best
