# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled backtracking kernel; same contract as ``_pysearch.search``."""

import numpy as np

BACKEND = "cython"


def search(pattern, target, allowed, long long limit=-1, long long node_cap=-1):
    cdef Py_ssize_t n_pat = len(pattern)
    if n_pat == 0:
        return [()], 0, False
    cdef const long long[:, ::1] pat = np.ascontiguousarray(pattern, dtype=np.int64)
    cdef const long long[:, ::1] tgt = np.ascontiguousarray(target, dtype=np.int64)
    allowed_arr = np.ascontiguousarray(allowed, dtype=bool)

    # candidate lists per level, flattened with offsets
    counts = allowed_arr.sum(axis=1).astype(np.intp)
    offsets_arr = np.zeros(n_pat + 1, dtype=np.intp)
    np.cumsum(counts, out=offsets_arr[1:])
    cands_arr = np.nonzero(allowed_arr)[1].astype(np.intp)
    cdef const Py_ssize_t[::1] offsets = offsets_arr
    cdef const Py_ssize_t[::1] cands = cands_arr

    cdef Py_ssize_t n_tgt = tgt.shape[0]
    cdef Py_ssize_t[::1] assign = np.full(n_pat, -1, dtype=np.intp)
    cdef unsigned char[::1] used = np.zeros(n_tgt, dtype=np.uint8)
    cdef Py_ssize_t[::1] cursor = np.zeros(n_pat + 1, dtype=np.intp)

    cdef Py_ssize_t level = 0, pos, end, c, chosen, j
    cdef long long nodes = 0
    cdef long long found = 0
    cdef bint ok
    solutions = []

    while level >= 0:
        if level == n_pat:
            solutions.append(tuple([assign[j] for j in range(n_pat)]))
            found += 1
            if limit >= 0 and found >= limit:
                return solutions, nodes, False
            level -= 1
            used[assign[level]] = 0
            assign[level] = -1
            continue
        pos = offsets[level] + cursor[level]
        end = offsets[level + 1]
        chosen = -1
        while pos < end:
            c = cands[pos]
            pos += 1
            if used[c]:
                continue
            ok = True
            for j in range(level):
                if tgt[c, assign[j]] != pat[level, j]:
                    ok = False
                    break
            if ok:
                chosen = c
                break
        cursor[level] = pos - offsets[level]
        if chosen < 0:
            cursor[level] = 0
            level -= 1
            if level >= 0:
                used[assign[level]] = 0
                assign[level] = -1
            continue
        nodes += 1
        if node_cap >= 0 and nodes > node_cap:
            return solutions, nodes, True
        assign[level] = chosen
        used[chosen] = 1
        level += 1
        cursor[level] = 0
    return solutions, nodes, False
