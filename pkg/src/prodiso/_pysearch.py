"""Pure-Python backtracking kernel (fallback for the compiled ``_csearch``).

Finds injective maps f from pattern rows to target rows such that
``target[f(i), f(j)] == pattern[i, j]`` for all i != j (both matrices symmetric), with f(i) drawn from
the rows of ``allowed``. Solutions come out in lexicographic order of
``(f(0), f(1), ...)``. Diagonal entries are the caller's business;
:func:`prodiso.search.find_maps` folds them into ``allowed``.
"""

BACKEND = "python"


def search(pattern, target, allowed, limit=-1, node_cap=-1):
    """Return ``(solutions, nodes, capped)``.

    ``limit < 0`` means collect every solution; ``node_cap < 0`` means no
    cap. ``nodes`` counts consistent partial assignments.
    """
    n_pat = len(pattern)
    if n_pat == 0:
        return [()], 0, False
    pat = [list(map(int, row)) for row in pattern]
    tgt = [list(map(int, row)) for row in target]
    cands = [[c for c, ok in enumerate(row) if ok] for row in allowed]

    assign = [-1] * n_pat
    used = [False] * len(tgt)
    cursor = [0] * (n_pat + 1)
    solutions = []
    nodes = 0
    level = 0
    while level >= 0:
        if level == n_pat:
            solutions.append(tuple(assign))
            if 0 <= limit <= len(solutions):
                return solutions, nodes, False
            level -= 1
            used[assign[level]] = False
            assign[level] = -1
            continue
        row = pat[level]
        options = cands[level]
        pos = cursor[level]
        chosen = -1
        while pos < len(options):
            c = options[pos]
            pos += 1
            if used[c]:
                continue
            trow = tgt[c]
            for j in range(level):
                if trow[assign[j]] != row[j]:
                    break
            else:
                chosen = c
                break
        cursor[level] = pos
        if chosen < 0:
            cursor[level] = 0
            level -= 1
            if level >= 0:
                used[assign[level]] = False
                assign[level] = -1
            continue
        nodes += 1
        if 0 <= node_cap < nodes:
            return solutions, nodes, True
        assign[level] = chosen
        used[chosen] = True
        level += 1
        cursor[level] = 0
    return solutions, nodes, False
