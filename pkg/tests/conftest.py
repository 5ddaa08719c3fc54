import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from prodiso.metric import MetricSpace, discrete_space, path_graph
from prodiso.product import ProductSpace
from prodiso.search import BACKENDS


def naive_isometries(dist_a, dist_b):
    """All bijections preserving distances, by trying every permutation."""
    n = len(dist_a)
    if n != len(dist_b):
        return []
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for perm in itertools.permutations(range(n)):
        if all(dist_b[perm[i]][perm[j]] == dist_a[i][j] for i, j in pairs):
            out.append(perm)
    return out


def sup_matrix(sizes, step=1):
    pts = list(itertools.product(*(range(s) for s in sizes)))
    return pts, [[max(abs(a - b) for a, b in zip(p, q)) * step for q in pts] for p in pts]


def naive_quad_embeds(m, sizes, r=1, order="signs-first"):
    """Does Q^m_r embed isometrically on vertices into the grid of ``sizes``?

    Plain backtracking with no candidate pruning; vertex order differs from
    the library's so the two searches do not share a failure mode.
    """
    e = []
    for i in range(m):
        for s in (2, -2):
            v = [0] * m
            v[i] = s * r
            e.append(tuple(v))
    signs = [tuple(r * x for x in s) for s in itertools.product((-1, 1), repeat=m)]
    verts = signs + e if order == "signs-first" else e + signs
    grid = list(itertools.product(*(range(s) for s in sizes)))

    def sup(a, b):
        return max(abs(x - y) for x, y in zip(a, b))

    img = []

    def bt(i):
        if i == len(verts):
            return True
        for p in grid:
            if p in img:
                continue
            if all(sup(p, img[j]) == sup(verts[i], verts[j]) for j in range(i)):
                img.append(p)
                if bt(i + 1):
                    return True
                img.pop()
        return False

    return bt(0)


def max_equidistant_set(sizes, d, stop=None):
    """Largest set of grid points at pairwise sup distance exactly ``d``.

    Plain clique search over increasing indices; ``stop`` ends it early once
    a set of that size is found.
    """
    grid = list(itertools.product(*(range(s) for s in sizes)))

    def sup(a, b):
        return max(abs(x - y) for x, y in zip(a, b))

    best = 0

    def grow(chosen, start):
        nonlocal best
        best = max(best, len(chosen))
        if stop is not None and best >= stop:
            return
        for i in range(start, len(grid)):
            p = grid[i]
            if all(sup(p, q) == d for q in chosen):
                grow(chosen + [p], i + 1)

    grow([], 0)
    return best


@st.composite
def metric_spaces(draw, min_size=1, max_size=6, max_weight=4):
    """Shortest-path metrics of random complete graphs with integer weights."""
    n = draw(st.integers(min_size, max_size))
    w = [[0] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        w[i][j] = w[j][i] = draw(st.integers(1, max_weight))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if w[i][k] + w[k][j] < w[i][j]:
                    w[i][j] = w[i][k] + w[k][j]
    dist = tuple(tuple(Fraction(v) for v in row) for row in w)
    return MetricSpace("rand", tuple(str(i) for i in range(n)), dist)


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture
def p5():
    return path_graph(5)


@pytest.fixture
def p3xp3():
    return ProductSpace((path_graph(3), path_graph(3)))


@pytest.fixture
def two_point_sq():
    return ProductSpace((discrete_space(2), discrete_space(2)))
