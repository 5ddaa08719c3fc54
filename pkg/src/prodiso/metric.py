"""Finite metric spaces with exact rational distances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import AxiomViolation, InvalidChain, ResolutionMismatch, ShapeError
from .rational import common_scale, divides, rat_gcd, to_rat

#: Upper bound on points accepted by :func:`validate` unless overridden.
DEFAULT_MAX_POINTS = 64

_INT64_SAFE = 2**62


def integer_matrix(rows, scale):
    """Scale a rational matrix to integers, as int64 when it fits."""
    ints = [[int(v * scale) for v in row] for row in rows]
    peak = max((abs(v) for row in ints for v in row), default=0)
    if peak < _INT64_SAFE:
        return np.array(ints, dtype=np.int64).reshape(len(ints), len(ints))
    return np.array(ints, dtype=object).reshape(len(ints), len(ints))


@dataclass(frozen=True)
class MetricSpace:
    """A labeled finite metric space.

    Build instances through :func:`validate` (or the generators below); the
    constructor itself does not check the axioms.
    """

    name: str
    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    @property
    def size(self):
        return len(self.labels)

    def distance(self, i, j):
        return self.dist[i][j]

    def label(self, i):
        return self.labels[i]

    def index_of(self, label):
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"{label!r} is not a point of {self.name}") from None

    @cached_property
    def _label_index(self):
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def scale(self):
        return common_scale(v for row in self.dist for v in row)

    @cached_property
    def int_dist(self):
        """Distances multiplied by :attr:`scale`, as an integer array."""
        m = integer_matrix(self.dist, self.scale)
        m.setflags(write=False)
        return m

    def scaled(self, scale=None):
        """Integer distance matrix at ``scale`` (a multiple of :attr:`scale`)."""
        if scale is None or scale == self.scale:
            return self.int_dist
        return integer_matrix(self.dist, scale)

    def __repr__(self):
        return f"MetricSpace({self.name!r}, {self.size} points)"


def _check_axioms(labels, dist):
    n = len(labels)
    for i in range(n):
        if dist[i][i] != 0:
            raise AxiomViolation("nonzero-diagonal", (labels[i],))
    for i in range(n):
        for j in range(n):
            if dist[i][j] < 0:
                raise AxiomViolation("negative", (labels[i], labels[j]))
    for i, j in combinations(range(n), 2):
        if dist[i][j] != dist[j][i]:
            raise AxiomViolation("asymmetry", (labels[i], labels[j]))
        if dist[i][j] == 0:
            raise AxiomViolation("zero-off-diagonal", (labels[i], labels[j]))
    if n < 3:
        return
    d = integer_matrix(dist, common_scale(v for row in dist for v in row))
    for mid in range(n):
        # d(x, z) > d(x, mid) + d(mid, z)
        bad = d > d[:, mid, None] + d[None, mid, :]
        if bad.any():
            x, z = map(int, np.argwhere(bad)[0])
            raise AxiomViolation("triangle", (labels[x], labels[z], labels[mid]))


def validate(labels, matrix, name="space", max_points=DEFAULT_MAX_POINTS):
    """Check a labeled distance matrix and return it as a :class:`MetricSpace`.

    Entries may be ints, Fractions or ``"p/q"`` strings.
    """
    labels = tuple(str(lab) for lab in labels)
    n = len(labels)
    if n == 0:
        raise ShapeError("a metric space needs at least one point")
    if len(set(labels)) != n:
        raise ShapeError("point labels must be distinct")
    if max_points is not None and n > max_points:
        raise ShapeError(f"{n} points exceeds the configured cap of {max_points}")
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise ShapeError(f"distance matrix must be {n}x{n}")
    dist = tuple(tuple(to_rat(v) for v in row) for row in matrix)
    _check_axioms(labels, dist)
    return MetricSpace(name, labels, dist)


def path_graph(n, step=1, name=None):
    """Points 0..n-1 on a line, ``d(i, j) = |i - j| * step``."""
    step = to_rat(step)
    if n < 1 or step <= 0:
        raise ValueError("path_graph needs n >= 1 and step > 0")
    dist = tuple(tuple(abs(i - j) * step for j in range(n)) for i in range(n))
    if name is None:
        name = f"P{n}" if step == 1 else f"P{n}[{step}]"
    return MetricSpace(name, tuple(str(i) for i in range(n)), dist)


def cycle_graph(n, name=None):
    """Shortest-path metric of the n-cycle with unit edges."""
    if n < 3:
        raise ValueError("cycle_graph needs n >= 3")
    dist = tuple(
        tuple(Fraction(min(abs(i - j), n - abs(i - j))) for j in range(n)) for i in range(n)
    )
    return MetricSpace(name or f"C{n}", tuple(str(i) for i in range(n)), dist)


def discrete_space(n, name=None):
    """n points at mutual distance 1 (the two-point space for n = 2)."""
    if n < 1:
        raise ValueError("discrete_space needs n >= 1")
    one, zero = Fraction(1), Fraction(0)
    dist = tuple(tuple(zero if i == j else one for j in range(n)) for i in range(n))
    return MetricSpace(name or f"K{n}", tuple(str(i) for i in range(n)), dist)


def natural_resolution(space):
    """Largest step dividing every distance of the space (0 for a point)."""
    return rat_gcd(v for row in space.dist for v in row)


def betweenness(space, x, y):
    """All z with ``d(x, z) + d(z, y) = d(x, y)``."""
    d = space.dist
    total = d[x][y]
    return frozenset(z for z in range(space.size) if d[x][z] + d[z][y] == total)


def is_uniquely_geodesic_pair(space, x, y, resolution):
    """Discrete unique-geodesic test at a fixed resolution.

    True iff the betweenness set of (x, y) has exactly one point at each
    multiple of ``resolution`` in ``[0, d(x, y)]`` and is totally ordered by
    distance from x (the chain condition).
    """
    resolution = to_rat(resolution)
    if resolution <= 0:
        raise ResolutionMismatch("resolution must be positive")
    d = space.dist
    total = d[x][y]
    if not divides(resolution, total):
        raise ResolutionMismatch(f"resolution {resolution} does not divide d = {total}")
    between = betweenness(space, x, y)
    counts = {}
    for z in between:
        counts[d[x][z]] = counts.get(d[x][z], 0) + 1
    steps = int(total / resolution)
    for s in range(steps + 1):
        if counts.get(s * resolution, 0) != 1:
            return False
    for z, w in combinations(between, 2):
        if abs(d[x][z] - d[x][w]) != d[z][w]:
            return False
    return True


def is_uniquely_geodesic(space, resolution):
    """Every pair of points is uniquely geodesic at ``resolution``."""
    for x, y in combinations(range(space.size), 2):
        if not divides(resolution, space.dist[x][y]):
            return False
        if not is_uniquely_geodesic_pair(space, x, y, resolution):
            return False
    return True


def is_harness_factor(space, resolution=None):
    """Desk-scale stand-in for a path-connected, uniquely geodesic non-point.

    The space must have at least two points, every pair must be uniquely
    geodesic at ``resolution`` (default: the natural resolution), and some
    geodesic must have an interior point. The last clause rejects spaces such
    as the two-point space whose geodesics are bare jumps.
    """
    if space.size < 2:
        return False
    if resolution is None:
        resolution = natural_resolution(space)
    if not is_uniquely_geodesic(space, resolution):
        return False
    return any(
        len(betweenness(space, x, y)) > 2 for x, y in combinations(range(space.size), 2)
    )


@dataclass(frozen=True)
class GeodesicChain:
    """Points of a discrete geodesic from ``endpoints[0]`` to ``endpoints[1]``.

    ``parameters[i]`` is the distance of ``chain[i]`` from the first endpoint.
    """

    space: MetricSpace
    endpoints: tuple[int, int]
    chain: tuple[int, ...]
    parameters: tuple[Fraction, ...]

    def __post_init__(self):
        d = self.space.dist
        x, y = self.endpoints
        if len(self.chain) != len(self.parameters) or not self.chain:
            raise InvalidChain("chain and parameters must be nonempty and aligned")
        if self.chain[0] != x or self.chain[-1] != y:
            raise InvalidChain("chain must start and end at the endpoints")
        if self.parameters[0] != 0 or self.parameters[-1] != d[x][y]:
            raise InvalidChain("parameters must run from 0 to d(endpoints)")
        for (z, s), (w, t) in zip(
            zip(self.chain, self.parameters), zip(self.chain[1:], self.parameters[1:])
        ):
            if t <= s:
                raise InvalidChain("parameters must be strictly increasing")
            if d[z][w] != t - s:
                raise InvalidChain(f"d({z}, {w}) != {t - s}")
        for z, s in zip(self.chain, self.parameters):
            if d[x][z] != s or d[x][z] + d[z][y] != d[x][y]:
                raise InvalidChain(f"point {z} is not between the endpoints")

    @property
    def length(self):
        return self.parameters[-1]

    def at(self, t):
        """Chain point at parameter t, or None."""
        for z, s in zip(self.chain, self.parameters):
            if s == t:
                return z
        return None


def geodesic_chain(space, x, y):
    """The betweenness set of (x, y) as a :class:`GeodesicChain`.

    Raises :class:`InvalidChain` when that set is not a single chain, e.g.
    for antipodal points of an even cycle.
    """
    d = space.dist
    pts = sorted(betweenness(space, x, y), key=lambda z: (d[x][z], z))
    return GeodesicChain(space, (x, y), tuple(pts), tuple(d[x][z] for z in pts))
