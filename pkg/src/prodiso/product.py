"""Sup-metric products of finite metric spaces and their slices.

Axes are 0-based throughout. A product point is a plain tuple of per-factor
point indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product as cartesian
from math import prod

import numpy as np

from .errors import AxisMismatch, ShapeError, TooSmall
from .metric import MetricSpace, integer_matrix
from .rational import common_scale

ProductPoint = tuple


@dataclass(frozen=True)
class ProductSpace:
    """Ordered factor list carrying the sup metric.

    Points are enumerated in lexicographic order of their coordinate tuples;
    :meth:`index` and :meth:`point` convert between the two views.
    """

    factors: tuple[MetricSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ShapeError("a product needs at least one factor")

    @property
    def m(self):
        return len(self.factors)

    @cached_property
    def shape(self):
        return tuple(f.size for f in self.factors)

    @cached_property
    def size(self):
        return prod(self.shape)

    @cached_property
    def name(self):
        return " x ".join(f.name for f in self.factors)

    @cached_property
    def _strides(self):
        strides = [1] * self.m
        for k in range(self.m - 2, -1, -1):
            strides[k] = strides[k + 1] * self.shape[k + 1]
        return tuple(strides)

    def points(self):
        """All points in flat-index order, as a list."""
        return list(cartesian(*(range(s) for s in self.shape)))

    def check_point(self, p):
        if len(p) != self.m or any(not 0 <= c < s for c, s in zip(p, self.shape)):
            raise ShapeError(f"{p!r} is not a point of {self.name}")
        return tuple(p)

    def index(self, p):
        return sum(c * s for c, s in zip(p, self._strides))

    def point(self, idx):
        coords = []
        for s in self._strides:
            c, idx = divmod(idx, s)
            coords.append(c)
        return tuple(coords)

    def distance(self, i, j):
        """Sup distance between the points with flat indices i and j."""
        return sup_distance(self, self.point(i), self.point(j))

    def label(self, idx):
        p = self.point(idx)
        return tuple(f.labels[c] for f, c in zip(self.factors, p))

    def point_of_labels(self, labels):
        if len(labels) != self.m:
            raise ShapeError(f"expected {self.m} labels, got {len(labels)}")
        return tuple(f.index_of(str(lab)) for f, lab in zip(self.factors, labels))

    @cached_property
    def scale(self):
        return common_scale(Fraction(1, f.scale) for f in self.factors)

    @cached_property
    def int_dist(self):
        """Flat integer sup-distance matrix at :attr:`scale`."""
        n = self.size
        out = None
        for k, f in enumerate(self.factors):
            fm = f.scaled(self.scale)
            if fm.dtype == object:
                return self._int_dist_slow()
            # broadcast factor k's matrix over the flat index grid
            idx = np.array([p[k] for p in self.points()], dtype=np.intp)
            block = fm[np.ix_(idx, idx)]
            out = block if out is None else np.maximum(out, block)
        out = out.reshape(n, n)
        out.setflags(write=False)
        return out

    def _int_dist_slow(self):
        rows = [
            [self.distance(i, j) for j in range(self.size)] for i in range(self.size)
        ]
        return integer_matrix(rows, self.scale)

    def scaled(self, scale=None):
        if scale is None or scale == self.scale:
            return self.int_dist
        m = self.int_dist * (scale // self.scale)
        return m

    @property
    def dist(self):
        """Rational distance rows, built on demand."""
        s = self.scale
        return tuple(tuple(Fraction(int(v), s) for v in row) for row in self.int_dist)

    def as_metric_space(self, name=None):
        """Flatten to a :class:`MetricSpace` whose labels read ``"(a,b,...)"``."""
        labels = tuple(
            "(" + ",".join(self.label(i)) + ")" for i in range(self.size)
        )
        return MetricSpace(name or self.name, labels, self.dist)

    def __repr__(self):
        return f"ProductSpace({self.name})"


def sup_distance(product, p, q):
    return max(f.dist[a][b] for f, a, b in zip(product.factors, p, q))


@dataclass(frozen=True)
class Slice:
    """A k-slice: ``axis`` varies over ``axis_set``; ``fixed`` holds the other
    coordinates in factor order with the axis position removed."""

    axis: int
    fixed: tuple[int, ...]
    axis_set: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "axis_set", frozenset(self.axis_set))
        if len(self.axis_set) < 2:
            raise TooSmall("a slice needs at least two points on its axis")

    def points(self):
        head, tail = self.fixed[: self.axis], self.fixed[self.axis :]
        return [head + (c,) + tail for c in sorted(self.axis_set)]

    def __contains__(self, p):
        p = tuple(p)
        return p[self.axis] in self.axis_set and p[: self.axis] + p[self.axis + 1 :] == self.fixed


@dataclass(frozen=True)
class NotASlice:
    """Witness that a point set varies along more than one axis."""

    pair: tuple[tuple[int, ...], tuple[int, ...]]
    axes: tuple[int, ...]


def differing_axes(p, q):
    return tuple(i for i, (a, b) in enumerate(zip(p, q)) if a != b)


def classify_slice(product, points):
    """Return the :class:`Slice` made of exactly ``points``, or a :class:`NotASlice`."""
    pts = sorted({product.check_point(p) for p in points})
    if len(pts) < 2:
        raise TooSmall("classify_slice needs at least two distinct points")
    first = pts[0]
    varying = sorted({ax for p in pts[1:] for ax in differing_axes(first, p)})
    if len(varying) == 1:
        k = varying[0]
        return Slice(k, first[:k] + first[k + 1 :], frozenset(p[k] for p in pts))
    for p, q in combinations(pts, 2):
        axes = differing_axes(p, q)
        if len(axes) >= 2:
            return NotASlice((p, q), axes)
    raise AssertionError("unreachable: varying points always contain a 2-axis pair")


def interpolation_chain(product, a, b, k):
    """Walk from a to b changing one non-k coordinate at a time, in axis order."""
    a, b = product.check_point(a), product.check_point(b)
    if a[k] != b[k]:
        raise AxisMismatch(f"points differ on axis {k}")
    chain = [a]
    cur = list(a)
    for i in range(product.m):
        if i != k and cur[i] != b[i]:
            cur[i] = b[i]
            chain.append(tuple(cur))
    return chain


def enumerate_pair_slices(product, k):
    """Every two-point k-slice once, fixed coordinates outermost."""
    others = [range(s) for i, s in enumerate(product.shape) if i != k]
    for fixed in cartesian(*others):
        for x, y in combinations(range(product.shape[k]), 2):
            yield Slice(k, fixed, frozenset((x, y)))


def full_slice(product, k, base):
    """The slice through ``base`` running over all of factor k."""
    base = product.check_point(base)
    return Slice(k, base[:k] + base[k + 1 :], frozenset(range(product.shape[k])))
