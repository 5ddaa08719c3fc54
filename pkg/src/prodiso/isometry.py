"""Verified isometries between finite spaces and their exhaustive enumeration.

A "space" here is either a :class:`~prodiso.metric.MetricSpace` or a
:class:`~prodiso.product.ProductSpace`; maps are stored as flat index arrays
over the space's point order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import DomainMismatch, SearchBudgetExceeded, SizeMismatch
from .product import ProductSpace
from .search import find_maps


def _flat(space, p):
    if isinstance(space, ProductSpace):
        if isinstance(p, (int, np.integer)):
            return int(p)
        return space.index(space.check_point(p))
    return int(p)


def _unflat(space, i):
    return space.point(i) if isinstance(space, ProductSpace) else i


def common_matrices(a, b):
    """Integer distance matrices of two spaces at a shared scale."""
    scale = lcm(a.scale, b.scale)
    return a.scaled(scale), b.scaled(scale)


@dataclass(frozen=True, eq=False)
class Isometry:
    """A distance-preserving bijection, verified when built through
    :func:`is_isometry`, :func:`enumerate_isometries`, :func:`compose` or
    :func:`invert`."""

    domain: object
    codomain: object
    map: tuple[int, ...]
    inverse: tuple[int, ...]

    def __call__(self, p):
        return _unflat(self.codomain, self.map[_flat(self.domain, p)])

    def __eq__(self, other):
        if not isinstance(other, Isometry):
            return NotImplemented
        return self.map == other.map and self.domain == other.domain and self.codomain == other.codomain

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"Isometry({self.domain.name} -> {self.codomain.name}, {list(self.map)})"


@dataclass(frozen=True)
class IsometryViolation:
    """Why a candidate map is not an isometry.

    ``kind`` is ``"not-bijective"`` (witness: two points with the same image)
    or ``"distance"`` (witness: a pair whose distance changes).
    """

    kind: str
    witness: tuple

    def __bool__(self):
        return False


def _normalize(domain, codomain, mapping):
    n = domain.size
    if callable(mapping) and not isinstance(mapping, (list, tuple, dict)):
        return tuple(_flat(codomain, mapping(_unflat(domain, i))) for i in range(n))
    if isinstance(mapping, dict):
        out = [None] * n
        for src, dst in mapping.items():
            out[_flat(domain, src)] = _flat(codomain, dst)
        if any(v is None for v in out):
            raise ValueError("mapping is not total on the domain")
        return tuple(out)
    out = tuple(_flat(codomain, v) for v in mapping)
    if len(out) != n:
        raise ValueError("mapping is not total on the domain")
    return out


def is_isometry(domain, codomain, mapping):
    """Verify ``mapping`` and return an :class:`Isometry` or an
    :class:`IsometryViolation`.

    ``mapping`` may be an index sequence, a dict of points, or a callable on
    points.
    """
    if domain.size != codomain.size:
        raise SizeMismatch(f"|{domain.name}| = {domain.size} but |{codomain.name}| = {codomain.size}")
    fmap = _normalize(domain, codomain, mapping)
    n = domain.size
    inverse = [-1] * n
    for i, v in enumerate(fmap):
        if not 0 <= v < n:
            raise ValueError(f"image {v} out of range")
        if inverse[v] >= 0:
            return IsometryViolation(
                "not-bijective", (_unflat(domain, inverse[v]), _unflat(domain, i))
            )
        inverse[v] = i
    dm, cm = common_matrices(domain, codomain)
    idx = np.asarray(fmap, dtype=np.intp)
    bad = np.argwhere(cm[np.ix_(idx, idx)] != dm)
    if len(bad):
        i, j = map(int, bad[0])
        return IsometryViolation("distance", (_unflat(domain, i), _unflat(domain, j)))
    return Isometry(domain, codomain, fmap, tuple(inverse))


def identity(space):
    ids = tuple(range(space.size))
    return Isometry(space, space, ids, ids)


def _trusted(domain, codomain, fmap):
    inverse = [0] * len(fmap)
    for i, v in enumerate(fmap):
        inverse[v] = i
    return Isometry(domain, codomain, tuple(int(v) for v in fmap), tuple(inverse))


def distance_profile(space):
    """Per point, the sorted multiset of its distances to every point."""
    s = space.scale
    return tuple(
        tuple(Fraction(int(v), s) for v in row) for row in np.sort(space.int_dist, axis=1)
    )


def profile_candidates(dm, cm):
    """``allowed[i, c]`` iff point i of the domain and point c of the
    codomain have equal distance profiles."""
    dp = np.sort(dm, axis=1)
    cp = np.sort(cm, axis=1)
    keys = {}
    cid = np.array([keys.setdefault(row.tobytes() if dp.dtype != object else tuple(row), len(keys)) for row in cp])
    did = np.array([keys.get(row.tobytes() if dp.dtype != object else tuple(row), -1) for row in dp])
    return did[:, None] == cid[None, :]


def enumerate_isometries(domain, codomain, node_cap=None, workers=1, backend=None, limit=None):
    """Every isometry from ``domain`` onto ``codomain`` in lexicographic order
    of the image tuple. Unequal sizes give an empty list."""
    if domain.size != codomain.size:
        return []
    dm, cm = common_matrices(domain, codomain)
    if dm.dtype != cm.dtype:
        dm, cm = dm.astype(object), cm.astype(object)
    allowed = profile_candidates(dm, cm)
    try:
        maps = find_maps(dm, cm, allowed, limit=limit, node_cap=node_cap, workers=workers, backend=backend)
    except SearchBudgetExceeded as exc:
        # maps found before the cap are complete isometries; hand them back wrapped
        exc.found = [_trusted(domain, codomain, fm) for fm in exc.found or []]
        raise
    return [_trusted(domain, codomain, fm) for fm in maps]


def compose(f, g):
    """``f`` after ``g``."""
    if g.codomain != f.domain:
        raise DomainMismatch("codomain of g must equal domain of f")
    fmap = tuple(f.map[v] for v in g.map)
    inv = tuple(g.inverse[v] for v in f.inverse)
    return Isometry(g.domain, f.codomain, fmap, inv)


def invert(f):
    return Isometry(f.codomain, f.domain, f.inverse, f.map)


def _generated(gens, ident, bound):
    """Subgroup generated by ``gens`` (as map tuples), or None once it
    outgrows ``bound`` elements."""
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                hg = tuple(h[v] for v in g)
                if hg not in seen:
                    seen.add(hg)
                    if len(seen) > bound:
                        return None
                    nxt.append(hg)
        frontier = nxt
    return seen


def group_closure_report(isometries):
    """Check that a list of self-isometries forms a group.

    Closure is decided exactly without the quadratic all-pairs product: the
    set is a group iff the subgroup generated by a greedily chosen subset of
    it has the same elements. Returns booleans ``identity``, ``inverses``,
    ``composition``.
    """
    if not isometries:
        return {"identity": False, "inverses": False, "composition": False}
    space = isometries[0].domain
    maps = {f.map for f in isometries}
    ident = tuple(range(space.size))
    has_inv = all(f.inverse in maps for f in isometries)
    gens = []
    group = {ident}
    closed = True
    for f in isometries:
        if f.map in group:
            continue
        gens.append(f.map)
        group = _generated(gens, ident, len(maps))
        if group is None:
            closed = False
            break
    closed = closed and group == maps
    return {"identity": ident in maps, "inverses": has_inv, "composition": closed}
