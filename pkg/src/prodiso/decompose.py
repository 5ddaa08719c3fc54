"""Reducibility of isometries between sup-products.

An isometry ``f`` of products is *reducible* when there is a permutation
``perm`` of the factor indices and factor isometries ``f_i: M_i -> N_perm[i]``
with ``f(x)[perm[i]] = f_i(x[i])``. :func:`decompose` either produces such a
decomposition, checked against ``f`` on every point, or explains why not.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations, product as cartesian

from .errors import (
    InvalidDecomposition,
    NotCycleOfSlices,
    NotPairwiseSlices,
    SearchBudgetExceeded,
    SizeMismatch,
)
from .isometry import Isometry, IsometryViolation, enumerate_isometries, is_isometry
from .metric import MetricSpace
from .product import (
    NotASlice,
    ProductSpace,
    Slice,
    classify_slice,
    enumerate_pair_slices,
    interpolation_chain,
)
from .search import default_node_cap


@dataclass(frozen=True)
class Decomposition:
    domain: ProductSpace
    codomain: ProductSpace
    perm: tuple[int, ...]
    factor_maps: tuple

    def factor_map(self, i):
        fm = self.factor_maps[i]
        return fm.map if isinstance(fm, Isometry) else tuple(fm)


@dataclass(frozen=True)
class Reducible:
    decomposition: Decomposition
    verdict: str = field(default="reducible", init=False)


@dataclass(frozen=True)
class Irreducible:
    """Slice-structure breakdown.

    When ``slice`` is set, ``image`` is its image point set and
    ``classification`` the :class:`NotASlice` that :func:`classify_slice`
    returns for it, so the witness can be re-checked independently.
    """

    reason: str
    slice: Slice | None = None
    image: tuple | None = None
    classification: NotASlice | None = None
    detail: dict = field(default_factory=dict)
    verdict: str = field(default="irreducible", init=False)


@dataclass(frozen=True)
class HypothesisViolation:
    kind: str
    detail: str
    verdict: str = field(default="hypothesis-violation", init=False)


def reconstruct(d):
    """Assemble the product map of a decomposition and verify it."""
    m = d.domain.m
    if d.codomain.m != m or sorted(d.perm) != list(range(m)):
        raise InvalidDecomposition(f"{d.perm!r} is not a permutation of the {m} factor indices")
    maps = []
    for i in range(m):
        src, dst = d.domain.factors[i], d.codomain.factors[d.perm[i]]
        try:
            got = is_isometry(src, dst, d.factor_map(i))
        except (SizeMismatch, ValueError) as exc:
            raise InvalidDecomposition(f"factor map {i}: {exc}") from None
        if isinstance(got, IsometryViolation):
            raise InvalidDecomposition(f"factor map {i} is not an isometry: {got}")
        maps.append(got.map)
    cod = d.codomain
    images = []
    for p in d.domain.points():
        q = [0] * m
        for i in range(m):
            q[d.perm[i]] = maps[i][p[i]]
        images.append(cod.index(q))
    got = is_isometry(d.domain, cod, images)
    if isinstance(got, IsometryViolation):
        raise InvalidDecomposition(f"reconstructed map is not an isometry: {got}")
    return got


def _image(f, points):
    return tuple(f(p) for p in points)


def find_non_slice_witness(f):
    """First pair slice (in enumeration order) whose image is not a slice."""
    for k in range(f.domain.m):
        for sl in enumerate_pair_slices(f.domain, k):
            image = _image(f, sl.points())
            got = classify_slice(f.codomain, image)
            if isinstance(got, NotASlice):
                return sl, image, got
    return None


def _irreducible(f, reason, **detail):
    witness = find_non_slice_witness(f)
    if witness is None:
        return Irreducible(reason, detail=detail)
    sl, image, got = witness
    return Irreducible(reason, sl, image, got, detail)


def decompose(f):
    """Certificate for an isometry between products.

    Returns :class:`Reducible`, :class:`Irreducible` or
    :class:`HypothesisViolation`. A Reducible result has been reconstructed
    and compared with ``f`` on every point.
    """
    dom, cod = f.domain, f.codomain
    if not (isinstance(dom, ProductSpace) and isinstance(cod, ProductSpace)):
        raise TypeError("decompose needs an isometry between ProductSpaces")
    if dom.m != cod.m:
        return HypothesisViolation("factor-count", f"domain has {dom.m} factors, codomain {cod.m}")
    points = [f"domain[{i}]" for i, s in enumerate(dom.shape) if s < 2]
    points += [f"codomain[{i}]" for i, s in enumerate(cod.shape) if s < 2]
    if points:
        return HypothesisViolation("point-factor", "one-point factors: " + ", ".join(points))

    m = dom.m
    perm = []
    first_slices = []
    for k in range(m):
        sl = next(enumerate_pair_slices(dom, k))
        image = _image(f, sl.points())
        got = classify_slice(cod, image)
        if isinstance(got, NotASlice):
            return Irreducible("non-slice-image", sl, image, got)
        perm.append(got.axis)
        first_slices.append(sl)

    for k1, k2 in combinations(range(m), 2):
        if perm[k1] == perm[k2]:
            return _irreducible(
                f, "axis-collision", axes=(k1, k2), image_axis=perm[k1],
                slices=(first_slices[k1], first_slices[k2]),
            )

    base = (0,) * m
    factor_maps = []
    for k in range(m):
        j = perm[k]
        fk = [f(base[:k] + (x,) + base[k + 1 :])[j] for x in range(dom.shape[k])]
        try:
            got = is_isometry(dom.factors[k], cod.factors[j], fk)
        except (SizeMismatch, ValueError) as exc:
            return _irreducible(f, "factor-map", axis=k, error=str(exc))
        if isinstance(got, IsometryViolation):
            return _irreducible(f, "factor-map", axis=k, violation=got)
        factor_maps.append(got)

    d = Decomposition(dom, cod, tuple(perm), tuple(factor_maps))
    g = reconstruct(d)
    for i, (a, b) in enumerate(zip(g.map, f.map)):
        if a != b:
            return _irreducible(f, "reconstruction-mismatch", point=dom.point(i))
    return Reducible(d)


def batch_decompose(isometries, workers=1):
    if workers <= 1:
        return [decompose(f) for f in isometries]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(decompose, isometries, chunksize=64))


def reducible_isometries(domain, codomain):
    """Every reconstructible (perm, factor isometries) combination."""
    m = domain.m
    if codomain.m != m:
        return
    for perm in permutations(range(m)):
        if any(domain.shape[i] != codomain.shape[perm[i]] for i in range(m)):
            continue
        options = [enumerate_isometries(domain.factors[i], codomain.factors[perm[i]]) for i in range(m)]
        for combo in cartesian(*options):
            yield reconstruct(Decomposition(domain, codomain, perm, combo))


# -- Main Lemma checks -----------------------------------------------------


@dataclass(frozen=True)
class MainLemmaReport:
    holds: bool
    axis_map: dict
    reason: str | None = None
    counterexample: dict | None = None

    def __bool__(self):
        return self.holds


def check_main_lemma(f):
    """Exhaustive slice-to-slice check over all pair slices of the domain.

    Every pair k-slice must map to a slice, all of them on one axis j, and
    distinct k must get distinct j.
    """
    axis_map = {}
    seen = {}
    for k in range(f.domain.m):
        for sl in enumerate_pair_slices(f.domain, k):
            image = _image(f, sl.points())
            got = classify_slice(f.codomain, image)
            if isinstance(got, NotASlice):
                return MainLemmaReport(
                    False, axis_map, "image-not-slice",
                    {"slice": sl, "image": image, "classification": got},
                )
            if k not in axis_map:
                axis_map[k] = got.axis
                seen[k] = sl
            elif got.axis != axis_map[k]:
                return MainLemmaReport(
                    False, axis_map, "axis-inconsistent",
                    {"slices": (seen[k], sl), "image_axes": (axis_map[k], got.axis)},
                )
    for k1, k2 in combinations(sorted(axis_map), 2):
        if axis_map[k1] == axis_map[k2]:
            return MainLemmaReport(
                False, axis_map, "axis-collision", {"slices": (seen[k1], seen[k2])}
            )
    return MainLemmaReport(True, axis_map)


def _pair_axis(product, p, q, err):
    got = classify_slice(product, [p, q])
    if isinstance(got, NotASlice):
        raise err(f"{p} and {q} do not form a slice")
    return got.axis


@dataclass(frozen=True)
class TripleVerdict:
    holds: bool
    axes: tuple[int, int, int]


def slice_triple_check(product, a, b, c):
    """Three points pairwise forming slices must share one axis.

    ``axes`` lists the axes of {a,b}, {b,c}, {a,c}.
    """
    pts = [product.check_point(p) for p in (a, b, c)]
    if len(set(pts)) != 3:
        raise NotPairwiseSlices("points must be distinct")
    a, b, c = pts
    axes = (
        _pair_axis(product, a, b, NotPairwiseSlices),
        _pair_axis(product, b, c, NotPairwiseSlices),
        _pair_axis(product, a, c, NotPairwiseSlices),
    )
    return TripleVerdict(len(set(axes)) == 1, axes)


@dataclass(frozen=True)
class QuadVerdict:
    holds: bool
    branch: str
    axes: tuple[int, int, int, int]


def slice_quad_check(product, a, b, c, d):
    """A 4-cycle of slices has axes i=j=k=l or i=k, j=l.

    ``branch`` is ``"all-equal"``, ``"opposite-equal"`` or ``"violated"``.
    """
    pts = [product.check_point(p) for p in (a, b, c, d)]
    if len(set(pts)) != 4:
        raise NotCycleOfSlices("points must be distinct")
    a, b, c, d = pts
    i, j, k, l = (
        _pair_axis(product, a, b, NotCycleOfSlices),
        _pair_axis(product, b, c, NotCycleOfSlices),
        _pair_axis(product, c, d, NotCycleOfSlices),
        _pair_axis(product, d, a, NotCycleOfSlices),
    )
    if i == j == k == l:
        branch = "all-equal"
    elif i == k and j == l:
        branch = "opposite-equal"
    else:
        branch = "violated"
    return QuadVerdict(branch != "violated", branch, (i, j, k, l))


@dataclass(frozen=True)
class ChainReport:
    ok: bool
    image_axis: int | None
    chain: tuple = ()
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def image_axis(f, k):
    """Axis of the image of the first pair k-slice, or the NotASlice."""
    sl = next(enumerate_pair_slices(f.domain, k))
    image = _image(f, sl.points())
    got = classify_slice(f.codomain, image)
    return got.axis if isinstance(got, Slice) else (sl, image, got)


def chain_consistency(f, a, b, k, j=None):
    """Walk the interpolation chain from a to b (fixed axis k) under f.

    Each consecutive image pair must be a slice on an axis other than j, and
    f(a), f(b) must agree on coordinate j. ``j`` defaults to the image axis
    of the first pair k-slice.
    """
    chain = interpolation_chain(f.domain, a, b, k)
    if j is None:
        got = image_axis(f, k)
        if not isinstance(got, int):
            sl, image, cls = got
            return ChainReport(False, None, tuple(chain), {"slice": sl, "image": image, "classification": cls})
        j = got
    for x, y in zip(chain, chain[1:]):
        fx, fy = f(x), f(y)
        got = classify_slice(f.codomain, [fx, fy])
        if isinstance(got, NotASlice) or got.axis == j:
            return ChainReport(
                False, j, tuple(chain),
                {"step": (x, y), "image": (fx, fy), "classification": got},
            )
    fa, fb = f(chain[0]), f(chain[-1])
    if fa[j] != fb[j]:
        return ChainReport(False, j, tuple(chain), {"endpoints": (fa, fb)})
    return ChainReport(True, j, tuple(chain))


# -- factorization -----------------------------------------------------------


def _size_splits(n, cap, minimum=2):
    """Non-increasing factor-size tuples with product n, each in [2, cap]."""
    out = []

    def rec(rest, hi, acc):
        if rest == 1:
            if len(acc) >= 2:
                out.append(tuple(acc))
            return
        for s in range(min(hi, rest, cap), minimum - 1, -1):
            if rest % s == 0:
                rec(rest // s, s, acc + [s])

    rec(n, n, [])
    return out


def _restrict(space, idx, name):
    idx = list(idx)
    return MetricSpace(
        name,
        tuple(space.labels[i] for i in idx),
        tuple(tuple(space.dist[i][j] for j in idx) for i in idx),
    )


def _isometric(a, b, node_cap):
    return bool(enumerate_isometries(a, b, node_cap=node_cap, limit=1))


def _same_up_to_reindexing(fa, fb, node_cap):
    if sorted(x.size for x in fa) != sorted(x.size for x in fb):
        return False
    for perm in permutations(range(len(fb))):
        if all(
            fa[i].size == fb[perm[i]].size and _isometric(fa[i], fb[perm[i]], node_cap)
            for i in range(len(fa))
        ):
            return True
    return False


def factorize(space, max_points_per_factor=None, node_cap=None):
    """All nontrivial sup-product structures on ``space``, up to reindexing.

    Every product point lies on one fibre per axis through it, so fibres
    are sought through point 0: subsets S_k of the prescribed sizes, meeting
    only at point 0, with ``d(u, v) = max(d(u, 0), d(0, v))`` across
    different fibres. Each candidate product of fibres is then tested for
    an isometry onto ``space``. Returns ``(product, isometry)`` pairs with
    the isometry going from the product onto ``space``.
    """
    if node_cap is None:
        node_cap = default_node_cap()
    n = space.size
    cap = max_points_per_factor or n
    d = space.dist
    others = list(range(1, n))
    budget = [0]
    found = []
    target_multiset = sorted(v for row in d for v in row)

    def fibres(sizes, chosen, used):
        k = len(chosen)
        if k == len(sizes):
            yield list(chosen)
            return
        min_start = 0
        if k and sizes[k] == sizes[k - 1]:
            min_start = min(chosen[-1]) if chosen[-1] else 0
        pool = [
            v for v in others
            if v not in used and v > min_start
            and all(d[u][v] == max(d[u][0], d[0][v]) for s in chosen for u in s)
        ]
        for combo in combinations(pool, sizes[k] - 1):
            budget[0] += 1
            if budget[0] > node_cap:
                raise SearchBudgetExceeded(node_cap, budget[0], found=list(found))
            chosen.append(combo)
            yield from fibres(sizes, chosen, used | set(combo))
            chosen.pop()

    for sizes in _size_splits(n, cap):
        for chosen in fibres(sizes, [], set()):
            factors = tuple(
                _restrict(space, (0,) + tuple(s), f"{space.name}/{k}") for k, s in enumerate(chosen)
            )
            prod_space = ProductSpace(factors)
            cand = sorted(v for row in prod_space.dist for v in row)
            if cand != target_multiset:
                continue
            maps = enumerate_isometries(prod_space, space, node_cap=node_cap, limit=1)
            if not maps:
                continue
            if any(_same_up_to_reindexing(factors, prev.factors, node_cap) for prev, _ in found):
                continue
            found.append((prod_space, maps[0]))
    return found
