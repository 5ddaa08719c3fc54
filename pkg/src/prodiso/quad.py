"""Quadrilateral graphs Q^m_r, their embeddings into sup-products, and the
certification predicates (admissible, standard, q_j, maximal dimension).

Vertex order in a :class:`QuadGraph` is ``+e_1, -e_1, +e_2, -e_2, ...``
followed by the 2^m sign vectors in lexicographic order (``-r`` before
``+r``). The embedding search assigns vertices in that order, so the
heavily constrained ``±e`` pairs come first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product as cartesian
from math import lcm

import numpy as np

from .errors import (
    ChainTooShort,
    InvalidChain,
    InvalidEmbedding,
    MissingParameter,
    ResolutionMismatch,
    SearchBudgetExceeded,
)
from .metric import geodesic_chain, is_uniquely_geodesic_pair, natural_resolution
from .product import NotASlice, classify_slice, differing_axes
from .rational import divides, rat_gcd, to_rat
from .search import default_node_cap, find_maps


def quad_vertices(m, r):
    """Coordinates of the 2m + 2^m vertices of Q^m_r."""
    r = to_rat(r)
    if m < 1 or r <= 0:
        raise ValueError("quad_vertices needs m >= 1 and r > 0")
    zero = Fraction(0)
    verts = []
    for i in range(m):
        for sign in (1, -1):
            v = [zero] * m
            v[i] = sign * 2 * r
            verts.append(tuple(v))
    verts.extend(cartesian((-r, r), repeat=m))
    return verts


def vertex_labels(m):
    labels = []
    for i in range(m):
        labels += [f"+e{i + 1}", f"-e{i + 1}"]
    labels += ["[" + "".join(s) + "]" for s in cartesian("-+", repeat=m)]
    return labels


def e_vertex(j, sign=1):
    """Index of +e_j (sign 1) or -e_j (sign -1), j 0-based."""
    return 2 * j + (0 if sign > 0 else 1)


def ambient_distance(u, v):
    return max(abs(a - b) for a, b in zip(u, v))


def quad_edges(quad):
    """All vertex pairs at ambient sup distance exactly r."""
    verts = quad.vertices
    return [
        (i, j)
        for i, j in combinations(range(len(verts)), 2)
        if ambient_distance(verts[i], verts[j]) == quad.scale
    ]


@dataclass(frozen=True)
class QuadGraph:
    dim: int
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "scale", to_rat(self.scale))

    @cached_property
    def vertices(self):
        return tuple(quad_vertices(self.dim, self.scale))

    @cached_property
    def labels(self):
        return tuple(vertex_labels(self.dim))

    @cached_property
    def edges(self):
        return tuple(quad_edges(self))

    def distance(self, u, v):
        return ambient_distance(self.vertices[u], self.vertices[v])

    def distance_matrix(self):
        n = len(self.vertices)
        return [[self.distance(u, v) for v in range(n)] for u in range(n)]


def quad_graph(m, r):
    return QuadGraph(m, r)


@dataclass(frozen=True, eq=False)
class QuadEmbedding:
    """Vertex map of Q^k_r into a product, checked for injectivity and edge
    lengths on construction."""

    quad: QuadGraph
    target: object
    vertex_map: tuple
    resolution: Fraction

    def __post_init__(self):
        pts = tuple(self.target.check_point(p) for p in self.vertex_map)
        object.__setattr__(self, "vertex_map", pts)
        object.__setattr__(self, "resolution", to_rat(self.resolution))
        if len(pts) != len(self.quad.vertices):
            raise InvalidEmbedding("vertex_map must cover every vertex")
        if len(set(pts)) != len(pts):
            raise InvalidEmbedding("vertex_map is not injective")
        if self.resolution <= 0 or not divides(self.resolution, self.quad.scale):
            raise ResolutionMismatch("resolution must divide the edge length r")
        for u, v in self.quad.edges:
            if self.image_distance(u, v) != self.quad.scale:
                raise InvalidEmbedding(
                    f"edge {self.quad.labels[u]}-{self.quad.labels[v]} has length "
                    f"{self.image_distance(u, v)}, expected {self.quad.scale}"
                )

    def image_distance(self, u, v):
        t = self.target
        return t.distance(t.index(self.vertex_map[u]), t.index(self.vertex_map[v]))

    def __getitem__(self, label):
        return self.vertex_map[self.quad.labels.index(label)]

    def compose(self, isometry):
        """The embedding ``isometry ∘ self``."""
        return QuadEmbedding(
            self.quad, isometry.codomain, tuple(isometry(p) for p in self.vertex_map), self.resolution
        )


def vertex_distance_mismatches(embedding):
    q = embedding.quad
    n = len(q.vertices)
    return [
        (u, v)
        for u, v in combinations(range(n), 2)
        if embedding.image_distance(u, v) != q.distance(u, v)
    ]


def is_isometric_on_vertices(embedding):
    return not vertex_distance_mismatches(embedding)


def embed_quad(product, chains, r, resolution=None):
    """The Q^m_r embedding built from one length-4r geodesic chain per factor.

    Chain i contributes its points at parameters 0, r, 2r, 3r, 4r. With
    ``b`` the tuple of midpoints: ``+e_k`` goes to b with coordinate k at
    4r, ``-e_k`` to b with coordinate k at 0, and a sign vector picks 3r
    for ``+r`` and r for ``-r`` coordinatewise. Longer chains are used up to
    parameter 4r.
    """
    r = to_rat(r)
    m = product.m
    if len(chains) != m:
        raise ValueError(f"need one chain per factor ({m}), got {len(chains)}")
    marks = []
    for i, chain in enumerate(chains):
        if chain.length < 4 * r:
            raise ChainTooShort(f"factor {i}: chain length {chain.length} < 4r = {4 * r}")
        pts = []
        for s in range(5):
            z = chain.at(s * r)
            if z is None:
                raise MissingParameter(i, s * r)
            pts.append(z)
        marks.append(pts)
    quad = QuadGraph(m, r)
    mid = tuple(pts[2] for pts in marks)
    images = []
    for k in range(m):
        for end in (4, 0):
            p = list(mid)
            p[k] = marks[k][end]
            images.append(tuple(p))
    for signs in cartesian((-1, 1), repeat=m):
        images.append(tuple(marks[i][3 if s > 0 else 1] for i, s in enumerate(signs)))
    if resolution is None:
        resolution = _default_resolution(product, r)
    return QuadEmbedding(quad, product, tuple(images), resolution)


# -- admissibility -------------------------------------------------------


def _chain_unique_scaled(dm, i, j, step):
    """Unique-geodesic test on an integer matrix (step in the same units)."""
    total = int(dm[i, j])
    row_i = dm[i]
    between = np.nonzero(row_i + dm[:, j] == total)[0]
    params = row_i[between].astype(np.int64)
    if total % step:
        raise ResolutionMismatch("resolution does not divide the pair distance")
    on_grid = params[params % step == 0] // step
    counts = np.bincount(on_grid, minlength=total // step + 1)
    if len(counts) != total // step + 1 or not (counts == 1).all():
        return False
    sub = dm[np.ix_(between, between)]
    return bool((np.abs(params[:, None] - params[None, :]) == sub).all())


def edge_report(product, p, q, resolution):
    """Is the product pair (p, q) a uniquely geodesic segment?

    Returns ``(ok, reason)``; reason is None on success.
    """
    d = product.distance(product.index(p), product.index(q))
    for ax, f in enumerate(product.factors):
        if f.dist[p[ax]][q[ax]] == d and not is_uniquely_geodesic_pair(f, p[ax], q[ax], resolution):
            return False, f"factor {ax} pair ({p[ax]}, {q[ax]}) is not uniquely geodesic"
    scale = lcm(product.scale, resolution.denominator)
    dm = product.scaled(scale)
    step = int(resolution * scale)
    if not _chain_unique_scaled(dm, product.index(p), product.index(q), step):
        return False, "product betweenness is not a single chain at the resolution"
    return True, None


@dataclass(frozen=True)
class EdgeCheck:
    edge: tuple[int, int]
    ok: bool
    reason: str | None = None


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    edges: tuple[EdgeCheck, ...]

    def __bool__(self):
        return self.admissible

    @property
    def failures(self):
        return [e for e in self.edges if not e.ok]


def is_admissible(embedding):
    checks = []
    for u, v in embedding.quad.edges:
        ok, reason = edge_report(
            embedding.target, embedding.vertex_map[u], embedding.vertex_map[v], embedding.resolution
        )
        checks.append(EdgeCheck((u, v), ok, reason))
    return AdmissibilityReport(all(c.ok for c in checks), tuple(checks))


@dataclass(frozen=True)
class StandardReport:
    standard: bool
    admissible: bool
    axis_map: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    def __bool__(self):
        return self.standard


def is_standard(embedding):
    """Admissible and every pair {ι(+e_j), ι(-e_j)} a slice; reports j -> axis."""
    admissible = bool(is_admissible(embedding))
    axis_map, failures = {}, {}
    for j in range(embedding.quad.dim):
        a = embedding.vertex_map[e_vertex(j, 1)]
        b = embedding.vertex_map[e_vertex(j, -1)]
        got = classify_slice(embedding.target, [a, b])
        if isinstance(got, NotASlice):
            failures[j] = got
        else:
            axis_map[j] = got.axis
    return StandardReport(admissible and not failures, admissible, axis_map, failures)


def q_statistic(embedding, j):
    """How many coordinates realise d(ι(+e_j), ι(-e_j))."""
    a = embedding.vertex_map[e_vertex(j, 1)]
    b = embedding.vertex_map[e_vertex(j, -1)]
    t = embedding.target
    d = t.distance(t.index(a), t.index(b))
    return sum(1 for f, x, y in zip(t.factors, a, b) if f.dist[x][y] == d)


def realizing_axes(embedding, j):
    a = embedding.vertex_map[e_vertex(j, 1)]
    b = embedding.vertex_map[e_vertex(j, -1)]
    t = embedding.target
    d = t.distance(t.index(a), t.index(b))
    return tuple(ax for ax, (f, x, y) in enumerate(zip(t.factors, a, b)) if f.dist[x][y] == d)


# -- search ----------------------------------------------------------------


def _default_resolution(product, r):
    return rat_gcd([natural_resolution(f) for f in product.factors] + [r])


def admissible_pair_matrix(product, r, resolution):
    """Boolean matrix over flat indices: pair at distance r whose segment is
    uniquely geodesic at ``resolution``."""
    scale = lcm(product.scale, r.denominator, resolution.denominator)
    dm = product.scaled(scale)
    target = int(r * scale)
    step = int(resolution * scale)
    adm = np.zeros(dm.shape, dtype=bool)
    factor_cache = {}
    for i, j in zip(*np.nonzero(np.triu(dm == target, 1))):
        p, q = product.point(int(i)), product.point(int(j))
        ok = True
        for ax, f in enumerate(product.factors):
            if f.dist[p[ax]][q[ax]] == r:
                key = (ax, p[ax], q[ax])
                if key not in factor_cache:
                    factor_cache[key] = is_uniquely_geodesic_pair(f, p[ax], q[ax], resolution)
                if not factor_cache[key]:
                    ok = False
                    break
        if ok:
            ok = _chain_unique_scaled(dm, int(i), int(j), step)
        adm[i, j] = adm[j, i] = ok
    return adm, dm, scale


def _sub_multiset_candidates(pat, tgt):
    allowed = np.ones((pat.shape[0], tgt.shape[0]), dtype=bool)
    for colour in np.unique(pat):
        need = (pat == colour).sum(axis=1)
        have = (tgt == colour).sum(axis=1)
        allowed &= have[None, :] >= need[:, None]
    return allowed


def find_admissible_embeddings(
    product, k, r, resolution=None, limit=None, node_cap=None, backend=None, workers=1
):
    """Admissible embeddings of Q^k_r into ``product`` that are isometric on
    vertices, in search order. ``limit=None`` collects them all."""
    r = to_rat(r)
    resolution = _default_resolution(product, r) if resolution is None else to_rat(resolution)
    if not divides(resolution, r):
        raise ResolutionMismatch(f"resolution {resolution} does not divide r = {r}")
    quad = QuadGraph(k, r)
    adm, dm, scale = admissible_pair_matrix(product, r, resolution)
    n = len(quad.vertices)
    pdist = np.array([[int(quad.distance(u, v) * scale) for v in range(n)] for u in range(n)], dtype=np.int64)
    edge = np.zeros((n, n), dtype=np.int64)
    for u, v in quad.edges:
        edge[u, v] = edge[v, u] = 1
    pattern = 2 * pdist + edge
    target = 2 * np.asarray(dm, dtype=np.int64) + adm.astype(np.int64)
    allowed = _sub_multiset_candidates(pattern, target)
    maps = find_maps(pattern, target, allowed, limit=limit, node_cap=node_cap, workers=workers, backend=backend)
    return [
        QuadEmbedding(quad, product, tuple(product.point(int(c)) for c in fm), resolution)
        for fm in maps
    ]


def max_quad_dimension(product, r, resolution=None, node_cap=None, backend=None, workers=1):
    """Largest k with an admissible embedding of Q^k_r, by exhaustive search.

    The search stops as soon as Q^k_r has more vertices than the product
    has points. Raises :class:`SearchBudgetExceeded` (with ``lower_bound``)
    if any single search exhausts ``node_cap``.
    """
    if node_cap is None:
        node_cap = default_node_cap()
    best = 0
    k = 1
    while 2 * k + 2**k <= product.size:
        try:
            found = find_admissible_embeddings(
                product, k, r, resolution, limit=1, node_cap=node_cap, backend=backend, workers=workers
            )
        except SearchBudgetExceeded as exc:
            raise SearchBudgetExceeded(exc.cap, exc.nodes, lower_bound=best) from None
        if not found:
            break
        best = k
        k += 1
    return best


def lemma_disjointness_holds(embedding):
    """No two ±e pairs realise their distance on a shared axis where the
    other pair moves. Returns the offending (j, t, axis) or None."""
    dim = embedding.quad.dim
    four_r = 4 * embedding.quad.scale
    t_space = embedding.target
    for t in range(dim):
        g = embedding.vertex_map[e_vertex(t, 1)]
        kap = embedding.vertex_map[e_vertex(t, -1)]
        for ax, f in enumerate(t_space.factors):
            if f.dist[g[ax]][kap[ax]] != four_r:
                continue
            if t_space.distance(t_space.index(g), t_space.index(kap)) != four_r:
                continue
            for j in range(dim):
                if j == t:
                    continue
                a = embedding.vertex_map[e_vertex(j, 1)]
                b = embedding.vertex_map[e_vertex(j, -1)]
                if ax in differing_axes(a, b):
                    return (j, t, ax)
    return None


def default_chains(product, r):
    """Per factor, the first pair at distance 4r whose betweenness set is a
    geodesic chain, as used by ``quad --embed``."""
    r = to_rat(r)
    chains = []
    for ax, f in enumerate(product.factors):
        pick = None
        for x, y in combinations(range(f.size), 2):
            if f.dist[x][y] != 4 * r:
                continue
            try:
                pick = geodesic_chain(f, x, y)
            except InvalidChain:
                continue
            break
        if pick is None:
            raise ChainTooShort(f"factor {ax} ({f.name}) has no geodesic chain of length {4 * r}")
        chains.append(pick)
    return chains
