from itertools import combinations, permutations, product as cartesian

import pytest

from prodiso.decompose import (
    Decomposition,
    HypothesisViolation,
    Irreducible,
    Reducible,
    chain_consistency,
    check_main_lemma,
    decompose,
    factorize,
    find_non_slice_witness,
    reconstruct,
    reducible_isometries,
    slice_quad_check,
    slice_triple_check,
)
from prodiso.errors import AxisMismatch, InvalidDecomposition, NotCycleOfSlices, NotPairwiseSlices
from prodiso.isometry import compose, enumerate_isometries, identity, is_isometry
from prodiso.metric import MetricSpace, cycle_graph, discrete_space, path_graph
from prodiso.product import NotASlice, ProductSpace, Slice, classify_slice, enumerate_pair_slices

from conftest import naive_isometries


def grid(*sizes):
    return ProductSpace(tuple(path_graph(s) for s in sizes))


def isos(P):
    return enumerate_isometries(P, P)


def swap(P):
    return is_isometry(P, P, lambda p: (p[1], p[0]))


class TestDecompose:
    def test_identity(self):
        P = grid(3, 5)
        cert = decompose(identity(P))
        assert isinstance(cert, Reducible)
        d = cert.decomposition
        assert d.perm == (0, 1)
        assert d.factor_map(0) == (0, 1, 2) and d.factor_map(1) == (0, 1, 2, 3, 4)

    def test_swap(self):
        P = grid(3, 3)
        d = decompose(swap(P)).decomposition
        assert d.perm == (1, 0)
        assert d.factor_map(0) == d.factor_map(1) == (0, 1, 2)

    @pytest.mark.parametrize(
        "sizes", [s for m in (2, 3) for s in cartesian((3, 4, 5), repeat=m)], ids=str
    )
    def test_round_trip_and_completeness(self, sizes):
        P = grid(*sizes)
        group = isos(P)
        for f in group:
            cert = decompose(f)
            assert isinstance(cert, Reducible)
            assert reconstruct(cert.decomposition) == f
            assert all(
                f(p)[cert.decomposition.perm[i]] == cert.decomposition.factor_map(i)[p[i]]
                for p in P.points()
                for i in range(P.m)
            )
        assert {g.map for g in reducible_isometries(P, P)} == {f.map for f in group}

    def test_two_point_square(self, two_point_sq):
        group = isos(two_point_sq)
        certs = [decompose(f) for f in group]
        red = [c for c in certs if isinstance(c, Reducible)]
        irr = [c for c in certs if isinstance(c, Irreducible)]
        assert (len(group), len(red), len(irr)) == (24, 8, 16)
        for c in irr:
            # re-verify the witness with classify_slice alone
            assert isinstance(classify_slice(two_point_sq, c.slice.points()), Slice)
            again = classify_slice(two_point_sq, c.image)
            assert isinstance(again, NotASlice) and again == c.classification
        predicted = {g.map for g in reducible_isometries(two_point_sq, two_point_sq)}
        assert predicted == {f.map for f, c in zip(group, certs) if isinstance(c, Reducible)}

    def test_hypothesis_violations(self):
        one = ProductSpace((path_graph(1), path_graph(3)))
        assert decompose(identity(one)).kind == "point-factor"
        a = ProductSpace((discrete_space(4),))
        b = grid(2, 2)
        f = is_isometry(a, b, [0, 1, 2, 3])
        cert = decompose(f)
        assert isinstance(cert, HypothesisViolation) and cert.kind == "factor-count"

    def test_type_error(self):
        with pytest.raises(TypeError):
            decompose(identity(path_graph(3)))

    def test_reducible_between_different_products(self):
        a, b = grid(5, 3), grid(3, 5)
        for f in enumerate_isometries(a, b):
            cert = decompose(f)
            assert isinstance(cert, Reducible) and cert.decomposition.perm == (1, 0)

    def test_non_path_factors(self):
        P = ProductSpace((cycle_graph(5), path_graph(3)))
        group = isos(P)
        assert len(group) == 20
        assert all(isinstance(decompose(f), Reducible) for f in group)

    def test_choice_independence(self):
        # any pair k-slice gives the same image axis, not just the first
        for sizes in [(3, 3), (4, 3), (3, 3, 3)]:
            P = grid(*sizes)
            for f in isos(P):
                perm = decompose(f).decomposition.perm
                for k in range(P.m):
                    for sl in enumerate_pair_slices(P, k):
                        got = classify_slice(P, [f(p) for p in sl.points()])
                        assert got.axis == perm[k]

    def test_basepoint_independence(self):
        P = grid(3, 4)
        for f in isos(P):
            d = decompose(f).decomposition
            for base in P.points():
                for k in range(P.m):
                    fk = [
                        f(base[:k] + (x,) + base[k + 1 :])[d.perm[k]]
                        for x in range(P.shape[k])
                    ]
                    assert tuple(fk) == d.factor_map(k)


class TestReconstruct:
    def test_identity(self):
        P = grid(3, 3)
        d = Decomposition(P, P, (0, 1), ((0, 1, 2), (0, 1, 2)))
        assert reconstruct(d) == identity(P)

    def test_swapped_reversals_in_group(self):
        P = grid(3, 3)
        d = Decomposition(P, P, (1, 0), ((2, 1, 0), (2, 1, 0)))
        assert reconstruct(d) in isos(P)

    def test_size_mismatch_rejected(self):
        P = grid(5, 3)
        d = Decomposition(P, P, (1, 0), (tuple(range(5)), tuple(range(3))))
        with pytest.raises(InvalidDecomposition):
            reconstruct(d)

    def test_non_isometric_factor_map(self):
        P = grid(3, 3)
        with pytest.raises(InvalidDecomposition):
            reconstruct(Decomposition(P, P, (0, 1), ((1, 0, 2), (0, 1, 2))))
        with pytest.raises(InvalidDecomposition):
            reconstruct(Decomposition(P, P, (0, 0), ((0, 1, 2), (0, 1, 2))))


class TestMainLemma:
    def test_axis_map_matches_perm(self):
        for sizes in [(3, 3), (5, 3), (3, 3, 3), (4, 4)]:
            P = grid(*sizes)
            for f in isos(P):
                rep = check_main_lemma(f)
                assert rep.holds
                perm = decompose(f).decomposition.perm
                assert tuple(rep.axis_map[k] for k in range(P.m)) == perm

    def test_identity(self):
        rep = check_main_lemma(identity(grid(3, 4)))
        assert rep.axis_map == {0: 0, 1: 1}

    def test_three_cycle_fails(self, two_point_sq):
        P = two_point_sq
        # a 3-cycle on the flat points (0,0) -> (0,1) -> (1,0) -> (0,0)
        cyc = {(0, 0): (0, 1), (0, 1): (1, 0), (1, 0): (0, 0), (1, 1): (1, 1)}
        f = is_isometry(P, P, cyc)
        rep = check_main_lemma(f)
        assert not rep.holds and rep.reason == "image-not-slice"
        image = rep.counterexample["image"]
        assert isinstance(classify_slice(P, image), NotASlice)

    def test_functoriality(self, p3xp3):
        group = isos(p3xp3)
        maps = {f: check_main_lemma(f).axis_map for f in group}
        for f in group:
            for g in group:
                fg = check_main_lemma(compose(f, g)).axis_map
                assert fg == {k: maps[f][maps[g][k]] for k in range(2)}

    def test_witness_matches_decompose(self, two_point_sq):
        for f in isos(two_point_sq):
            cert = decompose(f)
            w = find_non_slice_witness(f)
            assert (w is None) == isinstance(cert, Reducible)


class TestSliceChecks:
    def test_triple_examples(self, p3xp3):
        v = slice_triple_check(p3xp3, (0, 0), (1, 0), (2, 0))
        assert v.holds and v.axes == (0, 0, 0)
        line = ProductSpace((path_graph(3),))
        assert slice_triple_check(line, (0,), (1,), (2,)).axes == (0, 0, 0)

    def test_triple_errors(self, p3xp3):
        with pytest.raises(NotPairwiseSlices):
            slice_triple_check(p3xp3, (0, 0), (1, 0), (1, 1))
        with pytest.raises(NotPairwiseSlices):
            slice_triple_check(p3xp3, (0, 0), (0, 0), (1, 0))

    def test_triples_exhaustive(self, p3xp3):
        # oracle: pairwise-slice triples are those sharing all but one coordinate
        checked = 0
        for a, b, c in combinations(p3xp3.points(), 3):
            try:
                v = slice_triple_check(p3xp3, a, b, c)
            except NotPairwiseSlices:
                continue
            checked += 1
            assert v.holds
        # each of 6 lines holds exactly C(3,3) = 1 triple
        assert checked == 6

    def test_quad_examples(self, two_point_sq):
        v = slice_quad_check(two_point_sq, (0, 0), (1, 0), (1, 1), (0, 1))
        assert v.holds and v.branch == "opposite-equal"
        line = ProductSpace((path_graph(4), path_graph(2)))
        v = slice_quad_check(line, (0, 0), (1, 0), (2, 0), (3, 0))
        assert v.holds and v.branch == "all-equal"
        with pytest.raises(NotCycleOfSlices):
            slice_quad_check(two_point_sq, (0, 0), (1, 1), (1, 0), (0, 1))

    def test_quads_exhaustive(self, p3xp3):
        branches = {"all-equal": 0, "opposite-equal": 0}
        for cyc in permutations(p3xp3.points(), 4):
            try:
                v = slice_quad_check(p3xp3, *cyc)
            except NotCycleOfSlices:
                continue
            assert v.holds
            branches[v.branch] += 1
        # oracle counts over ordered 4-cycles: in a line of 3 points there
        # are no 4 distinct points; each of the 9 rectangles appears 8 ways
        assert branches == {"all-equal": 0, "opposite-equal": 72}


class TestChainConsistency:
    def test_exhaustive_p3_squared(self, p3xp3):
        pts = p3xp3.points()
        for f in isos(p3xp3):
            for k in range(2):
                for a in pts:
                    for b in pts:
                        if a[k] == b[k]:
                            assert chain_consistency(f, a, b, k)

    def test_trivial(self, p3xp3):
        assert chain_consistency(identity(p3xp3), (1, 1), (1, 1), 0)

    def test_axis_mismatch(self, p3xp3):
        with pytest.raises(AxisMismatch):
            chain_consistency(identity(p3xp3), (0, 0), (1, 1), 0)

    def test_irreducible_fails_somewhere(self, two_point_sq):
        pts = two_point_sq.points()
        for f in isos(two_point_sq):
            ok = all(
                chain_consistency(f, a, b, k)
                for k in range(2)
                for a in pts
                for b in pts
                if a[k] == b[k]
            )
            assert ok == isinstance(decompose(f), Reducible)


class TestFactorize:
    def test_grid_15(self):
        flat = grid(5, 3).as_metric_space("grid")
        found = factorize(flat)
        assert len(found) == 1
        prod, f = found[0]
        assert sorted(prod.shape) == [3, 5]
        for fac in prod.factors:
            ref = path_graph(fac.size)
            assert enumerate_isometries(fac, ref, limit=1)
        assert f.domain is prod and f.codomain is flat

    def test_p5_prime(self):
        assert factorize(path_graph(5)) == []

    def test_simplex(self):
        found = factorize(discrete_space(4))
        assert len(found) == 1 and found[0][0].shape == (2, 2)

    def test_p3_squared_flat(self):
        found = factorize(grid(3, 3).as_metric_space())
        assert [p.shape for p, _ in found] == [(3, 3)]

    def test_cycle_not_a_product(self):
        assert factorize(cycle_graph(6)) == []

    def test_max_factor_cap(self):
        flat = grid(5, 3).as_metric_space("grid")
        assert factorize(flat, max_points_per_factor=4) == []

    def test_isometry_oracle(self):
        # the witness isometry agrees with a brute-force distance check
        flat = grid(3, 3).as_metric_space()
        prod, f = factorize(flat)[0]
        for i in range(prod.size):
            for j in range(prod.size):
                assert prod.distance(i, j) == flat.dist[f.map[i]][f.map[j]]
