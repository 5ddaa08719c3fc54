"""End-to-end verification sweep behind ``prodiso verify``.

For each listed product of unit path graphs: enumerate the isometry group,
decompose every element, run the slice checks, and compare against the
prediction. Products whose factors all pass :func:`is_harness_factor` are
expected to be fully reducible; the others (contrast products) are expected
to have exactly as many reducible elements as there are (perm, factor
isometry) combinations.
"""

from __future__ import annotations

from itertools import product as cartesian

from .decompose import Reducible, batch_decompose, check_main_lemma, reconstruct, reducible_isometries
from .errors import ChainTooShort, MissingParameter, SearchBudgetExceeded
from .isometry import enumerate_isometries, group_closure_report
from .metric import is_harness_factor, path_graph
from .product import ProductSpace
from .quad import (
    default_chains,
    embed_quad,
    find_admissible_embeddings,
    is_admissible,
    is_standard,
    max_quad_dimension,
    q_statistic,
)

SUITES = {
    "desk": {
        "products": [list(s) for m in (2, 3) for s in cartesian((3, 4, 5), repeat=m)],
        "contrast": [[2, 2], [2, 3]],
        "quad": [[5], [5, 5], [5, 5, 5], [5, 3], [3, 5]],
        "scale": 1,
    },
    "smoke": {
        "products": [[3, 3], [5, 3]],
        "contrast": [[2, 2]],
        "quad": [[5], [5, 5]],
        "scale": 1,
    },
}


def path_product(sizes):
    return ProductSpace(tuple(path_graph(s) for s in sizes))


def verify_product(sizes, node_cap=None, workers=1):
    P = path_product(sizes)
    row = {"product": P.name, "points": P.size}
    try:
        isos = enumerate_isometries(P, P, node_cap=node_cap, workers=workers)
    except SearchBudgetExceeded as exc:
        row.update(status="inconclusive", error=str(exc))
        return row
    certs = batch_decompose(isos, workers=workers)
    reducible = [c for c in certs if isinstance(c, Reducible)]
    roundtrip = all(
        reconstruct(c.decomposition).map == f.map
        for f, c in zip(isos, certs)
        if isinstance(c, Reducible)
    )
    lemma_ok, perm_match = 0, True
    for f, c in zip(isos, certs):
        rep = check_main_lemma(f)
        lemma_ok += rep.holds
        if rep.holds and isinstance(c, Reducible):
            perm_match &= tuple(rep.axis_map[k] for k in range(P.m)) == c.decomposition.perm
    predicted = len({g.map for g in reducible_isometries(P, P)})
    closure = group_closure_report(isos)
    admitted = all(is_harness_factor(f) for f in P.factors)
    if admitted:
        ok = len(reducible) == len(isos) and lemma_ok == len(isos)
    else:
        ok = len(reducible) == predicted
    ok = ok and roundtrip and perm_match and all(closure.values())
    row.update(
        admitted=admitted,
        isometries=len(isos),
        reducible=len(reducible),
        predicted_reducible=predicted,
        main_lemma=lemma_ok,
        roundtrip=roundtrip,
        group=all(closure.values()),
        status="pass" if ok else "fail",
    )
    return row


def verify_quad(sizes, r=1, node_cap=None):
    P = path_product(sizes)
    row = {"product": P.name}
    try:
        emb = embed_quad(P, default_chains(P, r), r)
    except (ChainTooShort, MissingParameter) as exc:
        emb = None
        row["example_embedding"] = f"unavailable: {exc}"
    if emb is not None:
        std = is_standard(emb)
        row.update(
            admissible=bool(is_admissible(emb)),
            standard=std.standard,
            q=[q_statistic(emb, j) for j in range(P.m)],
        )
    try:
        L = max_quad_dimension(P, r, node_cap=node_cap)
    except SearchBudgetExceeded as exc:
        row.update(status="inconclusive", error=str(exc))
        return row
    row["max_quad_dimension"] = L
    sums_ok = True
    if L:
        for e in find_admissible_embeddings(P, L, r, limit=200, node_cap=node_cap):
            sums_ok &= sum(q_statistic(e, j) for j in range(L)) <= P.m
    row["sum_q_bounded"] = sums_ok
    ok = sums_ok and L <= P.m
    if emb is not None:
        ok = ok and row["admissible"] and row["standard"] and row["q"] == [1] * P.m and L == P.m
    row["status"] = "pass" if ok else "fail"
    return row


def run_suite(config, node_cap=None, workers=1):
    rows = [verify_product(s, node_cap, workers) for s in config.get("products", [])]
    rows += [verify_product(s, node_cap, workers) for s in config.get("contrast", [])]
    quads = [verify_quad(s, config.get("scale", 1), node_cap) for s in config.get("quad", [])]
    passed = all(r["status"] == "pass" for r in rows + quads)
    return {"products": rows, "quad": quads, "passed": passed}
