"""Compare the compiled and pure-Python search kernels.

    python benchmarks/bench_search.py [--repeat N]

Each case runs once per available backend; results must agree exactly.
"""

import argparse
import time

from prodiso.harness import path_product
from prodiso.isometry import enumerate_isometries
from prodiso.quad import find_admissible_embeddings, max_quad_dimension
from prodiso.search import BACKENDS


def cases():
    cube = path_product((5, 5, 5))
    yield "isometries of P5^3", lambda b: [f.map for f in enumerate_isometries(cube, cube, backend=b)]
    yield "isometries of P3^2 x P4", lambda b: [
        f.map for f in enumerate_isometries(*(2 * [path_product((3, 3, 4))]), backend=b)
    ]
    sq = path_product((2, 2, 3))
    yield "isometries of P2^2 x P3 (27648)", lambda b: len(enumerate_isometries(sq, sq, backend=b))
    yield "Q^3 embeddings in P5^3", lambda b: [
        e.vertex_map for e in find_admissible_embeddings(cube, 3, 1, backend=b)
    ]
    yield "max quad dimension of P5 x P3", lambda b: max_quad_dimension(path_product((5, 3)), 1, backend=b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = sorted(BACKENDS)
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':34} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for name, run in cases():
        best, results = {}, {}
        for b in backends:
            times = []
            for _ in range(args.repeat):
                t = time.perf_counter()
                results[b] = run(b)
                times.append(time.perf_counter() - t)
            best[b] = min(times)
        assert len({repr(r) for r in results.values()}) == 1, f"backends disagree on {name}"
        speed = f"{best['python'] / best['cython']:8.1f}x" if "cython" in best else "       -"
        print(f"{name:34} " + " ".join(f"{best[b]:9.3f}s" for b in backends) + "  " + speed)


if __name__ == "__main__":
    main()
