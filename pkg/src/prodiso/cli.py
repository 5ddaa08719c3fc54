"""Command-line entry point: ``prodiso <subcommand> ...``.

Exit codes:
  0   success (all certificates reducible / all checks passed)
  1   input error (unreadable file, malformed JSON, metric axiom violation)
  2   some isometry is irreducible
  3   hypothesis violation (factor counts differ, one-point factor)
  4   search budget exceeded (inconclusive)
  5   verification suite failed
  64  usage error
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import harness
from .decompose import (
    HypothesisViolation,
    Irreducible,
    Reducible,
    batch_decompose,
    check_main_lemma,
    decompose,
    factorize,
)
from .errors import ParseError, ProdisoError, SearchBudgetExceeded
from .io import (
    certificate_to_doc,
    digest,
    isometry_to_doc,
    load_document,
    parse_map,
    product_to_doc,
    space_to_doc,
    to_jsonable,
)
from .isometry import IsometryViolation, enumerate_isometries, group_closure_report
from .metric import DEFAULT_MAX_POINTS, MetricSpace, _check_axioms
from .product import ProductSpace
from .quad import (
    QuadGraph,
    default_chains,
    embed_quad,
    is_admissible,
    is_standard,
    max_quad_dimension,
    q_statistic,
)
from .rational import format_rat, to_rat
from .search import DEFAULT_BACKEND, default_node_cap

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_IRREDUCIBLE = 2
EXIT_HYPOTHESIS = 3
EXIT_BUDGET = 4
EXIT_VERIFY = 5
EXIT_USAGE = 64


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    search_node_cap: int
    parallel_workers: int = 1
    output_path: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.search_node_cap <= 0 or self.parallel_workers <= 0:
            raise UsageError("caps and worker counts must be positive")
        if self.format not in ("json", "text"):
            raise UsageError(f"unknown format {self.format!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--node-cap", type=int, default=None, help="search node cap (env PRODISO_NODE_CAP)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="prodiso", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="validate space or product files")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("product", parents=[common], help="build a product, or factorize a space")
    p.add_argument("factors", nargs="*", help="metric-space files, in factor order")
    p.add_argument("--flatten", action="store_true", help="also emit the product as a metric space")
    p.add_argument("--factorize", metavar="FILE", help="search sup-product structures of FILE")
    p.add_argument("--max-factor", type=int, default=None)

    p = sub.add_parser("isometries", parents=[common], help="enumerate isometries between two files")
    p.add_argument("domain")
    p.add_argument("codomain", nargs="?")

    p = sub.add_parser("decompose", parents=[common], help="reducibility certificates")
    p.add_argument("--products", nargs="+", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--map", dest="map_file")
    group.add_argument("--all", action="store_true")
    p.add_argument("--main-lemma", action="store_true", help="also run the exhaustive slice check")

    p = sub.add_parser("quad", parents=[common], help="quadrilateral graphs and embeddings")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--scale", default="1")
    p.add_argument("--embed", metavar="PRODUCT", help="certify the example embedding into PRODUCT")
    p.add_argument("--max-dim", metavar="PRODUCT", help="compute the largest admissible dimension")
    p.add_argument("--resolution", default=None)

    p = sub.add_parser("verify", parents=[common], help="run the verification sweep")
    p.add_argument("--suite", default="desk", choices=sorted(harness.SUITES))
    p.add_argument("--config", default=None, help="JSON file overriding the suite's product lists")
    return parser


# -- helpers -----------------------------------------------------------------


def _as_product(space):
    return space if isinstance(space, ProductSpace) else ProductSpace((space,))


def _load_products(paths):
    """``--products`` semantics: metric-space files are the factors of one
    product (map onto itself); product files are domain [and codomain]."""
    docs = [load_document(p) for p in paths]
    if all(isinstance(d, MetricSpace) for d in docs):
        P = ProductSpace(tuple(docs))
        return P, P
    if len(docs) == 1:
        return _as_product(docs[0]), _as_product(docs[0])
    if len(docs) == 2:
        return _as_product(docs[0]), _as_product(docs[1])
    raise UsageError("--products takes factor files, or one or two product files")


def _inputs(paths):
    """Digest per input: spaces and products by their parsed content (so
    factor files referenced from a product are covered), others by bytes."""
    out = {}
    for p in paths:
        try:
            out[str(p)] = digest(load_document(p))
        except ProdisoError:
            try:
                out[str(p)] = digest(Path(p).read_bytes().decode("utf-8", "replace"))
            except OSError:
                out[str(p)] = None
    return out


def _text(report):
    lines = [f"command: {' '.join(report['command'])}"]
    for key, val in report["summary"].items():
        lines.append(f"{key}: {val}")
    rows = report["results"].get("products") if isinstance(report["results"], dict) else None
    if rows:
        lines.append("")
        lines.append(f"{'product':<16}{'isom':>8}{'reduc':>8}{'lemma':>8}  status")
        for r in rows:
            lines.append(
                f"{r['product']:<16}{r.get('isometries', '-'):>8}{r.get('reducible', '-'):>8}"
                f"{r.get('main_lemma', '-'):>8}  {r['status']}"
            )
    quads = report["results"].get("quad") if isinstance(report["results"], dict) else None
    if quads:
        lines.append("")
        for r in quads:
            lines.append(f"{r['product']:<16}L={r.get('max_quad_dimension', '?')}  {r['status']}")
    return "\n".join(lines) + "\n"


def _emit(report, cfg, started):
    report["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    if cfg.format == "json":
        body = json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"
    else:
        body = _text(report)
    if cfg.output_path:
        Path(cfg.output_path).write_text(body)
    else:
        sys.stdout.write(body)


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args, cfg):
    results = []
    for path in args.files:
        obj = load_document(path)
        if isinstance(obj, ProductSpace):
            flat = obj.as_metric_space()
            _check_axioms(flat.labels, flat.dist)
            results.append({"file": path, "kind": "product", "name": obj.name, "points": obj.size, "valid": True})
        else:
            results.append({"file": path, "kind": "space", "name": obj.name, "points": obj.size, "valid": True})
    return results, {"valid": len(results)}, EXIT_OK


def cmd_product(args, cfg):
    if args.factorize:
        space = load_document(args.factorize)
        if isinstance(space, ProductSpace):
            space = space.as_metric_space()
        found = factorize(space, args.max_factor, node_cap=cfg.search_node_cap)
        results = [
            {"factors": [space_to_doc(f) for f in P.factors], "isometry": isometry_to_doc(iso)}
            for P, iso in found
        ]
        return results, {"factorizations": len(found)}, EXIT_OK
    if not args.factors:
        raise UsageError("product needs factor files or --factorize")
    factors = []
    for path in args.factors:
        obj = load_document(path)
        factors.extend(obj.factors if isinstance(obj, ProductSpace) else [obj])
    P = ProductSpace(tuple(factors))
    results = {"product": product_to_doc(P), "points": P.size}
    if args.flatten:
        results["flattened"] = space_to_doc(P.as_metric_space())
    return results, {"factors": P.m, "points": P.size}, EXIT_OK


def cmd_isometries(args, cfg):
    dom = load_document(args.domain)
    cod = load_document(args.codomain) if args.codomain else dom
    isos = enumerate_isometries(dom, cod, node_cap=cfg.search_node_cap, workers=cfg.parallel_workers)
    closure = group_closure_report(isos) if args.codomain is None or dom == cod else None
    results = {"maps": [isometry_to_doc(f)["map"] for f in isos], "count": len(isos), "group_closure": closure}
    return results, {"count": len(isos), "group": None if closure is None else all(closure.values())}, EXIT_OK


def cmd_decompose(args, cfg):
    dom, cod = _load_products(args.products)
    if args.all:
        if dom != cod:
            raise UsageError("--all sweeps the isometry group; give one product")
        isos = enumerate_isometries(dom, cod, node_cap=cfg.search_node_cap, workers=cfg.parallel_workers)
    else:
        got = parse_map(Path(args.map_file).read_bytes(), dom, cod)
        if isinstance(got, IsometryViolation):
            raise ParseError(f"map is not an isometry: {got.kind} at {to_jsonable(got.witness)}")
        isos = [got]
    certs = batch_decompose(isos, workers=cfg.parallel_workers)
    results = []
    for f, c in zip(isos, certs):
        entry = certificate_to_doc(c, f.domain, f.codomain)
        entry["map"] = isometry_to_doc(f)["map"]
        if args.main_lemma:
            rep = check_main_lemma(f)
            entry["main_lemma"] = {"holds": rep.holds, "axis_map": rep.axis_map, "reason": rep.reason}
        results.append(entry)
    counts = {
        "reducible": sum(isinstance(c, Reducible) for c in certs),
        "irreducible": sum(isinstance(c, Irreducible) for c in certs),
        "hypothesis_violation": sum(isinstance(c, HypothesisViolation) for c in certs),
    }
    if counts["hypothesis_violation"]:
        code = EXIT_HYPOTHESIS
    elif counts["irreducible"]:
        code = EXIT_IRREDUCIBLE
    else:
        code = EXIT_OK
    return results, {"certificates": len(certs), **counts}, code


def _quad_doc(q):
    return {
        "dim": q.dim,
        "scale": format_rat(q.scale),
        "vertices": {lab: [format_rat(c) for c in v] for lab, v in zip(q.labels, q.vertices)},
        "edges": [[q.labels[u], q.labels[v]] for u, v in q.edges],
    }


def cmd_quad(args, cfg):
    r = to_rat(args.scale)
    res = None if args.resolution is None else to_rat(args.resolution)
    results, summary = {}, {}
    if args.embed:
        P = _as_product(load_document(args.embed))
        emb = embed_quad(P, default_chains(P, r), r, res)
        adm = is_admissible(emb)
        std = is_standard(emb)
        q = emb.quad
        results["graph"] = _quad_doc(q)
        results["embedding"] = {
            lab: list(P.label(P.index(p))) for lab, p in zip(q.labels, emb.vertex_map)
        }
        results["admissible"] = {
            "ok": adm.admissible,
            "edges": [
                {"edge": [q.labels[c.edge[0]], q.labels[c.edge[1]]], "ok": c.ok, "reason": c.reason}
                for c in adm.edges
            ],
        }
        results["standard"] = {"ok": std.standard, "axis_map": std.axis_map}
        results["q"] = {str(j + 1): q_statistic(emb, j) for j in range(q.dim)}
        summary.update(admissible=adm.admissible, standard=std.standard)
    if args.max_dim:
        P = _as_product(load_document(args.max_dim))
        L = max_quad_dimension(P, r, res, node_cap=cfg.search_node_cap, workers=cfg.parallel_workers)
        results["max_quad_dimension"] = L
        summary["max_quad_dimension"] = L
    if args.dim is not None:
        q = QuadGraph(args.dim, r)
        results["graph"] = _quad_doc(q)
        summary.update(vertices=len(q.vertices), edges=len(q.edges))
    if not results:
        raise UsageError("quad needs --dim, --embed or --max-dim")
    return results, summary, EXIT_OK


def cmd_verify(args, cfg):
    config = dict(harness.SUITES[args.suite])
    if args.config:
        try:
            override = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read suite config: {exc}") from None
        config.update(override)
    out = harness.run_suite(config, node_cap=cfg.search_node_cap, workers=cfg.parallel_workers)
    rows = out["products"] + out["quad"]
    summary = {
        "checks": len(rows),
        "passed": sum(r["status"] == "pass" for r in rows),
        "failed": sum(r["status"] == "fail" for r in rows),
        "inconclusive": sum(r["status"] == "inconclusive" for r in rows),
        "backend": DEFAULT_BACKEND,
    }
    code = EXIT_OK if out["passed"] else (EXIT_BUDGET if summary["failed"] == 0 else EXIT_VERIFY)
    return out, summary, code


COMMANDS = {
    "validate": cmd_validate,
    "product": cmd_product,
    "isometries": cmd_isometries,
    "decompose": cmd_decompose,
    "quad": cmd_quad,
    "verify": cmd_verify,
}


def dispatch(argv):
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cap = args.node_cap if args.node_cap is not None else default_node_cap()
        cfg = RunConfig(cap, args.workers, args.output, args.format)
    except UsageError as exc:
        print(f"prodiso: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"prodiso: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    paths = [v for k, v in vars(args).items() if k in ("files", "factors", "products") for v in (v or [])]
    paths += [v for k, v in vars(args).items() if k in ("domain", "codomain", "map_file", "embed", "max_dim", "factorize", "config") and v]
    try:
        results, summary, code = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"prodiso: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchBudgetExceeded as exc:
        print(f"prodiso: inconclusive: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ProdisoError as exc:
        print(f"prodiso: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {
        "command": list(argv),
        "inputs": _inputs(paths),
        "results": results,
        "summary": summary,
        "config": {"search_node_cap": cfg.search_node_cap, "max_points": DEFAULT_MAX_POINTS},
    }
    report["inputs_digest"] = digest({"inputs": report["inputs"], "command": report["command"]})
    _emit(report, cfg, started)
    return code


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
