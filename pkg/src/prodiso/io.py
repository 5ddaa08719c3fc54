"""JSON documents for spaces, products, maps and certificates.

Rationals travel as bare ints or ``"p/q"`` strings; floats are never
produced or accepted.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .decompose import HypothesisViolation, Irreducible, Reducible
from .errors import ParseError, ProdisoError
from .isometry import Isometry, IsometryViolation, is_isometry
from .metric import DEFAULT_MAX_POINTS, MetricSpace, validate
from .product import NotASlice, ProductSpace, Slice
from .rational import format_rat, to_rat


def _load_json(data):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def space_from_doc(doc, max_points=DEFAULT_MAX_POINTS):
    if not isinstance(doc, dict):
        raise ParseError("a metric-space document must be a JSON object")
    name = doc.get("name", "space")
    points = doc.get("points")
    dist = doc.get("distances")
    if not isinstance(name, str):
        raise ParseError('"name" must be a string')
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise ParseError('"points" must be a list of strings')
    if not isinstance(dist, list) or not all(isinstance(row, list) for row in dist):
        raise ParseError('"distances" must be a list of rows')
    for i, row in enumerate(dist):
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, str)):
                exc = ParseError(f"distance entries must be integers or 'p/q' strings, got {v!r}")
                exc.entry = (i, j)
                raise exc
            try:
                to_rat(v)
            except ParseError as exc:
                exc.entry = (i, j)
                raise
    return validate(points, dist, name=name, max_points=max_points)


def _locate_entry(text, dist, entry):
    """Line and column of matrix entry ``entry`` in the raw document, found
    as the matching occurrence of its literal after the "distances" key."""
    i, j = entry
    bad = dist[i][j]
    literal = json.dumps(bad)
    before = [v for row in dist[:i] for v in row] + list(dist[i][:j])
    nth = sum(1 for v in before if json.dumps(v) == literal)
    pos = text.find('"distances"')
    if pos < 0:
        return None
    for _ in range(nth + 1):
        pos = text.find(literal, pos + 1)
        if pos < 0:
            return None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _space_with_position(doc, data, max_points):
    try:
        return space_from_doc(doc, max_points=max_points)
    except ParseError as exc:
        entry = getattr(exc, "entry", None)
        if entry is None or exc.line is not None:
            raise
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        where = _locate_entry(text, doc["distances"], entry)
        if where is None:
            raise
        raise ParseError(f"{exc} at distances[{entry[0]}][{entry[1]}]", *where) from None


def parse_space_file(data, max_points=DEFAULT_MAX_POINTS):
    """Parse and validate a metric-space document given as bytes or text.

    Bad matrix entries are reported with their line and column.
    """
    return _space_with_position(_load_json(data), data, max_points)


def space_to_doc(space):
    return {
        "name": space.name,
        "points": list(space.labels),
        "distances": [[format_rat(v) for v in row] for row in space.dist],
    }


def product_from_doc(doc, base_dir=Path("."), max_points=DEFAULT_MAX_POINTS):
    factors = doc.get("factors")
    if not isinstance(factors, list) or not factors:
        raise ParseError('"factors" must be a nonempty list')
    out = []
    for entry in factors:
        if isinstance(entry, dict) and "file" in entry:
            path = Path(base_dir) / entry["file"]
            try:
                raw = path.read_bytes()
            except OSError as exc:
                raise ParseError(f"cannot read factor file {path}: {exc.strerror}") from None
            out.append(parse_space_file(raw, max_points=max_points))
        else:
            out.append(space_from_doc(entry, max_points=max_points))
    return ProductSpace(tuple(out))


def product_to_doc(product):
    return {"factors": [space_to_doc(f) for f in product.factors]}


def load_document(path, max_points=DEFAULT_MAX_POINTS):
    """A file holding either a metric space or a product."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    doc = _load_json(raw)
    if isinstance(doc, dict) and "factors" in doc:
        return product_from_doc(doc, path.parent, max_points=max_points)
    return _space_with_position(doc, raw, max_points)


def point_json(space, idx):
    if isinstance(space, ProductSpace):
        return list(space.label(idx))
    return space.label(idx)


def _point_from_json(space, value):
    if isinstance(space, ProductSpace):
        if not isinstance(value, list):
            raise ParseError(f"product points are label arrays, got {value!r}")
        try:
            return space.index(space.point_of_labels([str(v) for v in value]))
        except (KeyError, ProdisoError) as exc:
            raise ParseError(f"bad product point {value!r}: {exc}") from None
    try:
        return space.index_of(str(value))
    except KeyError as exc:
        raise ParseError(str(exc)) from None


def isometry_to_doc(f):
    return {
        "domain": f.domain.name,
        "codomain": f.codomain.name,
        "map": [[point_json(f.domain, i), point_json(f.codomain, v)] for i, v in enumerate(f.map)],
    }


def parse_map(data, domain, codomain):
    """Read a map document and verify it.

    Accepts ``{"map": [[src, dst], ...]}`` (points as labels or label
    arrays) or, for plain spaces, an object ``{src_label: dst_label}``.
    Returns an :class:`Isometry` or :class:`IsometryViolation`.
    """
    doc = _load_json(data) if isinstance(data, (bytes, str)) else data
    if isinstance(doc, dict) and "map" in doc:
        pairs = doc["map"]
        if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
            raise ParseError('"map" must be a list of [source, target] pairs')
    elif isinstance(doc, dict):
        pairs = list(doc.items())
    else:
        raise ParseError("map document must be a JSON object")
    mapping = {}
    for src, dst in pairs:
        i = _point_from_json(domain, src)
        if i in mapping:
            raise ParseError(f"point {src!r} mapped twice")
        mapping[i] = _point_from_json(codomain, dst)
    if len(mapping) != domain.size:
        raise ParseError(f"map covers {len(mapping)} of {domain.size} points")
    return is_isometry(domain, codomain, [mapping[i] for i in range(domain.size)])


def slice_to_doc(product, sl):
    pts = sl.points()
    return {
        "axis": sl.axis,
        "points": [list(product.label(product.index(p))) for p in pts],
    }


def not_a_slice_to_doc(product, ns):
    return {
        "pair": [list(product.label(product.index(p))) for p in ns.pair],
        "axes": list(ns.axes),
    }


def certificate_to_doc(cert, domain=None, codomain=None):
    """JSON form of a certificate. Witness points are label arrays when the
    spaces are supplied, raw coordinate indices otherwise."""

    def pts(space, points):
        if space is None:
            return [list(map(int, p)) for p in points]
        return [list(space.label(space.index(p))) for p in points]

    if isinstance(cert, Reducible):
        d = cert.decomposition
        return {
            "verdict": cert.verdict,
            "perm": list(d.perm),
            "factor_maps": [
                {
                    point_json(d.domain.factors[i], x): point_json(d.codomain.factors[d.perm[i]], y)
                    for x, y in enumerate(d.factor_map(i))
                }
                for i in range(d.domain.m)
            ],
        }
    if isinstance(cert, Irreducible):
        out = {"verdict": cert.verdict, "reason": cert.reason}
        if cert.slice is not None:
            out["witness"] = {
                "axis": cert.slice.axis,
                "slice": pts(domain, cert.slice.points()),
                "image": pts(codomain, cert.image),
                "image_differs_on": list(cert.classification.axes),
            }
        if "point" in cert.detail:
            out["mismatch_point"] = pts(domain, [cert.detail["point"]])[0]
        return out
    if isinstance(cert, HypothesisViolation):
        return {"verdict": cert.verdict, "kind": cert.kind, "detail": cert.detail}
    raise TypeError(f"not a certificate: {cert!r}")


def to_jsonable(obj):
    """Recursively convert library values into JSON-ready structures."""
    from fractions import Fraction

    if isinstance(obj, Fraction):
        return format_rat(obj)
    if isinstance(obj, Slice):
        return {"axis": obj.axis, "fixed": list(obj.fixed), "axis_set": sorted(obj.axis_set)}
    if isinstance(obj, NotASlice):
        return {"pair": [list(p) for p in obj.pair], "axes": list(obj.axes)}
    if isinstance(obj, (Reducible, Irreducible, HypothesisViolation)):
        return certificate_to_doc(obj)
    if isinstance(obj, Isometry):
        return isometry_to_doc(obj)
    if isinstance(obj, IsometryViolation):
        return {"kind": obj.kind, "witness": to_jsonable(obj.witness)}
    if isinstance(obj, MetricSpace):
        return space_to_doc(obj)
    if isinstance(obj, ProductSpace):
        return product_to_doc(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def digest(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()
