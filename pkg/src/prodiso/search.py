"""Backend selection for the backtracking kernel.

The compiled ``_csearch`` extension is used when it imports; otherwise, or
when ``PRODISO_PURE=1`` is set, the pure-Python ``_pysearch`` runs instead.
Both return identical results in identical order.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import _pysearch
from .errors import SearchBudgetExceeded

try:
    if os.environ.get("PRODISO_PURE"):
        raise ImportError("pure backend requested")
    from . import _csearch
except ImportError:
    _csearch = None

BACKENDS = {"python": _pysearch}
if _csearch is not None:
    BACKENDS["cython"] = _csearch

DEFAULT_BACKEND = "cython" if _csearch is not None else "python"

#: Default node cap, overridable with ``PRODISO_NODE_CAP``.
DEFAULT_NODE_CAP = 10**7


def default_node_cap():
    raw = os.environ.get("PRODISO_NODE_CAP")
    if raw:
        cap = int(raw)
        if cap <= 0:
            raise ValueError("PRODISO_NODE_CAP must be positive")
        return cap
    return DEFAULT_NODE_CAP


def _pick(pattern, target, backend):
    if backend is None:
        backend = DEFAULT_BACKEND
    if backend == "cython" and (
        np.asarray(pattern).dtype == object or np.asarray(target).dtype == object
    ):
        # beyond int64; only the Python kernel handles big integers
        backend = "python"
    return BACKENDS[backend]


def _run(args):
    pattern, target, allowed, limit, node_cap, backend = args
    return _pick(pattern, target, backend).search(pattern, target, allowed, limit, node_cap)


def find_maps(pattern, target, allowed, limit=None, node_cap=None, workers=1, backend=None):
    """All (or the first ``limit``) injective colour-preserving maps.

    Raises :class:`SearchBudgetExceeded` when more than ``node_cap`` partial
    assignments are visited; the solutions found so far ride along on the
    exception. With ``workers > 1`` the first level is split across
    processes and results are concatenated in order, so the output is the
    same as the serial run.
    """
    if node_cap is None:
        node_cap = default_node_cap()
    lim = -1 if limit is None else int(limit)
    allowed = np.asarray(allowed, dtype=bool)
    # the kernels compare off-diagonal entries only; fold the diagonal in here
    if len(pattern):
        pd = np.diagonal(np.asarray(pattern))[:, None]
        td = np.diagonal(np.asarray(target))[None, :]
        allowed = allowed & (pd == td)
    if workers <= 1 or len(pattern) == 0:
        sols, nodes, capped = _run((pattern, target, allowed, lim, node_cap, backend))
        if capped:
            raise SearchBudgetExceeded(node_cap, nodes, found=sols)
        return sols

    jobs = []
    for c in np.nonzero(allowed[0])[0]:
        sub = allowed.copy()
        sub[0] = False
        sub[0, c] = True
        jobs.append((pattern, target, sub, lim, node_cap, backend))
    sols, nodes = [], 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part, used, capped in pool.map(_run, jobs):
            sols.extend(part)
            nodes += used
            if capped or nodes > node_cap:
                raise SearchBudgetExceeded(node_cap, nodes, found=sols)
            if lim >= 0 and len(sols) >= lim:
                return sols[:lim]
    return sols
