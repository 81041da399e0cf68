"""Isoperimetric profile ``j(n) = max_{|A| <= n} |A| / |dA|``.

Exact values come from enumerating connected sets (a disconnected set never
beats its best component, by the mediant inequality).  Lower bounds come
from evaluating nested families: balls, coordinate boxes, Fiedler sublevel
sets.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .errors import InputError, ResourceError
from .graph import BoundedDegreeGraph, bfs_distances, edge_boundary, is_connected
from .profiles import ProfileCurve, ProfilePoint, running_max_points
from .spectral import cheeger_spectral_bound, fiedler  # noqa: F401  (re-exported)
from .subsets import walk_connected_sets

EXACT_BUDGET = 14


def interior_margin(G: BoundedDegreeGraph, root: int) -> int:
    """Distance from ``root`` to the nearest vertex below the degree bound."""
    if G.degree_bound is None:
        return 0
    dist = bfs_distances(G, root)
    short = dist[(G.degrees < G.degree_bound) & (dist >= 0)]
    return int(short.min()) if short.size else int(dist.max()) + 1


def _best_by_size(G, max_size, roots, anchored, size_cap, rank=None):
    """Per set size: (|A|, |dA|, sorted witness) of the best ratio found."""
    best: dict[int, tuple[int, int, tuple[int, ...]]] = {}

    def visit(sub, b):
        s = len(sub)
        if b == 0 or s > size_cap:
            return
        cur = best.get(s)
        if cur is None or s * cur[1] > cur[0] * b:
            best[s] = (s, b, tuple(sorted(sub)))
        elif s * cur[1] == cur[0] * b:
            w = tuple(sorted(sub))
            if w < cur[2]:
                best[s] = (s, b, w)

    walk_connected_sets(G, max_size, visit, roots, anchored, rank=rank)
    return best


def _merge(parts):
    best = {}
    for part in parts:
        for s, cand in part.items():
            cur = best.get(s)
            if cur is None or cand[0] * cur[1] > cur[0] * cand[1] or (
                cand[0] * cur[1] == cur[0] * cand[1] and cand[2] < cur[2]
            ):
                best[s] = cand
    return best


def _stratum(args):
    G, max_size, roots, anchored, cap = args
    return _best_by_size(G, max_size, roots, anchored, cap)


def exact_isoperimetric_profile(
    G: BoundedDegreeGraph,
    max_size: int,
    root: int | None = None,
    budget: int = EXACT_BUDGET,
    cap_half: bool = False,
    workers: int = 1,
    translation_invariant: bool = False,
) -> ProfileCurve:
    """Exact ``j(1..max_size)`` with one witness set per size.

    Host mode (``root=None``) maximises over all connected sets of ``G`` and
    needs ``max_size < |G|``.  Anchored mode (``root`` given) only looks at
    sets containing ``root``; on a vertex-transitive host this is the profile
    of the underlying infinite graph, valid when every vertex within
    ``2 * (max_size - 1)`` of the root has full degree.  Ties go to the
    smaller witness, then the lexicographically smaller one.

    ``translation_invariant`` (anchored mode, abelian hosts such as Z^d balls)
    visits one translate per set, the one whose lexicographically smallest
    label is the root's.  Same values, far fewer sets; witnesses may differ.
    """
    if max_size < 1:
        raise InputError("max_size must be >= 1")
    if max_size > budget:
        raise ResourceError(f"exact isoperimetric enumeration limited to size {budget}", budget=budget)
    meta = {"mode": "host" if root is None else "anchored", "cap_half": str(cap_half).lower()}
    if root is None:
        if not is_connected(G):
            raise InputError("exact_isoperimetric_profile needs a connected graph")
        if max_size >= G.vertex_count:
            raise InputError(f"max_size={max_size} must be below |G|={G.vertex_count}")
        roots = list(range(G.vertex_count))
    else:
        margin = interior_margin(G, root)
        if margin <= 2 * (max_size - 1):
            raise InputError(
                f"host too small: full-degree margin {margin} around the root, need > {2 * (max_size - 1)}"
            )
        meta["margin"] = str(margin)
        roots = [root]
    cap = G.vertex_count // 2 if cap_half else G.vertex_count
    if workers > 1 and root is None:
        strata = [roots[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            best = _merge(pool.map(_stratum, [(G, max_size, s, False, cap) for s in strata]))
    elif translation_invariant and root is not None:
        if G.labels is None:
            raise InputError("translation_invariant mode needs labels")
        rank = np.empty(G.vertex_count, dtype=np.int64)
        rank[np.lexsort(G.labels.T[::-1])] = np.arange(G.vertex_count)
        meta["mode"] = "anchored-lexmin"
        best = _best_by_size(G, max_size, roots, False, cap, rank.tolist())
    else:
        best = _best_by_size(G, max_size, roots, root is not None, cap)

    points, witnesses = [], {}
    run = None
    for n in range(1, max_size + 1):
        cand = best.get(n)
        if cand is not None and (run is None or cand[0] * run[1] > run[0] * cand[1]):
            run = cand
        if run is None:
            continue
        points.append(ProfilePoint(n, Fraction(run[0], run[1]), "exact"))
        witnesses[n] = run[2]
    return ProfileCurve("isoperimetric", points, G.name, witnesses, meta)


# ---------------------------------------------------------------------------
# lower-bound families


def _sublevel_samples(G, full, max_size):
    """Prefixes of the Fiedler order up to half the graph, boundary updated per vertex."""
    _, vec = fiedler(G)
    order = np.lexsort((np.arange(G.vertex_count), vec)).tolist()
    adj = G.adjacency
    inside = np.zeros(G.vertex_count, dtype=bool)
    b = 0
    stop = G.vertex_count // 2 if max_size is None else min(max_size, G.vertex_count // 2)
    for k, v in enumerate(order[:stop], start=1):
        if full is not None and not full[v]:
            break
        internal = sum(1 for u in adj[v] if inside[u])
        b += len(adj[v]) - 2 * internal
        inside[v] = True
        if b:
            yield k, Fraction(k, b)


def _family_sets(G, family, root, boxes):
    if family == "balls":
        dist = bfs_distances(G, root)
        for r in range(int(dist.max()) + 1):
            yield f"ball r={r}", np.flatnonzero((dist >= 0) & (dist <= r))
    elif family == "boxes":
        if G.labels is None:
            raise InputError("family 'boxes' needs coordinate labels")
        lab = G.labels
        if boxes is None:
            centre = lab[root]
            span = int(np.abs(lab - centre).max())
            boxes = [(centre - h, centre + h) for h in range(span + 1)]
        for lo, hi in boxes:
            lo, hi = np.asarray(lo), np.asarray(hi)
            yield f"box {lo.tolist()}..{hi.tolist()}", np.flatnonzero(np.all((lab >= lo) & (lab <= hi), axis=1))
    elif family == "sublevel":
        # handled incrementally by _sublevel_samples
        return
    else:
        raise InputError(f"unknown family {family!r}; expected balls, boxes or sublevel")


def family_isoperimetric_lowerbound(
    G: BoundedDegreeGraph,
    family: str,
    root: int = 0,
    boxes=None,
    interior: bool = True,
    max_size: int | None = None,
) -> ProfileCurve:
    """Running maximum of ``|A| / |dA|`` over a nested family of sets.

    ``interior`` drops sets containing a vertex below the degree bound, so the
    boundary seen on a truncated host equals the boundary in the infinite
    graph it approximates.  ``boxes`` overrides the default centred cubes with
    explicit inclusive ``(lo, hi)`` label bounds.
    """
    if not is_connected(G):
        raise InputError("family_isoperimetric_lowerbound needs a connected graph")
    full = None
    if interior and G.degree_bound is not None:
        full = G.degrees == G.degree_bound
    samples = []
    if family == "sublevel":
        samples.extend(_sublevel_samples(G, full, max_size))
    for name, members in _family_sets(G, family, root, boxes):
        if len(members) == 0 or (max_size is not None and len(members) > max_size):
            continue
        if full is not None and not full[members].all():
            continue
        score = edge_boundary(G, members.tolist())
        if score.ratio is None:
            continue
        samples.append((len(members), score.ratio))
    points = running_max_points(samples, "lower")
    meta = {"family": family, "interior": str(interior).lower()}
    return ProfileCurve("isoperimetric", points, G.name, {}, meta)


__all__ = [
    "EXACT_BUDGET",
    "exact_isoperimetric_profile",
    "family_isoperimetric_lowerbound",
    "cheeger_spectral_bound",
    "interior_margin",
]
