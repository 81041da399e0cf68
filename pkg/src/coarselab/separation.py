"""Balanced vertex cuts and separation profiles.

The cut of a graph on n vertices is the fewest vertices whose removal leaves
components of size s with ``2 * s <= n``.  A single vertex is declared
already cut (cut 0), see :data:`CONVENTIONS`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import InputError, NumericError, ResourceError
from .graph import (
    BoundedDegreeGraph,
    VertexSet,
    bfs_distances,
    component_sizes,
    connected_components,
    induced_subgraph,
    is_connected,
)
from .profiles import ProfileCurve, ProfilePoint, running_max_points
from .spectral import fiedler
from .subsets import walk_connected_sets

EXACT_CUT_BUDGET = 24
SUBSET_BUDGET = 200_000

CONVENTIONS = {
    "component bound": "2 * |component| <= n (integer arithmetic)",
    "n = 0": "cut 0 (nothing to separate)",
    "n = 1": "cut 0 (a single vertex is declared already cut)",
    "n = 2": "literal rule: cut 1 if the two vertices are adjacent, else 0",
    "subgraph class": "induced connected subgraphs of size <= n",
}


@dataclass(frozen=True)
class CutResult:
    separator: VertexSet
    removed_count: int
    component_sizes: tuple[int, ...]
    certificate: str
    vertex_count: int

    def __post_init__(self):
        if self.removed_count != len(self.separator):
            raise InputError("removed_count must equal the separator size")
        if list(self.component_sizes) != sorted(self.component_sizes, reverse=True):
            raise InputError("component sizes must be non-increasing")
        if self.vertex_count > 1 and any(2 * s > self.vertex_count for s in self.component_sizes):
            raise InputError("a component exceeds half the graph")

    def to_record(self) -> str:
        sep = " ".join(map(str, self.separator.members))
        comps = " ".join(map(str, self.component_sizes))
        return (
            "{\n"
            f"  certificate: {self.certificate}\n"
            f"  vertex_count: {self.vertex_count}\n"
            f"  removed_count: {self.removed_count}\n"
            f"  separator: [{sep}]\n"
            f"  component_sizes: [{comps}]\n"
            "}\n"
        )


def _masks_for(adjacency, members):
    local = {v: i for i, v in enumerate(members)}
    masks = []
    for v in members:
        m = 0
        for w in adjacency[v]:
            j = local.get(w)
            if j is not None:
                m |= 1 << j
        masks.append(m)
    return masks


def _components_fit(masks, remaining: int, limit: int) -> bool:
    """True when every component of ``remaining`` has at most ``limit`` vertices."""
    while remaining:
        low = remaining & -remaining
        comp = frontier = low
        while frontier:
            grow = 0
            f = frontier
            while f:
                b = f & -f
                grow |= masks[b.bit_length() - 1]
                f ^= b
            frontier = grow & remaining & ~comp
            comp |= frontier
            if comp.bit_count() > limit:
                return False
        remaining &= ~comp
    return True


def _min_separator(masks, n: int) -> tuple[int, ...]:
    """Lexicographically smallest minimum separator (local indices)."""
    if n <= 1:
        return ()
    limit = n // 2
    full = (1 << n) - 1
    for k in range(n):
        for S in combinations(range(n), k):
            rem = full
            for v in S:
                rem &= ~(1 << v)
            if _components_fit(masks, rem, limit):
                return S
    return tuple(range(n))


def cut_exact(G: BoundedDegreeGraph, budget: int = EXACT_CUT_BUDGET) -> CutResult:
    """Minimum balanced vertex separator by iterative deepening on its size.

    k-subsets are tried in lexicographic order, so the witness is the
    lexicographically smallest among minimum separators.  Component growth
    is abandoned as soon as it passes ``n // 2``.
    """
    n = G.vertex_count
    if n > budget:
        raise ResourceError(f"cut_exact is limited to {budget} vertices, got {n}", budget=budget)
    members = list(range(n))
    sep = _min_separator(_masks_for(G.adjacency, members), n)
    sizes = tuple(component_sizes(G, sep)) if n else ()
    return CutResult(VertexSet(tuple(sep), n), len(sep), sizes, "exact", n)


def cut_value_exact(adjacency, members) -> int:
    """Exact cut of the subgraph induced on ``members`` (no graph object built)."""
    return len(_min_separator(_masks_for(adjacency, list(members)), len(members)))


# ---------------------------------------------------------------------------
# spectral upper bound


def _sweep_separator(H: BoundedDegreeGraph, halve: bool = False) -> list[int]:
    """Fiedler sweep on a connected graph; returns local separator vertices.

    ``halve`` uses the exact-half threshold instead of the min-cut one.  On
    odd sizes the separator then comes from the side one vertex larger, so
    both sides end within the size limit.
    """
    m = H.vertex_count
    if m == 2:
        return [1]
    _, vec = fiedler(H)
    order = np.lexsort((np.arange(m), vec)).tolist()
    adj = H.adjacency
    pos = np.empty(m, dtype=np.int64)
    pos[order] = np.arange(m)
    inside = np.zeros(m, dtype=bool)
    cuts = np.zeros(m + 1, dtype=np.int64)  # cuts[i] = edges leaving the first i vertices
    c = 0
    for i, v in enumerate(order, start=1):
        internal = sum(1 for u in adj[v] if inside[u])
        c += len(adj[v]) - 2 * internal
        inside[v] = True
        cuts[i] = c
    lo, hi = max(1, math.ceil(m / 3)), min(m - 1, (2 * m) // 3)
    if lo > hi:
        lo, hi = 1, m - 1
    if halve:
        i = (m + 1) // 2
        prefix_smaller = m % 2 == 0
    else:
        cand = np.arange(lo, hi + 1)
        # minimise cut edges, then imbalance, then threshold
        key = np.lexsort((cand, np.abs(2 * cand - m), cuts[cand]))
        i = int(cand[key[0]])
        prefix_smaller = i <= m - i
    sep = set()
    for v in order[:i]:
        for u in adj[v]:
            if pos[u] >= i:
                sep.add(v if prefix_smaller else u)
    return sorted(sep)


def _prune(G: BoundedDegreeGraph, sep: set[int], limit: int) -> set[int]:
    """Give back separator vertices (highest index first) while pieces still fit."""
    n = G.vertex_count
    parent = list(range(n))
    size = [1] * n

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj = G.adjacency
    alive = [v not in sep for v in range(n)]
    for u, v in G.edges.tolist():
        if alive[u] and alive[v]:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                size[rv] += size[ru]
    kept = set(sep)
    for v in sorted(sep, reverse=True):
        roots = {find(u) for u in adj[v] if alive[u]}
        if 1 + sum(size[r] for r in roots) <= limit:
            kept.discard(v)
            alive[v] = True
            for r in roots:
                rv = find(v)
                if r != rv:
                    parent[r] = rv
                    size[rv] += size[r]
    return kept


def _spectral_separator(G: BoundedDegreeGraph, halve_first: bool) -> set[int]:
    limit = G.vertex_count // 2
    sep: set[int] = set()
    queue = [np.arange(G.vertex_count, dtype=np.int64)]
    first = True
    while queue:
        comp = queue.pop()
        if len(comp) <= limit:
            continue
        H, idx = induced_subgraph(G, comp.tolist())
        local = _sweep_separator(H, halve=halve_first and first)
        first = False
        sep.update(idx[local].tolist())
        rest = np.setdiff1d(comp, idx[local])
        R, ridx = induced_subgraph(G, rest.tolist())
        for c in connected_components(R):
            if len(c) > limit:
                queue.append(ridx[c])
    return _prune(G, sep, limit)


def cut_spectral(G: BoundedDegreeGraph) -> CutResult:
    """Upper bound on the cut from Fiedler sweeps.

    The sweep threshold with fewest cut edges in the middle third is turned
    into a vertex separator by taking cut-edge endpoints on the smaller side;
    oversized leftover components are swept again, and finally redundant
    separator vertices are returned greedily in decreasing index order.
    A second run opens with the exact-half threshold instead (a min-cut
    threshold near one third often forces a second sweep line); the smaller
    separator wins, ties going to the first run.
    """
    n = G.vertex_count
    if n < 3:
        raise InputError("cut_spectral needs at least 3 vertices")
    if not is_connected(G):
        raise InputError("cut_spectral needs a connected graph")
    limit = n // 2
    sep = _spectral_separator(G, False)
    other = _spectral_separator(G, True)
    if len(other) < len(sep):
        sep = other
    sizes = component_sizes(G, sorted(sep))
    if any(s > limit for s in sizes):
        raise NumericError("spectral separator failed its component check")
    members = tuple(sorted(sep))
    return CutResult(VertexSet(members, n), len(members), tuple(sizes), "upper", n)


# ---------------------------------------------------------------------------
# profiles


def _exact_tiny(G, max_n, root, subset_budget):
    adj = G.adjacency
    best: dict[int, tuple[int, tuple[int, ...]]] = {}

    def visit(sub, b):
        s = len(sub)
        c = cut_value_exact(adj, sub)
        cur = best.get(s)
        if cur is None or c > cur[0]:
            best[s] = (c, tuple(sorted(sub)))
        elif c == cur[0]:
            w = tuple(sorted(sub))
            if w < cur[1]:
                best[s] = (c, w)

    roots = None if root is None else [root]
    try:
        walk_connected_sets(G, max_n, visit, roots, root is not None, limit=subset_budget)
    except ResourceError as exc:
        raise ResourceError(
            f"{exc}; use strategy family_balls or family_spectral for sizes this large", budget=subset_budget
        ) from None
    return best


def _ball_subgraphs(G, root, radii):
    dist = bfs_distances(G, root)
    top = int(dist.max())
    radii = range(top + 1) if radii is None else radii
    for r in radii:
        if r > top:
            break
        yield f"ball r={r}", np.flatnonzero((dist >= 0) & (dist <= r))


def _spectral_blocks(G, min_size=4):
    """Recursive Fiedler bisection; every block (largest piece) is yielded."""
    stack = [np.arange(G.vertex_count, dtype=np.int64)]
    while stack:
        block = stack.pop()
        yield f"block n={len(block)}", np.sort(block)
        if len(block) < 2 * min_size:
            continue
        H, idx = induced_subgraph(G, block.tolist())
        _, vec = fiedler(H)
        order = np.lexsort((np.arange(len(block)), vec))
        half = len(block) // 2
        for part in (order[:half], order[half:]):
            P, pidx = induced_subgraph(H, part.tolist())
            comps = connected_components(P)
            if comps and len(comps[0]) >= min_size:
                stack.append(idx[pidx[comps[0]]])


def _box_subgraphs(G, boxes):
    if G.labels is None:
        raise InputError("family_boxes needs coordinate labels")
    for lo, hi in boxes:
        lo, hi = np.asarray(lo), np.asarray(hi)
        yield f"box {lo.tolist()}..{hi.tolist()}", np.flatnonzero(np.all((G.labels >= lo) & (G.labels <= hi), axis=1))


def separation_profile(
    G: BoundedDegreeGraph,
    sizes=None,
    strategy: str = "family_balls",
    root: int | None = None,
    radii=None,
    boxes=None,
    subset_budget: int = SUBSET_BUDGET,
    exact_budget: int = EXACT_CUT_BUDGET,
) -> ProfileCurve:
    """Separation profile estimate.

    ``exact_tiny`` maximises the exact cut over every connected induced
    subgraph of size <= n (anchored at ``root`` if given) and certifies
    ``exact``.  Family strategies evaluate canonical subgraphs: induced balls
    around ``root`` (``family_balls``), recursive Fiedler blocks
    (``family_spectral``) or label boxes (``family_boxes``); they certify
    ``lower``, because any subgraph's cut bounds the supremum from below.
    Family subgraphs above ``exact_budget`` vertices are cut spectrally, which
    the curve metadata records.
    """
    n_host = G.vertex_count
    if sizes is not None:
        sizes = sorted(set(int(s) for s in sizes))
        if sizes and (sizes[0] < 1 or sizes[-1] > n_host):
            raise InputError(f"sizes must lie in [1, {n_host}]")
    meta = {"strategy": strategy}
    if strategy == "exact_tiny":
        if not sizes:
            raise InputError("exact_tiny needs explicit sizes")
        max_n = sizes[-1]
        if root is not None:
            margin = int(bfs_distances(G, root).max())
            if G.degree_bound is not None:
                from .isoperimetry import interior_margin

                margin = interior_margin(G, root)
            if margin < max_n - 1:
                raise InputError(f"host margin {margin} too small for anchored subgraphs of size {max_n}")
            meta["margin"] = str(margin)
        best = _exact_tiny(G, max_n, root, subset_budget)
        points, witnesses, run = [], {}, None
        for n in range(1, max_n + 1):
            cand = best.get(n)
            if cand is not None and (run is None or cand[0] > run[0]):
                run = cand
            if n in sizes and run is not None:
                points.append(ProfilePoint(n, Fraction(run[0]), "exact"))
                witnesses[n] = run[1]
        return ProfileCurve("separation", points, G.name, witnesses, meta)

    root = 0 if root is None else root
    if strategy == "family_balls":
        subgraphs = _ball_subgraphs(G, root, radii)
    elif strategy == "family_spectral":
        subgraphs = _spectral_blocks(G)
    elif strategy == "family_boxes":
        if boxes is None:
            raise InputError("family_boxes needs explicit boxes")
        subgraphs = _box_subgraphs(G, boxes)
    else:
        raise InputError(f"unknown strategy {strategy!r}")
    cap = sizes[-1] if sizes else n_host
    samples = []
    spectral_used = False
    for _, members in subgraphs:
        if len(members) == 0 or len(members) > cap:
            continue
        H, _ = induced_subgraph(G, members.tolist())
        comps = connected_components(H)
        if len(comps) > 1:
            # only the largest piece can carry the supremum
            H, _ = induced_subgraph(H, comps[0])
        if H.vertex_count <= exact_budget:
            value = cut_exact(H, exact_budget).removed_count
        else:
            value = cut_spectral(H).removed_count
            spectral_used = True
        samples.append((len(members), value))
    meta["cut_evaluator"] = "exact+spectral" if spectral_used else "exact"
    points = running_max_points(samples, "lower")
    return ProfileCurve("separation", points, G.name, {}, meta)


# ---------------------------------------------------------------------------
# Le Coz-Gournay trend check


@dataclass
class InequalityReport:
    sizes: list[int]
    ratios: list[float]  # K(v)
    max_ratio: float
    slope: float | None
    tolerance: float
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            "[lcg_inequality]",
            "statement = v / sep(v) <= C j(v) (log v)^2",
            f"points = {len(self.sizes)}",
            f"max_K = {self.max_ratio:.6g}",
            f"log_K_slope = {'nan' if self.slope is None else f'{self.slope:.6f}'}",
            f"slope_tolerance = {self.tolerance}",
            f"verdict = {self.verdict}",
        ]
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def lcg_inequality_report(j: ProfileCurve, sep: ProfileCurve, slope_tolerance: float = 0.1, window=None) -> InequalityReport:
    """Pointwise ``K(v) = (v / sep(v)) / (j(v) (log v)^2)`` and its log-log trend.

    ``j`` is read as a step function (it is a supremum over nested sets) at
    the sizes of ``sep``.  Verdict ``consistent`` when the fitted slope of
    ``log K`` against ``log v`` is at most ``slope_tolerance``.
    """
    from .analysis import fit_points

    if j.kind != "isoperimetric" or sep.kind != "separation":
        raise InputError("lcg_inequality_report takes (isoperimetric, separation) curves")
    if j.source and sep.source and j.source != sep.source:
        raise InputError(f"curves come from different sources: {j.source!r} vs {sep.source!r}")
    notes = []
    vs, ks = [], []
    for p in sep.points:
        v = p.size
        if p.value == 0:
            notes.append(f"skipped v={v}: sep(v)=0")
            continue
        if v < 2:
            continue
        jv = j.value_at(v)
        if jv is None or jv == 0:
            continue
        K = (v / float(p.value)) / (float(jv) * math.log(v) ** 2)
        vs.append(v)
        ks.append(K)
    if not vs:
        return InequalityReport([], [], float("nan"), None, slope_tolerance, "inconclusive", notes + ["no overlapping sizes"])
    try:
        fit = fit_points(vs, ks, window)
    except InputError as exc:
        return InequalityReport(vs, ks, max(ks), None, slope_tolerance, "inconclusive", notes + [str(exc)])
    verdict = "consistent" if fit.slope <= slope_tolerance else "inconsistent"
    return InequalityReport(vs, ks, max(ks), fit.slope, slope_tolerance, verdict, notes)


# ---------------------------------------------------------------------------
# monotonicity under maps


def cut_domination_violations(domain: BoundedDegreeGraph, codomain: BoundedDegreeGraph, images, max_size: int):
    """Compare exact cuts of connected domain subgraphs with their images.

    For an injective map, returns ``(subset, domain_cut, image_cut)`` for every
    connected subset of size <= ``max_size`` whose image cut is smaller.
    """
    images = np.asarray(images)
    if len(np.unique(images)) != len(images):
        raise InputError("cut domination is checked for injective maps only")
    dadj, cadj = domain.adjacency, codomain.adjacency
    bad = []

    def visit(sub, b):
        c_dom = cut_value_exact(dadj, sub)
        c_img = cut_value_exact(cadj, images[sub].tolist())
        if c_img < c_dom:
            bad.append((tuple(sorted(sub)), c_dom, c_img))

    walk_connected_sets(domain, max_size, visit)
    return bad
