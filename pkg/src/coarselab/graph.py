"""Immutable bounded-degree graphs and the set primitives everything else uses.

Graphs are stored in compressed sparse row form (``indptr``/``indices``) with
sorted neighbor rows, so they can be handed to scipy without copying and
walked from Python through :attr:`BoundedDegreeGraph.adjacency` when small.
"""

from __future__ import annotations

import io
import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .errors import InputError, ResourceError

DEFAULT_MAX_VERTICES = 5_000_000


class BoundedDegreeGraph:
    """Simple undirected graph with a declared degree bound.

    ``degree_bound`` is ``None`` only for graphs that deliberately waive it
    (combinatorial horoballs).  ``labels`` is an optional ``(n, w)`` integer
    array of pairwise distinct coordinates.
    """

    def __init__(self, indptr, indices, degree_bound=None, labels=None, name="", check=True):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.ndim == 1:
                labels = labels.reshape(-1, 1)
            labels.flags.writeable = False
        self.labels = labels
        self.degree_bound = None if degree_bound is None else int(degree_bound)
        self.name = name
        if check:
            validate(self)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_edges(cls, vertex_count, edges, degree_bound="auto", labels=None, name=""):
        """Build from an edge list; duplicate and reversed edges are merged."""
        n = int(vertex_count)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise InputError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise InputError("self-loops are not allowed")
        both = np.concatenate([e, e[:, ::-1]])
        keys = np.unique(both[:, 0] * max(n, 1) + both[:, 1])
        rows, cols = np.divmod(keys, max(n, 1))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        if isinstance(degree_bound, str):
            deg = np.diff(indptr)
            degree_bound = max(int(deg.max()) if n else 1, 1)
        return cls(indptr, cols, degree_bound, labels, name)

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Iterable[int]], degree_bound="auto", labels=None, name=""):
        edges = [(u, v) for u, nbrs in enumerate(adjacency) for v in nbrs if u < v]
        return cls.from_edges(len(adjacency), edges, degree_bound, labels, name)

    # basic accessors --------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.indptr) - 1

    def __len__(self):
        return self.vertex_count

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Neighbor lists as plain Python ints (for enumeration loops)."""
        ind = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [ind[ptr[v]:ptr[v + 1]] for v in range(self.vertex_count)]

    @cached_property
    def neighbor_masks(self) -> list[int]:
        masks = []
        for nbrs in self.adjacency:
            m = 0
            for w in nbrs:
                m |= 1 << w
            masks.append(m)
        return masks

    @cached_property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    @cached_property
    def csr(self) -> scipy.sparse.csr_matrix:
        n = self.vertex_count
        data = np.ones(len(self.indices), dtype=np.float64)
        return scipy.sparse.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    @cached_property
    def label_index(self) -> dict[tuple[int, ...], int]:
        if self.labels is None:
            raise InputError("graph has no labels")
        return {tuple(row): i for i, row in enumerate(self.labels.tolist())}

    def label(self, v: int) -> tuple[int, ...]:
        if self.labels is None:
            raise InputError("graph has no labels")
        return tuple(int(x) for x in self.labels[v])

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def __eq__(self, other):
        if not isinstance(other, BoundedDegreeGraph):
            return NotImplemented
        if self.degree_bound != other.degree_bound:
            return False
        if not (np.array_equal(self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None

    def __repr__(self):
        bound = "none" if self.degree_bound is None else self.degree_bound
        return f"BoundedDegreeGraph(n={self.vertex_count}, m={self.edge_count}, bound={bound}, name={self.name!r})"


def validate(G: BoundedDegreeGraph) -> None:
    """Raise InputError unless every structural invariant holds."""
    n = G.vertex_count
    if n < 0 or G.indptr[0] != 0 or np.any(np.diff(G.indptr) < 0) or G.indptr[-1] != len(G.indices):
        raise InputError("malformed indptr")
    if len(G.indices) and (G.indices.min() < 0 or G.indices.max() >= n):
        raise InputError("neighbor index out of range")
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(G.indptr))
    if np.any(rows == G.indices):
        raise InputError("self-loop present")
    same_row = rows[1:] == rows[:-1]
    if np.any(np.diff(G.indices)[same_row] <= 0):
        raise InputError("neighbor rows must be strictly increasing (no duplicates)")
    fwd = np.sort(rows * n + G.indices)
    bwd = np.sort(G.indices * n + rows)
    if not np.array_equal(fwd, bwd):
        raise InputError("adjacency is not symmetric")
    if G.degree_bound is not None:
        if G.degree_bound < 1:
            raise InputError("degree_bound must be positive")
        if n and np.diff(G.indptr).max(initial=0) > G.degree_bound:
            raise InputError("a vertex exceeds the degree bound")
    if G.labels is not None:
        if G.labels.shape[0] != n:
            raise InputError("one label per vertex required")
        if n and len(np.unique(G.labels, axis=0)) != n:
            raise InputError("labels must be pairwise distinct")


# ---------------------------------------------------------------------------
# vertex sets


@dataclass(frozen=True)
class VertexSet:
    members: tuple[int, ...]
    host_size: int

    def __post_init__(self):
        m = self.members
        if any(b <= a for a, b in zip(m, m[1:])):
            raise InputError("VertexSet members must be sorted and distinct")
        if m and (m[0] < 0 or m[-1] >= self.host_size):
            raise InputError("VertexSet member outside host")

    @classmethod
    def of(cls, members: Iterable[int], host_size: int) -> "VertexSet":
        return cls(tuple(sorted({int(v) for v in members})), int(host_size))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        i = np.searchsorted(self.members, v)
        return i < len(self.members) and self.members[i] == v

    def mask(self) -> np.ndarray:
        out = np.zeros(self.host_size, dtype=bool)
        out[list(self.members)] = True
        return out


def as_vertex_set(G: BoundedDegreeGraph, A) -> VertexSet:
    if isinstance(A, VertexSet):
        if A.host_size != G.vertex_count:
            raise InputError("VertexSet belongs to a different host")
        return A
    return VertexSet.of(A, G.vertex_count)


@dataclass(frozen=True)
class BoundaryScore:
    set_size: int
    boundary_size: int
    ratio: Fraction | None  # None when the boundary is empty

    @property
    def defined(self) -> bool:
        return self.ratio is not None


# ---------------------------------------------------------------------------
# traversal


def _gather_neighbors(G: BoundedDegreeGraph, frontier: np.ndarray) -> np.ndarray:
    starts = G.indptr[frontier]
    lengths = G.indptr[frontier + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(lengths)[:-1]]), lengths)
    return G.indices[offsets + np.arange(total)]


def bfs_distances(G: BoundedDegreeGraph, source: int, max_radius: int | None = None) -> np.ndarray:
    """Graph distances from ``source``; unreachable (or beyond radius) is -1."""
    n = G.vertex_count
    if not 0 <= source < n:
        raise InputError(f"vertex {source} out of range [0, {n})")
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    r = 0
    while frontier.size and (max_radius is None or r < max_radius):
        nbrs = _gather_neighbors(G, frontier)
        nbrs = np.unique(nbrs[dist[nbrs] < 0])
        r += 1
        dist[nbrs] = r
        frontier = nbrs
    return dist


def bfs_ball(G: BoundedDegreeGraph, center: int, radius: int) -> VertexSet:
    if radius < 0:
        raise InputError("radius must be non-negative")
    dist = bfs_distances(G, center, radius)
    return VertexSet(tuple(np.flatnonzero(dist >= 0).tolist()), G.vertex_count)


def distance_rows(G: BoundedDegreeGraph, sources: Sequence[int], chunk: int = 16):
    """Yield ``(source, distances)`` using scipy's unweighted shortest paths.

    Unreachable entries are -1.
    """
    sources = list(sources)
    for i in range(0, len(sources), chunk):
        part = sources[i:i + chunk]
        D = scipy.sparse.csgraph.shortest_path(G.csr, directed=False, unweighted=True, indices=part)
        D = np.atleast_2d(D)
        for s, row in zip(part, D):
            out = np.where(np.isinf(row), -1, row).astype(np.int64)
            yield s, out


def all_pairs_distances(G: BoundedDegreeGraph) -> np.ndarray:
    D = scipy.sparse.csgraph.shortest_path(G.csr, directed=False, unweighted=True)
    return np.where(np.isinf(D), -1, D).astype(np.int64)


# ---------------------------------------------------------------------------
# set operations


def edge_boundary(G: BoundedDegreeGraph, A) -> BoundaryScore:
    """Count edges with exactly one endpoint in ``A``."""
    A = as_vertex_set(G, A)
    if len(A) == 0:
        raise InputError("edge_boundary needs a nonempty set")
    if len(A) * 8 < G.vertex_count:
        members = np.asarray(A.members, dtype=np.int64)
        inside = A.mask()
        nbrs = _gather_neighbors(G, members)
        b = int(np.count_nonzero(~inside[nbrs]))
    else:
        inside = A.mask()
        e = G.edges
        b = int(np.count_nonzero(inside[e[:, 0]] != inside[e[:, 1]]))
    ratio = Fraction(len(A), b) if b else None
    return BoundaryScore(len(A), b, ratio)


def induced_subgraph(G: BoundedDegreeGraph, S) -> tuple[BoundedDegreeGraph, np.ndarray]:
    """Induced subgraph on ``S`` plus the map new index -> host index."""
    S = as_vertex_set(G, S)
    keep = np.asarray(S.members, dtype=np.int64)
    remap = np.full(G.vertex_count, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    e = G.edges
    if len(e):
        mask = (remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)
        sub_edges = remap[e[mask]]
    else:
        sub_edges = np.empty((0, 2), dtype=np.int64)
    labels = None if G.labels is None else G.labels[keep]
    bound = G.degree_bound
    H = BoundedDegreeGraph.from_edges(len(keep), sub_edges, bound if bound is not None else "auto", labels, G.name)
    if bound is None:
        H = BoundedDegreeGraph(H.indptr, H.indices, None, H.labels, H.name, check=False)
    return H, keep


def component_labels(G: BoundedDegreeGraph, removed=None) -> tuple[int, np.ndarray]:
    """scipy component labelling, with ``removed`` vertices labelled -1."""
    if removed is None or len(removed) == 0:
        return scipy.sparse.csgraph.connected_components(G.csr, directed=False)
    keep = np.ones(G.vertex_count, dtype=bool)
    keep[np.asarray(list(removed), dtype=np.int64)] = False
    sub = G.csr[keep][:, keep]
    k, lab = scipy.sparse.csgraph.connected_components(sub, directed=False)
    out = np.full(G.vertex_count, -1, dtype=np.int64)
    out[keep] = lab
    return k, out


def connected_components(G: BoundedDegreeGraph, removed=None) -> list[list[int]]:
    """Components as sorted vertex lists, largest first (ties: smallest vertex).

    ``removed`` vertices are deleted before the components are taken.
    """
    k, lab = component_labels(G, removed)
    order = np.argsort(lab, kind="stable")
    lab_sorted = lab[order]
    cuts = np.flatnonzero(np.diff(lab_sorted)) + 1
    groups = [g.tolist() for g in np.split(order, cuts) if len(g)]
    groups = [g for g in groups if lab[g[0]] >= 0]
    groups.sort(key=lambda g: (-len(g), g[0]))
    return groups


def component_sizes(G: BoundedDegreeGraph, removed=None) -> list[int]:
    k, lab = component_labels(G, removed)
    lab = lab[lab >= 0]
    return sorted(np.bincount(lab, minlength=k).tolist(), reverse=True) if lab.size else []


def is_connected(G: BoundedDegreeGraph) -> bool:
    return G.vertex_count > 0 and component_labels(G)[0] == 1


def cartesian_product(G: BoundedDegreeGraph, H: BoundedDegreeGraph, max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundedDegreeGraph:
    """Box product; vertex ``(g, h)`` gets index ``g * |H| + h``."""
    nG, nH = G.vertex_count, H.vertex_count
    if nG == 0 or nH == 0:
        raise InputError("cartesian_product needs nonempty factors")
    if nG * nH > max_vertices:
        raise ResourceError(f"product has {nG * nH} vertices, over the budget of {max_vertices}", budget=max_vertices)
    eG, eH = G.edges, H.edges
    hs = np.arange(nH, dtype=np.int64)
    gs = np.arange(nG, dtype=np.int64)
    part1 = (eG[:, None, :] * nH + hs[None, :, None]).reshape(-1, 2)
    part2 = (gs[:, None, None] * nH + eH[None, :, :]).reshape(-1, 2)
    edges = np.concatenate([part1, part2])
    labels = None
    if G.labels is not None or H.labels is not None:
        lg = G.labels if G.labels is not None else np.arange(nG).reshape(-1, 1)
        lh = H.labels if H.labels is not None else np.arange(nH).reshape(-1, 1)
        labels = np.concatenate([np.repeat(lg, nH, axis=0), np.tile(lh, (nG, 1))], axis=1)
    bound = None if G.degree_bound is None or H.degree_bound is None else G.degree_bound + H.degree_bound
    name = f"{G.name}x{H.name}" if G.name or H.name else ""
    P = BoundedDegreeGraph.from_edges(nG * nH, edges, bound if bound is not None else "auto", labels, name)
    if bound is None:
        P = BoundedDegreeGraph(P.indptr, P.indices, None, P.labels, name, check=False)
    return P


# ---------------------------------------------------------------------------
# small named graphs


def path_graph(k: int, name: str = "") -> BoundedDegreeGraph:
    edges = [(i, i + 1) for i in range(k - 1)]
    return BoundedDegreeGraph.from_edges(k, edges, 2, np.arange(k), name or f"P{k}")


def cycle_graph(k: int) -> BoundedDegreeGraph:
    if k < 3:
        raise InputError("cycle needs at least 3 vertices")
    edges = [(i, (i + 1) % k) for i in range(k)]
    return BoundedDegreeGraph.from_edges(k, edges, 2, None, f"C{k}")


def complete_graph(k: int) -> BoundedDegreeGraph:
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    return BoundedDegreeGraph.from_edges(k, edges, max(k - 1, 1), None, f"K{k}")


def star_graph(leaves: int) -> BoundedDegreeGraph:
    return BoundedDegreeGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], max(leaves, 1), None, f"K1,{leaves}")


def edgeless_graph(k: int) -> BoundedDegreeGraph:
    return BoundedDegreeGraph.from_edges(k, [], 1, None, f"E{k}")


def grid_graph(rows: int, cols: int) -> BoundedDegreeGraph:
    """``rows x cols`` grid; vertex ``(x, y)`` has index ``x * cols + y`` and label ``(x, y)``."""
    return cartesian_product(path_graph(rows), path_graph(cols))


# ---------------------------------------------------------------------------
# text format


def write_graph(G: BoundedDegreeGraph, target) -> None:
    """Write ``graph n bound`` / ``u v`` / ``label v c...`` lines."""
    own = isinstance(target, (str, os.PathLike))
    fh = open(target, "w") if own else target
    try:
        bound = "none" if G.degree_bound is None else str(G.degree_bound)
        fh.write(f"graph {G.vertex_count} {bound}\n")
        for u, v in G.edges.tolist():
            fh.write(f"{u} {v}\n")
        if G.labels is not None:
            for v, row in enumerate(G.labels.tolist()):
                fh.write("label " + " ".join(map(str, [v, *row])) + "\n")
    finally:
        if own:
            fh.close()


def read_graph(source) -> BoundedDegreeGraph:
    own = isinstance(source, (str, os.PathLike))
    fh = open(source) if own else source
    try:
        lines = [ln.strip() for ln in fh if ln.strip()]
    finally:
        if own:
            fh.close()
    if not lines or not lines[0].startswith("graph "):
        raise InputError("line 1: expected header 'graph <vertex_count> <degree_bound>'")
    head = lines[0].split()
    if len(head) != 3:
        raise InputError("line 1: malformed header")
    try:
        n = int(head[1])
        bound = None if head[2] == "none" else int(head[2])
    except ValueError:
        raise InputError(f"line 1: non-integer field in header {lines[0]!r}") from None
    edges, labels = [], {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        try:
            if parts[0] == "label":
                labels[int(parts[1])] = [int(x) for x in parts[2:]]
                continue
            u, v = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise InputError(f"line {lineno}: cannot parse {line!r}") from None
        if not u < v or len(parts) != 2:
            raise InputError(f"line {lineno}: edge lines are 'u v' with u < v")
        edges.append((u, v))
    lab = None
    if labels:
        if sorted(labels) != list(range(n)):
            raise InputError("labels must be given for every vertex or none")
        lab = np.array([labels[v] for v in range(n)], dtype=np.int64)
    G = BoundedDegreeGraph.from_edges(n, edges, bound if bound is not None else "auto", lab)
    if bound is None:
        G = BoundedDegreeGraph(G.indptr, G.indices, None, G.labels, check=False)
    return G


def graph_to_text(G: BoundedDegreeGraph) -> str:
    buf = io.StringIO()
    write_graph(G, buf)
    return buf.getvalue()


def bfs_order(G: BoundedDegreeGraph, source: int) -> list[int]:
    """Plain BFS discovery order (neighbors visited in index order)."""
    seen = {source}
    order = [source]
    q = deque([source])
    adj = G.adjacency
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                order.append(w)
                q.append(w)
    return order
