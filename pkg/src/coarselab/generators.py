"""Finite bounded-degree models of the groups and spaces under study.

Group kinds produce Cayley balls with respect to a frozen symmetric generating
set; ``DyadicHyperbolic`` is a half-space model of H^n built from dyadic boxes;
``Horoball`` layers an arbitrary connected graph; ``Product`` takes box
products of the above.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import InputError, ResourceError
from .graph import (
    DEFAULT_MAX_VERTICES,
    BoundedDegreeGraph,
    bfs_distances,
    cartesian_product,
    is_connected,
)

GROUP_KINDS = ("ZPower", "Heisenberg", "Lamplighter", "FreeGroup", "PolycyclicLambda")
SPACE_KINDS = GROUP_KINDS + ("DyadicHyperbolic", "Product", "Horoball")
DEFAULT_Q = ((2, 1), (1, 1))


@dataclass(frozen=True)
class SpaceSpec:
    """Declarative description of a model space and the size of its finite piece.

    Only the fields relevant to ``kind`` are read: ``d`` (ZPower), ``rank``
    (FreeGroup), ``n`` and ``Q`` (PolycyclicLambda, DyadicHyperbolic),
    ``levels``/``width``/``wrap`` (DyadicHyperbolic), ``factors`` (Product),
    ``inner``/``depth`` (Horoball).  ``radius`` sizes Cayley balls.
    """

    kind: str
    d: int = 1
    rank: int = 2
    n: int = 2
    Q: tuple[tuple[int, int], tuple[int, int]] = DEFAULT_Q
    radius: int = 4
    levels: int = 4
    width: int = 4
    wrap: bool = False
    depth: int = 0
    factors: tuple["SpaceSpec", ...] = ()
    inner: "SpaceSpec | None" = None

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise InputError(f"unknown space kind {self.kind!r}; expected one of {', '.join(SPACE_KINDS)}")
        if self.kind == "ZPower" and self.d < 1:
            raise InputError("ZPower needs d >= 1")
        if self.kind == "FreeGroup" and self.rank < 1:
            raise InputError("FreeGroup needs rank >= 1")
        if self.kind in ("PolycyclicLambda", "DyadicHyperbolic") and self.n < 2:
            raise InputError(f"{self.kind} needs n >= 2")
        if self.kind == "PolycyclicLambda":
            check_matrix(self.Q)
        if self.kind == "DyadicHyperbolic" and (self.levels < 1 or self.width < 1):
            raise InputError("DyadicHyperbolic needs levels >= 1 and width >= 1")
        if self.kind == "Horoball":
            if self.inner is None:
                raise InputError("Horoball needs an inner space")
            if self.depth < 0:
                raise InputError("Horoball depth must be >= 0")
        if self.kind == "Product" and not self.factors:
            raise InputError("Product needs at least one factor")
        if self.radius < 0:
            raise InputError("radius must be >= 0")

    @property
    def is_group(self) -> bool:
        return self.kind in GROUP_KINDS

    def describe(self) -> str:
        k = self.kind
        if k == "ZPower":
            return f"Z^{self.d}"
        if k == "FreeGroup":
            return f"F_{self.rank}"
        if k == "PolycyclicLambda":
            q = ",".join(f"[{a},{b}]" for a, b in self.Q)
            return f"Lambda_{self.n}(Q=[{q}])"
        if k == "DyadicHyperbolic":
            return f"H^{self.n}[levels={self.levels},width={self.width}]"
        if k == "Product":
            return "x".join(f.describe() for f in self.factors)
        if k == "Horoball":
            return f"Horoball({self.inner.describe()},depth={self.depth})"
        return k

    def with_radius(self, radius: int) -> "SpaceSpec":
        return replace(self, radius=radius)


def check_matrix(Q) -> None:
    (a, b), (c, d) = Q
    if a * d - b * c != 1:
        raise InputError(f"Q={Q} must have determinant 1")
    if a + d < 3:
        raise InputError(f"Q={Q} must have trace >= 3 (positive eigenvalues of modulus != 1)")


@dataclass
class GrowthCurve:
    radii: list[int]
    counts: list[int]
    truncated: bool = False
    source: str = ""

    def __post_init__(self):
        if len(self.radii) != len(self.counts):
            raise InputError("radii and counts differ in length")


def write_growth_csv(growth: GrowthCurve, path, metadata=None) -> None:
    lines = [f"# source={growth.source}", f"# truncated={str(growth.truncated).lower()}"]
    lines += [f"# {k}={v}" for k, v in sorted((metadata or {}).items())]
    lines.append("radius,count")
    lines += [f"{r},{c}" for r, c in zip(growth.radii, growth.counts)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_growth_csv(path) -> GrowthCurve:
    meta, radii, counts = {}, [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line != "radius,count":
                try:
                    r, c = line.split(",")
                    radii.append(int(r))
                    counts.append(int(c))
                except ValueError:
                    raise InputError(f"{path}:{lineno}:1: malformed row {line!r}") from None
    return GrowthCurve(radii, counts, meta.get("truncated") == "true", meta.get("source", ""))


# ---------------------------------------------------------------------------
# groups: elements are tuples of ints; ``label`` turns them into fixed-width rows


class ZPower:
    def __init__(self, d: int):
        self.d = d
        self.identity = (0,) * d
        gens = []
        for i in range(d):
            for s in (1, -1):
                e = [0] * d
                e[i] = s
                gens.append(tuple(e))
        self.generators = gens

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    mul_gen = mul

    def label(self, a, width):
        return a

    def label_width(self, radius):
        return self.d


class Heisenberg:
    """Upper unitriangular integer matrices ``[[1,a,c],[0,1,b],[0,0,1]]`` as ``(a, b, c)``."""

    identity = (0, 0, 0)
    generators = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]

    def mul(self, g, h):
        a, b, c = g
        x, y, z = h
        return (a + x, b + y, c + z + a * y)

    def inverse(self, g):
        a, b, c = g
        return (-a, -b, a * b - c)

    mul_gen = mul

    def label(self, a, width):
        return a

    def label_width(self, radius):
        return 3


class Lamplighter:
    """Z/2 wr Z as ``(cursor, neg_mask, pos_mask)``.

    Lamp at position p >= 0 is bit p of ``pos_mask``; p < 0 is bit ``-p-1`` of
    ``neg_mask``.  Generators: cursor +1, cursor -1, toggle at cursor.
    """

    MAX_POSITION = 62
    identity = (0, 0, 0)
    generators = [(1, 0, 0), (-1, 0, 0), (0, 0, 1)]

    @staticmethod
    def lamps(g) -> set[int]:
        _, neg, pos = g
        out = set()
        i = 0
        while pos >> i:
            if (pos >> i) & 1:
                out.add(i)
            i += 1
        i = 0
        while neg >> i:
            if (neg >> i) & 1:
                out.add(-i - 1)
            i += 1
        return out

    @classmethod
    def make(cls, cursor: int, lamps) -> tuple[int, int, int]:
        neg = pos = 0
        for p in lamps:
            if abs(p) > cls.MAX_POSITION:
                raise ResourceError(f"lamp position {p} outside the supported window")
            if p >= 0:
                pos |= 1 << p
            else:
                neg |= 1 << (-p - 1)
        return (cursor, neg, pos)

    def mul(self, g, h):
        c1 = g[0]
        shifted = {p + c1 for p in self.lamps(h)}
        return self.make(c1 + h[0], self.lamps(g) ^ shifted)

    def inverse(self, g):
        c = g[0]
        return self.make(-c, {p - c for p in self.lamps(g)})

    def mul_gen(self, g, s):
        c, neg, pos = g
        if s[2]:
            if abs(c) > self.MAX_POSITION:
                raise ResourceError("lamplighter cursor left the supported window")
            if c >= 0:
                return (c, neg, pos ^ (1 << c))
            return (c, neg ^ (1 << (-c - 1)), pos)
        return (c + s[0], neg, pos)

    def label(self, a, width):
        return a

    def label_width(self, radius):
        return 3


class FreeGroup:
    """Reduced words over letters ``±1..±rank``; labels are zero-padded words."""

    identity = ()

    def __init__(self, rank: int):
        self.rank = rank
        self.generators = [(s * (i + 1),) for i in range(rank) for s in (1, -1)]

    def mul(self, a, b):
        out = list(a)
        for x in b:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def inverse(self, a):
        return tuple(-x for x in reversed(a))

    mul_gen = mul

    def label(self, a, width):
        return a + (0,) * (width - len(a))

    def label_width(self, radius):
        return max(radius, 1)


@lru_cache(maxsize=None)
def _matrix_power(Q, k: int):
    (a, b), (c, d) = Q
    if k < 0:
        return _matrix_power(((d, -b), (-c, a)), -k)
    if k == 0:
        return ((1, 0), (0, 1))
    (p, q), (r, s) = _matrix_power(Q, k - 1)
    return ((p * a + q * c, p * b + q * d), (r * a + s * c, r * b + s * d))


class PolycyclicLambda:
    """``(Z^2)^(n-1) ⋊ Z`` with the generator of Z acting by Q on each factor.

    Element ``(v_1, ..., v_{2(n-1)}, k)`` stands for ``v * t^k``, so
    ``(v, k)(w, l) = (v + Q^k w, k + l)``.
    """

    def __init__(self, n: int, Q=DEFAULT_Q):
        check_matrix(Q)
        self.n = n
        self.Q = tuple(tuple(r) for r in Q)
        m = 2 * (n - 1)
        self.dim = m
        self.identity = (0,) * (m + 1)
        gens = [(0,) * m + (1,), (0,) * m + (-1,)]
        for j in range(m):
            for s in (1, -1):
                e = [0] * (m + 1)
                e[j] = s
                gens.append(tuple(e))
        self.generators = gens

    def _act(self, k, w):
        (p, q), (r, s) = _matrix_power(self.Q, k)
        out = []
        for i in range(0, len(w), 2):
            x, y = w[i], w[i + 1]
            out += [p * x + q * y, r * x + s * y]
        return out

    def mul(self, g, h):
        k = g[-1]
        moved = self._act(k, h[:-1])
        return tuple(a + b for a, b in zip(g[:-1], moved)) + (k + h[-1],)

    def inverse(self, g):
        k = g[-1]
        v = self._act(-k, g[:-1])
        return tuple(-x for x in v) + (-k,)

    def mul_gen(self, g, s):
        if s[-1]:
            return g[:-1] + (g[-1] + s[-1],)
        return self.mul(g, s)

    def label(self, a, width):
        return a

    def label_width(self, radius):
        return self.dim + 1


def group_of(spec: SpaceSpec):
    if spec.kind == "ZPower":
        return ZPower(spec.d)
    if spec.kind == "Heisenberg":
        return Heisenberg()
    if spec.kind == "Lamplighter":
        return Lamplighter()
    if spec.kind == "FreeGroup":
        return FreeGroup(spec.rank)
    if spec.kind == "PolycyclicLambda":
        return PolycyclicLambda(spec.n, spec.Q)
    raise InputError(f"{spec.kind} is not a group kind")


# ---------------------------------------------------------------------------
# Cayley balls and growth


def cayley_ball(spec: SpaceSpec, radius: int | None = None, max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundedDegreeGraph:
    """Ball of the given radius around the identity in the Cayley graph.

    Vertices are numbered in BFS layers, each layer sorted by normal form.
    """
    if not spec.is_group:
        raise InputError(f"cayley_ball needs a group kind, got {spec.kind}")
    radius = spec.radius if radius is None else radius
    if radius < 0:
        raise InputError("radius must be >= 0")
    G = group_of(spec)
    width = G.label_width(radius)
    key = lambda g: G.label(g, width)  # noqa: E731
    index = {G.identity: 0}
    elements = [G.identity]
    layer = [G.identity]
    for _ in range(radius):
        fresh = set()
        for g in layer:
            for s in G.generators:
                h = G.mul_gen(g, s)
                if h not in index:
                    fresh.add(h)
        layer = sorted(fresh, key=key)
        if len(elements) + len(layer) > max_vertices:
            raise ResourceError(
                f"Cayley ball of {spec.describe()} at radius {radius} exceeds the vertex budget of {max_vertices}",
                budget=max_vertices,
            )
        for h in layer:
            index[h] = len(elements)
            elements.append(h)
    edges = []
    for i, g in enumerate(elements):
        for s in G.generators:
            j = index.get(G.mul_gen(g, s))
            if j is not None and i < j:
                edges.append((i, j))
    labels = np.array([key(g) for g in elements], dtype=np.int64).reshape(len(elements), width)
    return BoundedDegreeGraph.from_edges(
        len(elements), edges, len(G.generators), labels, f"{spec.describe()}:B({radius})"
    )


def growth_function(spec: SpaceSpec, max_radius: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> GrowthCurve:
    """Exact ball sizes beta(0..max_radius), truncated at the vertex budget.

    Only two BFS layers are kept: with a symmetric generating set the next
    sphere is the neighborhood of the current one minus the previous two.
    """
    if not spec.is_group:
        raise InputError(f"growth_function needs a group kind, got {spec.kind}")
    G = group_of(spec)
    prev: set = set()
    cur = {G.identity}
    total = 1
    radii, counts = [0], [1]
    truncated = False
    for r in range(1, max_radius + 1):
        nxt = set()
        for g in cur:
            for s in G.generators:
                h = G.mul_gen(g, s)
                if h not in cur and h not in prev:
                    nxt.add(h)
        if total + len(nxt) > max_vertices:
            truncated = True
            warnings.warn(
                f"growth of {spec.describe()} truncated at radius {r - 1}: vertex budget {max_vertices}",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        total += len(nxt)
        radii.append(r)
        counts.append(total)
        prev, cur = cur, nxt
    return GrowthCurve(radii, counts, truncated, spec.describe())


# ---------------------------------------------------------------------------
# dyadic model of H^n


def dyadic_level_sides(levels: int, width: int) -> list[int]:
    return [width * 2 ** (levels - 1 - m) for m in range(levels)]


def dyadic_hyperbolic_ball(
    n: int, levels: int, width: int, wrap: bool = False, max_vertices: int = DEFAULT_MAX_VERTICES
) -> BoundedDegreeGraph:
    """Dyadic boxes ``k*2^m + [0, 2^m)^(n-1)`` at heights ``m < levels``.

    Same-level boxes sharing a face are joined; each box is joined to the box
    one level up that contains it.  Vertices are numbered level by level from
    the bottom, row-major within a level; labels are ``(k_1, ..., k_{n-1}, m)``.
    With ``wrap`` the horizontal rows are made periodic where the side is >= 3.
    """
    if n < 2 or levels < 1 or width < 1:
        raise InputError("dyadic model needs n >= 2, levels >= 1, width >= 1")
    dim = n - 1
    sides = dyadic_level_sides(levels, width)
    counts = [s ** dim for s in sides]
    total = sum(counts)
    if total > max_vertices:
        raise ResourceError(
            f"dyadic H^{n} model with {total} vertices exceeds the vertex budget of {max_vertices}", budget=max_vertices
        )
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    edges = []
    labels = []
    for m, side in enumerate(sides):
        shape = (side,) * dim
        coords = np.indices(shape).reshape(dim, -1).T
        idx = np.arange(counts[m], dtype=np.int64) + offsets[m]
        labels.append(np.concatenate([coords, np.full((counts[m], 1), m)], axis=1))
        for axis in range(dim):
            nb = coords.copy()
            nb[:, axis] += 1
            inside = nb[:, axis] < side
            if wrap and side >= 3:
                nb[:, axis] %= side
                inside = np.ones(len(nb), dtype=bool)
            j = np.ravel_multi_index(nb[inside].T, shape) + offsets[m]
            edges.append(np.stack([idx[inside], j], axis=1))
        if m + 1 < levels:
            parent = np.ravel_multi_index((coords // 2).T, (sides[m + 1],) * dim) + offsets[m + 1]
            edges.append(np.stack([idx, parent], axis=1))
    E = np.concatenate(edges) if edges else np.empty((0, 2), dtype=np.int64)
    bound = 2 * dim + 2 ** dim + 1
    return BoundedDegreeGraph.from_edges(
        total, E, bound, np.concatenate(labels), f"H{n}dyadic[L={levels},w={width}]"
    )


def dyadic_index(levels: int, width: int, n: int, k, m: int) -> int:
    """Index of the vertex ``(k, m)`` in :func:`dyadic_hyperbolic_ball`'s numbering."""
    sides = dyadic_level_sides(levels, width)
    dim = n - 1
    off = sum(s ** dim for s in sides[:m])
    return off + int(np.ravel_multi_index(tuple(k), (sides[m],) * dim))


# ---------------------------------------------------------------------------
# combinatorial horoball


def horoball(inner: BoundedDegreeGraph, depth: int) -> BoundedDegreeGraph:
    """Levels ``0..depth`` of the combinatorial horoball over ``inner``.

    Level m joins vertices at inner distance at most ``2**m``; consecutive
    levels are joined vertically.  Vertex ``(v, m)`` has index
    ``m * |inner| + v``, so lower levels form a prefix.  No degree bound.
    """
    if depth < 0:
        raise InputError("depth must be >= 0")
    if not is_connected(inner):
        raise InputError("horoball needs a connected inner graph")
    N = inner.vertex_count
    reach = 2 ** depth
    pairs = []  # (u, v, distance) with u < v
    for u in range(N):
        dist = bfs_distances(inner, u, reach)
        vs = np.flatnonzero(dist > 0)
        vs = vs[vs > u]
        pairs.append(np.stack([np.full(len(vs), u), vs, dist[vs]], axis=1))
    P = np.concatenate(pairs) if pairs else np.empty((0, 3), dtype=np.int64)
    edges = []
    for m in range(depth + 1):
        sel = P[P[:, 2] <= 2 ** m][:, :2]
        edges.append(sel + m * N)
        if m < depth:
            v = np.arange(N, dtype=np.int64)
            edges.append(np.stack([v + m * N, v + (m + 1) * N], axis=1))
    base = inner.labels if inner.labels is not None else np.arange(N).reshape(-1, 1)
    labels = np.concatenate([np.concatenate([base, np.full((N, 1), m)], axis=1) for m in range(depth + 1)])
    G = BoundedDegreeGraph.from_edges(N * (depth + 1), np.concatenate(edges), "auto", labels)
    return BoundedDegreeGraph(G.indptr, G.indices, None, G.labels, f"horoball({inner.name},{depth})", check=False)


# ---------------------------------------------------------------------------
# dispatch


def build(spec: SpaceSpec, max_vertices: int = DEFAULT_MAX_VERTICES) -> BoundedDegreeGraph:
    """Materialise the finite model described by ``spec``."""
    if spec.is_group:
        return cayley_ball(spec, spec.radius, max_vertices)
    if spec.kind == "DyadicHyperbolic":
        return dyadic_hyperbolic_ball(spec.n, spec.levels, spec.width, spec.wrap, max_vertices)
    if spec.kind == "Horoball":
        return horoball(build(spec.inner, max_vertices), spec.depth)
    G = build(spec.factors[0], max_vertices)
    for f in spec.factors[1:]:
        G = cartesian_product(G, build(f, max_vertices), max_vertices)
    return G
