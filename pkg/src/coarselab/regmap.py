"""Maps between finite graphs: regularity constants and compression.

A map is regular with constant C when it is C-Lipschitz and at most C-to-one.
The compression ``rho_minus(t)`` is the least codomain distance between the
images of two domain vertices at distance >= t; it is sampled at t = 1, 2,
4, ... up to the largest domain distance seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .generators import SpaceSpec, cayley_ball, dyadic_hyperbolic_ball, dyadic_level_sides
from .graph import DEFAULT_MAX_VERTICES, BoundedDegreeGraph, bfs_distances, cartesian_product, distance_rows, is_connected

ALL_PAIRS_LIMIT = 300
DEFAULT_SAMPLE = 64


def graph_id(G: BoundedDegreeGraph) -> str:
    """Whitespace-free name used in map file headers."""
    return "".join(G.name.split()) or f"graph{G.vertex_count}"


@dataclass(frozen=True, eq=False)
class FiniteGraphMap:
    domain: BoundedDegreeGraph
    codomain: BoundedDegreeGraph
    images: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.images, dtype=np.int64)
        if img.ndim != 1 or len(img) != self.domain.vertex_count:
            raise InputError(f"map must send each of the {self.domain.vertex_count} domain vertices somewhere, got {img.size} images")
        if img.size and (img.min() < 0 or img.max() >= self.codomain.vertex_count):
            raise InputError(f"image index outside the codomain (0..{self.codomain.vertex_count - 1})")
        img.setflags(write=False)
        object.__setattr__(self, "images", img)

    def __call__(self, v: int) -> int:
        return int(self.images[v])

    def __eq__(self, other):
        return (
            isinstance(other, FiniteGraphMap)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and np.array_equal(self.images, other.images)
        )


def identity_map(G: BoundedDegreeGraph) -> FiniteGraphMap:
    return FiniteGraphMap(G, G, np.arange(G.vertex_count))


def compose(f: FiniteGraphMap, g: FiniteGraphMap) -> FiniteGraphMap:
    """``g after f``."""
    if f.codomain != g.domain:
        raise InputError(f"cannot compose: codomain {graph_id(f.codomain)} is not domain {graph_id(g.domain)}")
    return FiniteGraphMap(f.domain, g.codomain, g.images[f.images])


@dataclass(frozen=True)
class RegularMapReport:
    lipschitz: int
    multiplicity: int
    regular_constant: int
    compression: tuple[tuple[int, int], ...]
    compression_exact: bool
    sources: int

    def __post_init__(self):
        rho = [r for _, r in self.compression]
        if any(b < a for a, b in zip(rho, rho[1:])):
            raise InputError("compression must be non-decreasing in t")

    def rho(self, t: int) -> int | None:
        for s, r in self.compression:
            if s == t:
                return r
        return None


def _lipschitz(f: FiniteGraphMap) -> int:
    E = f.domain.edges
    if len(E) == 0:
        return 0
    a, b = f.images[E[:, 0]], f.images[E[:, 1]]
    same = a == b
    N = f.codomain.vertex_count
    CE = f.codomain.edges
    keys = np.sort(np.concatenate([CE[:, 0] * N + CE[:, 1], CE[:, 1] * N + CE[:, 0]]))
    q = a * N + b
    pos = np.searchsorted(keys, q)
    adjacent = (pos < len(keys)) & (keys[np.minimum(pos, len(keys) - 1)] == q)
    best = 1 if adjacent.any() else 0
    far = ~same & ~adjacent
    if far.any():
        pairs = {}
        for u, v in zip(a[far].tolist(), b[far].tolist()):
            pairs.setdefault(u, set()).add(v)
        for s, row in distance_rows(f.codomain, sorted(pairs)):
            d = row[sorted(pairs[s])]
            if (d < 0).any():
                raise InputError("codomain is disconnected between images of adjacent vertices")
            best = max(best, int(d.max()))
    return best


def _sources(n: int, sources, sample: int, seed: int) -> np.ndarray:
    if sources is not None:
        src = np.unique(np.asarray(sources, dtype=np.int64))
        if src.size == 0 or src.min() < 0 or src.max() >= n:
            raise InputError("compression sources must be domain vertices")
        return src
    if n <= ALL_PAIRS_LIMIT or sample >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=sample, replace=False))


def verify_regular(
    f: FiniteGraphMap,
    sources=None,
    sample: int = DEFAULT_SAMPLE,
    seed: int = 0,
) -> RegularMapReport:
    """Lipschitz constant, multiplicity and sampled compression of ``f``.

    Lipschitz and multiplicity are exact.  Compression uses every domain
    vertex as a source when the domain has at most 300 vertices (or when
    ``sample`` covers it), else ``sample`` sources drawn with ``seed``, or the
    explicit ``sources``.  A sampled minimum can only overstate ``rho_minus``;
    ``compression_exact`` says which case applies.
    """
    if not is_connected(f.domain) or not is_connected(f.codomain):
        raise InputError("verify_regular needs connected domain and codomain")
    lip = _lipschitz(f)
    mult = int(np.bincount(f.images).max()) if f.domain.vertex_count else 0
    src = _sources(f.domain.vertex_count, sources, sample, seed)
    exact = len(src) == f.domain.vertex_count
    # per source: min codomain distance among targets at each exact domain distance
    reach = 0
    per_dist: dict[int, int] = {}
    img = f.images
    for s in src.tolist():
        dd = bfs_distances(f.domain, s)
        dc = bfs_distances(f.codomain, int(img[s]))[img]
        reach = max(reach, int(dd.max()))
        order = np.argsort(dd, kind="stable")
        ds, cs = dd[order], dc[order]
        cut = np.flatnonzero(np.diff(ds)) + 1
        for d, block in zip(ds[np.concatenate([[0], cut])].tolist(), np.split(cs, cut)):
            if d <= 0:
                continue
            m = int(block.min())
            if d not in per_dist or m < per_dist[d]:
                per_dist[d] = m
    compression = []
    if per_dist:
        dists = np.array(sorted(per_dist))
        vals = np.array([per_dist[d] for d in dists])
        suffix_min = np.minimum.accumulate(vals[::-1])[::-1]
        t = 1
        while t <= reach:
            compression.append((t, int(suffix_min[np.searchsorted(dists, t)])))
            t *= 2
    return RegularMapReport(lip, mult, max(lip, mult), tuple(compression), exact, len(src))


# ---------------------------------------------------------------------------
# horospherical embedding


def horospherical_embedding(
    n: int,
    d: int,
    radius: int,
    levels: int | None = None,
    width: int = 1,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> FiniteGraphMap:
    """Ball of Z^(n+d-1) into (dyadic H^n) x (ball of Z^d).

    A point ``(k, m)`` with ``k`` in Z^(n-1) and ``m`` in Z^d goes to the
    bottom-level box ``k + radius`` of the dyadic model, paired with ``m``.
    ``levels`` defaults to the fewest that make the bottom level at least
    ``2 * radius + 1`` wide.
    """
    if n < 2 or d < 0 or radius < 0:
        raise InputError("horospherical_embedding needs n >= 2, d >= 0, radius >= 0")
    need = 2 * radius + 1
    if levels is None:
        levels = 1 + max(0, math.ceil(math.log2(need / width)))
    side = dyadic_level_sides(levels, width)[0]
    if side < need:
        raise InputError(
            f"dyadic model too small: bottom level has width {side}, the radius-{radius} ball needs {need}"
            f" (width >= {math.ceil(need / 2 ** (levels - 1))} at {levels} levels)"
        )
    domain = cayley_ball(SpaceSpec("ZPower", d=n + d - 1), radius, max_vertices)
    H = dyadic_hyperbolic_ball(n, levels, width, max_vertices=max_vertices)
    lab = domain.labels
    k = lab[:, : n - 1] + radius
    base = np.ravel_multi_index(tuple(k.T), (side,) * (n - 1))  # bottom level comes first
    if d == 0:
        return FiniteGraphMap(domain, H, base)
    P = cayley_ball(SpaceSpec("ZPower", d=d), radius, max_vertices)
    codomain = cartesian_product(H, P, max_vertices)
    index = P.label_index
    fibre = np.array([index[tuple(row)] for row in lab[:, n - 1:].tolist()], dtype=np.int64)
    return FiniteGraphMap(domain, codomain, base * P.vertex_count + fibre)


# ---------------------------------------------------------------------------
# files


def write_map(f: FiniteGraphMap, path) -> None:
    lines = [f"map {graph_id(f.domain)} {graph_id(f.codomain)}"]
    lines += [f"{v} -> {w}" for v, w in enumerate(f.images.tolist())]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_map(path, domain: BoundedDegreeGraph, codomain: BoundedDegreeGraph) -> FiniteGraphMap:
    """Parse a map file against the graphs it names."""
    images: dict[int, int] = {}
    header = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                parts = line.split()
                if len(parts) != 3 or parts[0] != "map":
                    raise InputError(f"{path}:{lineno}:1: expected 'map <domain> <codomain>'")
                header = parts[1:]
                continue
            v, arrow, w = (line.split() + ["", "", ""])[:3]
            if arrow != "->":
                raise InputError(f"{path}:{lineno}:1: expected 'v -> w', got {line!r}")
            try:
                v, w = int(v), int(w)
            except ValueError:
                raise InputError(f"{path}:{lineno}:1: non-integer vertex in {line!r}") from None
            if v in images:
                raise InputError(f"{path}:{lineno}:1: vertex {v} mapped twice")
            images[v] = w
    if header is None:
        raise InputError(f"{path}: empty map file")
    if header != [graph_id(domain), graph_id(codomain)]:
        raise InputError(f"{path}: map is between {header[0]} and {header[1]}, not the graphs supplied")
    missing = [v for v in range(domain.vertex_count) if v not in images]
    if missing:
        raise InputError(f"{path}: unmapped vertex {missing[0]}")
    if len(images) != domain.vertex_count:
        raise InputError(f"{path}: vertex index outside the domain")
    return FiniteGraphMap(domain, codomain, np.array([images[v] for v in range(domain.vertex_count)]))


def write_report_csv(report: RegularMapReport, path) -> None:
    lines = [
        f"# lipschitz={report.lipschitz}",
        f"# multiplicity={report.multiplicity}",
        f"# regular_constant={report.regular_constant}",
        f"# compression_exact={str(report.compression_exact).lower()}",
        f"# sources={report.sources}",
        "t,rho_minus",
    ]
    lines += [f"{t},{r}" for t, r in report.compression]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report_csv(path) -> RegularMapReport:
    meta, rows = {}, []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line != "t,rho_minus":
                try:
                    t, r = line.split(",")
                    rows.append((int(t), int(r)))
                except ValueError:
                    raise InputError(f"{path}:{lineno}:1: malformed row {line!r}") from None
    try:
        return RegularMapReport(
            int(meta["lipschitz"]),
            int(meta["multiplicity"]),
            int(meta["regular_constant"]),
            tuple(rows),
            meta["compression_exact"] == "true",
            int(meta["sources"]),
        )
    except KeyError as exc:
        raise InputError(f"{path}: missing '# {exc.args[0]}=' line") from None
