"""Enumeration of connected vertex sets (ESU-style, each set visited once)."""

from __future__ import annotations

import sys
from typing import Callable, Iterable

from .errors import ResourceError
from .graph import BoundedDegreeGraph

Visitor = Callable[[list, int], None]


class _Stop(Exception):
    pass


def walk_connected_sets(
    G: BoundedDegreeGraph,
    max_size: int,
    visit: Visitor,
    roots: Iterable[int] | None = None,
    anchored: bool = False,
    limit: int | None = None,
    rank=None,
) -> int:
    """Call ``visit(members, edge_boundary)`` once per connected set.

    Without ``anchored`` each set is reached from its smallest vertex, so
    ``roots`` (default: all vertices) partitions the work.  With ``anchored``
    every connected set containing a root is visited, whatever its minimum.
    ``rank`` replaces vertex index as the order deciding which vertex a set
    is reached from.
    ``members`` is a live list in discovery order; copy it to keep it.
    Returns the number of sets visited; raises ResourceError past ``limit``.
    """
    adj = G.adjacency
    deg = [len(a) for a in adj]
    roots = range(G.vertex_count) if roots is None else roots
    rank = list(range(G.vertex_count)) if rank is None else list(rank)
    count = 0
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * max_size + 200))

    sub: list[int] = []
    inside: set[int] = set()
    closed: set[int] = set()  # sub together with its neighbourhood

    def extend(ext: list[int], boundary: int, v: int) -> None:
        nonlocal count
        count += 1
        if limit is not None and count > limit:
            raise _Stop
        visit(sub, boundary)
        if len(sub) == max_size:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            nbrs = adj[w]
            fresh = [u for u in nbrs if u not in closed]
            new_ext = ext + [u for u in fresh if anchored or rank[u] > rank[v]]
            internal = sum(1 for u in nbrs if u in inside)
            sub.append(w)
            inside.add(w)
            closed.update(fresh)
            extend(new_ext, boundary + deg[w] - 2 * internal, v)
            closed.difference_update(fresh)
            inside.discard(w)
            sub.pop()

    try:
        for v in roots:
            sub.append(v)
            inside.add(v)
            closed.add(v)
            closed.update(adj[v])
            extend([u for u in adj[v] if anchored or rank[u] > rank[v]], deg[v], v)
            closed.clear()
            inside.clear()
            sub.clear()
    except _Stop:
        raise ResourceError(
            f"connected-set enumeration passed its budget of {limit} sets", budget=limit
        ) from None
    finally:
        sys.setrecursionlimit(old_limit)
    return count


def connected_sets(G: BoundedDegreeGraph, max_size: int, roots=None, anchored=False) -> list[tuple[int, ...]]:
    """All connected sets of size <= ``max_size`` as sorted tuples (small graphs)."""
    out: list[tuple[int, ...]] = []
    walk_connected_sets(G, max_size, lambda s, b: out.append(tuple(sorted(s))), roots, anchored)
    return out
