"""Laplacian spectra: second eigenvalue, Fiedler vector, Cheeger rails."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import scipy.sparse.linalg

from .errors import InputError, NumericError
from .graph import BoundedDegreeGraph, is_connected

DENSE_LIMIT = 600
TOL = 1e-8


def laplacian(G: BoundedDegreeGraph) -> scipy.sparse.csr_matrix:
    return scipy.sparse.csgraph.laplacian(G.csr).tocsr()


def _start_vector(n: int) -> np.ndarray:
    # fixed, not orthogonal to any low mode in practice; keeps ARPACK deterministic
    return np.cos(np.arange(n) * 0.7548776662466927) + 0.5


def fiedler(G: BoundedDegreeGraph, maxiter: int | None = None) -> tuple[float, np.ndarray]:
    """Second-smallest Laplacian eigenvalue and a unit eigenvector for it.

    Dense ``eigh`` below :data:`DENSE_LIMIT` vertices, ARPACK shift-invert
    above.  The sign is fixed so that the first nonzero entry is negative.
    """
    n = G.vertex_count
    if n < 2:
        raise InputError("need at least 2 vertices for lambda_2")
    L = laplacian(G)
    if n <= DENSE_LIMIT:
        w, V = scipy.linalg.eigh(L.toarray())
        lam, vec = float(w[1]), V[:, 1]
    else:
        sigma = -1e-3
        try:
            w, V = scipy.sparse.linalg.eigsh(
                L.astype(np.float64), k=2, sigma=sigma, which="LM", v0=_start_vector(n), tol=TOL * 1e-2, maxiter=maxiter
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise NumericError(f"eigensolver did not converge on {n} vertices", residual=float("nan")) from exc
        order = np.argsort(w)
        lam, vec = float(w[order[1]]), V[:, order[1]]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(L @ vec - lam * vec))
    if residual > 1e-6 * max(1.0, abs(lam)):
        raise NumericError(f"lambda_2 residual {residual:.3e} above tolerance", residual=residual)
    nz = np.flatnonzero(np.abs(vec) > 1e-12)
    if nz.size and vec[nz[0]] > 0:
        vec = -vec
    return max(lam, 0.0), vec


@dataclass(frozen=True)
class CheegerRails:
    lambda2: float
    h_lower: float
    h_upper: float

    def __iter__(self):
        return iter((self.lambda2, self.h_upper, self.h_lower))


def cheeger_spectral_bound(G: BoundedDegreeGraph) -> CheegerRails:
    """``lambda_2 / 2 <= h <= sqrt(2 * degree_bound * lambda_2)``.

    ``h`` is the edge expansion ``min_{|A| <= n/2} |dA| / |A|``.  Unpacks as
    ``(lambda2, h_upper, h_lower)``.
    """
    if not is_connected(G):
        raise InputError("cheeger_spectral_bound needs a connected graph")
    lam, _ = fiedler(G)
    bound = G.degree_bound if G.degree_bound is not None else int(G.degrees.max())
    return CheegerRails(lam, lam / 2.0, math.sqrt(2.0 * bound * lam))
