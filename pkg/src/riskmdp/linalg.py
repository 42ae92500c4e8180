"""Graph structure and spectral radius of small nonnegative matrices."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

#: Diagonal shift used to make irreducible blocks primitive.
SHIFT = 1e-3


def strong_components(adj: np.ndarray) -> list[list[int]]:
    """Strongly connected components of a boolean adjacency matrix.

    Components are returned sorted by their smallest member, members sorted.
    """
    n = adj.shape[0]
    if n == 0:
        return []
    _, labels = connected_components(csr_matrix(adj.astype(np.int8)), directed=True,
                                     connection="strong")
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def reachable_from(adj: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure: ``R[i, j]`` iff ``j`` is reachable from ``i``."""
    n = adj.shape[0]
    reach = adj.astype(bool) | np.eye(n, dtype=bool)
    # repeated squaring of the boolean relation
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def _block_radius(B: np.ndarray, shift: float) -> float:
    n = B.shape[0]
    if n == 1:
        return float(B[0, 0])
    M = B + shift * np.eye(n)
    # power iteration by repeated squaring; M is primitive so M^k -> rank one
    P = M / M.max()
    for _ in range(64):
        Q = P @ P
        Q /= Q.max()
        if np.allclose(Q, P, rtol=1e-15, atol=0):
            P = Q
            break
        P = Q
    x = P.sum(axis=1)
    x = x / x.max()
    if np.any(x <= 0):
        x = np.maximum(x, np.finfo(float).tiny)
    y = M @ x
    ratio = y / x
    # Collatz-Wielandt bounds bracket the Perron root of M
    return float(0.5 * (ratio.min() + ratio.max()) - shift)


def spectral_radius(A, shift: float = SHIFT) -> float:
    """Spectral radius of a nonnegative square matrix.

    The matrix is split into irreducible diagonal blocks (its strongly
    connected components); each block is shifted by ``shift * I`` to remove
    periodicity and its Perron root is found by power iteration.

    Parameters
    ----------
    A : (n, n) array_like
        Nonnegative matrix.
    shift : float
        Diagonal shift; subtracted again from the result.

    Returns
    -------
    float
        ``max |lambda|`` over the eigenvalues of ``A`` (0 for an empty matrix).
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    if np.any(A < 0):
        raise ValueError("spectral_radius expects a nonnegative matrix")
    rho = 0.0
    for comp in strong_components(A > 0):
        B = A[np.ix_(comp, comp)]
        if len(comp) == 1 and B[0, 0] == 0:
            continue
        rho = max(rho, _block_radius(B, shift))
    return max(rho, 0.0)
