"""Weighted graphs, Laplacians, spectra and related linear algebra.

Graphs are dense symmetric weight matrices with zero diagonal and
non-negative entries.  The module provides the combinatorial and normalized
Laplacians, a spectrum summary (extremal eigenvalues, the second-smallest
eigenvalue, and the bottom eigenvector), Moore-Penrose pseudo-inversion with
a PSD clamping rule, orthogonal projectors, BFS connectivity/diameter, and
row normalization.

Edge-list files use one ``i j w`` triple per line with 1-based indices and
each undirected edge listed once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GraphDisconnected,
    NotSymmetric,
    ParseError,
    ZeroConstraintVector,
    ZeroDegreeVertex,
    ZeroRowSum,
)

__all__ = [
    "GraphSpec",
    "SpectrumSummary",
    "laplacian",
    "normalized_laplacian",
    "spectrum",
    "pseudo_inverse",
    "projector_orthogonal_to",
    "is_connected",
    "diameter",
    "row_normalize",
    "gaussian_affinity",
    "load_edge_list",
    "save_edge_list",
]

# Eigenvalues in [-PSD_CLAMP * lambda_max, 0) are treated as exact zeros
# before pseudo-inversion; smaller magnitudes than ZERO_CUTOFF * lambda_max
# are treated as zero as well.
PSD_CLAMP = 1e-9
ZERO_CUTOFF = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GraphSpec:
    """Symmetric non-negative weight matrix with zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.array_equal(w, w.T):
            raise NotSymmetric("weights[i][j] must equal weights[j][i] exactly")
        if np.any(w < 0):
            raise ValueError("edge weights must be non-negative")
        if np.any(np.diagonal(w) != 0):
            raise ValueError("the diagonal must be zero (no self-loops)")
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class SpectrumSummary:
    """Extremal eigenvalues and the bottom eigenvector of a symmetric matrix.

    ``lambda2`` is the second-smallest eigenvalue (counted with multiplicity);
    for a 1x1 matrix it coincides with ``lambda_min``.
    """

    lambda_min: float
    lambda_max: float
    lambda2: float
    eigenvector_min: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvector_min", _readonly(np.asarray(self.eigenvector_min, float))
        )


def laplacian(g: GraphSpec) -> np.ndarray:
    """Combinatorial Laplacian D - W."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def normalized_laplacian(g: GraphSpec) -> np.ndarray:
    """Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}.

    Raises:
        ZeroDegreeVertex: if some vertex has zero weighted degree.
    """
    w = g.weights
    deg = w.sum(axis=1)
    if np.any(deg <= 0):
        bad = int(np.argmax(deg <= 0))
        raise ZeroDegreeVertex(f"vertex {bad} has zero weighted degree")
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = -(inv_sqrt[:, None] * w * inv_sqrt[None, :])
    np.fill_diagonal(lap, 1.0)
    # exact symmetry regardless of float rounding in the scaling
    return 0.5 * (lap + lap.T)


def _check_symmetric(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    scale = np.max(np.abs(mat), initial=0.0)
    if np.max(np.abs(mat - mat.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise NotSymmetric("matrix is not symmetric within 1e-12 relative tolerance")
    return 0.5 * (mat + mat.T)


def spectrum(mat: np.ndarray) -> SpectrumSummary:
    """Eigenvalue summary of a symmetric matrix (ascending eigh order)."""
    sym = _check_symmetric(mat)
    vals, vecs = np.linalg.eigh(sym)
    lam2 = vals[1] if vals.size > 1 else vals[0]
    return SpectrumSummary(
        lambda_min=float(vals[0]),
        lambda_max=float(vals[-1]),
        lambda2=float(lam2),
        eigenvector_min=vecs[:, 0],
    )


def pseudo_inverse(mat: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix via eigh.

    Eigenvalues in [-PSD_CLAMP * lambda_max, 0) are clamped to zero before
    inversion, and magnitudes below ZERO_CUTOFF * lambda_max count as zero.
    """
    sym = _check_symmetric(mat)
    vals, vecs = np.linalg.eigh(sym)
    scale = np.max(np.abs(vals), initial=0.0)
    if scale == 0.0:
        return np.zeros_like(sym)
    zero = (np.abs(vals) <= ZERO_CUTOFF * scale) | (
        (vals < 0) & (vals >= -PSD_CLAMP * scale)
    )
    inv = np.where(zero, 0.0, np.divide(1.0, np.where(zero, 1.0, vals)))
    out = (vecs * inv) @ vecs.T
    return 0.5 * (out + out.T)


def projector_orthogonal_to(u: np.ndarray) -> np.ndarray:
    """Orthogonal projector P = I - u u^T / ||u||^2 onto the hyperplane u^T h = 0."""
    u = np.asarray(u, dtype=np.float64).ravel()
    nrm2 = float(u @ u)
    if nrm2 <= 1e-24:
        raise ZeroConstraintVector("constraint vector has (near-)zero norm")
    return np.eye(u.size) - np.outer(u, u) / nrm2


def _bfs_levels(adj: np.ndarray, source: int) -> np.ndarray:
    """Hop distances from ``source`` over a boolean adjacency; -1 = unreachable."""
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.zeros(n, dtype=bool)
    frontier[source] = True
    level = 0
    while frontier.any():
        level += 1
        reach = adj[frontier].any(axis=0)
        new = reach & (dist < 0)
        if not new.any():
            break
        dist[new] = level
        frontier = new
    return dist


def is_connected(g: GraphSpec) -> bool:
    """True when every vertex is reachable through positive-weight edges."""
    if g.n == 1:
        return True
    adj = g.weights > 0
    return bool((_bfs_levels(adj, 0) >= 0).all())


def diameter(g: GraphSpec) -> int:
    """Largest hop distance between any two vertices (unweighted BFS).

    This is the hop diameter of the positive-weight edge set; edge weights do
    not enter the distance.

    Raises:
        GraphDisconnected: if some pair of vertices is not connected.
    """
    if g.n == 1:
        return 0
    adj = g.weights > 0
    worst = 0
    for source in range(g.n):
        dist = _bfs_levels(adj, source)
        if (dist < 0).any():
            raise GraphDisconnected("diameter undefined: graph is disconnected")
        worst = max(worst, int(dist.max()))
    return worst


def row_normalize(mat: np.ndarray) -> np.ndarray:
    """Scale each row to sum to one.

    Raises:
        ZeroRowSum: if some row sums to zero.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("expected a matrix")
    sums = mat.sum(axis=1)
    if np.any(sums == 0):
        bad = int(np.argmax(sums == 0))
        raise ZeroRowSum(f"row {bad} sums to zero")
    return mat / sums[:, None]


def gaussian_affinity(points: np.ndarray, sigma: float) -> GraphSpec:
    """Dense Gaussian affinity W_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)), zero diagonal."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d2, 0.0, out=d2)
    w = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(w, 0.0)
    w = np.minimum(w, w.T)  # exact symmetry
    return GraphSpec(weights=w)


def load_edge_list(path, n: int | None = None) -> GraphSpec:
    """Read an ``i j w`` edge list (1-based indices, one line per edge).

    Blank lines are skipped.  ``n`` fixes the vertex count; when omitted it is
    the largest index seen.

    Raises:
        ParseError: on malformed lines, with 1-based row/column positions.
    """
    triples = []
    max_idx = 0
    with open(path, "r", encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ParseError(row, 0, "expected 'i j w'")
            try:
                i = int(parts[0])
            except ValueError:
                raise ParseError(row, 1, f"bad vertex index {parts[0]!r}") from None
            try:
                j = int(parts[1])
            except ValueError:
                raise ParseError(row, 2, f"bad vertex index {parts[1]!r}") from None
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(row, 3, f"bad weight {parts[2]!r}") from None
            if i < 1 or j < 1:
                raise ParseError(row, 1, "vertex indices are 1-based")
            if n is not None:
                if i > n:
                    raise ParseError(row, 1, f"vertex {i} exceeds n={n}")
                if j > n:
                    raise ParseError(row, 2, f"vertex {j} exceeds n={n}")
            if i == j:
                raise ParseError(row, 1, "self-loops are not allowed")
            if w < 0:
                raise ParseError(row, 3, "weights must be non-negative")
            triples.append((i - 1, j - 1, w))
            max_idx = max(max_idx, i, j)
    size = max_idx if n is None else int(n)
    if size < max_idx:
        raise ValueError(f"n={size} smaller than largest index {max_idx}")
    weights = np.zeros((size, size))
    for i, j, w in triples:
        weights[i, j] = w
        weights[j, i] = w
    return GraphSpec(weights=weights)


def save_edge_list(g: GraphSpec, path) -> None:
    """Write the positive-weight edges as 1-based ``i j w`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        rows, cols = np.nonzero(np.triu(g.weights, k=1))
        for i, j in zip(rows, cols):
            fh.write(f"{i + 1} {j + 1} {float(g.weights[i, j])!r}\n")
