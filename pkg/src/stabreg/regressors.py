"""Transductive regression solvers.

Three families share one quadratic template:

* Unconstrained graph regularizers minimizing
  ``h^T Q h + (h - y)^T C (h - y)`` with closed form
  ``h = (C^{-1} Q + I)^{-1} y`` — consistency-method (CM) smoothing with the
  normalized Laplacian, local-linear regularization (LL-Reg) with
  ``Q = (I - A)^T (I - A)`` for a row-stochastic A, and Gaussian-field style
  smoothing (GMF) with the combinatorial Laplacian.
* A norm-constrained Laplacian regularizer minimizing
  ``h^T L h + (C/m) ||(h - y)_S||^2`` subject to ``u^T h = 0``, solved through
  the augmented KKT system.
* Kernel least squares over an explicit Gram matrix: labeled squared loss
  weighted by C/m plus unlabeled squared loss against local pseudo-targets
  weighted by C'/u (LTR).  With C' = 0 this is kernel ridge regression
  evaluated on the full sample.

Pseudo-targets for unlabeled points are radius-limited weighted averages of
labeled neighbors; weights are either a Gaussian kernel value or an inverse
feature-space distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FullSample, HypothesisScores, Partition
from .errors import (
    ConstraintSpansNullSpace,
    NotInRange,
    NotPSDKernel,
    PseudoTargetUnavailable,
    SingularSystem,
    ZeroConstraintVector,
)
from .graph import (
    GraphSpec,
    _check_symmetric,
    laplacian,
    normalized_laplacian,
    pseudo_inverse,
    row_normalize,
    spectrum,
)

__all__ = [
    "UnconstrainedProblem",
    "ConstrainedProblem",
    "LtrProblem",
    "LocalEstimatorConfig",
    "build_cm",
    "build_llreg",
    "build_gmf",
    "solve_unconstrained",
    "stabilize",
    "solve_constrained",
    "laplacian_kernel_check",
    "gaussian_kernel",
    "pseudo_targets",
    "solve_ltr",
    "ltr_dual_coefficients",
    "ltr_objective",
    "solve_krr_induction",
]

_RESIDUAL_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class UnconstrainedProblem:
    """min_h  h^T Q h + (h - y)^T Cmat (h - y)  with Q PSD, Cmat PD."""

    Q: np.ndarray
    Cmat: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        q = _check_symmetric(self.Q)
        c = _check_symmetric(self.Cmat)
        y = np.asarray(self.y, dtype=np.float64).ravel()
        n = y.size
        if q.shape != (n, n) or c.shape != (n, n):
            raise ValueError("Q, Cmat and y disagree on dimension")
        off = c - np.diag(np.diagonal(c))
        if np.max(np.abs(off), initial=0.0) == 0.0:
            if np.any(np.diagonal(c) <= 0):
                raise ValueError("Cmat must be positive definite")
        elif np.linalg.eigvalsh(c)[0] <= 0:
            raise ValueError("Cmat must be positive definite")
        object.__setattr__(self, "Q", _readonly(q))
        object.__setattr__(self, "Cmat", _readonly(c))
        object.__setattr__(self, "y", _readonly(y))

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class ConstrainedProblem:
    """min_h  h^T L h + (C/m) ||(h - y)_S||^2  subject to  u^T h = 0.

    ``y_S`` may be given full-length (zeros off S, enforced) or length m
    aligned with the sorted labeled indices.  When ``center_labels`` is set,
    the component of the labels along the constraint direction is removed
    before solving and added back onto the returned scores.
    """

    L: np.ndarray
    C_tradeoff: float
    part: Partition
    y_S: np.ndarray
    u_vec: np.ndarray | None = None
    center_labels: bool = False

    def __post_init__(self):
        lap = _check_symmetric(self.L)
        n = self.part.n
        if lap.shape != (n, n):
            raise ValueError("L must be (m+u) x (m+u)")
        if not float(self.C_tradeoff) > 0:
            raise ValueError("C_tradeoff must be positive")
        y = np.asarray(self.y_S, dtype=np.float64).ravel()
        if y.size == self.part.m:
            full = np.zeros(n)
            full[self.part.train_idx] = y
            y = full
        elif y.size == n:
            if np.any(y[self.part.test_idx] != 0):
                raise ValueError("y_S must be zero off the labeled set")
        else:
            raise ValueError("y_S must have length m or m+u")
        u = self.u_vec
        u = np.ones(n) if u is None else np.asarray(u, dtype=np.float64).ravel()
        if u.size != n:
            raise ValueError("u_vec must have length m+u")
        if float(u @ u) <= 1e-24:
            raise ZeroConstraintVector("constraint vector has (near-)zero norm")
        object.__setattr__(self, "L", _readonly(lap))
        object.__setattr__(self, "C_tradeoff", float(self.C_tradeoff))
        object.__setattr__(self, "y_S", _readonly(y))
        object.__setattr__(self, "u_vec", _readonly(u))
        object.__setattr__(self, "center_labels", bool(self.center_labels))

    @property
    def n(self) -> int:
        return self.part.n


@dataclass(frozen=True)
class LtrProblem:
    """Kernel least squares with labeled and pseudo-labeled squared losses.

    Attributes:
        K: (n, n) Gram matrix over the full sample, diag(K) <= kappa^2.
        part: the S/T split; ``y`` has length m (labels, sorted-S order) and
            ``y_tilde`` length u (pseudo-targets, sorted-T order; may be
            empty when C_prime = 0).
        C: labeled trade-off (weight C/m per labeled point).
        C_prime: unlabeled trade-off (weight C'/u per unlabeled point).
        kappa: bound with K(x, x) <= kappa^2.
    """

    K: np.ndarray
    part: Partition
    y: np.ndarray
    y_tilde: np.ndarray
    C: float
    C_prime: float
    kappa: float

    def __post_init__(self):
        k = _check_symmetric(self.K)
        n = self.part.n
        if k.shape != (n, n):
            raise ValueError("K must be (m+u) x (m+u)")
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if y.size != self.part.m:
            raise ValueError("y must have length m")
        yt = np.asarray(self.y_tilde, dtype=np.float64).ravel()
        if yt.size not in (0, self.part.u):
            raise ValueError("y_tilde must have length u (or 0 when C_prime = 0)")
        if float(self.C) < 0 or float(self.C_prime) < 0:
            raise ValueError("C and C_prime must be non-negative")
        if float(self.C_prime) > 0 and yt.size == 0:
            raise ValueError("C_prime > 0 requires pseudo-targets")
        if not float(self.kappa) > 0:
            raise ValueError("kappa must be positive")
        if np.max(np.diagonal(k), initial=0.0) > float(self.kappa) ** 2 + 1e-12:
            raise ValueError("diag(K) exceeds kappa^2")
        object.__setattr__(self, "K", _readonly(k))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "y_tilde", _readonly(yt))
        object.__setattr__(self, "C", float(self.C))
        object.__setattr__(self, "C_prime", float(self.C_prime))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def n(self) -> int:
        return self.part.n


@dataclass(frozen=True)
class LocalEstimatorConfig:
    """Radius-limited weighted-average pseudo-target estimator.

    ``weighting`` is "gaussian" (weight exp(-d^2 / (2 sigma^2))) or
    "inverse-distance" (weight 1 / (1 + d)); distances are Euclidean in the
    normalized feature space.  ``fallback`` decides what an empty
    neighborhood yields: "error" raises, "zero" emits pseudo-target 0.
    """

    radius_r: float
    weighting: str = "gaussian"
    sigma: float = 1.0
    fallback: str = "error"

    def __post_init__(self):
        if float(self.radius_r) < 0:
            raise ValueError("radius_r must be non-negative")
        if self.weighting not in ("gaussian", "inverse-distance"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.weighting == "gaussian" and not float(self.sigma) > 0:
            raise ValueError("sigma must be positive for gaussian weighting")
        if self.fallback not in ("error", "zero"):
            raise ValueError(f"unknown fallback {self.fallback!r}")
        object.__setattr__(self, "radius_r", float(self.radius_r))
        object.__setattr__(self, "sigma", float(self.sigma))


def _labels_to_full(labels_on_S, part: Partition) -> np.ndarray:
    y = np.asarray(labels_on_S, dtype=np.float64).ravel()
    if y.size != part.m:
        raise ValueError("labels_on_S must have length m (sorted-S order)")
    full = np.zeros(part.n)
    full[part.train_idx] = y
    return full


def build_cm(g: GraphSpec, mu: float, labels_on_S, part: Partition) -> UnconstrainedProblem:
    """Consistency-method smoothing: normalized Laplacian, Cmat = mu * I."""
    if not float(mu) > 0:
        raise ValueError("mu must be positive")
    q = normalized_laplacian(g)
    y = _labels_to_full(labels_on_S, part)
    return UnconstrainedProblem(Q=q, Cmat=float(mu) * np.eye(g.n), y=y)


def _split_diag(part: Partition, C_l: float, C_u: float) -> np.ndarray:
    if not (float(C_l) > 0 and float(C_u) > 0):
        raise ValueError("C_l and C_u must be positive")
    d = np.empty(part.n)
    d[part.train_idx] = float(C_l)
    d[part.test_idx] = float(C_u)
    return np.diag(d)


def build_llreg(
    A_raw: np.ndarray, C_l: float, C_u: float, labels_on_S, part: Partition
) -> UnconstrainedProblem:
    """Local-linear regularization: Q = (I - A)^T (I - A), A row-normalized."""
    a = row_normalize(A_raw)
    m_mat = np.eye(a.shape[0]) - a
    q = m_mat.T @ m_mat
    q = 0.5 * (q + q.T)
    y = _labels_to_full(labels_on_S, part)
    return UnconstrainedProblem(Q=q, Cmat=_split_diag(part, C_l, C_u), y=y)


def build_gmf(
    g: GraphSpec, C_l: float, C_u: float, labels_on_S, part: Partition
) -> UnconstrainedProblem:
    """Gaussian-field style smoothing with the combinatorial Laplacian."""
    y = _labels_to_full(labels_on_S, part)
    return UnconstrainedProblem(Q=laplacian(g), Cmat=_split_diag(part, C_l, C_u), y=y)


def _solve_refined(a_sys: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Direct solve with one step of iterative refinement."""
    try:
        x = np.linalg.solve(a_sys, rhs)
        x += np.linalg.solve(a_sys, rhs - a_sys @ x)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    return x


def solve_unconstrained(p: UnconstrainedProblem) -> HypothesisScores:
    """Closed-form minimizer h = (Cmat^{-1} Q + I)^{-1} y.

    Solved as the equivalent symmetric system (Q + Cmat) h = Cmat y.
    """
    rhs = p.Cmat @ p.y
    h = _solve_refined(p.Q + p.Cmat, rhs)
    resid = np.linalg.solve(p.Cmat, p.Q @ h) + h - p.y
    if np.linalg.norm(resid) > _RESIDUAL_TOL * max(1.0, float(np.linalg.norm(p.y))):
        raise SingularSystem("solution residual exceeds tolerance")
    return HypothesisScores(scores=h)


def stabilize(p: UnconstrainedProblem) -> HypothesisScores:
    """Solve the problem restricted to the orthogonal complement of Q's bottom eigenvector.

    The feasible subspace's smallest Q-eigenvalue is the second-smallest
    eigenvalue of Q, which tightens the score-perturbation denominator.
    """
    v = spectrum(p.Q).eigenvector_min
    n = p.n
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = p.Q + p.Cmat
    kkt[:n, n] = v
    kkt[n, :n] = v
    rhs = np.concatenate([p.Cmat @ p.y, [0.0]])
    sol = _solve_refined(kkt, rhs)
    return HypothesisScores(scores=sol[:n])


def solve_constrained(p: ConstrainedProblem) -> HypothesisScores:
    """KKT solve of the constrained Laplacian problem.

    Stationarity: ``L h + (C/m) I_S (h - y_S) + beta * u_vec = 0`` with
    multiplier beta, plus feasibility ``u_vec^T h = 0``.

    Raises:
        ConstraintSpansNullSpace: all-ones constraint on a graph whose
            Laplacian has a multi-dimensional null space (disconnected).
        SingularSystem: the KKT system is numerically singular.
    """
    n = p.n
    u = p.u_vec
    ones_like = np.allclose(u, np.full(n, u[0]), rtol=1e-12, atol=0.0) and u[0] != 0
    if ones_like:
        spec = spectrum(p.L)
        if spec.lambda2 <= 1e-9 * max(abs(spec.lambda_max), 1.0):
            raise ConstraintSpansNullSpace(
                "all-ones constraint cannot pin the null space of a disconnected Laplacian"
            )
    y = p.y_S
    offset = 0.0
    if p.center_labels:
        mask = np.zeros(n)
        mask[p.part.train_idx] = 1.0
        u_s = u * mask
        denom = float(u_s @ u_s)
        if denom <= 1e-24:
            raise ZeroConstraintVector("constraint vanishes on the labeled set")
        offset = float(u_s @ y) / denom
        y = y - offset * u_s
    weight = p.C_tradeoff / p.part.m
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = p.L
    kkt[p.part.train_idx, p.part.train_idx] += weight
    kkt[:n, n] = u
    kkt[n, :n] = u
    rhs = np.concatenate([weight * y, [0.0]])
    sol = _solve_refined(kkt, rhs)
    h = sol[:n]
    resid = np.linalg.norm(kkt[:n] @ sol - rhs[:n])
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if resid > 1e-8 * scale or abs(float(u @ h)) > 1e-8 * scale:
        raise SingularSystem("KKT residual exceeds tolerance")
    if p.center_labels:
        h = h + offset * u
    return HypothesisScores(scores=h)


def laplacian_kernel_check(L: np.ndarray, h) -> bool:
    """Check that L's pseudo-inverse behaves as a reproducing kernel for h.

    Requires h in range(L) (projection residual <= 1e-8 relative); verifies
    ``L^+ L h = h`` and ``h^T L h = h^T L L^+ L h`` to 1e-8.

    Raises:
        NotInRange: h has a component outside range(L).
    """
    lap = _check_symmetric(L)
    hv = np.asarray(getattr(h, "scores", h), dtype=np.float64).ravel()
    if hv.size != lap.shape[0]:
        raise ValueError("h and L disagree on dimension")
    k = pseudo_inverse(lap)
    proj = k @ (lap @ hv)
    scale = max(1.0, float(np.linalg.norm(hv)))
    resid = float(np.linalg.norm(proj - hv))
    if resid > 1e-8 * scale:
        raise NotInRange("h has a component outside range(L)")
    quad = float(hv @ lap @ hv)
    quad_k = float(hv @ lap @ k @ lap @ hv)
    ok_quad = abs(quad - quad_k) <= 1e-8 * max(1.0, abs(quad))
    return resid <= 1e-8 * scale and ok_quad


def gaussian_kernel(points: np.ndarray, sigma: float) -> np.ndarray:
    """Gram matrix K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)), unit diagonal."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d2, 0.0, out=d2)
    k = np.exp(-d2 / (2.0 * sigma * sigma))
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


def pseudo_targets(
    sample: FullSample, part: Partition, cfg: LocalEstimatorConfig
) -> np.ndarray:
    """Weighted-average pseudo-targets for every unlabeled point.

    For unlabeled x', the neighborhood is the labeled points within Euclidean
    distance ``radius_r``; the pseudo-target is the weight-normalized average
    of their labels, so it always stays within the label bound.

    Returns:
        Length-u array aligned with the sorted unlabeled indices.

    Raises:
        PseudoTargetUnavailable: an empty neighborhood with fallback="error".
    """
    xs = sample.points[part.train_idx]
    xt = sample.points[part.test_idx]
    ys = sample.targets[part.train_idx]
    sq_s = np.sum(xs * xs, axis=1)
    sq_t = np.sum(xt * xt, axis=1)
    d2 = sq_t[:, None] + sq_s[None, :] - 2.0 * (xt @ xs.T)
    np.maximum(d2, 0.0, out=d2)
    member = d2 <= cfg.radius_r * cfg.radius_r
    if cfg.weighting == "gaussian":
        weights = np.exp(-d2 / (2.0 * cfg.sigma * cfg.sigma))
    else:
        weights = 1.0 / (1.0 + np.sqrt(d2))
    weights = np.where(member, weights, 0.0)
    totals = weights.sum(axis=1)
    counts = member.sum(axis=1)
    out = np.zeros(part.u)
    for row in range(part.u):
        if counts[row] == 0:
            if cfg.fallback == "error":
                raise PseudoTargetUnavailable(
                    f"unlabeled point {int(part.test_idx[row])} has no labeled "
                    f"neighbor within radius {cfg.radius_r}"
                )
            out[row] = 0.0
        elif totals[row] == 0.0:
            # all weights underflowed; fall back to the unweighted average
            out[row] = float(ys[member[row]].mean())
        else:
            out[row] = float(weights[row] @ ys) / totals[row]
    return out


def _psd_check(k: np.ndarray) -> None:
    shift = 1e-10 * max(1.0, float(np.max(np.diagonal(k), initial=0.0)))
    try:
        np.linalg.cholesky(k + shift * np.eye(k.shape[0]))
    except np.linalg.LinAlgError:
        raise NotPSDKernel("Gram matrix is not positive semidefinite") from None


def ltr_dual_coefficients(p: LtrProblem) -> tuple[np.ndarray, np.ndarray]:
    """Expansion coefficients of the LTR minimizer.

    The minimizer expands over the kernel sections of every point carrying a
    positive loss weight; writing Lambda for the diagonal of those weights,
    the coefficients solve ``(K_kk + Lambda^{-1}) alpha = [y_S; y_tilde]``
    restricted to the kept indices.

    Returns:
        (alpha, kept) where ``kept`` are the expansion indices into 0..n-1.
    """
    _psd_check(p.K)
    kept_parts = []
    inv_weights = []
    targets = []
    if p.C > 0:
        kept_parts.append(p.part.train_idx)
        inv_weights.append(np.full(p.part.m, p.part.m / p.C))
        targets.append(p.y)
    if p.C_prime > 0:
        kept_parts.append(p.part.test_idx)
        inv_weights.append(np.full(p.part.u, p.part.u / p.C_prime))
        targets.append(p.y_tilde)
    if not kept_parts:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    kept = np.concatenate(kept_parts)
    order = np.argsort(kept)
    kept = kept[order]
    inv_w = np.concatenate(inv_weights)[order]
    y_all = np.concatenate(targets)[order]
    sub = p.K[np.ix_(kept, kept)] + np.diag(inv_w)
    alpha = _solve_refined(sub, y_all)
    return alpha, kept


def solve_ltr(p: LtrProblem) -> HypothesisScores:
    """Minimize ``||f||_K^2 + (C/m) sum_S (f - y)^2 + (C'/u) sum_T (f - y_tilde)^2``."""
    alpha, kept = ltr_dual_coefficients(p)
    if kept.size == 0:
        return HypothesisScores(scores=np.zeros(p.n))
    return HypothesisScores(scores=p.K[:, kept] @ alpha)


def ltr_objective(p: LtrProblem, alpha: np.ndarray, kept: np.ndarray) -> float:
    """Objective value of the expansion ``f = sum_kept alpha_i K(., x_i)``."""
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    kept = np.asarray(kept, dtype=np.int64).ravel()
    if kept.size == 0:
        scores = np.zeros(p.n)
        norm2 = 0.0
    else:
        scores = p.K[:, kept] @ alpha
        norm2 = float(alpha @ p.K[np.ix_(kept, kept)] @ alpha)
    total = norm2
    if p.C > 0:
        d = scores[p.part.train_idx] - p.y
        total += (p.C / p.part.m) * float(d @ d)
    if p.C_prime > 0:
        d = scores[p.part.test_idx] - p.y_tilde
        total += (p.C_prime / p.part.u) * float(d @ d)
    return total


def solve_krr_induction(p: LtrProblem) -> HypothesisScores:
    """Kernel ridge regression on the labeled points, evaluated everywhere.

    Requires C_prime = 0; with C = 0 the solution is identically zero.
    """
    if p.C_prime != 0:
        raise ValueError("solve_krr_induction requires C_prime = 0")
    if p.C == 0:
        return HypothesisScores(scores=np.zeros(p.n))
    _psd_check(p.K)
    s = p.part.train_idx
    sub = p.K[np.ix_(s, s)] + (p.part.m / p.C) * np.eye(p.part.m)
    alpha = _solve_refined(sub, p.y)
    return HypothesisScores(scores=p.K[:, s] @ alpha)
