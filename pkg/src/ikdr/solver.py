"""Fixed-point spectral solver for the constrained trace maximization.

The solver alternates between rebuilding the surrogate matrix at the current
projection and replacing the projection with the surrogate's dominant
eigenvectors.  Eigenvalue drift is the cheap preliminary convergence test;
the definitive test is stationarity of the iterate under the next surrogate,
which falls out of the surrogate build the loop performs anyway.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import coupling_values
from .kernels import kernel_matrix
from .surrogate import surrogate, surrogate_init

# relative stationarity ||Phi(W)W - W diag(L)||_F / ||Phi||_F accepted as a
# fixed point
RESIDUAL_TOL = 1e-6

# angle below which successive spans are numerically the same subspace; the
# surrogate depends on W only through W W^T, so a frozen span is a fixed point
SPAN_FIXED_ANGLE = 1e-9

# cap on subspace movement tolerated when the eigenvalue test fires
CONFIRM_ANGLE = 0.05


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class IterationRecord:
    cost: float
    eig_change: float
    angle: float


@dataclass(frozen=True)
class ProjectionResult:
    W: np.ndarray
    eigenvalues: np.ndarray
    cost: float
    iterations: int
    converged: bool
    eigengap: float
    history: tuple = field(default_factory=tuple)


def _eigh_descending(S):
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    # deterministic sign: the largest-magnitude entry of each vector is positive
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            vecs[:, k] = -col
    return vals, vecs


def dominant_eigenvectors(Phi, q):
    """The q most dominant eigenpairs of a symmetric matrix, descending."""
    P = Phi.values if hasattr(Phi, "values") else np.asarray(Phi, dtype=float)
    d = P.shape[0]
    if not 1 <= q <= d:
        raise SolverError("q=%d out of range for d=%d" % (q, d))
    if not np.all(np.isfinite(P)):
        raise SolverError("surrogate matrix has non-finite entries")
    vals, vecs = _eigh_descending(P)
    return vecs[:, :q], vals[:q]


def eigenvalue_converged(lam_now, lam_prev, delta):
    """Relative 2-norm eigenvalue drift below delta."""
    lam_now = np.asarray(lam_now, dtype=float)
    lam_prev = np.asarray(lam_prev, dtype=float)
    if lam_now.shape != lam_prev.shape:
        raise SolverError("eigenvalue vectors differ in length")
    denom = float(np.linalg.norm(lam_now))
    if denom == 0.0:
        return float(np.linalg.norm(lam_prev)) == 0.0
    return float(np.linalg.norm(lam_now - lam_prev)) / denom < delta


def principal_angle(W_a, W_b):
    """Maximal principal angle (radians) between the two column spans."""
    W_a = np.asarray(W_a, dtype=float)
    W_b = np.asarray(W_b, dtype=float)
    if W_a.shape != W_b.shape:
        raise SolverError("subspace bases differ in shape")
    s = np.linalg.svd(W_a.T @ W_b, compute_uv=False)
    return float(np.arccos(np.clip(s.min(), 0.0, 1.0)))


def objective_cost(X, W, gamma, spec):
    """Tr(Gamma K) without forming the matrix product."""
    G = coupling_values(gamma)
    K = kernel_matrix(X, W, spec)
    return float(np.sum(G * K))


def objective_gradient(X, W, gamma, spec):
    """Euclidean gradient of the trace objective: 2 Phi W."""
    return 2.0 * surrogate(X, W, gamma, spec).values @ np.asarray(W, dtype=float)


def _rel_change(lam_now, lam_prev):
    denom = float(np.linalg.norm(lam_now))
    if denom == 0.0:
        return 0.0 if float(np.linalg.norm(lam_prev)) == 0.0 else math.inf
    return float(np.linalg.norm(np.asarray(lam_now) - np.asarray(lam_prev))) / denom


def _stationarity(Phi_vals, W, lam):
    num = float(np.linalg.norm(Phi_vals @ W - W * lam[None, :]))
    den = float(np.linalg.norm(Phi_vals))
    return num / den if den > 0 else 0.0


def ism_solve(X, gamma, spec, q, delta=0.01, max_iter=50):
    """Iterate surrogate rebuilds and dominant eigenvectors to a fixed point.

    An iterate counts as converged once the eigenvalue drift is below delta,
    the final two spans agree (principal angle at most CONFIRM_ANGLE), and the
    iterate is stationary under the surrogate rebuilt at itself.  Hitting
    max_iter without that confirmation returns converged=False rather than
    raising.
    """
    X = np.asarray(X, dtype=float)
    G = coupling_values(gamma)
    n, d = X.shape
    if not 1 <= q <= d:
        raise SolverError("q=%d out of range for d=%d" % (q, d))
    if G.shape != (n, n):
        raise SolverError("coupling shape %s does not match n=%d" % (G.shape, n))
    if np.max(np.abs(G - G.T)) > 1e-8:
        raise SolverError("coupling matrix is not symmetric")

    Phi0 = surrogate_init(X, G, spec)
    W_prev, lam_prev = dominant_eigenvectors(Phi0, q)

    history = []
    candidate = False   # previous iterate passed the preliminary tests
    converged = False
    iterations = 0
    W, lam = W_prev, lam_prev
    last_gap = math.inf

    for t in range(1, max_iter + 2):
        if t > max_iter and not candidate:
            break
        Phi = surrogate(X, W_prev, G, spec)
        if not np.all(np.isfinite(Phi.values)):
            raise SolverError("surrogate matrix has non-finite entries")
        if candidate and _stationarity(Phi.values, W_prev, lam_prev) <= RESIDUAL_TOL:
            W, lam = W_prev, lam_prev
            converged = True
            break
        if t > max_iter:
            break
        vals, vecs = _eigh_descending(Phi.values)
        W, lam = vecs[:, :q], vals[:q]
        last_gap = float(vals[q - 1] - vals[q]) if q < d else math.inf
        theta = principal_angle(W, W_prev)
        rel = _rel_change(lam, lam_prev)
        cost = objective_cost(X, W, G, spec)
        history.append(IterationRecord(cost, rel, theta))
        iterations = t
        candidate = theta <= SPAN_FIXED_ANGLE or (
            eigenvalue_converged(lam, lam_prev, delta) and theta <= CONFIRM_ANGLE
        )
        W_prev, lam_prev = W, lam

    if converged:
        # the confirming build belongs to the *next* pass; the converged
        # iterate is the last one recorded
        iterations = len(history)

    cost = history[-1].cost if history else objective_cost(X, W, G, spec)
    return ProjectionResult(
        W=W,
        eigenvalues=np.asarray(lam, dtype=float),
        cost=cost,
        iterations=iterations,
        converged=converged,
        eigengap=last_gap,
        history=tuple(history),
    )
