"""Projected-gradient ascent on the Stiefel manifold.

Independent of the spectral solver: maximizes the same trace objective by
Riemannian gradient steps with QR retraction and backtracking line search.
Used as a correctness oracle and cost comparator, so it returns the best
iterate seen rather than the last.
"""

import math
from dataclasses import dataclass

import numpy as np

from .coupling import coupling_values
from .solver import IterationRecord, ProjectionResult, SolverError, objective_cost, principal_angle
from .surrogate import surrogate


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    step: float = 1.0
    iters: int = 300
    backtrack: float = 0.5
    tol: float = 1e-6
    max_halvings: int = 30

    def __post_init__(self):
        if not self.step > 0:
            raise BaselineError("initial step must be positive")
        if not 0 < self.backtrack < 1:
            raise BaselineError("backtrack factor must lie in (0, 1)")


def riemannian_gradient(W, G):
    """Tangent-space projection G - W sym(W^T G) of a Euclidean gradient."""
    W = np.asarray(W, dtype=float)
    G = np.asarray(G, dtype=float)
    if W.shape != G.shape:
        raise BaselineError("gradient shape %s does not match W %s" % (G.shape, W.shape))
    M = W.T @ G
    return G - W @ (0.5 * (M + M.T))


def retract(M):
    """Thin-QR retraction with positive R diagonal; rejects rank-deficient M."""
    M = np.asarray(M, dtype=float)
    Q, R = np.linalg.qr(M)
    diag = np.diag(R)
    scale = np.max(np.abs(M)) * max(M.shape) * np.finfo(float).eps
    if np.any(np.abs(diag) <= scale):
        raise BaselineError("retraction input is rank deficient")
    signs = np.sign(diag)
    return Q * signs[None, :]


def finite_difference_gradient(X, W, gamma, spec, h=1e-5):
    """Central differences of the trace objective, entry by entry (Euclidean)."""
    if not 1e-7 <= h <= 1e-3:
        raise BaselineError("step h=%g outside [1e-7, 1e-3]" % h)
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    G = coupling_values(gamma)
    out = np.empty_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            Wp = W.copy()
            Wp[i, j] += h
            Wm = W.copy()
            Wm[i, j] -= h
            out[i, j] = (objective_cost(X, Wp, G, spec) - objective_cost(X, Wm, G, spec)) / (2 * h)
    return out


def stiefel_ascent(X, gamma, spec, q, config=None, seed=0):
    """Backtracking projected-gradient ascent from a seeded random start."""
    X = np.asarray(X, dtype=float)
    G = coupling_values(gamma)
    n, d = X.shape
    if not 1 <= q <= d:
        raise BaselineError("q=%d out of range for d=%d" % (q, d))
    cfg = config or BaselineConfig()

    rng = np.random.default_rng(seed)
    W = retract(rng.standard_normal((d, q)))
    cost = objective_cost(X, W, G, spec)
    if not math.isfinite(cost):
        raise BaselineError("objective is non-finite at the starting point")

    best_W, best_cost = W, cost
    history = []
    grad_norm = math.inf
    iterations = 0
    for t in range(1, cfg.iters + 1):
        grad = 2.0 * surrogate(X, W, G, spec).values @ W
        R = riemannian_gradient(W, grad)
        grad_norm = float(np.linalg.norm(R))
        if grad_norm < cfg.tol:
            break
        eta = cfg.step
        improved = False
        for _ in range(cfg.max_halvings):
            W_new = retract(W + eta * R)
            c_new = objective_cost(X, W_new, G, spec)
            if not math.isfinite(c_new):
                raise BaselineError("objective became non-finite during line search")
            if c_new > cost:
                improved = True
                break
            eta *= cfg.backtrack
        if not improved:
            break
        history.append(IterationRecord(c_new, eta, principal_angle(W_new, W)))
        iterations = t
        W, cost = W_new, c_new
        if cost > best_cost:
            best_W, best_cost = W, cost

    # Ritz values of the surrogate at the best iterate, plus the gap of the
    # full spectrum there, so results are comparable with the spectral solver
    Phi = surrogate(X, best_W, G, spec).values
    ritz = np.linalg.eigvalsh(0.5 * ((best_W.T @ Phi @ best_W) + (best_W.T @ Phi @ best_W).T))[::-1]
    spectrum = np.linalg.eigvalsh(0.5 * (Phi + Phi.T))[::-1]
    gap = float(spectrum[q - 1] - spectrum[q]) if q < d else math.inf
    return ProjectionResult(
        W=best_W,
        eigenvalues=np.asarray(ritz, dtype=float),
        cost=best_cost,
        iterations=max(iterations, 1),
        converged=grad_norm < cfg.tol,
        eigengap=gap,
        history=tuple(history),
    )
