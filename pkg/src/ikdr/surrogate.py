"""Surrogate matrices: d x d stand-ins for the kernel in the trace objective.

For a coupling Gamma and a kernel with profile f, the surrogate

    Phi = 1/2 * sum_ij Gamma_ij f'(t_ij) (b a^T + a b^T)

has the property that the Euclidean gradient of J(W) = Tr(Gamma K) is 2 Phi W,
so its dominant eigenvectors are stationary points of the constrained trace
maximization.  The double sum collapses to dense d x d products:

    point pairs       sum_ij Psi_ij (x_i x_j^T + x_j x_i^T) = 2 X^T Psi X
    difference pairs  sum_ij Psi_ij A_ij = 4 X^T (D_Psi - Psi) X

with Psi = Gamma o F' (Hadamard).  Exact constants are kept throughout so the
gradient identity holds numerically, not just up to positive scale.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels as kn
from .coupling import coupling_values

BRUTE_FORCE_LIMIT = 200


class SurrogateError(ValueError):
    pass


@dataclass(frozen=True)
class SurrogateMatrix:
    values: np.ndarray
    kernel: kn.KernelSpec
    derived_from_W: bool


def degree_matrix(P):
    """Diagonal matrix of row sums."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise SurrogateError("degree matrix needs a square input")
    return np.diag(P.sum(axis=1))


def laplacian(P):
    """D_P - P; rows sum to zero."""
    return degree_matrix(P) - np.asarray(P, dtype=float)


def _check_shapes(X, W, G):
    if X.shape[1] != W.shape[0]:
        raise SurrogateError("X has %d features but W has %d rows" % (X.shape[1], W.shape[0]))
    if G.shape != (X.shape[0], X.shape[0]):
        raise SurrogateError("coupling shape %s does not match n=%d" % (G.shape, X.shape[0]))


def _weighted_sandwich(X, Psi, kind):
    # 1/2 * sum_ij Psi_ij A_ij, collapsed per pair kind
    Psi = 0.5 * (Psi + Psi.T)
    if kind == kn.POINT_PAIR:
        return X.T @ Psi @ X
    lap = np.diag(Psi.sum(axis=1)) - Psi
    return 2.0 * (X.T @ lap @ X)


def surrogate(X, W, gamma, spec):
    """Exact-constant surrogate Phi at the current projection W."""
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    G = coupling_values(gamma)
    _check_shapes(X, W, G)
    kn._require_resolved(spec)
    if spec.member == kn.CONIC:
        parts = [(w, surrogate(X, W, G, p)) for w, p in zip(spec.weights, spec.parts)]
        return SurrogateMatrix(conic_surrogate(parts).values, spec, True)
    T = kn.pair_statistic_matrix(X, W, spec.pair_kind)
    Psi = G * kn.profile_grad_matrix(spec, T)
    Phi = _weighted_sandwich(X, Psi, spec.pair_kind)
    return SurrogateMatrix(0.5 * (Phi + Phi.T), spec, True)


def surrogate_bruteforce(X, W, gamma, spec):
    """Literal double sum over sample pairs; the oracle for surrogate()."""
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    G = coupling_values(gamma)
    _check_shapes(X, W, G)
    n, d = X.shape
    if n > BRUTE_FORCE_LIMIT:
        raise SurrogateError("brute-force surrogate capped at n <= %d" % BRUTE_FORCE_LIMIT)
    kn._require_resolved(spec)
    if spec.member == kn.CONIC:
        # linearity of the double sum: each part keeps its own pair vectors
        Phi = np.zeros((d, d))
        for w, p in zip(spec.weights, spec.parts):
            Phi = Phi + w * surrogate_bruteforce(X, W, G, p).values
        return SurrogateMatrix(Phi, spec, True)
    P = W @ W.T
    Phi = np.zeros((d, d))
    for i in range(n):
        for j in range(n):
            a, b = _pair_vectors(X, i, j, spec.pair_kind)
            t = float(a @ P @ b)
            A = np.outer(b, a) + np.outer(a, b)
            Phi += 0.5 * G[i, j] * kn.kernel_grad(spec, t, i, j) * A
    return SurrogateMatrix(Phi, spec, True)


def _pair_vectors(X, i, j, kind):
    if kind == kn.POINT_PAIR:
        return X[i], X[j]
    diff = X[i] - X[j]
    return diff, diff


def surrogate_init(X, gamma, spec):
    """Projection-free initializer: the sign-of-f'(0) approximation of Phi."""
    X = np.asarray(X, dtype=float)
    G = coupling_values(gamma)
    if G.shape != (X.shape[0], X.shape[0]):
        raise SurrogateError("coupling shape %s does not match n=%d" % (G.shape, X.shape[0]))
    kn._require_resolved(spec)
    if spec.member == kn.CONIC:
        parts = [(w, surrogate_init(X, G, p)) for w, p in zip(spec.weights, spec.parts)]
        return SurrogateMatrix(conic_surrogate(parts).values, spec, False)
    if spec.member == kn.RELATIVE_RBF:
        s = np.asarray(spec.sigmas, dtype=float)
        if s.shape[0] != X.shape[0]:
            raise SurrogateError("relative-RBF bandwidth count does not match n")
        Psi = G / np.outer(s, s)
        Phi = -(X.T @ (np.diag(Psi.sum(axis=1)) - Psi) @ X)
        return SurrogateMatrix(0.5 * (Phi + Phi.T), spec, False)
    sign = float(np.sign(kn.kernel_grad(spec, 0.0)))
    if spec.pair_kind == kn.POINT_PAIR:
        Phi = sign * (X.T @ G @ X)
    else:
        Phi = sign * (X.T @ (np.diag(G.sum(axis=1)) - G) @ X)
    return SurrogateMatrix(0.5 * (Phi + Phi.T), spec, False)


def conic_surrogate(parts):
    """Weighted sum of surrogate matrices, in the given order."""
    if not parts:
        raise SurrogateError("conic surrogate needs at least one part")
    mats = []
    for w, phi in parts:
        if not w > 0:
            raise SurrogateError("conic weights must be strictly positive")
        mats.append((float(w), phi.values if isinstance(phi, SurrogateMatrix) else np.asarray(phi, dtype=float)))
    d = mats[0][1].shape
    out = mats[0][0] * mats[0][1]
    for w, m in mats[1:]:
        if m.shape != d:
            raise SurrogateError("conic parts have mismatched shapes %s vs %s" % (m.shape, d))
        out = out + w * m
    kernel = parts[0][1].kernel if isinstance(parts[0][1], SurrogateMatrix) else None
    return SurrogateMatrix(out, kernel, True)
