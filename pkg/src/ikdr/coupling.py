"""Coupling matrices: the symmetric n x n matrix traced against the kernel.

Each learning paradigm reduces to maximizing Tr(Gamma K) over orthonormal W
for a paradigm-specific coupling Gamma, built here from labels, embeddings,
or expert scores.  Also implements the empirical HSIC dependence measure
Tr(K_X H K_Y H) / (n-1)^2 (Gretton et al., 2005).
"""

from dataclasses import dataclass

import numpy as np

from .kernels import kernel_matrix

SUPERVISED = "supervised"
UNSUPERVISED = "unsupervised"
SEMI_SUPERVISED = "semisupervised"
ALTERNATIVE = "alternative"
RAW = "raw"


class CouplingError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingMatrix:
    values: np.ndarray
    provenance: str = RAW


def coupling_values(gamma):
    """Accept a CouplingMatrix or a bare array."""
    if isinstance(gamma, CouplingMatrix):
        return gamma.values
    return np.asarray(gamma, dtype=float)


def _symmetrized(G):
    # kill round-off asymmetry; the surrogate derivation assumes symmetry
    return 0.5 * (G + G.T)


def centering_matrix(n):
    """H = I - (1/n) 1 1^T; annihilates constant vectors."""
    if n < 1:
        raise CouplingError("centering matrix needs n >= 1")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def hsic(K_X, K_Y):
    """Empirical HSIC: Tr(K_X H K_Y H) / (n-1)^2."""
    K_X = np.asarray(K_X, dtype=float)
    K_Y = np.asarray(K_Y, dtype=float)
    if K_X.shape != K_Y.shape or K_X.ndim != 2 or K_X.shape[0] != K_X.shape[1]:
        raise CouplingError(
            "kernel matrices must share a square shape, got %s and %s"
            % (K_X.shape, K_Y.shape)
        )
    n = K_X.shape[0]
    if n < 2:
        raise CouplingError("hsic needs at least two samples")
    H = centering_matrix(n)
    return float(np.sum(K_X * (H @ K_Y @ H))) / (n - 1) ** 2


def one_hot(labels):
    """n x k indicator matrix; class ids keep their first-appearance order."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise CouplingError("empty label vector")
    order = {}
    dense = np.empty(labels.size, dtype=int)
    for pos, v in enumerate(labels.tolist()):
        if v not in order:
            order[v] = len(order)
        dense[pos] = order[v]
    Y = np.zeros((labels.size, len(order)))
    Y[np.arange(labels.size), dense] = 1.0
    return Y


def supervised_coupling(labels, label_kernel=None):
    """Centered label kernel H K_Y H.

    The default label kernel is the one-hot delta (1 iff same class); pass a
    KernelSpec to build K_Y from numeric targets instead.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise CouplingError("empty label vector")
    n = labels.size
    if label_kernel is None:
        Y = one_hot(labels)
        K_Y = Y @ Y.T
    else:
        t = np.asarray(labels, dtype=float).reshape(n, -1)
        K_Y = kernel_matrix(t, np.eye(t.shape[1]), label_kernel)
    H = centering_matrix(n)
    return CouplingMatrix(_symmetrized(H @ K_Y @ H), SUPERVISED)


def unsupervised_coupling(Y_embed):
    """Centered embedding kernel H (Y Y^T) H."""
    Y = np.asarray(Y_embed, dtype=float)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise CouplingError("embedding must be n x k with k >= 1")
    if not np.all(np.isfinite(Y)):
        raise CouplingError("embedding has non-finite entries")
    H = centering_matrix(Y.shape[0])
    return CouplingMatrix(_symmetrized(H @ (Y @ Y.T) @ H), UNSUPERVISED)


def _normalized_embedding_term(K_XW, Y_embed):
    K = np.asarray(K_XW, dtype=float)
    Y = np.asarray(Y_embed, dtype=float)
    if K.shape[0] != K.shape[1] or K.shape[0] != Y.shape[0]:
        raise CouplingError("kernel and embedding sample counts differ")
    deg = K @ np.ones(K.shape[0])
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise CouplingError("degenerate degree matrix: row %d" % bad[0])
    dm = deg ** -0.5
    S = dm[:, None] * Y
    return S @ S.T


def semisupervised_coupling(K_XW, Y_embed, K_expert, mu):
    """Omega + mu * H K_expert H with Omega = D^{-1/2} Y Y^T D^{-1/2}.

    D is the degree matrix of the current kernel; it is held fixed for the
    projection step even though it depends on W.
    """
    if mu < 0:
        raise CouplingError("mu must be nonnegative")
    Omega = _normalized_embedding_term(K_XW, Y_embed)
    n = Omega.shape[0]
    K_hat = np.asarray(K_expert, dtype=float)
    H = centering_matrix(n)
    G = Omega + mu * (H @ K_hat @ H)
    return CouplingMatrix(_symmetrized(G), SEMI_SUPERVISED)


def alternative_coupling(K_XW, Y_embed, K_expert, mu):
    """As the semi-supervised coupling but the expert term is subtracted."""
    if mu < 0:
        raise CouplingError("mu must be nonnegative")
    Omega = _normalized_embedding_term(K_XW, Y_embed)
    n = Omega.shape[0]
    K_hat = np.asarray(K_expert, dtype=float)
    H = centering_matrix(n)
    G = Omega - mu * (H @ K_hat @ H)
    return CouplingMatrix(_symmetrized(G), ALTERNATIVE)
