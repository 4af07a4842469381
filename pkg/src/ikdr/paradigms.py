"""Learning-paradigm drivers built on the spectral solver.

Supervised reduction is a single solve against the centered label kernel.
The clustering paradigms alternate between spectral clustering at the current
projection (the embedding step) and a projection solve against a coupling
built from the embedding, optionally tilted toward (semi-supervised) or away
from (alternative clustering) an expert kernel.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels as kn
from .coupling import (
    alternative_coupling,
    centering_matrix,
    one_hot,
    semisupervised_coupling,
    supervised_coupling,
    unsupervised_coupling,
)
from .solver import _eigh_descending, ism_solve


class ParadigmError(ValueError):
    pass


@dataclass(frozen=True)
class ParadigmConfig:
    q: int
    clusters: int = 2
    mu: float = 1.0
    delta: float = 0.01
    outer_iters: int = 10
    max_iter: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.q < 1:
            raise ParadigmError("q must be at least 1")
        if self.clusters < 2:
            raise ParadigmError("clustering needs at least 2 clusters")
        if self.mu < 0:
            raise ParadigmError("mu must be nonnegative")
        if not self.delta > 0:
            raise ParadigmError("delta must be positive")


@dataclass(frozen=True)
class OuterRecord:
    objective: float
    cluster_term: float
    dependence_term: float
    distinct_labels: int
    labels: tuple = ()


@dataclass(frozen=True)
class ClusteringResult:
    W: np.ndarray
    labels: np.ndarray
    Y_embed: np.ndarray
    nmi_vs_reference: float = None
    converged: bool = False
    history: tuple = field(default_factory=tuple)


def kmeans(points, k, seed):
    """Lloyd iterations from a k-means++ start; deterministic given the seed.

    Runs to an assignment fixpoint (or 100 sweeps); an emptied cluster is
    reseeded to the point farthest from its own center.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    if n < k:
        raise ParadigmError("kmeans needs at least k=%d points, got %d" % (k, n))
    rng = np.random.default_rng(seed)

    centers = np.empty((k, P.shape[1]))
    centers[0] = P[rng.integers(n)]
    d2 = np.sum((P - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = int(rng.integers(n))
        centers[c] = P[idx]
        d2 = np.minimum(d2, np.sum((P - centers[c]) ** 2, axis=1))

    labels = None
    for _ in range(100):
        dist = np.sum((P[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(dist, axis=1)
        for c in range(k):
            if not np.any(new_labels == c):
                stray = int(np.argmax(dist[np.arange(n), new_labels]))
                centers[c] = P[stray]
                new_labels[stray] = c
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            mask = labels == c
            if np.any(mask):
                centers[c] = P[mask].mean(axis=0)
    return labels


def spectral_clustering(K, k, seed):
    """Cluster by the dominant eigenvectors of D^{-1/2} K D^{-1/2}.

    Returns the orthonormal n x k embedding (for coupling construction) and
    labels from seeded k-means on its row-normalized version.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ParadigmError("similarity matrix must be square")
    if np.max(np.abs(K - K.T)) > 1e-8:
        raise ParadigmError("similarity matrix must be symmetric")
    n = K.shape[0]
    if k < 2 or k > n:
        raise ParadigmError("cluster count k=%d out of range" % k)
    deg = K @ np.ones(n)
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise ParadigmError("degenerate degree matrix: row %d" % bad[0])
    dm = deg ** -0.5
    A = dm[:, None] * K * dm[None, :]
    _, vecs = _eigh_descending(A)
    Y = vecs[:, :k]
    norms = np.linalg.norm(Y, axis=1)
    Yn = Y / np.where(norms > 0, norms, 1.0)[:, None]
    labels = kmeans(Yn, k, seed)
    return Y, labels


def supervised_dr(X, labels, spec, q, delta=0.01, max_iter=50):
    """Single projection solve against the centered label kernel."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if labels.shape[0] != X.shape[0]:
        raise ParadigmError("label count does not match sample count")
    if X.shape[0] < q:
        raise ParadigmError("need at least q samples")
    spec = kn.resolve(spec, X)
    gamma = supervised_coupling(labels)
    if np.max(np.abs(gamma.values)) < 1e-15:
        raise ParadigmError("coupling matrix is zero (single class?)")
    return ism_solve(X, gamma, spec, q, delta=delta, max_iter=max_iter)


_CLUSTERING_KERNELS = (kn.LINEAR, kn.POLYNOMIAL, kn.GAUSSIAN, kn.RELATIVE_RBF, kn.CONIC)


def _check_clustering_kernel(spec):
    # the squared kernel is a distance, not an affinity; its zero diagonal
    # breaks the normalized similarity
    members = [p.member for p in spec.parts] if spec.member == kn.CONIC else [spec.member]
    for m in members:
        if m not in _CLUSTERING_KERNELS:
            raise ParadigmError("kernel %r is not a similarity; cannot cluster with it" % m)


def _identity_start(d):
    # the first embedding step sees the unprojected kernel; the first
    # projection solve then brings W down to d x q
    return np.eye(d)


def _affinity(K):
    """Nonnegative similarity for the embedding step.

    Indefinite kernels (polynomial, linear) can drive row sums negative after
    a projection update; shifting every entry by the global minimum restores
    a valid affinity and leaves the centered coupling terms unchanged.
    Nonnegative kernels pass through untouched."""
    lo = float(K.min())
    return K if lo >= 0 else K - lo


def _cluster_quality(K, Y):
    n = K.shape[0]
    deg = K @ np.ones(n)
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise ParadigmError("degenerate degree matrix: row %d" % bad[0])
    S = (deg ** -0.5)[:, None] * Y
    return float(np.sum(S * (K @ S)))


def _dependence(K, K_expert):
    n = K.shape[0]
    H = centering_matrix(n)
    return float(np.sum(K * (H @ K_expert @ H)))


def _alternate(X, spec, config, coupling_step, expert_K, sign):
    """Shared alternation loop; sign picks the expert term's contribution."""
    X = np.asarray(X, dtype=float)
    spec = kn.resolve(spec, X)
    _check_clustering_kernel(spec)
    n, d = X.shape
    q, k = config.q, config.clusters
    if q > d:
        raise ParadigmError("q=%d exceeds feature count d=%d" % (q, d))
    if k > n:
        raise ParadigmError("more clusters than samples")

    W = _identity_start(d)
    history = []
    labels = Y = None
    prev_obj = None
    converged = False
    for _ in range(config.outer_iters):
        A = _affinity(kn.kernel_matrix(X, W, spec))
        Y, labels = spectral_clustering(A, k, config.seed)
        gamma = coupling_step(A, Y)
        res = ism_solve(X, gamma, spec, q, delta=config.delta, max_iter=config.max_iter)
        W = res.W
        A_new = _affinity(kn.kernel_matrix(X, W, spec))
        cluster_term = _cluster_quality(A_new, Y)
        dep = _dependence(A_new, expert_K) if expert_K is not None else 0.0
        objective = cluster_term + sign * config.mu * dep
        history.append(OuterRecord(objective, cluster_term, dep,
                                   int(len(np.unique(labels))), tuple(labels.tolist())))
        if prev_obj is not None:
            denom = max(abs(objective), 1e-300)
            if abs(objective - prev_obj) / denom < config.delta:
                converged = True
                break
        prev_obj = objective
    labels = _extract_labels(X, W, k, config.seed)
    return W, labels, Y, converged, tuple(history)


def _extract_labels(X, W, k, seed):
    """Final label read-out: plain spectral clustering of the projected data.

    The chosen kernel shapes W through the alternation; cluster membership is
    then read off the reduced points with a median-bandwidth Gaussian
    affinity, so indefinite kernels still yield clean labels."""
    Z = np.asarray(X) @ W
    gspec = kn.resolve(kn.gaussian_kernel(), Z)
    K = kn.kernel_matrix(Z, np.eye(Z.shape[1]), gspec)
    _, labels = spectral_clustering(K, k, seed)
    return labels


def unsupervised_dr(X, spec, config):
    """Alternate spectral clustering with projection solves on H Y Y^T H."""
    coupling_step = lambda K, Y: unsupervised_coupling(Y)
    W, labels, Y, converged, history = _alternate(X, spec, config, coupling_step, None, 0.0)
    return ClusteringResult(W, labels, Y, None, converged, history)


def semisupervised_dr(X, expert_scores, spec, config):
    """Alternation whose projection step is tilted toward the expert kernel."""
    S = np.asarray(expert_scores, dtype=float)
    if S.ndim != 2 or S.shape[1] < 1:
        raise ParadigmError("expert scores must be n x r with r >= 1")
    if S.shape[0] != np.asarray(X).shape[0]:
        raise ParadigmError("expert score count does not match sample count")
    K_expert = kn.kernel_matrix(
        S, np.eye(S.shape[1]), kn.resolve(kn.gaussian_kernel(), S)
    )
    coupling_step = lambda K, Y: semisupervised_coupling(K, Y, K_expert, config.mu)
    W, labels, Y, converged, history = _alternate(X, spec, config, coupling_step, K_expert, +1.0)
    return ClusteringResult(W, labels, Y, None, converged, history)


def alternative_clustering(X, original_labels, spec, config):
    """Find a fresh clustering while penalizing dependence on the given one."""
    from .metrics import nmi

    original = np.asarray(original_labels)
    if original.shape[0] != np.asarray(X).shape[0]:
        raise ParadigmError("original label count does not match sample count")
    Y0 = one_hot(original)
    K_expert = Y0 @ Y0.T
    coupling_step = lambda K, Y: alternative_coupling(K, Y, K_expert, config.mu)
    W, labels, Y, converged, history = _alternate(X, spec, config, coupling_step, K_expert, -1.0)
    score = nmi(labels, original)
    return ClusteringResult(W, labels, Y, score, converged, history)
