"""Evaluation: normalized mutual information, k-NN accuracy, cross-validation."""

import math
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import kernels as kn
from .paradigms import supervised_dr


class MetricsError(ValueError):
    pass


def _partitions_equal(a, b):
    # same grouping up to a bijection of label values
    return len(set(zip(a, b))) == len(set(a)) == len(set(b))


def nmi(labels_a, labels_b):
    """Normalized mutual information I(A,B)/sqrt(H(A)H(B)), natural log.

    Equal partitions score exactly 1.0; if exactly one side is a single
    cluster the score is 0.0 (the measure carries no information there).
    """
    a = list(np.asarray(labels_a).tolist())
    b = list(np.asarray(labels_b).tolist())
    if len(a) != len(b):
        raise MetricsError("label vectors differ in length")
    if not a:
        raise MetricsError("empty label vectors")
    if _partitions_equal(a, b):
        return 1.0
    n = len(a)
    ca = Counter(a)
    cb = Counter(b)
    cab = Counter(zip(a, b))
    h_a = sum((r / n) * math.log(n / r) for r in ca.values())
    h_b = sum((r / n) * math.log(n / r) for r in cb.values())
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    # integer ratios keep independent tables at an exact zero
    mi = sum(
        (cnt / n) * math.log((n * cnt) / (ca[i] * cb[j]))
        for (i, j), cnt in cab.items()
    )
    return min(1.0, max(0.0, mi / math.sqrt(h_a * h_b)))


def knn_accuracy(X_train, y_train, X_test, y_test, k=5):
    """Euclidean k-nearest-neighbor majority vote accuracy.

    Vote ties break toward the class with the smaller mean neighbor distance,
    then toward the lower class id.
    """
    Xtr = np.asarray(X_train, dtype=float)
    Xte = np.asarray(X_test, dtype=float)
    ytr = np.asarray(y_train)
    yte = np.asarray(y_test)
    if Xtr.shape[0] == 0 or Xte.shape[0] == 0:
        raise MetricsError("empty train or test set")
    if k > Xtr.shape[0]:
        raise MetricsError("k=%d exceeds training size %d" % (k, Xtr.shape[0]))
    gtr = np.einsum("ij,ij->i", Xtr, Xtr)
    gte = np.einsum("ij,ij->i", Xte, Xte)
    D2 = gte[:, None] + gtr[None, :] - 2.0 * (Xte @ Xtr.T)
    np.maximum(D2, 0.0, out=D2)
    D = np.sqrt(D2)

    correct = 0
    for r in range(Xte.shape[0]):
        order = np.argsort(D[r], kind="stable")[:k]
        votes = {}
        for idx in order:
            votes.setdefault(ytr[idx], []).append(D[r, idx])
        best = sorted(
            votes.items(),
            key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), kv[0]),
        )[0][0]
        if best == yte[r]:
            correct += 1
    return correct / Xte.shape[0]


@dataclass(frozen=True)
class FoldPlan:
    assignments: np.ndarray
    folds: int
    seed: int


def make_folds(labels, folds, seed, stratified=True):
    """Deterministic fold ids; stratified deals each class round-robin."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if folds < 2:
        raise MetricsError("need at least 2 folds")
    if folds > n:
        raise MetricsError("more folds than samples")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=int)
    if stratified:
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            if idx.size < folds:
                raise MetricsError(
                    "class %r has %d members, fewer than %d folds" % (c, idx.size, folds)
                )
            idx = rng.permutation(idx)
            assignments[idx] = np.arange(idx.size) % folds
    else:
        perm = rng.permutation(n)
        assignments[perm] = np.arange(n) % folds
    return FoldPlan(assignments, folds, seed)


def _standardize_pair(X_train, X_test):
    mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    return (X_train - mean) / safe, (X_test - mean) / safe


def fit_fold(X_train, y_train, spec, q, delta=0.01, max_iter=50):
    """Standardize and fit on the training split only; test rows never enter."""
    spec = kn.resolve(spec, X_train)
    return supervised_dr(X_train, y_train, spec, q, delta=delta, max_iter=max_iter)


@dataclass(frozen=True)
class CrossValResult:
    mean_accuracy: float
    std_accuracy: float
    mean_cost: float
    mean_time_s: float
    fold_accuracies: tuple
    fold_iterations: tuple
    all_converged: bool


def cross_validate(X, labels, spec, q, folds=10, seed=0, delta=0.01,
                   max_iter=50, knn_k=5, stratified=True):
    """Per-fold: standardize on train, fit the projection on train, score
    a k-NN classifier on the projected test split."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    plan = make_folds(labels, folds, seed, stratified=stratified)
    accs, costs, times, iters = [], [], [], []
    all_conv = True
    for f in range(folds):
        te = plan.assignments == f
        tr = ~te
        Xtr, Xte = _standardize_pair(X[tr], X[te])
        t0 = time.perf_counter()
        res = fit_fold(Xtr, labels[tr], spec, q, delta=delta, max_iter=max_iter)
        times.append(time.perf_counter() - t0)
        accs.append(knn_accuracy(Xtr @ res.W, labels[tr], Xte @ res.W, labels[te], k=knn_k))
        costs.append(res.cost)
        iters.append(res.iterations)
        all_conv = all_conv and res.converged
    accs = np.asarray(accs)
    return CrossValResult(
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std()),
        mean_cost=float(np.mean(costs)),
        mean_time_s=float(np.mean(times)),
        fold_accuracies=tuple(accs.tolist()),
        fold_iterations=tuple(iters),
        all_converged=all_conv,
    )
