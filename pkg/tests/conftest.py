import os

import numpy as np
import pytest

from ikdr.data_io import load_csv, standardize

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
WINE_CSV = os.path.join(DATA_DIR, "wine.csv")


def rand_orthonormal(d, q, rng):
    return np.linalg.qr(rng.standard_normal((d, q)))[0]


def three_blobs(seed=3, n_per=25, blob_std=0.4, noise_std=1.0):
    """Three separated Gaussian blobs in dims 0-1, pure noise in dims 2-4."""
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 8.0], [7.0, -4.0], [-7.0, -4.0]])
    pts, lab = [], []
    for c in range(3):
        P = rng.normal(0, blob_std, size=(n_per, 2)) + centers[c]
        pts.append(np.hstack([P, rng.normal(0, noise_std, size=(n_per, 3))]))
        lab += [c] * n_per
    return np.vstack(pts), np.asarray(lab)


def blob_grid(seed=7, n_per=30, blob_std=0.2):
    """2x2 grid of Gaussian blobs; returns (X, row_labels, col_labels)."""
    rng = np.random.default_rng(seed)
    pts, rows, cols = [], [], []
    for r, cy in enumerate((-2.0, 2.0)):
        for c, cx in enumerate((-2.0, 2.0)):
            pts.append(rng.normal(0, blob_std, size=(n_per, 2)) + [cx, cy])
            rows += [r] * n_per
            cols += [c] * n_per
    X = np.vstack(pts)
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    return X, np.asarray(rows), np.asarray(cols)


def two_blobs(seed=0, n_per=20, margin=10.0, noise=0.3):
    """Two classes split cleanly along axis 0."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0, noise, size=(2 * n_per, 2))
    X[:n_per, 0] -= margin / 2
    X[n_per:, 0] += margin / 2
    y = np.array([0] * n_per + [1] * n_per)
    return X, y


@pytest.fixture(scope="session")
def wine_raw():
    return load_csv(WINE_CSV, label_column="class")


@pytest.fixture(scope="session")
def wine(wine_raw):
    return standardize(wine_raw)
