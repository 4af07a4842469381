import numpy as np
import pytest

from ikdr import coupling as cp
from ikdr import kernels as kn


def test_centering_matrix_small():
    assert np.array_equal(cp.centering_matrix(1), np.array([[0.0]]))
    assert np.allclose(cp.centering_matrix(2), [[0.5, -0.5], [-0.5, 0.5]])
    H3 = cp.centering_matrix(3)
    assert np.max(np.abs(H3 @ np.ones(3))) <= 3e-14
    with pytest.raises(cp.CouplingError):
        cp.centering_matrix(0)


def test_centering_matrix_idempotent():
    for n in (2, 5, 17, 64):
        H = cp.centering_matrix(n)
        assert np.max(np.abs(H @ H - H)) <= 1e-12


def test_hsic_constant_kernel_is_independent():
    K_X = np.ones((6, 6))
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 6))
    K_Y = M @ M.T
    assert cp.hsic(K_X, K_Y) == pytest.approx(0.0, abs=1e-12)


def test_hsic_identity_pair():
    assert cp.hsic(np.eye(2), np.eye(2)) == pytest.approx(1.0)


def test_hsic_self_dependence_positive():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((10, 3))
    K = kn.kernel_matrix(X, np.eye(3), kn.gaussian_kernel(1.0))
    assert cp.hsic(K, K) > 0


def test_hsic_symmetric_and_nonnegative_on_psd():
    rng = np.random.default_rng(2)
    for _ in range(10):
        A = rng.standard_normal((7, 7))
        B = rng.standard_normal((7, 7))
        K_X, K_Y = A @ A.T, B @ B.T
        assert cp.hsic(K_X, K_Y) == pytest.approx(cp.hsic(K_Y, K_X), abs=1e-12)
        assert cp.hsic(K_X, K_Y) >= -1e-10


def test_hsic_errors():
    with pytest.raises(cp.CouplingError):
        cp.hsic(np.eye(3), np.eye(4))
    with pytest.raises(cp.CouplingError):
        cp.hsic(np.eye(1), np.eye(1))


def test_supervised_coupling_two_block():
    g = cp.supervised_coupling([0, 0, 1, 1])
    H = cp.centering_matrix(4)
    K_Y = np.kron(np.eye(2), np.ones((2, 2)))
    assert np.allclose(g.values, H @ K_Y @ H)
    assert np.max(np.abs(g.values @ np.ones(4))) <= 1e-12


def test_supervised_coupling_single_class_is_zero():
    g = cp.supervised_coupling([3, 3, 3])
    assert np.max(np.abs(g.values)) <= 1e-15


def test_supervised_coupling_distinct_pair_is_centering():
    g = cp.supervised_coupling([0, 1])
    assert np.allclose(g.values, cp.centering_matrix(2))


def test_supervised_coupling_empty_rejected():
    with pytest.raises(cp.CouplingError):
        cp.supervised_coupling([])


def test_unsupervised_equals_supervised_on_one_hot():
    labels = [0, 0, 1, 1, 2]
    Y = cp.one_hot(labels)
    a = cp.supervised_coupling(labels).values
    b = cp.unsupervised_coupling(Y).values
    assert np.array_equal(a, b)


def test_unsupervised_coupling_zero_embedding():
    g = cp.unsupervised_coupling(np.zeros((4, 2)))
    assert np.array_equal(g.values, np.zeros((4, 4)))


def test_unsupervised_coupling_centered_and_symmetric():
    rng = np.random.default_rng(3)
    Y = rng.standard_normal((8, 3))
    g = cp.unsupervised_coupling(Y)
    assert np.max(np.abs(g.values - g.values.T)) <= 1e-12
    assert np.max(np.abs(g.values @ np.ones(8))) <= 1e-10


def test_semisupervised_mu_zero_is_omega():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((5, 3))
    K = kn.kernel_matrix(X, np.eye(3), kn.gaussian_kernel(1.0))
    Y = cp.one_hot([0, 0, 1, 1, 1])
    K_hat = rng.standard_normal((5, 5))
    K_hat = K_hat @ K_hat.T
    g = cp.semisupervised_coupling(K, Y, K_hat, 0.0)
    deg = K @ np.ones(5)
    dm = deg ** -0.5
    omega = (dm[:, None] * Y) @ (dm[:, None] * Y).T
    assert np.allclose(g.values, omega, atol=1e-14)


def test_semisupervised_identity_kernel_gives_delta():
    Y = cp.one_hot([0, 1, 0, 1])
    g = cp.semisupervised_coupling(np.eye(4), Y, np.zeros((4, 4)), 1.0)
    assert np.allclose(g.values, Y @ Y.T)


def test_couplings_match_hand_assembly():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((4, 2))
    K = kn.kernel_matrix(X, np.eye(2), kn.gaussian_kernel(1.2))
    Y = cp.one_hot([0, 1, 1, 0])
    M = rng.standard_normal((4, 4))
    K_hat = M @ M.T
    mu = 0.7

    deg = K @ np.ones(4)
    dm = deg ** -0.5
    omega = (dm[:, None] * Y) @ (dm[:, None] * Y).T
    H = cp.centering_matrix(4)
    expert = H @ K_hat @ H

    semi = cp.semisupervised_coupling(K, Y, K_hat, mu)
    alt = cp.alternative_coupling(K, Y, K_hat, mu)
    assert np.allclose(semi.values, omega + mu * expert, atol=1e-13)
    assert np.allclose(alt.values, omega - mu * expert, atol=1e-13)
    # the two differ exactly by twice the expert term
    assert np.allclose(alt.values + 2 * mu * (0.5 * (expert + expert.T)),
                       semi.values, atol=1e-13)


def test_alternative_mu_zero_matches_semisupervised():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((5, 2))
    K = kn.kernel_matrix(X, np.eye(2), kn.gaussian_kernel(1.0))
    Y = cp.one_hot([0, 0, 1, 1, 1])
    K_hat = np.ones((5, 5))
    a = cp.alternative_coupling(K, Y, K_hat, 0.0)
    s = cp.semisupervised_coupling(K, Y, K_hat, 0.0)
    assert np.array_equal(a.values, s.values)


def test_degenerate_degree_rejected():
    K = np.zeros((3, 3))
    with pytest.raises(cp.CouplingError, match="row 0"):
        cp.semisupervised_coupling(K, np.ones((3, 1)), np.eye(3), 1.0)


def test_all_builders_symmetric():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 3))
    K = kn.kernel_matrix(X, np.eye(3), kn.gaussian_kernel(1.0))
    Y = rng.standard_normal((6, 2))
    M = rng.standard_normal((6, 6))
    K_hat = M @ M.T
    builders = [
        cp.supervised_coupling([0, 1, 2, 0, 1, 2]).values,
        cp.unsupervised_coupling(Y).values,
        cp.semisupervised_coupling(K, Y, K_hat, 0.9).values,
        cp.alternative_coupling(K, Y, K_hat, 0.9).values,
    ]
    for G in builders:
        assert np.max(np.abs(G - G.T)) <= 1e-12
