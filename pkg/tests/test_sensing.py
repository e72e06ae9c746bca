import numpy as np
import pytest

from otk.sensing import (
    Ensemble,
    derive_seed,
    make_instance,
    make_matrix,
    make_signal,
    measure,
)


@pytest.mark.parametrize("ens", list(Ensemble))
def test_matrix_deterministic(ens):
    a = make_matrix(7, 9, ens, 42).matrix
    b = make_matrix(7, 9, ens, 42).matrix
    assert a.tobytes() == b.tobytes()
    assert make_matrix(7, 9, ens, 43).matrix.tobytes() != a.tobytes()


def test_bernoulli_entries_and_column_means():
    m = 400
    means = []
    for seed in range(100):
        A = make_matrix(m, 10, "bernoulli", seed).matrix
        assert set(np.unique(A)) == {-1.0, 1.0}
        means.extend(np.abs(A.mean(axis=0)))
    assert np.mean(np.array(means) <= 4 / np.sqrt(m)) >= 0.99


def test_gaussian_moments():
    col = make_matrix(1000, 1, "gaussian", 3).matrix[:, 0]
    assert abs(col.mean()) <= 0.1
    assert 0.85 <= col.var(ddof=1) <= 1.15


@pytest.mark.parametrize("ens", list(Ensemble))
def test_rows_isotropic(ens):
    m, n, reps = 30, 6, 200
    acc = sum(make_matrix(m, n, ens, s).matrix.T @ make_matrix(m, n, ens, s).matrix / m
              for s in range(reps)) / reps
    off = acc[~np.eye(n, dtype=bool)]
    assert np.abs(off).mean() <= 3 / np.sqrt(reps * m)
    np.testing.assert_allclose(np.diag(acc), 1.0, atol=0.1)


def test_subgaussian_norm_recorded():
    assert make_matrix(2, 2, "gaussian").K == pytest.approx(np.sqrt(8 / 3))
    assert make_matrix(2, 2, "bernoulli").K == pytest.approx(1 / np.sqrt(np.log(2)))


def test_signal_basic():
    sig = make_signal(8, 8, seed=1)
    assert np.count_nonzero(sig.x_star) == 8
    a, b = make_signal(30, 4, seed=9), make_signal(30, 4, seed=9)
    np.testing.assert_array_equal(a.x_star, b.x_star)
    assert a.support == tuple(np.flatnonzero(a.x_star))
    with pytest.raises(ValueError):
        make_signal(5, 6)


def test_signal_support_uniform():
    counts = np.zeros(10)
    for seed in range(2000):
        counts[make_signal(10, 1, seed).support[0]] += 1
    np.testing.assert_allclose(counts / 2000, 0.1, atol=0.03)


def test_measure():
    A = make_matrix(500, 20, "gaussian", 0)
    x = make_signal(20, 3, 1)
    clean = measure(A, x, 0.0)
    assert clean.noise_norm == 0 and not np.any(clean.noise)
    np.testing.assert_array_equal(clean.y, A.matrix @ x.x_star)
    noisy = measure(A, x, 0.3, seed=5)
    np.testing.assert_allclose(noisy.y, A.matrix @ x.x_star + noisy.noise, atol=1e-12)
    assert noisy.noise_norm ** 2 / 500 == pytest.approx(0.09, rel=0.15)
    zero = measure(A, np.zeros(20), 0.3, seed=5)
    np.testing.assert_array_equal(zero.y, zero.noise)
    with pytest.raises(ValueError):
        measure(A, x, -1.0)


def test_instance_seeds_depend_only_on_coordinates():
    a = make_instance(20, 30, 3, master_seed=7, trial=4)
    make_instance(22, 30, 3, master_seed=7, trial=0)
    b = make_instance(20, 30, 3, master_seed=7, trial=4)
    assert a.A.matrix.tobytes() == b.A.matrix.tobytes()
    np.testing.assert_array_equal(a.signal.x_star, b.signal.x_star)
    assert derive_seed(7, 20, 4, 0) != derive_seed(7, 20, 5, 0)
    assert derive_seed(7, 20, 4, 0) != derive_seed(7, 20, 4, 1)
    assert 0 <= derive_seed(1, 2, 3) < 2 ** 64
