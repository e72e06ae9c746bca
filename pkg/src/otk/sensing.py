"""Seeded random sensing matrices, sparse signals and noisy measurements.

Every random stream comes from a Philox counter-based generator keyed by a
64-bit seed; :func:`derive_seed` hashes a master seed together with integer
coordinates (e.g. ``m`` and a trial index) into such a seed, so an instance
depends only on its coordinates and never on the order it is generated in.

Samplers: Gaussian entries use numpy's ziggurat ``standard_normal``;
Bernoulli entries draw one bit each via ``integers(0, 2)`` mapped to -1/+1.
"""

import enum
from dataclasses import dataclass
from math import log, sqrt

import numpy as np

from ._validation import check_sparsity


class Ensemble(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"


# psi_2 norm of one entry: E exp(x^2/t^2) = 2
SUBGAUSSIAN_NORM = {
    Ensemble.GAUSSIAN: sqrt(8.0 / 3.0),
    Ensemble.BERNOULLI: 1.0 / sqrt(log(2.0)),
}

# stream tags mixed into derived seeds
STREAM_MATRIX = 0
STREAM_SIGNAL = 1
STREAM_NOISE = 2


def derive_seed(master_seed, *keys):
    """Hash ``master_seed`` and non-negative integer ``keys`` to a 64-bit seed."""
    words = np.random.SeedSequence([int(master_seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def generator(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SensingMatrix:
    matrix: np.ndarray
    ensemble: Ensemble
    seed: int
    K: float

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class SparseSignal:
    x_star: np.ndarray
    support: tuple
    seed: int


@dataclass(frozen=True)
class MeasurementSet:
    y: np.ndarray
    noise: np.ndarray
    noise_norm: float


def make_matrix(m, n, ensemble=Ensemble.BERNOULLI, seed=0):
    """Draw an ``m x n`` matrix with i.i.d. entries from ``ensemble``.

    Columns are not normalised; rows are isotropic.
    """
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    ensemble = Ensemble(ensemble)
    rng = generator(seed)
    if ensemble is Ensemble.GAUSSIAN:
        A = rng.standard_normal((m, n))
    else:
        A = 2.0 * rng.integers(0, 2, size=(m, n), dtype=np.int8).astype(np.float64) - 1.0
    return SensingMatrix(A, ensemble, int(seed), SUBGAUSSIAN_NORM[ensemble])


def make_signal(n, k, seed=0):
    """Draw a k-sparse vector with a uniform random support and N(0,1) values."""
    if n < 1:
        raise ValueError("n must be positive")
    k = check_sparsity(k, n)
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = generator(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    x = np.zeros(n)
    x[support] = rng.standard_normal(k)
    return SparseSignal(x, tuple(int(i) for i in support), int(seed))


def measure(A, x, noise_sigma=0.0, seed=0):
    """Return ``y = A x + noise`` with i.i.d. ``N(0, noise_sigma^2)`` noise."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    mat = A.matrix if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
    xs = x.x_star if isinstance(x, SparseSignal) else np.asarray(x, dtype=float)
    m = mat.shape[0]
    if noise_sigma == 0:
        noise = np.zeros(m)
    else:
        noise = noise_sigma * generator(seed).standard_normal(m)
    y = mat @ xs + noise
    return MeasurementSet(y, noise, float(np.linalg.norm(noise)))


@dataclass(frozen=True)
class Instance:
    A: SensingMatrix
    signal: SparseSignal
    measurements: MeasurementSet


def make_instance(m, n, k, ensemble=Ensemble.BERNOULLI, noise_sigma=0.0,
                  master_seed=0, trial=0):
    """Generate the full (A, x_star, y) triple for grid coordinates ``(m, trial)``."""
    A = make_matrix(m, n, ensemble, derive_seed(master_seed, m, trial, STREAM_MATRIX))
    sig = make_signal(n, k, derive_seed(master_seed, m, trial, STREAM_SIGNAL))
    meas = measure(A, sig, noise_sigma, derive_seed(master_seed, m, trial, STREAM_NOISE))
    return Instance(A, sig, meas)
