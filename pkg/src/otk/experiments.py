"""Monte-Carlo phase transitions over the (measurements, iterations) lattice.

For each ``m`` and trial one instance is drawn from seeds derived from
``(master_seed, m, trial)`` and the algorithm is run once up to the largest
iteration budget. Success at budget ``p`` is scored on the ``p``-th iterate,
or on the final iterate when the run stalled earlier, so each trial's success
indicator is non-decreasing in ``p`` once reached and the grid does not
depend on execution order or the number of workers.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import Algorithm, RecoveryConfig, recover
from .sensing import Ensemble, make_instance

DEFAULT_M_VALUES = tuple(range(4, 51, 2))
DEFAULT_P_VALUES = tuple(range(1, 11)) + tuple(range(15, 51, 5))


@dataclass
class PhaseGridSpec:
    n: int = 50
    k: int = 3
    m_values: tuple = DEFAULT_M_VALUES
    p_values: tuple = DEFAULT_P_VALUES
    trials: int = 50
    epsilon: float = 1e-2
    algorithm: Algorithm = Algorithm.ROTP
    ensemble: Ensemble = Ensemble.BERNOULLI
    noise_sigma: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)
        self.ensemble = Ensemble(self.ensemble)
        self.m_values = tuple(int(v) for v in self.m_values)
        self.p_values = tuple(int(v) for v in self.p_values)
        for name in ("m_values", "p_values"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly ascending")
            if vals[0] < 1:
                raise ValueError(f"{name} must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass
class PhaseGrid:
    """Success counts indexed ``[m_index, p_index]``.

    ``wall_times[i, j]`` sums, over trials, the seconds each run at
    ``m_values[i]`` took to reach budget ``p_values[j]``.
    """

    spec: PhaseGridSpec
    successes: np.ndarray
    wall_times: np.ndarray = field(default=None)

    def __post_init__(self):
        shape = (len(self.spec.m_values), len(self.spec.p_values))
        self.successes = np.asarray(self.successes, dtype=np.int64)
        if self.successes.shape != shape:
            raise ValueError(f"successes has shape {self.successes.shape}, expected {shape}")
        if self.wall_times is None:
            self.wall_times = np.zeros(shape)

    @property
    def rates(self):
        return self.successes / self.spec.trials


def run_trial(spec, m, trial):
    """Return (per-budget success flags, per-budget cumulative seconds)."""
    inst = make_instance(m, spec.n, spec.k, spec.ensemble, spec.noise_sigma,
                         spec.master_seed, trial)
    budgets = spec.p_values
    x_star = inst.signal.x_star
    ref = np.linalg.norm(x_star)
    last = budgets[-1]
    errors = np.full(last + 1, np.inf)
    stamps = np.zeros(last + 1)
    t0 = time.perf_counter()

    def on_iter(p, x):
        errors[p] = np.linalg.norm(x_star - x) / ref
        stamps[p] = time.perf_counter() - t0

    cfg = RecoveryConfig(spec.algorithm, spec.k, epsilon=spec.epsilon, max_iters=last)
    res = recover(inst.A.matrix, inst.measurements.y, cfg, callback=on_iter)
    stop = res.trace.n_iter
    if not res.trace.non_finite:
        # a stalled run keeps its final iterate for every larger budget
        errors[stop + 1:] = errors[stop]
    stamps[stop + 1:] = stamps[stop]
    b = np.asarray(budgets)
    return errors[b] <= spec.epsilon, stamps[b]


def _run_row_chunk(spec, m, trials):
    return [(trial, *run_trial(spec, m, trial)) for trial in trials]


def default_workers():
    env = os.environ.get("OTK_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_phase_grid(spec, progress_sink=None, workers=1):
    """Fill the success grid for ``spec``.

    Parameters
    ----------
    spec : PhaseGridSpec
    progress_sink : callable, optional
        ``progress_sink(done, total)`` after each finished (m, trial) batch;
        may be called from the collecting thread only.
    workers : int
        Process count; 1 runs in-process. Results do not depend on it.
    """
    n_m, n_p = len(spec.m_values), len(spec.p_values)
    successes = np.zeros((n_m, n_p), dtype=np.int64)
    wall = np.zeros((n_m, n_p))
    total = n_m * spec.trials
    done = 0

    def collect(i, rows):
        nonlocal done
        for _, ok, secs in rows:
            successes[i] += ok
            wall[i] += secs
        done += len(rows)
        if progress_sink is not None:
            progress_sink(done, total)

    trials = list(range(spec.trials))
    if workers <= 1:
        for i, m in enumerate(spec.m_values):
            collect(i, _run_row_chunk(spec, m, trials))
    else:
        size = max(1, spec.trials // 2)
        chunks = [trials[j:j + size] for j in range(0, spec.trials, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(i, pool.submit(_run_row_chunk, spec, m, ch))
                       for i, m in enumerate(spec.m_values) for ch in chunks]
            for i, fut in futures:
                collect(i, fut.result())
    return PhaseGrid(spec, successes, wall)


def minimal_m_curve(grid, threshold=0.9):
    """Per budget ``p``, the smallest grid ``m`` with success rate ``>= threshold``.

    Budgets where no ``m`` qualifies are omitted.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    rates = grid.rates
    curve = []
    for j, p in enumerate(grid.spec.p_values):
        hits = np.flatnonzero(rates[:, j] >= threshold - 1e-12)
        if hits.size:
            curve.append((p, grid.spec.m_values[hits[0]]))
    return curve


def count_increases(curve):
    """Number of budget steps at which the minimal-m curve goes up."""
    ms = [m for _, m in curve]
    return sum(b > a for a, b in zip(ms, ms[1:]))


@dataclass
class SingleRun:
    result: object
    instance: object
    config: RecoveryConfig

    def trace_rows(self):
        """Rows ``(p, rel_error, residual_norm, qp_iters, qp_converged)`` for
        every iteration ``p >= 1``."""
        return [(r.p, r.error_to_truth, r.residual_norm, r.qp_iterations, r.qp_converged)
                for r in self.result.trace.records[1:]]


def run_single(m, n, k, config, ensemble=Ensemble.BERNOULLI, noise_sigma=0.0,
               master_seed=0, trial=0, x0_truth=False):
    """One fully traced run on the grid instance ``(master_seed, m, trial)``.

    ``x0_truth=True`` starts from the ground truth, which gives the fixed-point
    check a one-row trace.
    """
    inst = make_instance(m, n, k, ensemble, noise_sigma, master_seed, trial)
    if x0_truth:
        config = replace(config, x0=inst.signal.x_star)
    res = recover(inst.A.matrix, inst.measurements.y, config, x_star=inst.signal.x_star)
    return SingleRun(res, inst, config)


@dataclass(frozen=True)
class TailFit:
    start: int
    points: int
    slope: float
    r_squared: float


def log_error_tail_fit(errors, start_below=1e-1):
    """Least-squares line through ``log10(errors[p])`` over the tail.

    The tail runs from the first index whose error is below ``start_below``
    to the end of the sequence (the stall). ``slope`` is the fitted log10
    contraction per iteration. A tail the line reproduces exactly, which
    includes every tail of one or two points, has ``r_squared = 1``.
    Returns ``None`` if no error drops below ``start_below``.
    """
    errors = np.asarray(errors, dtype=float)
    below = np.flatnonzero(errors < start_below)
    if not below.size:
        return None
    s = int(below[0])
    # exact recovery can hit 0; clip to the smallest positive double
    logs = np.log10(np.maximum(errors[s:], np.finfo(float).tiny))
    p = np.arange(s, errors.size, dtype=float)
    if logs.size == 1:
        return TailFit(s, 1, 0.0, 1.0)
    slope, icept = np.polyfit(p, logs, 1)
    ss_res = float(np.sum((logs - (slope * p + icept)) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    if ss_res <= 1e-20 * max(1.0, ss_tot):
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return TailFit(s, int(logs.size), float(slope), r2)
