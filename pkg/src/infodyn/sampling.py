"""Multinomial sampling of a trajectory and estimators on the sampled model.

At each grid instant the continuous distribution is observed through n
independent categorical draws; the empirical frequencies at two adjacent
instants feed a discretised Fisher information

    ghat = sum_mu s_mu * ((phat_hi - phat_lo) / dt)^2,
    s_mu = 2 / (phat_hi + phat_lo)   (term contributes 0 when both vanish)

and the per-variant information rates s_mu * (phat_hi - phat_lo) / dt.
Everything is a pure function of (inputs, seed); sub-streams are keyed by
instant and replication indices so results never depend on evaluation
order.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .clustering import Clustering, aggregate
from .dynamics import Trajectory
from .simplex import Distribution


class MonteCarloError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleGrid:
    """Equally spaced sampling instants t0 + k*dt, k = 0..count-1."""

    t0: float
    dt: float
    count: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.count < 2:
            raise ValueError("need at least 2 sampling instants")

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.count) * self.dt

    def midpoint(self, k: int) -> float:
        """Time t0 + (k + 1/2) dt where the k-th estimator lives."""
        return self.t0 + (k + 0.5) * self.dt

    def midpoints(self) -> np.ndarray:
        return self.t0 + (np.arange(self.count - 1) + 0.5) * self.dt


@dataclass(frozen=True)
class SampledTrajectory:
    """Discrete model: per-instant multinomial counts over the variants."""

    grid: SampleGrid
    n: int
    counts: np.ndarray
    seed: int

    def __post_init__(self):
        self.counts.flags.writeable = False
        if self.counts.shape[0] != self.grid.count:
            raise ValueError("one count row per grid instant required")
        if np.any(self.counts.sum(axis=1) != self.n):
            raise ValueError("counts at every instant must sum to n")

    @property
    def n_variants(self) -> int:
        return self.counts.shape[1]

    def phat(self, k: int) -> np.ndarray:
        """Empirical frequencies counts/n at instant k."""
        return self.counts[k] / self.n


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std: float
    standard_error: float
    replications: int


def sample_multinomial(p: Distribution, n: int, stream: np.random.Generator) -> np.ndarray:
    """One multinomial draw of size n from p, consuming the given stream."""
    return rng.sample_counts(p.probs, n, stream)


def sample_trajectory(traj: Trajectory, grid: SampleGrid, n: int, seed: int) -> SampledTrajectory:
    """Independent multinomial samplings at every grid instant.

    Instant k uses the sub-stream (seed, k), so individual instants can be
    reproduced in isolation and their order never matters.
    """
    times = grid.times()
    if times[0] < 0 or times[-1] > traj.t_end + 1e-12:
        raise ValueError(
            f"sample grid [{times[0]:g}, {times[-1]:g}] outside "
            f"trajectory domain [0, {traj.t_end:g}]"
        )
    counts = np.empty((grid.count, traj.n_variants), dtype=np.int64)
    for k, t in enumerate(times):
        p = traj.p[traj.index_at(t)]
        counts[k] = rng.sample_counts(p, n, rng.stream(seed, k))
    return SampledTrajectory(grid, n, counts, seed)


def _check_instant(sampled: SampledTrajectory, k: int) -> None:
    if not 0 <= k < sampled.grid.count - 1:
        raise IndexError(
            f"instant index {k} invalid: need k and k+1 within "
            f"0..{sampled.grid.count - 1}"
        )


def fisher_between(p_lo: np.ndarray, p_hi: np.ndarray, dt: float) -> float:
    """Discretised Fisher information from two frequency vectors."""
    total = p_lo + p_hi
    s = np.where(total > 0, 2.0 / np.where(total > 0, total, 1.0), 0.0)
    diff = (p_hi - p_lo) / dt
    return float(np.sum(s * diff * diff))


def info_rate_between(p_lo: np.ndarray, p_hi: np.ndarray, dt: float) -> np.ndarray:
    """Discretised per-component information rates from two frequency vectors."""
    total = p_lo + p_hi
    s = np.where(total > 0, 2.0 / np.where(total > 0, total, 1.0), 0.0)
    return s * (p_hi - p_lo) / dt


def fisher_hat(sampled: SampledTrajectory, k: int) -> float:
    """Sampled Fisher information at the midpoint of instants k and k+1."""
    _check_instant(sampled, k)
    return fisher_between(sampled.phat(k), sampled.phat(k + 1), sampled.grid.dt)


def clustered_fisher_hat(sampled: SampledTrajectory, k: int, f: Clustering) -> float:
    """Sampled Fisher information of the clustered counts."""
    _check_instant(sampled, k)
    f.check_size(sampled.n_variants)
    lo = aggregate(sampled.counts[k], f) / sampled.n
    hi = aggregate(sampled.counts[k + 1], f) / sampled.n
    return fisher_between(lo, hi, sampled.grid.dt)


def info_rate_hat(sampled: SampledTrajectory, k: int) -> np.ndarray:
    """Sampled per-variant information rates at the midpoint of k, k+1."""
    _check_instant(sampled, k)
    return info_rate_between(sampled.phat(k), sampled.phat(k + 1), sampled.grid.dt)


def cluster_info_rate_hat(sampled: SampledTrajectory, k: int, f: Clustering) -> np.ndarray:
    """Sampled per-cluster information rates at the midpoint of k, k+1."""
    _check_instant(sampled, k)
    f.check_size(sampled.n_variants)
    lo = aggregate(sampled.counts[k], f) / sampled.n
    hi = aggregate(sampled.counts[k + 1], f) / sampled.n
    return info_rate_between(lo, hi, sampled.grid.dt)


def _replicate(estimator, replications: int, seed: int, threads: int) -> list:
    if replications < 2:
        raise ValueError("need at least 2 replications")

    def run_one(r: int):
        rep_seed = rng.derive_key(seed, r)
        try:
            return estimator(rep_seed)
        except Exception as exc:
            raise MonteCarloError(f"replication {r} (seed {rep_seed}) failed: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_one, range(replications)))
    return [run_one(r) for r in range(replications)]


def monte_carlo(estimator, replications: int, seed: int = 0, threads: int = 1) -> MonteCarloEstimate:
    """Mean / sample std / standard error of a scalar estimator.

    The estimator is called once per replication with a derived seed;
    seeds depend only on (seed, replication index), and results are
    reduced in replication order, so the estimate is independent of any
    scheduling.
    """
    values = np.asarray(_replicate(estimator, replications, seed, threads), dtype=float)
    std = float(values.std(ddof=1))
    return MonteCarloEstimate(
        mean=float(values.mean()),
        std=std,
        standard_error=std / np.sqrt(replications),
        replications=replications,
    )


def monte_carlo_components(estimator, replications: int, seed: int = 0,
                           threads: int = 1) -> list[MonteCarloEstimate]:
    """Componentwise Monte Carlo summary of a vector-valued estimator."""
    values = np.asarray(_replicate(estimator, replications, seed, threads), dtype=float)
    stds = values.std(axis=0, ddof=1)
    return [
        MonteCarloEstimate(
            mean=float(m), std=float(s),
            standard_error=float(s) / np.sqrt(replications),
            replications=replications,
        )
        for m, s in zip(values.mean(axis=0), stds)
    ]


def sampled_to_csv(sampled: SampledTrajectory, path) -> None:
    """Write `t, n, count_*` rows with a header line."""
    m = sampled.n_variants
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "n"] + [f"count_{i}" for i in range(1, m + 1)])
        for t, row in zip(sampled.grid.times(), sampled.counts):
            writer.writerow([f"{t:.17g}", sampled.n] + [int(c) for c in row])


def estimates_to_csv(rows, path) -> None:
    """Write labelled estimates as `label, mean, std, se, R` lines."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "mean", "std", "se", "R"])
        for label, est in rows:
            writer.writerow([
                label, f"{est.mean:.17g}", f"{est.std:.17g}",
                f"{est.standard_error:.17g}", est.replications,
            ])
