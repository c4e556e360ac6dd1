"""Closed-form large-n predictions for the sampled estimators.

Pure formula evaluators, used as oracles by the test suite and the
experiment runner.  Values are returned raw, without clamping or
smoothing; callers pick their own comparison tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import Distribution


@dataclass(frozen=True)
class BiasVariancePrediction:
    expected_value: float
    variance: float
    order_note: str = "leading"

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance prediction must be nonnegative")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def distance_moments(N: int, n: int) -> tuple[float, float]:
    """Mean N/n and variance 2N/n^2 of the squared sampling distance."""
    if N < 1 or n < 1:
        raise ValueError("N and n must be >= 1")
    return N / n, 2.0 * N / n**2


def fisher_bias(N: int, n: int, dt: float) -> float:
    """Universal leading bias 2N/(n dt^2) of the sampled Fisher information."""
    return 2.0 * N / (n * dt**2)


def fisher_prediction(g_tt: float, N: int, n: int, dt: float) -> BiasVariancePrediction:
    """Leading mean and variance of the sampled Fisher information."""
    return BiasVariancePrediction(
        expected_value=g_tt + fisher_bias(N, n, dt),
        variance=8.0 * g_tt / (n * dt**2) + 8.0 * N / (n**2 * dt**4),
    )


def fisher_bias_second_order(p: Distribution, n: int, dt: float) -> float:
    """Bias including the n^-2 correction, which depends on the model.

    2N/(n dt^2) - (2N + 1 - sum(1/p)) / (2 n^2 dt^2); the correction is
    nonnegative on the interior of the simplex.
    """
    p.require_interior()
    N = len(p) - 1
    correction = -(2 * N + 1 - float(np.sum(1.0 / p.probs))) / (2.0 * n**2 * dt**2)
    return fisher_bias(N, n, dt) + correction


def clustered_fisher_prediction(g_f: float, ell: int, n: int, dt: float) -> BiasVariancePrediction:
    """Leading mean and variance of the clustered sampled Fisher information."""
    return BiasVariancePrediction(
        expected_value=g_f + 2.0 * (ell - 1) / (n * dt**2),
        variance=8.0 * g_f / (n * dt**2) + 8.0 * (ell - 1) / (n**2 * dt**4),
    )


def info_rate_moments(i_rate, p_mu, n: int, dt: float):
    """Leading mean and variance of a sampled information rate.

    mean = rate * (1 + 1/(2n)), var = ((2/dt^2) * (1-p)/p - rate^2) / n.
    Accepts scalars or arrays elementwise.
    """
    i_rate = np.asarray(i_rate, dtype=float)
    p_mu = np.asarray(p_mu, dtype=float)
    mean = i_rate * (1.0 + 0.5 / n)
    var = ((2.0 / dt**2) * (1.0 - p_mu) / p_mu - i_rate**2) / n
    if mean.ndim == 0:
        return float(mean), float(var)
    return mean, var


def cluster_info_rate_moments(i_rate_a, q_a, n: int, dt: float):
    """Same law with the cluster probability in place of the variant one."""
    return info_rate_moments(i_rate_a, q_a, n, dt)


def normalization_z(p: Distribution, n: int) -> float:
    """Gaussian normalisation of the large-n sampling probability.

    sqrt(n * prod(2 pi n p) / (2 pi * sum(p))); evaluated in log space to
    stay finite for many degrees of freedom.
    """
    p.require_interior()
    log_z = 0.5 * (
        np.log(n)
        + float(np.sum(np.log(2.0 * np.pi * n * p.probs)))
        - np.log(2.0 * np.pi * float(np.sum(p.probs)))
    )
    return float(np.exp(log_z))
