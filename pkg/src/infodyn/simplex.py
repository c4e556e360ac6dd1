"""Probability distributions on the simplex and their information geometry.

A distribution is a point of the (N+1)-simplex; a statistical model moves
such a point in time, and the squared Shahshahani norm of its velocity is
the Fisher information.  Everything here is a pure function of immutable
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Construction tolerances: a sum deviating by more than REJECT_TOL is a hard
# error, anything smaller is renormalized away (float accumulation).
NORM_TOL = 1e-12
REJECT_TOL = 1e-9
TANGENT_TOL = 1e-10


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Distribution:
    """Point of the simplex: nonnegative probabilities summing to one."""

    probs: np.ndarray

    def __init__(self, probs):
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a distribution needs at least 1 probability")
        if np.any(arr < 0):
            idx = int(np.argmin(arr))
            raise ValueError(f"negative probability {arr[idx]} at index {idx}")
        total = arr.sum()
        if abs(total - 1.0) > REJECT_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > NORM_TOL:
            arr = arr / total
        object.__setattr__(self, "probs", _frozen(arr))

    def __len__(self) -> int:
        return self.probs.size

    @property
    def size(self) -> int:
        return self.probs.size

    def is_interior(self, floor: float = 0.0) -> bool:
        """True when every entry exceeds ``floor`` (open simplex for 0)."""
        return bool(np.all(self.probs > floor))

    def require_interior(self, floor: float = 0.0) -> None:
        if not self.is_interior(floor):
            idx = int(np.argmin(self.probs))
            raise ValueError(
                f"distribution is not interior: entry {self.probs[idx]} "
                f"at index {idx} (floor {floor})"
            )


@dataclass(frozen=True)
class TangentVector:
    """Velocity of a point moving on the simplex; components sum to zero."""

    components: np.ndarray = field()

    def __init__(self, components):
        arr = np.asarray(components, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a tangent vector needs at least 1 component")
        total = arr.sum()
        if abs(total) > TANGENT_TOL:
            raise ValueError(f"tangent components sum to {total!r}, not 0")
        object.__setattr__(self, "components", _frozen(arr))

    def __len__(self) -> int:
        return self.components.size


def _check_sizes(a, b) -> None:
    if len(a) != len(b):
        raise ValueError(f"size mismatch: {len(a)} vs {len(b)}")


def shahshahani_distance_sq(reference: Distribution, point: Distribution) -> float:
    """Squared simplex distance sum((point - reference)^2 / reference).

    The metric is evaluated at ``reference``, which must be interior; the
    result is therefore not symmetric in its arguments away from
    coinciding points.
    """
    reference.require_interior()
    _check_sizes(reference, point)
    diff = point.probs - reference.probs
    return float(np.sum(diff * diff / reference.probs))


def kl_divergence(point: Distribution, reference: Distribution) -> float:
    """Kullback-Leibler divergence D(point || reference), 0*log 0 := 0."""
    reference.require_interior()
    _check_sizes(point, reference)
    p = point.probs
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / reference.probs[mask])))


def fisher_information(p: Distribution, pdot: TangentVector) -> float:
    """Squared Shahshahani norm of pdot at p: sum(pdot^2 / p)."""
    p.require_interior()
    _check_sizes(p, pdot)
    v = pdot.components
    return float(np.sum(v * v / p.probs))


def self_information_rate(p: Distribution, pdot: TangentVector) -> np.ndarray:
    """Logarithmic growth rate pdot/p per degree of freedom."""
    p.require_interior()
    _check_sizes(p, pdot)
    return pdot.components / p.probs
