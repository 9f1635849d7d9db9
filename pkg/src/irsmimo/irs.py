"""Reflecting-surface phase profiles, coupling factors and path selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import HALF_WAVELENGTH, ChannelRealization, steering_matrix

__all__ = [
    "PhaseProfile",
    "PathSelection",
    "reflection_matrix",
    "coupling",
    "coupling_matrix",
    "optimal_phases",
    "linear_profile",
    "zero_profile",
    "random_profile",
    "select_strongest_path",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Phase shifts of one subsurface, stored in ``[0, 2 pi)``.

    Each element reflects with ``beta * exp(-j v_n)``. ``slope`` is set for
    linear profiles, where ``v_n = 2 pi spacing (n-1) slope`` (``pi (n-1)
    slope`` at half-wavelength spacing).
    """

    phases: np.ndarray
    beta: float = 1.0
    slope: float | None = None

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"reflection amplitude must lie in (0, 1], got {self.beta}")
        phases = np.mod(np.asarray(self.phases, dtype=float).ravel(), TWO_PI)
        # mod can return exactly 2 pi for tiny negative inputs
        phases[phases >= TWO_PI] = 0.0
        if phases.size < 1:
            raise ValueError("a phase profile needs at least one element")
        object.__setattr__(self, "phases", phases)

    def __len__(self) -> int:
        return self.phases.size

    @property
    def diagonal(self) -> np.ndarray:
        return self.beta * np.exp(-1j * self.phases)


@dataclass(frozen=True)
class PathSelection:
    """Strongest (IRS->rx path ``i0``, tx->IRS path ``j0``) pair of subsurface ``k``.

    Indices are zero-based; ``(0, 0)`` is the LOS/LOS pair.
    """

    k: int
    i0: int
    j0: int
    metric: float
    slope: float
    metrics: np.ndarray


def reflection_matrix(profile: PhaseProfile) -> np.ndarray:
    return np.diag(profile.diagonal)


def coupling(theta2: float, profile: PhaseProfile, phi1: float,
             spacing: float = HALF_WAVELENGTH) -> complex:
    """``a(theta2)^H V a(phi1)`` for an incident angle ``phi1`` and reflected angle ``theta2``."""
    return complex(coupling_matrix([theta2], profile, [phi1], spacing)[0, 0])


def coupling_matrix(theta2, profile: PhaseProfile, phi1,
                    spacing: float = HALF_WAVELENGTH) -> np.ndarray:
    """Coupling factors for every (reflected angle i, incident angle j) pair."""
    n = len(profile)
    a_out = steering_matrix(n, theta2, spacing)
    a_in = steering_matrix(n, phi1, spacing)
    return a_out.conj().T @ (profile.diagonal[:, None] * a_in)


def linear_profile(slope: float, n: int, beta: float = 1.0,
                   spacing: float = HALF_WAVELENGTH) -> PhaseProfile:
    if n < 1:
        raise ValueError(f"element count must be >= 1, got {n}")
    phases = TWO_PI * spacing * np.arange(n) * slope
    return PhaseProfile(phases, beta=beta, slope=float(slope))


def optimal_phases(phi1: float, theta2: float, n: int, beta: float = 1.0,
                   spacing: float = HALF_WAVELENGTH) -> PhaseProfile:
    """Profile that steers incident angle ``phi1`` into reflected angle ``theta2``.

    The resulting coupling factor has unit magnitude.
    """
    return linear_profile(math.sin(phi1) - math.sin(theta2), n, beta, spacing)


def zero_profile(n: int, beta: float = 1.0) -> PhaseProfile:
    return PhaseProfile(np.zeros(n), beta=beta, slope=0.0)


def random_profile(n: int, rng: np.random.Generator, beta: float = 1.0) -> PhaseProfile:
    return PhaseProfile(rng.uniform(0.0, TWO_PI, n), beta=beta)


def select_strongest_path(realization: ChannelRealization, k: int) -> PathSelection:
    """Pick the subsurface-``k`` path pair with the largest phase-independent gain.

    The metric is ``N_t N_r N^2 / (g_1 g_2) * |beta_1^j beta_2^i|^2``, i.e. the
    path power with the coupling factor removed. Ties resolve to the
    lexicographically smallest ``(i, j)``.
    """
    if not 0 <= k < realization.k:
        raise IndexError(f"subsurface {k} does not exist (K = {realization.k})")
    tx_irs, irs_rx = realization.tx_irs[k], realization.irs_rx[k]
    n_t, n_r, n = realization.n_t, realization.n_r, realization.n
    scale = n_t * n_r * n * n / (tx_irs.g_linear * irs_rx.g_linear)
    metrics = scale * np.abs(np.outer(irs_rx.path_weights, tx_irs.path_weights)) ** 2
    i0, j0 = np.unravel_index(int(np.argmax(metrics)), metrics.shape)
    slope = math.sin(tx_irs.arrival[j0]) - math.sin(irs_rx.departure[i0])
    return PathSelection(k=k, i0=int(i0), j0=int(j0), metric=float(metrics[i0, j0]),
                         slope=slope, metrics=metrics)
