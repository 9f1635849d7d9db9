"""Clustered mmWave channel model for an IRS-assisted doubly-massive MIMO link.

Every link segment (transmitter->receiver, transmitter->subsurface k and
subsurface k->receiver) is a Ricean mix of a rank-one LOS matrix and a
limited-scattering matrix built from ``L - 1`` ULA paths, attenuated by a
log-distance path loss with lognormal shadowing.

Matrices follow the ``rows = receive side, columns = transmit side``
convention, so ``H @ x`` maps a transmitted vector to the receive array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .units import db_to_linear

if TYPE_CHECKING:
    from .irs import PhaseProfile
    from .scenario import ScenarioConfig

__all__ = [
    "RiceanMix",
    "PathLossParams",
    "SegmentChannel",
    "ChannelRealization",
    "PathDecomposition",
    "array_response",
    "steering_inner_product",
    "dirichlet_magnitude",
    "sample_pathloss",
    "los_component",
    "scattered_component",
    "build_segment",
    "sample_segment",
    "sample_link_realization",
    "aggregate_channel",
    "path_decomposition",
]

HALF_WAVELENGTH = 0.5


@dataclass(frozen=True)
class RiceanMix:
    """Ricean K-factor ``eta`` (linear). ``math.inf`` means pure LOS."""

    eta: float

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError(f"Ricean factor must be >= 0, got {self.eta}")

    @classmethod
    def from_db(cls, eta_db: float) -> "RiceanMix":
        if math.isinf(eta_db):
            return cls(math.inf if eta_db > 0 else 0.0)
        return cls(float(db_to_linear(eta_db)))

    @property
    def los_fraction(self) -> float:
        if math.isinf(self.eta):
            return 1.0
        return self.eta / (1.0 + self.eta)

    @property
    def scattered_fraction(self) -> float:
        if math.isinf(self.eta):
            return 0.0
        return 1.0 / (1.0 + self.eta)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance model ``g[dB] = a + b log10(d) + chi``, ``chi ~ N(0, sigma^2)``."""

    a: float
    b: float
    d: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"distance must be > 0, got {self.d}")
        if not self.sigma >= 0:
            raise ValueError(f"shadowing std must be >= 0, got {self.sigma}")

    @property
    def median_db(self) -> float:
        return self.a + self.b * math.log10(self.d)


@dataclass(frozen=True)
class SegmentChannel:
    """One link segment and every random quantity it was built from.

    ``arrival[0]``/``departure[0]`` are the LOS angles; ``gains`` holds the
    complex amplitudes of the scattered paths ``l = 2..L``.
    """

    matrix: np.ndarray
    los: np.ndarray
    scattered: np.ndarray
    arrival: np.ndarray
    departure: np.ndarray
    gains: np.ndarray
    mix: RiceanMix
    g_db: float
    g_linear: float
    spacing: float = HALF_WAVELENGTH

    @property
    def n_paths(self) -> int:
        return len(self.arrival)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def path_weights(self) -> np.ndarray:
        """Per-path amplitude weights ``[sqrt(eta_bar), sqrt(eta_tilde / L) alpha^l, ...]``.

        The segment equals ``sqrt(M_r M_t / g) * sum_l w_l a(arrival_l) a(departure_l)^H``.
        """
        weights = np.empty(self.n_paths, dtype=complex)
        weights[0] = math.sqrt(self.mix.los_fraction)
        weights[1:] = math.sqrt(self.mix.scattered_fraction / self.n_paths) * self.gains
        return weights


@dataclass(frozen=True)
class ChannelRealization:
    """A full draw of the direct link and all ``2K`` subsurface segments.

    ``direct`` is ``None`` when the direct link is excluded.
    """

    n_t: int
    n_r: int
    n: int
    direct: SegmentChannel | None
    tx_irs: tuple[SegmentChannel, ...]
    irs_rx: tuple[SegmentChannel, ...]
    spacing: float = HALF_WAVELENGTH
    config: "ScenarioConfig | None" = field(default=None, compare=False, repr=False)

    @property
    def k(self) -> int:
        return len(self.tx_irs)


@dataclass(frozen=True)
class PathDecomposition:
    """The aggregate channel as a sum of rank-one virtual paths.

    ``gains``, ``arrival`` and ``departure`` are sorted by decreasing
    ``|gain|``. ``sources`` labels each sorted path as ``("direct", l)`` or
    ``("irs", k, i, j)`` with zero-based indices.
    """

    direct_gains: np.ndarray
    irs_gains: tuple[np.ndarray, ...]
    gains: np.ndarray
    arrival: np.ndarray
    departure: np.ndarray
    sources: tuple[tuple, ...]
    n_t: int
    n_r: int
    spacing: float = HALF_WAVELENGTH

    def __len__(self) -> int:
        return len(self.gains)

    def reconstruct(self) -> np.ndarray:
        a_r = steering_matrix(self.n_r, self.arrival, self.spacing)
        a_t = steering_matrix(self.n_t, self.departure, self.spacing)
        return (a_r * self.gains) @ a_t.conj().T


def array_response(m: int, angle: float, spacing: float = HALF_WAVELENGTH) -> np.ndarray:
    """ULA response ``(1/sqrt(M)) exp(j 2 pi n spacing sin(angle))``, ``n = 0..M-1``."""
    if int(m) != m or m < 1:
        raise ValueError(f"antenna count must be a positive integer, got {m}")
    n = np.arange(int(m))
    return np.exp(2j * np.pi * spacing * math.sin(angle) * n) / math.sqrt(m)


def steering_matrix(m: int, angles, spacing: float = HALF_WAVELENGTH) -> np.ndarray:
    """Stack ``array_response(m, angle)`` column-wise for every angle."""
    if int(m) != m or m < 1:
        raise ValueError(f"antenna count must be a positive integer, got {m}")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    n = np.arange(int(m))[:, None]
    return np.exp(2j * np.pi * spacing * n * np.sin(angles)[None, :]) / math.sqrt(m)


def steering_inner_product(v1: np.ndarray, v2: np.ndarray) -> complex:
    if v1.shape != v2.shape:
        raise ValueError(f"steering vectors differ in length: {v1.shape} vs {v2.shape}")
    return complex(np.vdot(v1, v2))


def dirichlet_magnitude(m: int, delta, spacing: float = HALF_WAVELENGTH):
    """Closed form ``|sin(M pi s delta) / (M sin(pi s delta))|`` of a ULA inner product.

    ``delta`` is the difference of the two angle sines. Returns 1 where the
    denominator vanishes (grating lobes included).
    """
    u = spacing * np.asarray(delta, dtype=float)
    # the magnitude has period 1 in u; reducing first keeps grating lobes accurate
    x = np.pi * (u - np.round(u))
    den = m * np.sin(x)
    num = np.sin(m * x)
    small = np.abs(den) < 1e-300
    out = np.abs(np.divide(num, den, out=np.ones_like(x), where=~small))
    return out if out.ndim else float(out)


def sample_pathloss(params: PathLossParams, rng: np.random.Generator) -> tuple[float, float]:
    """Draw one large-scale attenuation, returned as ``(g_dB, g_linear)``."""
    chi = rng.normal(0.0, params.sigma) if params.sigma > 0 else 0.0
    g_db = params.median_db + chi
    return g_db, float(db_to_linear(g_db))


def los_component(m_r: int, m_t: int, arrival: float, departure: float,
                  spacing: float = HALF_WAVELENGTH) -> np.ndarray:
    """Rank-one LOS matrix ``sqrt(M_r M_t) a_r(arrival) a_t(departure)^H``."""
    a_r = array_response(m_r, arrival, spacing)
    a_t = array_response(m_t, departure, spacing)
    return math.sqrt(m_r * m_t) * np.outer(a_r, a_t.conj())


def scattered_component(m_r: int, m_t: int, n_paths: int, gains, arrival, departure,
                        spacing: float = HALF_WAVELENGTH) -> np.ndarray:
    """Scattered matrix over paths ``l = 2..L``; inputs carry exactly ``L - 1`` entries."""
    if n_paths < 2:
        raise ValueError("no scattered paths: L must be >= 2 (use a zero matrix for pure LOS)")
    gains = np.asarray(gains, dtype=complex).ravel()
    arrival = np.asarray(arrival, dtype=float).ravel()
    departure = np.asarray(departure, dtype=float).ravel()
    if not len(gains) == len(arrival) == len(departure) == n_paths - 1:
        raise ValueError(f"expected {n_paths - 1} gains and angle pairs")
    a_r = steering_matrix(m_r, arrival, spacing)
    a_t = steering_matrix(m_t, departure, spacing)
    return math.sqrt(m_r * m_t / n_paths) * (a_r * gains) @ a_t.conj().T


def build_segment(mix: RiceanMix, g_linear: float, los: np.ndarray, scattered: np.ndarray,
                  *, arrival=(0.0,), departure=(0.0,), gains=(), g_db: float | None = None,
                  spacing: float = HALF_WAVELENGTH) -> SegmentChannel:
    """Combine LOS and scattered parts as ``sqrt(eta_bar/g) H_los + sqrt(eta_tilde/g) H_sc``."""
    if los.shape != scattered.shape:
        raise ValueError(f"LOS and scattered shapes differ: {los.shape} vs {scattered.shape}")
    if not g_linear > 0:
        raise ValueError(f"large-scale attenuation must be > 0, got {g_linear}")
    matrix = math.sqrt(mix.los_fraction / g_linear) * los
    if mix.scattered_fraction > 0:
        matrix = matrix + math.sqrt(mix.scattered_fraction / g_linear) * scattered
    if g_db is None:
        g_db = 10.0 * math.log10(g_linear)
    return SegmentChannel(
        matrix=matrix, los=los, scattered=scattered,
        arrival=np.asarray(arrival, dtype=float), departure=np.asarray(departure, dtype=float),
        gains=np.asarray(gains, dtype=complex), mix=mix,
        g_db=float(g_db), g_linear=float(g_linear), spacing=spacing,
    )


def _complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def sample_segment(m_r: int, m_t: int, n_paths: int, mix: RiceanMix, pathloss: PathLossParams,
                   rng: np.random.Generator, *, max_angle: float = math.pi / 2,
                   spacing: float = HALF_WAVELENGTH) -> SegmentChannel:
    """Draw angles, scattered gains and shadowing for a single segment."""
    if n_paths < 1:
        raise ValueError(f"path count must be >= 1, got {n_paths}")
    arrival = rng.uniform(-max_angle, max_angle, n_paths)
    departure = rng.uniform(-max_angle, max_angle, n_paths)
    gains = _complex_normal(rng, n_paths - 1)
    g_db, g_lin = sample_pathloss(pathloss, rng)
    los = los_component(m_r, m_t, arrival[0], departure[0], spacing)
    if n_paths > 1:
        scattered = scattered_component(m_r, m_t, n_paths, gains, arrival[1:], departure[1:], spacing)
    else:
        scattered = np.zeros((m_r, m_t), dtype=complex)
    return build_segment(mix, g_lin, los, scattered, arrival=arrival, departure=departure,
                         gains=gains, g_db=g_db, spacing=spacing)


def sample_link_realization(config: "ScenarioConfig", rng: np.random.Generator) -> ChannelRealization:
    """Draw the direct link and every subsurface segment for one trial.

    The direct link and each subsurface draw from their own child stream
    (``rng.spawn``), so the direct channel for a given trial generator does
    not depend on ``K`` and subsurface ``k`` does not depend on how many
    others exist.
    """
    config.validate()
    streams = rng.spawn(1 + config.k)
    seg = dict(max_angle=config.max_angle, spacing=config.spacing)
    direct = None
    if config.include_direct:
        direct = sample_segment(config.n_r, config.n_t, config.l_direct,
                                RiceanMix.from_db(config.eta_db), config.pathloss_direct,
                                streams[0], **seg)
    tx_irs, irs_rx = [], []
    for stream in streams[1:]:
        tx_irs.append(sample_segment(config.n, config.n_t, config.l_ti,
                                     RiceanMix.from_db(config.eta_ti_db), config.pathloss_ti,
                                     stream, **seg))
        irs_rx.append(sample_segment(config.n_r, config.n, config.l_ir,
                                     RiceanMix.from_db(config.eta_ir_db), config.pathloss_ir,
                                     stream, **seg))
    return ChannelRealization(n_t=config.n_t, n_r=config.n_r, n=config.n, direct=direct,
                              tx_irs=tuple(tx_irs), irs_rx=tuple(irs_rx),
                              spacing=config.spacing, config=config)


def _check_profiles(realization: ChannelRealization, profiles: Sequence["PhaseProfile"]):
    if len(profiles) != realization.k:
        raise ValueError(f"expected {realization.k} phase profiles, got {len(profiles)}")
    for k, profile in enumerate(profiles):
        if len(profile) != realization.n:
            raise ValueError(f"profile {k} has {len(profile)} phases, expected {realization.n}")


def aggregate_channel(realization: ChannelRealization,
                      profiles: Sequence["PhaseProfile"]) -> np.ndarray:
    """``sum_k H_IR^k V^k H_TI^k + H_TR`` as an ``N_r x N_t`` matrix."""
    _check_profiles(realization, profiles)
    if realization.direct is not None:
        total = realization.direct.matrix.copy()
    else:
        total = np.zeros((realization.n_r, realization.n_t), dtype=complex)
    for tx_irs, irs_rx, profile in zip(realization.tx_irs, realization.irs_rx, profiles):
        total += (irs_rx.matrix * profile.diagonal) @ tx_irs.matrix
    return total


def path_decomposition(realization: ChannelRealization,
                       profiles: Sequence["PhaseProfile"]) -> PathDecomposition:
    """Rewrite the aggregate channel as ``L_K`` sorted rank-one paths."""
    from .irs import coupling_matrix

    _check_profiles(realization, profiles)
    n_t, n_r, n = realization.n_t, realization.n_r, realization.n
    gains, arrival, departure, sources = [], [], [], []

    direct = realization.direct
    if direct is not None:
        direct_gains = math.sqrt(n_r * n_t / direct.g_linear) * direct.path_weights
        gains.append(direct_gains)
        arrival.append(direct.arrival)
        departure.append(direct.departure)
        sources.extend(("direct", l) for l in range(direct.n_paths))
    else:
        direct_gains = np.zeros(0, dtype=complex)

    irs_gains = []
    for k, (tx_irs, irs_rx, profile) in enumerate(zip(realization.tx_irs, realization.irs_rx, profiles)):
        # rows i index IRS->rx paths, columns j index tx->IRS paths
        xi = coupling_matrix(irs_rx.departure, profile, tx_irs.arrival, realization.spacing)
        scale = math.sqrt(n_t * n_r * n * n / (tx_irs.g_linear * irs_rx.g_linear))
        theta = scale * xi * np.outer(irs_rx.path_weights, tx_irs.path_weights)
        irs_gains.append(theta)
        l2, l1 = theta.shape
        gains.append(theta.ravel())
        arrival.append(np.repeat(irs_rx.arrival, l1))
        departure.append(np.tile(tx_irs.departure, l2))
        sources.extend(("irs", k, i, j) for i in range(l2) for j in range(l1))

    if gains:
        gains_all = np.concatenate(gains)
        arrival_all = np.concatenate(arrival)
        departure_all = np.concatenate(departure)
    else:
        gains_all = np.zeros(0, dtype=complex)
        arrival_all = departure_all = np.zeros(0)
    order = np.argsort(-np.abs(gains_all), kind="stable")
    return PathDecomposition(
        direct_gains=direct_gains,
        irs_gains=tuple(irs_gains),
        gains=gains_all[order],
        arrival=arrival_all[order],
        departure=departure_all[order],
        sources=tuple(sources[i] for i in order),
        n_t=n_t, n_r=n_r, spacing=realization.spacing,
    )
