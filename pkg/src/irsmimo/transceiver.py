"""SVD transceivers, power allocation and the rate/power formulas of the link.

Powers are in watts throughout; rates are in bits/s/Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import PathDecomposition

__all__ = [
    "Transceiver",
    "PowerAllocation",
    "SubsurfaceCount",
    "svd_transceiver",
    "path_transceiver",
    "waterfilling",
    "equal_power",
    "mutual_info_rate",
    "parallel_rate",
    "transmit",
    "asymptotic_rate",
    "epa_rate",
    "rate_lower_bound",
    "shadowing_mean_db",
    "gbar_i",
    "min_power_epa",
    "instantaneous_power_for_rate",
    "optimal_subsurface_count",
    "apa_powers",
    "apa_total_power",
]

RANK_TOL = 1e-12
SHADOWING_MODES = ("exponential", "lognormal-exact")


@dataclass(frozen=True)
class Transceiver:
    precoder: np.ndarray
    combiner: np.ndarray
    singular_values: np.ndarray

    @property
    def n_streams(self) -> int:
        return self.singular_values.size


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    total_power: float
    noise_power: float
    water_level: float | None = None

    @property
    def active(self) -> np.ndarray:
        return self.powers > 0


class SubsurfaceCount(NamedTuple):
    k_real: float
    k_int: int


def svd_transceiver(channel: np.ndarray, n_streams: int) -> Transceiver:
    """Precoder/combiner from the top ``n_streams`` right/left singular vectors."""
    n_r, n_t = channel.shape
    if not 1 <= n_streams <= min(n_r, n_t):
        raise ValueError(f"stream count {n_streams} outside [1, {min(n_r, n_t)}]")
    u, s, vh = np.linalg.svd(channel, full_matrices=False)
    return Transceiver(precoder=vh[:n_streams].conj().T, combiner=u[:, :n_streams],
                       singular_values=s[:n_streams])


def effective_rank(singular_values: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def path_transceiver(decomposition: PathDecomposition, n_streams: int | None = None) -> Transceiver:
    """Analog beamformers built from the path steering vectors.

    Each precoder column carries the phase of its path gain, so the
    per-stream gains are the nonnegative ``|gain_l|``. Optimal only when the
    steering vectors are orthogonal, i.e. for very large arrays.
    """
    from .channel import steering_matrix

    count = len(decomposition) if n_streams is None else n_streams
    gains = decomposition.gains[:count]
    a_r = steering_matrix(decomposition.n_r, decomposition.arrival[:count], decomposition.spacing)
    a_t = steering_matrix(decomposition.n_t, decomposition.departure[:count], decomposition.spacing)
    phase = np.exp(1j * np.angle(gains))
    return Transceiver(precoder=a_t * phase.conj(), combiner=a_r, singular_values=np.abs(gains))


def waterfilling(gains, total_power: float, noise_power: float) -> PowerAllocation:
    """Optimal split of ``total_power`` over parallel channels with power gains ``gains``.

    Uses the exact active-set search: with gains sorted descending, the
    water level for ``m`` active streams is ``(P + sum_{l<=m} noise/g_l)/m``
    and the largest ``m`` whose weakest stream stays below the level wins.
    """
    gains = np.asarray(gains, dtype=float)
    if np.any(gains < 0):
        raise ValueError("channel power gains must be nonnegative")
    if not total_power > 0:
        raise ValueError(f"total power must be > 0, got {total_power}")
    usable = gains > 0
    if not np.any(usable):
        raise ValueError("no usable stream: every channel gain is zero")
    order = np.argsort(-gains, kind="stable")
    inv = noise_power / gains[order[: np.count_nonzero(usable)]]
    levels = (total_power + np.cumsum(inv)) / np.arange(1, inv.size + 1)
    feasible = np.nonzero(levels > inv)[0]
    m = int(feasible[-1]) + 1
    mu = float(levels[m - 1])
    powers = np.zeros_like(gains)
    powers[order[:m]] = mu - inv[:m]
    return PowerAllocation(powers=powers, total_power=float(total_power),
                           noise_power=float(noise_power), water_level=mu)


def equal_power(n_streams: int, total_power: float, noise_power: float) -> PowerAllocation:
    return PowerAllocation(powers=np.full(n_streams, total_power / n_streams),
                           total_power=float(total_power), noise_power=float(noise_power))


def parallel_rate(gains, powers, noise_power: float) -> float:
    """``sum_l log2(1 + p_l g_l / noise)`` for power gains ``g_l``."""
    gains = np.asarray(gains, dtype=float)
    powers = np.asarray(powers, dtype=float)
    return float(np.sum(np.log2(1.0 + powers * gains / noise_power)))


def mutual_info_rate(channel: np.ndarray, precoder: np.ndarray, combiner: np.ndarray,
                     allocation: PowerAllocation) -> float:
    """Rate ``log2 det(I + B^-1/noise W_r^H H W_t P W_t^H H^H W_r)``, ``B = W_r^H W_r``."""
    b = combiner.conj().T @ combiner
    if np.linalg.matrix_rank(b) < b.shape[0]:
        raise np.linalg.LinAlgError("combiner Gram matrix is singular")
    eff = combiner.conj().T @ channel @ precoder
    cov = (eff * allocation.powers) @ eff.conj().T
    m = np.eye(b.shape[0]) + np.linalg.solve(b, cov) / allocation.noise_power
    sign, logdet = np.linalg.slogdet(m)
    return float(logdet / math.log(2.0))


def transmit(symbols: np.ndarray, channel: np.ndarray, precoder: np.ndarray,
             combiner: np.ndarray, allocation: PowerAllocation,
             rng: np.random.Generator) -> np.ndarray:
    """Processed receive vector ``W_r^H (H W_t P^(1/2) s + n)``.

    ``symbols`` may be a vector or an ``N_s x T`` block of symbol columns.
    """
    symbols = np.asarray(symbols, dtype=complex)
    p_half = np.sqrt(allocation.powers)
    x = precoder @ (p_half[:, None] * symbols if symbols.ndim == 2 else p_half * symbols)
    shape = (channel.shape[0],) + symbols.shape[1:]
    noise = math.sqrt(allocation.noise_power / 2.0) * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return combiner.conj().T @ (channel @ x + noise)


def asymptotic_rate(decomposition: PathDecomposition | np.ndarray, allocation: PowerAllocation,
                    noise_power: float | None = None) -> float:
    """Large-array rate ``sum_l log2(1 + p_l |gain_l|^2 / noise)`` over the sorted paths."""
    gains = decomposition.gains if isinstance(decomposition, PathDecomposition) else decomposition
    gains = np.abs(np.asarray(gains)) ** 2
    if allocation.powers.size != gains.size:
        raise ValueError(f"allocation has {allocation.powers.size} entries, expected {gains.size}")
    noise = allocation.noise_power if noise_power is None else noise_power
    return parallel_rate(gains, allocation.powers, noise)


def _products(gain_products) -> np.ndarray:
    products = np.atleast_1d(np.asarray(gain_products, dtype=float))
    if np.any(products <= 0):
        raise ValueError("large-scale gain products must be positive")
    return products


def epa_rate(total_power: float, gain_products, n_t: int, n_r: int, n: int,
             noise_power: float) -> float:
    """Equal-power rate over ``K`` pure-LOS IRS streams; ``K = len(gain_products)``."""
    products = _products(gain_products)
    k = products.size
    snr = total_power * n_r * n_t * n * n / (k * products * noise_power)
    return float(np.sum(np.log2(1.0 + snr)))


def rate_lower_bound(k: int, total_power: float, sum_products: float, n_t: int, n_r: int,
                     n: int, noise_power: float) -> float:
    """AM-GM lower bound ``K log2(1 + P N_r N_t N^2 / (noise sum_k g_1 g_2))`` on the EPA rate."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    snr = total_power * n_r * n_t * n * n / (noise_power * sum_products)
    return float(k * np.log2(1.0 + snr))


def shadowing_mean_db(sigma_db: float, mode: str = "lognormal-exact") -> float:
    """Shadowing correction ``c`` (dB) added to the median path loss to get its mean.

    ``"lognormal-exact"`` gives ``10 log10 E[10^(chi/10)] = ln(10)/20 * sigma^2``.
    ``"exponential"`` gives ``ln(10)/20 * 10^(sigma/5)``.
    """
    if sigma_db < 0:
        raise ValueError(f"shadowing std must be >= 0, got {sigma_db}")
    if mode == "lognormal-exact":
        return math.log(10.0) / 20.0 * sigma_db ** 2
    if mode == "exponential":
        return math.log(10.0) / 20.0 * 10.0 ** (sigma_db / 5.0)
    raise ValueError(f"unknown shadowing mode {mode!r}; expected one of {SHADOWING_MODES}")


def gbar_i(a1: float, b1: float, d1: float, sigma1: float,
           a2: float, b2: float, d2: float, sigma2: float,
           mode: str = "lognormal-exact") -> float:
    """Mean product ``E[g_1] E[g_2]`` of the two IRS hop attenuations, linear scale."""
    if not (d1 > 0 and d2 > 0):
        raise ValueError("distances must be > 0")
    total_db = sum(a + b * math.log10(d) + shadowing_mean_db(s, mode)
                   for a, b, d, s in ((a1, b1, d1, sigma1), (a2, b2, d2, sigma2)))
    return 10.0 ** (total_db / 10.0)


def min_power_epa(rate: float, k: int, n: int, n_t: int, n_r: int, noise_power: float,
                  gbar: float) -> float:
    """Average EPA transmit power that meets ``rate`` in every shadowing realization."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return k * noise_power * gbar * (2.0 ** (rate / k) - 1.0) / (n_r * n_t * n * n)


def instantaneous_power_for_rate(rate: float, k: int, gain_products, n_t: int, n_r: int,
                                 n: int, noise_power: float) -> np.ndarray | float:
    """Power that makes the AM-GM bound equal ``rate`` for realized gain products.

    ``gain_products`` has shape ``(..., K)``; the last axis is summed.
    """
    products = np.asarray(gain_products, dtype=float)
    if np.any(products <= 0):
        raise ValueError("large-scale gain products must be positive")
    if products.ndim and products.shape[-1] != k:
        raise ValueError(f"expected {k} gain products on the last axis")
    total = products.sum(axis=-1) if products.ndim else products
    power = noise_power * total * (2.0 ** (rate / k) - 1.0) / (n_r * n_t * n * n)
    return float(power) if np.ndim(power) == 0 else power


def _count_residual(k: float, rate: float) -> float:
    return 3.0 * k * (1.0 - 2.0 ** (-rate / k)) - rate


def optimal_subsurface_count(rate: float, total_elements: float | None = None,
                             tol: float = 1e-13) -> SubsurfaceCount:
    """Solve ``rate = 3K (1 - 2^(-rate/K))`` for ``K`` by bracketed bisection.

    The integer recommendation is whichever of ``floor``/``ceil`` needs less
    EPA power at a fixed element budget ``M = K N``; that power is
    proportional to ``K^3 (2^(rate/K) - 1)``, so ``M`` only caps ``K``.
    """
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    # the residual is negative near 0 and tends to (3 ln2 - 1) rate > 0
    lo, hi = rate / 3.0, rate / 3.0
    while _count_residual(lo, rate) >= 0:
        lo /= 2.0
    while _count_residual(hi, rate) <= 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _count_residual(mid, rate) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    k_real = 0.5 * (lo + hi)

    def cost(k):
        return k ** 3 * (2.0 ** (rate / k) - 1.0)

    candidates = {max(1, math.floor(k_real)), max(1, math.ceil(k_real))}
    if total_elements is not None:
        candidates = {min(c, int(total_elements)) for c in candidates}
    k_int = min(sorted(candidates), key=cost)
    return SubsurfaceCount(k_real=k_real, k_int=int(k_int))


def apa_powers(snr_targets, gain_products, n_t: int, n_r: int, n: int,
               noise_power: float) -> np.ndarray:
    """Instantaneous per-stream powers ``noise g_1^k g_2^k SNR_k / (N_r N_t N^2)``."""
    targets = np.asarray(snr_targets, dtype=float)
    if np.any(targets < 0):
        raise ValueError("SNR targets must be >= 0")
    products = np.asarray(gain_products, dtype=float)
    return noise_power * products * targets / (n_r * n_t * n * n)


def apa_total_power(snr_targets, gbar: float, n_t: int, n_r: int, n: int,
                    noise_power: float) -> float:
    """Average total APA power ``noise gbar sum_k SNR_k / (N_r N_t N^2)``."""
    targets = np.asarray(snr_targets, dtype=float)
    if np.any(targets < 0):
        raise ValueError("SNR targets must be >= 0")
    return float(noise_power * gbar * targets.sum() / (n_r * n_t * n * n))
