"""Monte Carlo runner: one independent random stream per trial index."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import ChannelRealization, aggregate_channel, path_decomposition, sample_link_realization
from .irs import PhaseProfile, linear_profile, random_profile, select_strongest_path, zero_profile
from .scenario import ScenarioConfig
from .transceiver import effective_rank, parallel_rate, waterfilling

__all__ = [
    "TrialResult",
    "RateReport",
    "trial_generator",
    "build_profiles",
    "run_trial",
    "run_monte_carlo",
    "RATE_COLUMNS",
]

RATE_COLUMNS = ("rate_exact", "rate_asymptotic", "rate_epa", "rate_epa_asymptotic")


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Generator for trial ``trial``; identical for any worker count or run order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


@dataclass(frozen=True)
class TrialResult:
    trial: int
    rate_exact: float
    rate_asymptotic: float
    rate_epa: float
    rate_epa_asymptotic: float
    rank: int
    n_paths: int
    active_streams: int
    singular_values: np.ndarray = field(repr=False, compare=False)
    path_gains: np.ndarray = field(repr=False, compare=False)

    def row(self) -> dict:
        return {
            "trial": self.trial,
            "rate_exact": self.rate_exact,
            "rate_asymptotic": self.rate_asymptotic,
            "rate_epa": self.rate_epa,
            "rate_epa_asymptotic": self.rate_epa_asymptotic,
            "rank": self.rank,
            "n_paths": self.n_paths,
            "active_streams": self.active_streams,
        }


def _stats(values: np.ndarray) -> dict:
    n = values.size
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return {"mean": float(np.mean(values)), "std": std, "stderr": std / math.sqrt(n)}


@dataclass(frozen=True)
class RateReport:
    config: ScenarioConfig
    trials: tuple[TrialResult, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(t, name) for t in self.trials], dtype=float)

    def mean(self, name: str = "rate_exact") -> float:
        return float(np.mean(self.column(name)))

    def stderr(self, name: str = "rate_exact") -> float:
        return _stats(self.column(name))["stderr"]

    def singular_values(self, count: int) -> np.ndarray:
        """``trials x count`` array of leading singular values, zero-padded."""
        out = np.zeros((len(self.trials), count))
        for row, t in zip(out, self.trials):
            m = min(count, t.singular_values.size)
            row[:m] = t.singular_values[:m]
        return out

    def summary(self) -> dict:
        return {
            "trials": len(self.trials),
            "seed": self.config.seed,
            "config_hash": self.config.digest(),
            "version": __version__,
            "aggregates": {name: _stats(self.column(name)) for name in RATE_COLUMNS},
        }


def build_profiles(realization: ChannelRealization, config: ScenarioConfig,
                   rng: np.random.Generator | None = None) -> list[PhaseProfile]:
    """Phase profile of every subsurface under ``config.phase_policy``."""
    n, beta, spacing = realization.n, config.beta, config.spacing
    policy = config.phase_policy
    if policy == "optimal-linear":
        return [linear_profile(select_strongest_path(realization, k).slope, n, beta, spacing)
                for k in range(realization.k)]
    if policy == "zero":
        return [zero_profile(n, beta) for _ in range(realization.k)]
    if rng is None:
        raise ValueError(f"phase policy {policy!r} needs a random generator")
    if policy == "random":
        return [random_profile(n, rng, beta) for _ in range(realization.k)]
    if policy == "random-slope":
        return [linear_profile(rng.uniform(-2.0, 2.0), n, beta, spacing) for _ in range(realization.k)]
    raise ValueError(f"unknown phase policy {policy!r}")


def _rates(gains: np.ndarray, n_streams: int, config: ScenarioConfig) -> tuple[float, float, int]:
    """(policy rate, EPA rate over ``n_streams``, active streams) for power gains ``gains``."""
    power, noise = config.power_watts, config.noise_watts
    usable = gains[gains > 0]
    if usable.size == 0:
        return 0.0, 0.0, 0
    alloc = waterfilling(usable, power, noise)
    opa = parallel_rate(usable, alloc.powers, noise)
    m = min(n_streams, usable.size)
    epa = parallel_rate(usable[:m], np.full(m, power / m), noise)
    rate = opa if config.power_policy == "OPA" else epa
    return rate, epa, int(np.count_nonzero(alloc.powers))


def run_trial(config: ScenarioConfig, trial: int) -> TrialResult:
    rng = trial_generator(config.seed, trial)
    realization = sample_link_realization(config, rng)
    profile_rng = rng.spawn(1)[0]
    profiles = build_profiles(realization, config, profile_rng)
    channel = aggregate_channel(realization, profiles)
    decomposition = path_decomposition(realization, profiles)

    s = np.linalg.svd(channel, compute_uv=False)
    rank = effective_rank(s)
    exact_gains = s[:rank] ** 2
    path_gains = np.abs(decomposition.gains) ** 2

    useful = (config.l_direct if config.include_direct else 0) + config.k
    n_streams = config.n_streams or useful
    n_streams = max(1, min(n_streams, min(config.n_t, config.n_r)))

    rate_exact, rate_epa, active = _rates(exact_gains, n_streams, config)
    rate_asym, rate_epa_asym, _ = _rates(path_gains, n_streams, config)
    return TrialResult(
        trial=trial, rate_exact=rate_exact, rate_asymptotic=rate_asym,
        rate_epa=rate_epa, rate_epa_asymptotic=rate_epa_asym,
        rank=rank, n_paths=len(decomposition), active_streams=active,
        singular_values=s, path_gains=np.sqrt(path_gains),
    )


def run_monte_carlo(config: ScenarioConfig, workers: int = 1) -> RateReport:
    """Run ``config.trials`` independent trials, optionally on a thread pool.

    Results are ordered by trial index, so the report does not depend on
    ``workers``.
    """
    config.validate()
    indices = range(config.trials)
    if workers <= 1:
        results = [run_trial(config, t) for t in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: run_trial(config, t), indices))
    return RateReport(config=config, trials=tuple(results))
