"""Data generators for the rate, singular-value, coupling and power figures.

Each figure returns a :class:`FigureData` whose rows are
``(x, curve, mean, stderr, trials)``; :meth:`FigureData.write_csv` persists
them with the sweep variable's name as the first column header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .irs import coupling, linear_profile, optimal_phases, random_profile, zero_profile
from .montecarlo import run_monte_carlo
from .scenario import ScenarioConfig
from .transceiver import epa_rate, gbar_i, instantaneous_power_for_rate, min_power_epa
from .units import db_to_linear, watts_to_dbm

__all__ = [
    "FigureData",
    "PowerExperiment",
    "FIGURES",
    "FIGURE_DEFAULTS",
    "figure_config",
    "make_figure",
    "power_experiment",
    "sample_gain_products",
    "coupled_rx_count",
]


@dataclass
class FigureData:
    name: str
    x_name: str
    rows: list[tuple] = field(default_factory=list)

    def add(self, x, curve: str, values) -> None:
        values = np.asarray(values, dtype=float)
        n = values.size
        std = float(np.std(values, ddof=1)) if n > 1 else 0.0
        self.rows.append((x, curve, float(np.mean(values)), std / math.sqrt(n), n))

    def add_value(self, x, curve: str, mean: float, stderr: float, trials: int) -> None:
        self.rows.append((x, curve, float(mean), float(stderr), int(trials)))

    def curve(self, name: str) -> list[tuple]:
        return [r for r in self.rows if r[1] == name]

    def value(self, x, curve: str) -> tuple:
        for row in self.rows:
            if row[0] == x and row[1] == curve:
                return row
        raise KeyError((x, curve))

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([self.x_name, "curve", "mean", "stderr", "trials"])
            for x, curve, mean, stderr, trials in self.rows:
                writer.writerow([x, curve, repr(mean), repr(stderr), trials])
        return path


# Shared numerical setup; per-figure entries override it.
BASELINE = dict(
    d_tr=51.0, d_v=2.0,
    a_0=72.0, b_0=29.2, sigma_0=8.7,
    a_1=61.4, b_1=20.0, sigma_1=5.8,
    a_2=61.4, b_2=20.0, sigma_2=5.8,
    l_direct=3, l_ti=3, l_ir=3,
    power_dbm=30.0, noise_dbm=-85.0,
    phase_policy="optimal-linear", power_policy="OPA",
    shadowing_mode="lognormal-exact", seed=0,
)

FIGURE_DEFAULTS = {
    "fig2": dict(trials=200),
    "fig4": dict(BASELINE, eta_db=5.0, eta_ti_db=5.0, eta_ir_db=5.0, k=3, n=300, d_1=15.0,
                 trials=500),
    "fig5": dict(BASELINE, eta_db=-5.0, eta_ti_db=5.0, eta_ir_db=5.0, k=3, n=100, trials=500),
    "fig6": dict(BASELINE, eta_db=-5.0, eta_ti_db=5.0, eta_ir_db=5.0, k=3, d_1=2.0, trials=500),
    "fig7": dict(BASELINE, eta_db=-5.0, eta_ti_db=5.0, eta_ir_db=5.0, d_1=5.0, n_t=64, n_r=36,
                 trials=500),
    "fig8": dict(BASELINE, include_direct=False, l_ti=1, l_ir=1, eta_ti_db=math.inf,
                 eta_ir_db=math.inf, d_1=25.0, n_t=100, n_r=100, trials=500),
    "fig9": dict(BASELINE, include_direct=False, l_ti=1, l_ir=1, eta_ti_db=math.inf,
                 eta_ir_db=math.inf, d_1=25.0, n_t=100, n_r=100, k=5, draws=10_000),
}

FIG2_N = (1, 10, 50, 100, 200, 500, 1000)
FIG4_NT = (32, 48, 64, 80, 96, 112)
FIG5_NT = (8, 16, 24, 32, 40, 48, 56, 64)
FIG5_D1 = (2.0, 25.0, 45.0)
FIG6_N = (10, 100, 1000)
FIG7_N = tuple(range(50, 501, 50))
FIG7_K = (1, 3, 6)
FIG8_K = tuple(range(1, 11))
FIG8_N = (10, 100, 200, 1000)
FIG9_N = tuple(range(10, 101, 10))
FIG9_RATES = (15.0, 30.0, 45.0)


def coupled_rx_count(n_t: int, lo_t: int = 8, hi_t: int = 64, lo_r: int = 8, hi_r: int = 36) -> int:
    """Receive array size swept linearly with the transmit size (rounded)."""
    return int(round(lo_r + (n_t - lo_t) * (hi_r - lo_r) / (hi_t - lo_t)))


def figure_config(name: str, overrides: dict | None = None) -> tuple[ScenarioConfig, dict]:
    """Scenario for figure ``name`` plus the non-scenario options (trials, draws)."""
    if name not in FIGURE_DEFAULTS:
        raise KeyError(f"unknown figure {name!r}; choose from {sorted(FIGURE_DEFAULTS)}")
    params = dict(FIGURE_DEFAULTS[name])
    params.update(overrides or {})
    extras = {key: params.pop(key) for key in ("draws",) if key in params}
    config = ScenarioConfig(**params)
    return config, extras


def _fig2(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    data = FigureData("fig2", "n")
    trials = config.trials
    for n in FIG2_N:
        values = {"optimal": [], "zero": [], "random-phases": [], "random-slope": []}
        for t in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(n, t)))
            phi1, theta2 = rng.uniform(-config.max_angle, config.max_angle, 2)
            profiles = {
                "optimal": optimal_phases(phi1, theta2, n, spacing=config.spacing),
                "zero": zero_profile(n),
                "random-phases": random_profile(n, rng),
                "random-slope": linear_profile(rng.uniform(-2.0, 2.0), n, spacing=config.spacing),
            }
            for curve, profile in profiles.items():
                values[curve].append(abs(coupling(theta2, profile, phi1, config.spacing)) ** 2)
        for curve, vals in values.items():
            data.add(n, curve, vals)
    return data


def _fig4(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    data = FigureData("fig4", "n_t")
    for n_t in FIG4_NT:
        n_r = coupled_rx_count(n_t, 32, 112, 32, 82)
        report = run_monte_carlo(config.replace(n_t=n_t, n_r=n_r), workers)
        sv = report.singular_values(7)
        for idx in (1, 6, 7):
            data.add(n_t, f"sigma_{idx}", sv[:, idx - 1])
    return data


def _rate_vs_nt(name: str, curves: dict[str, ScenarioConfig], columns: dict[str, str],
                workers: int) -> FigureData:
    data = FigureData(name, "n_t")
    for n_t in FIG5_NT:
        n_r = coupled_rx_count(n_t)
        for label, config in curves.items():
            report = run_monte_carlo(config.replace(n_t=n_t, n_r=n_r), workers)
            for suffix, column in columns.items():
                data.add(n_t, f"{label}{suffix}", report.column(column))
    return data


def _fig5(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    curves = {f"d1={d1:g}": config.replace(d_1=d1) for d1 in FIG5_D1}
    return _rate_vs_nt("fig5", curves, {" simulation": "rate_exact",
                                        " analytical": "rate_asymptotic"}, workers)


def _fig6(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    curves = {f"n={n}": config.replace(n=n) for n in FIG6_N}
    curves["no-irs"] = config.replace(k=0)
    return _rate_vs_nt("fig6", curves, {"": "rate_exact"}, workers)


def _fig7(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    data = FigureData("fig7", "n")
    for n in FIG7_N:
        for k in FIG7_K:
            for policy in ("optimal-linear", "zero"):
                report = run_monte_carlo(config.replace(n=n, k=k, phase_policy=policy), workers)
                data.add(n, f"k={k} {policy}", report.column("rate_exact"))
    return data


def _fig8(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    data = FigureData("fig8", "k")
    for k in FIG8_K:
        for n in FIG8_N:
            report = run_monte_carlo(config.replace(k=k, n=n, power_policy="OPA"), workers)
            data.add(k, f"n={n} OPA", report.column("rate_exact"))
            data.add(k, f"n={n} EPA", report.column("rate_epa"))
    return data


@dataclass(frozen=True)
class PowerExperiment:
    """Instantaneous EPA powers for a target rate over shadowing draws."""

    rate: float
    k: int
    n: int
    powers: np.ndarray
    rates: np.ndarray
    closed_form: float

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.powers))

    @property
    def relative_error(self) -> float:
        return self.mean_power / self.closed_form - 1.0


def sample_gain_products(config: ScenarioConfig, draws: int, rng: np.random.Generator) -> np.ndarray:
    """``draws x K`` realized products ``g_1^k g_2^k`` (linear) of the two IRS hops."""
    ti, ir = config.pathloss_ti, config.pathloss_ir
    chi1 = rng.normal(0.0, ti.sigma, (draws, config.k))
    chi2 = rng.normal(0.0, ir.sigma, (draws, config.k))
    return db_to_linear(ti.median_db + chi1 + ir.median_db + chi2)


def power_experiment(config: ScenarioConfig, rate: float, draws: int = 10_000,
                     products: np.ndarray | None = None) -> PowerExperiment:
    """Per-draw power meeting ``rate`` via the AM-GM bound, and the rate it achieves with EPA."""
    if products is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(config.k,)))
        products = sample_gain_products(config, draws, rng)
    noise = config.noise_watts
    powers = instantaneous_power_for_rate(rate, config.k, products, config.n_t, config.n_r,
                                          config.n, noise)
    rates = np.array([epa_rate(p, g, config.n_t, config.n_r, config.n, noise)
                      for p, g in zip(powers, products)])
    ti, ir = config.pathloss_ti, config.pathloss_ir
    gbar = gbar_i(ti.a, ti.b, ti.d, ti.sigma, ir.a, ir.b, ir.d, ir.sigma, config.shadowing_mode)
    closed = min_power_epa(rate, config.k, config.n, config.n_t, config.n_r, noise, gbar)
    return PowerExperiment(rate=rate, k=config.k, n=config.n, powers=np.asarray(powers),
                           rates=rates, closed_form=closed)


def _fig9(config: ScenarioConfig, extras: dict, workers: int) -> FigureData:
    data = FigureData("fig9", "n")
    draws = int(extras.get("draws", 10_000))
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(config.k,)))
    # one set of shadowing draws shared by every (N, rate) point
    products = sample_gain_products(config, draws, rng)
    for n in FIG9_N:
        for rate in FIG9_RATES:
            exp = power_experiment(config.replace(n=n), rate, products=products)
            mean = exp.mean_power
            se = float(np.std(exp.powers, ddof=1)) / math.sqrt(draws)
            data.add_value(n, f"rate={rate:g} simulation dBm", watts_to_dbm(mean),
                           10.0 / math.log(10.0) * se / mean, draws)
            data.add_value(n, f"rate={rate:g} analytical dBm", watts_to_dbm(exp.closed_form), 0.0, draws)
            data.add(n, f"rate={rate:g} achieved", exp.rates)
    return data


FIGURES: dict[str, Callable[[ScenarioConfig, dict, int], FigureData]] = {
    "fig2": _fig2, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6,
    "fig7": _fig7, "fig8": _fig8, "fig9": _fig9,
}


def make_figure(name: str, overrides: dict | None = None, workers: int = 1) -> FigureData:
    config, extras = figure_config(name, overrides)
    return FIGURES[name](config, extras, workers)
