"""Scenario configuration and the transmitter/IRS/receiver geometry."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass

from .channel import PathLossParams
from .transceiver import SHADOWING_MODES
from .units import dbm_to_watts

__all__ = ["ScenarioConfig", "ConfigError", "derive_geometry", "PHASE_POLICIES", "POWER_POLICIES"]

PHASE_POLICIES = ("optimal-linear", "zero", "random", "random-slope")
POWER_POLICIES = ("OPA", "EPA")


class ConfigError(ValueError):
    """Invalid scenario configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def derive_geometry(d_tr: float, d_v: float, d_1: float) -> tuple[float, float]:
    """Distances (tx->IRS, IRS->rx) for an IRS line parallel to the tx-rx line."""
    if min(d_tr, d_v, d_1) < 0:
        raise ValueError("distances must be nonnegative")
    if d_1 > d_tr:
        raise ValueError(f"IRS offset D_1={d_1} exceeds tx-rx distance D_TR={d_tr}")
    return math.hypot(d_1, d_v), math.hypot(d_tr - d_1, d_v)


@dataclass(frozen=True)
class ScenarioConfig:
    """Every parameter of one simulated link.

    Ricean factors are in dB (``inf`` = pure LOS), powers in dBm, distances
    in meters. Defaults are the baseline numerical setup: D_TR = 51 m,
    D_v = 2 m, (72, 29.2, 8.7 dB) for the direct link, (61.4, 20, 5.8 dB)
    for both IRS hops, L = 3 everywhere, P = 30 dBm, noise = -85 dBm.
    """

    n_t: int = 64
    n_r: int = 36
    n: int = 100
    k: int = 3
    l_direct: int = 3
    l_ti: int = 3
    l_ir: int = 3
    eta_db: float = -5.0
    eta_ti_db: float = 5.0
    eta_ir_db: float = 5.0
    d_tr: float = 51.0
    d_v: float = 2.0
    d_1: float = 2.0
    a_0: float = 72.0
    b_0: float = 29.2
    sigma_0: float = 8.7
    a_1: float = 61.4
    b_1: float = 20.0
    sigma_1: float = 5.8
    a_2: float = 61.4
    b_2: float = 20.0
    sigma_2: float = 5.8
    power_dbm: float = 30.0
    noise_dbm: float = -85.0
    include_direct: bool = True
    phase_policy: str = "optimal-linear"
    power_policy: str = "OPA"
    shadowing_mode: str = "lognormal-exact"
    n_streams: int | None = None
    beta: float = 1.0
    spacing: float = 0.5
    max_angle: float = math.pi / 2
    trials: int = 500
    seed: int = 0

    def problems(self) -> list[str]:
        out = []
        for name in ("n_t", "n_r", "n", "l_direct", "l_ti", "l_ir", "trials"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                out.append(f"{name}: must be an integer >= 1, got {value!r}")
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 0:
            out.append(f"k: must be an integer >= 0, got {self.k!r}")
        if self.n_streams is not None and (not isinstance(self.n_streams, int) or self.n_streams < 1):
            out.append(f"n_streams: must be an integer >= 1 or null, got {self.n_streams!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            out.append(f"seed: must be a nonnegative integer, got {self.seed!r}")
        if min(self.d_tr, self.d_v, self.d_1) < 0:
            out.append("d_tr, d_v, d_1: distances must be nonnegative")
        elif self.d_1 > self.d_tr:
            out.append(f"d_1: must lie in [0, d_tr={self.d_tr}], got {self.d_1}")
        elif isinstance(self.k, int) and self.k > 0 and min(self.distances) <= 0:
            out.append("d_v: IRS coincides with an endpoint (zero hop distance); use d_v > 0")
        if self.d_tr <= 0:
            out.append(f"d_tr: must be > 0, got {self.d_tr}")
        for name in ("sigma_0", "sigma_1", "sigma_2"):
            if getattr(self, name) < 0:
                out.append(f"{name}: must be >= 0")
        for name in ("eta_db", "eta_ti_db", "eta_ir_db"):
            if math.isnan(getattr(self, name)):
                out.append(f"{name}: must be a number")
        if self.phase_policy not in PHASE_POLICIES:
            out.append(f"phase_policy: must be one of {PHASE_POLICIES}, got {self.phase_policy!r}")
        if self.power_policy not in POWER_POLICIES:
            out.append(f"power_policy: must be one of {POWER_POLICIES}, got {self.power_policy!r}")
        if self.shadowing_mode not in SHADOWING_MODES:
            out.append(f"shadowing_mode: must be one of {SHADOWING_MODES}, got {self.shadowing_mode!r}")
        if not 0 < self.beta <= 1:
            out.append(f"beta: must lie in (0, 1], got {self.beta}")
        if not self.spacing > 0:
            out.append(f"spacing: must be > 0, got {self.spacing}")
        if not 0 < self.max_angle <= math.pi / 2:
            out.append(f"max_angle: must lie in (0, pi/2], got {self.max_angle}")
        if not self.include_direct and self.k == 0:
            out.append("k = 0 with include_direct = false leaves no channel")
        return out

    def validate(self) -> "ScenarioConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def distances(self) -> tuple[float, float]:
        return derive_geometry(self.d_tr, self.d_v, self.d_1)

    @property
    def pathloss_direct(self) -> PathLossParams:
        return PathLossParams(self.a_0, self.b_0, self.d_tr, self.sigma_0)

    @property
    def pathloss_ti(self) -> PathLossParams:
        return PathLossParams(self.a_1, self.b_1, self.distances[0], self.sigma_1)

    @property
    def pathloss_ir(self) -> PathLossParams:
        return PathLossParams(self.a_2, self.b_2, self.distances[1], self.sigma_2)

    @property
    def power_watts(self) -> float:
        return float(dbm_to_watts(self.power_dbm))

    @property
    def noise_watts(self) -> float:
        return float(dbm_to_watts(self.noise_dbm))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Short stable hash of the resolved configuration."""
        text = json.dumps(_jsonable(self.to_dict()), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _jsonable(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        if isinstance(value, float) and math.isinf(value):
            value = "inf" if value > 0 else "-inf"
        out[key] = value
    return out
