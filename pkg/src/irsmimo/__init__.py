"""Simulation and optimization of an IRS-assisted mmWave doubly-massive MIMO link."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    ChannelRealization,
    PathDecomposition,
    PathLossParams,
    RiceanMix,
    SegmentChannel,
    aggregate_channel,
    array_response,
    path_decomposition,
    sample_link_realization,
)
from .irs import PhaseProfile, coupling, linear_profile, optimal_phases, select_strongest_path  # noqa: E402
from .scenario import ConfigError, ScenarioConfig, derive_geometry  # noqa: E402
from .transceiver import (  # noqa: E402
    min_power_epa,
    optimal_subsurface_count,
    svd_transceiver,
    waterfilling,
)
