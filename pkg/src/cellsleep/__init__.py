"""Desk-scale, deterministic 5G NSA simulator with a gym-semantics
environment for cell on/off energy saving."""

from .baselines import (
    AbortedEpisodeError,
    AllOnController,
    EpisodeReport,
    ExternalController,
    RandomController,
    ThresholdController,
    ThresholdParams,
    make_controller,
    run_episode,
)
from .channel import (
    LinkState,
    los_probability,
    noise_power_dbm,
    path_loss_umi,
    sinr_db,
    ue_throughput_mbps,
)
from .datalake import CellKpmRow, Datalake, DuplicateKeyError, KpmRecord
from .energy import cell_power_w, period_energy_j
from .engine import CellState, ConfigurationError, SimClock, Simulator
from .env import (
    CellOnOffEnv,
    EnvStep,
    LifecycleError,
    compute_reward,
    decode_action,
    encode_action,
)
from .mobility import UeState, step_mobility, traffic_demand
from .protocol import (
    ProtocolClient,
    ProtocolServer,
    ReplayMismatchError,
    Session,
    replay_transcript,
)
from .scenario import (
    EnergyParams,
    RewardWeights,
    ScenarioConfig,
    TrafficConfig,
    build_default_scenario,
    load_scenario,
    save_scenario,
    validate,
)

__version__ = "0.1.0"
