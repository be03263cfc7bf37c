"""Radio link abstractions: UMi street-canyon path loss, RSRP, SINR and
Shannon-capped throughput.

All functions accept scalars or numpy arrays (broadcasting) and stay pure.
Conditions are quasi-static within a control period: LOS state and
shadowing are drawn once per (UE, cell) at episode reset and held fixed,
only distances change tick to tick.

Served rates are floored to a 2^-20 Mbps grid (about 1 bit/s). On that
grid any per-tick aggregate of a few thousand UEs is exact in binary
floating point, which keeps cell-level and UE-level throughput sums
bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

# log-normal shadowing sigmas, dB (urban-micro street canyon)
LOS_SHADOW_SIGMA_DB = 4.0
NLOS_SHADOW_SIGMA_DB = 7.82

THERMAL_NOISE_DBM_PER_HZ = -174.0

_RATE_GRID = float(1 << 20)  # served rates snap to multiples of 2^-20 Mbps


@dataclass(frozen=True)
class LinkState:
    """Quasi-static radio link between one UE and one cell."""

    ue_id: int
    cell_id: int
    is_los: bool
    shadowing_db: float
    path_loss_db: float
    rsrp_dbm: float


def make_link_state(ue_id, cell_id, d2d_m, fc_ghz, h_bs_m, h_ut_m,
                    is_los, shadowing_db, tx_power_dbm) -> LinkState:
    pl = float(path_loss_umi(d2d_m, fc_ghz, h_bs_m, h_ut_m, is_los))
    return LinkState(
        ue_id=ue_id,
        cell_id=cell_id,
        is_los=bool(is_los),
        shadowing_db=float(shadowing_db),
        path_loss_db=pl,
        rsrp_dbm=float(tx_power_dbm) - pl - float(shadowing_db),
    )


def path_loss_umi(d2d_m, fc_ghz, h_bs_m, h_ut_m, is_los):
    """3GPP urban-micro street-canyon path loss, dB.

    LOS:  32.4 + 21*log10(d3d) + 20*log10(fc_ghz)
    NLOS: max(LOS, 22.4 + 35.3*log10(d3d) + 21.3*log10(fc_ghz) - 0.3*(h_ut - 1.5))

    with d3d = sqrt(d2d^2 + (h_bs - h_ut)^2). Single LOS slope: the
    breakpoint-distance second slope is intentionally omitted (valid at
    desk scale, below roughly 1.3 km for the default heights/frequency).
    """
    d2d = np.asarray(d2d_m, dtype=float)
    fc = np.asarray(fc_ghz, dtype=float)
    if np.any(d2d <= 0):
        raise ValueError("d2d_m must be > 0")
    if np.any(fc <= 0):
        raise ValueError("fc_ghz must be > 0")
    d3d = np.sqrt(d2d ** 2 + (float(h_bs_m) - float(h_ut_m)) ** 2)
    los = 32.4 + 21.0 * np.log10(d3d) + 20.0 * np.log10(fc)
    if np.all(is_los):
        out = los
    else:
        nlos = np.maximum(
            los,
            22.4 + 35.3 * np.log10(d3d) + 21.3 * np.log10(fc)
            - 0.3 * (float(h_ut_m) - 1.5),
        )
        out = np.where(is_los, los, nlos)
    return float(out) if np.isscalar(d2d_m) and np.isscalar(fc_ghz) else out


def los_probability(d2d_m):
    """Line-of-sight probability for the urban-micro street canyon.

    1 within 18 m, then 18/d + exp(-d/36) * (1 - 18/d).
    """
    d = np.asarray(d2d_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("d2d_m must be > 0")
    with np.errstate(over="ignore"):
        far = 18.0 / d + np.exp(-d / 36.0) * (1.0 - 18.0 / d)
    out = np.where(d <= 18.0, 1.0, far)
    return float(out) if np.isscalar(d2d_m) else out


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Receiver noise floor over ``bandwidth_hz``: kT + 10*log10(B) + NF."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be > 0")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def sinr_from_rsrp(serving_rsrp_dbm, interferer_rsrp_dbm,
                   bandwidth_hz: float, noise_figure_db: float):
    """SINR in dB from a serving RSRP and co-channel interferer RSRPs.

    Works in the linear (mW) domain; ``interferer_rsrp_dbm`` may be an
    empty sequence (noise-limited link).
    """
    sig_mw = 10.0 ** (np.asarray(serving_rsrp_dbm, dtype=float) / 10.0)
    interferers = np.asarray(interferer_rsrp_dbm, dtype=float)
    interf_mw = np.sum(10.0 ** (interferers / 10.0)) if interferers.size else 0.0
    noise_mw = 10.0 ** (noise_power_dbm(bandwidth_hz, noise_figure_db) / 10.0)
    out = 10.0 * np.log10(sig_mw / (interf_mw + noise_mw))
    return float(out) if np.isscalar(serving_rsrp_dbm) else out


def sinr_db(ue_id: int, serving_cell_id: int, active_cell_ids: Sequence[int],
            link_states: Mapping[tuple[int, int], LinkState],
            bandwidth_hz: float, noise_figure_db: float) -> float:
    """SINR of ``ue_id`` served by ``serving_cell_id`` against every other
    active co-channel cell. Deactivated cells contribute no interference.

    ``link_states`` is keyed by (ue_id, cell_id) and must cover the UE's
    links to all active cells.
    """
    if serving_cell_id not in active_cell_ids:
        raise RuntimeError(f"serving cell {serving_cell_id} is not active")
    serving = link_states[(ue_id, serving_cell_id)].rsrp_dbm
    interferers = [
        link_states[(ue_id, c)].rsrp_dbm
        for c in active_cell_ids
        if c != serving_cell_id
    ]
    return float(sinr_from_rsrp(serving, interferers, bandwidth_hz, noise_figure_db))


def floor_to_rate_grid(rate_mbps):
    """Largest grid multiple not exceeding ``rate_mbps`` (never rounds up,
    so capacity bounds survive exactly)."""
    return np.floor(np.asarray(rate_mbps, dtype=float) * _RATE_GRID) / _RATE_GRID


def ue_throughput_mbps(sinr_db_value, bandwidth_share_hz, max_se, demand_mbps):
    """Rate served to one UE on its bandwidth share, Mbps.

    served = min(demand, share * min(log2(1 + sinr_linear), max_se) / 1e6)

    The capacity term is floored to the rate grid; the result is therefore
    never above demand nor above the raw Shannon-capped capacity.
    """
    share = np.asarray(bandwidth_share_hz, dtype=float)
    if np.any(share < 0):
        raise ValueError("bandwidth_share_hz must be >= 0")
    sinr_lin = 10.0 ** (np.asarray(sinr_db_value, dtype=float) / 10.0)
    se = np.minimum(np.log2(1.0 + sinr_lin), float(max_se))
    capacity = floor_to_rate_grid(share * se / 1e6)
    out = np.minimum(np.asarray(demand_mbps, dtype=float), capacity)
    if np.isscalar(sinr_db_value) and np.isscalar(bandwidth_share_hz):
        return float(out)
    return out
