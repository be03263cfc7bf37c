"""Per-cell power draw and per-period energy."""

from __future__ import annotations

from .scenario import EnergyParams


def cell_power_w(active: bool, load: float, params: EnergyParams) -> float:
    """Instantaneous cell power, W: linear in load while active, a constant
    sleep floor while the RF frontend is off. ``load`` is the cell's PRB
    utilization in [0, 1].
    """
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"load must be in [0, 1], got {load}")
    if not active:
        return params.p_sleep_w
    return params.p0_w + params.delta_p * load * params.p_max_tx_w


def period_energy_j(power_w: float, dt_s: float) -> float:
    """Energy consumed over one control period, J."""
    if dt_s <= 0:
        raise ValueError("dt_s must be > 0")
    return power_w * dt_s
