"""UE state, bounded random-walk mobility and per-period traffic demand."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import floor_to_rate_grid

CBR = "cbr"
ELASTIC = "elastic"

WALK_EPOCH_S = 2.0            # heading/speed re-draw interval
SPEED_RANGE_MPS = (1.0, 3.0)  # pedestrian walking speeds

_TWO_PI = 2.0 * math.pi


@dataclass
class UeState:
    imsi: int                      # unique UE identifier, >= 1
    position: tuple[float, float]  # meters
    heading: float                 # radians
    speed_mps: float
    traffic_class: str             # CBR or ELASTIC
    nominal_rate_mbps: float       # CBR rate, or elastic cap
    demand_mbps: float = 0.0
    serving_cell: int | None = None
    backlog_mbits: float = 0.0     # unserved carry-over
    walk_time_s: float = 0.0       # time since last heading/speed re-draw


def _reflect(x: float, y: float, heading: float, bounds) -> tuple[float, float, float]:
    xmin, ymin, xmax, ymax = bounds
    while not (xmin <= x <= xmax and ymin <= y <= ymax):
        if x < xmin:
            x = 2.0 * xmin - x
            heading = math.pi - heading
        elif x > xmax:
            x = 2.0 * xmax - x
            heading = math.pi - heading
        if y < ymin:
            y = 2.0 * ymin - y
            heading = -heading
        elif y > ymax:
            y = 2.0 * ymax - y
            heading = -heading
    return x, y, heading % _TWO_PI


def step_mobility(ue: UeState, dt_s: float, bounds, rng: np.random.Generator) -> UeState:
    """Advance one UE by ``dt_s`` along its heading, reflecting at the area
    boundary. Every ``WALK_EPOCH_S`` of accumulated walk time the heading is
    re-drawn uniformly in [0, 2pi) and speed uniformly in SPEED_RANGE_MPS.

    Mutates ``ue`` in place and returns it.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be > 0")
    step = ue.speed_mps * dt_s
    x = ue.position[0] + step * math.cos(ue.heading)
    y = ue.position[1] + step * math.sin(ue.heading)
    x, y, heading = _reflect(x, y, ue.heading, bounds)
    ue.position = (x, y)
    ue.heading = heading
    ue.walk_time_s += dt_s
    if ue.walk_time_s >= WALK_EPOCH_S:
        ue.walk_time_s -= WALK_EPOCH_S
        ue.heading = float(rng.uniform(0.0, _TWO_PI))
        ue.speed_mps = float(rng.uniform(*SPEED_RANGE_MPS))
    return ue


def traffic_demand(ue: UeState, dt_s: float) -> float:
    """Downlink demand for the coming period, Mbps.

    CBR sources ask for their fixed rate every period. Elastic (full-buffer)
    sources ask for their cap plus whatever backlog has queued up, so a
    starved elastic flow catches up once capacity returns.
    """
    if ue.traffic_class == CBR:
        return float(floor_to_rate_grid(ue.nominal_rate_mbps))
    return float(floor_to_rate_grid(ue.nominal_rate_mbps + ue.backlog_mbits / dt_s))


def apply_service(ue: UeState, demand_mbps: float, served_mbps: float, dt_s: float) -> None:
    """Queue bookkeeping after a period in which ``served_mbps`` of
    ``demand_mbps`` was delivered.

    Unserved CBR traffic accumulates (the source keeps sending); the elastic
    queue is exactly the unserved part of its reported demand, which already
    included the old backlog.
    """
    unserved_mbits = (demand_mbps - served_mbps) * dt_s
    if ue.traffic_class == CBR:
        ue.backlog_mbits += unserved_mbits
    else:
        ue.backlog_mbits = unserved_mbits
    ue.demand_mbps = demand_mbps
