"""Deterministic discrete-time simulation core.

Each 100 ms tick runs a fixed pipeline: mobility, link recomputation,
attachment/handover with hysteresis, equal-share service, power and energy,
KPM emission, clock advance. Two runs with the same config (seed included)
and the same action sequence produce bit-identical KPM streams.

A :class:`Simulator` instance is strictly single-threaded; independent
instances may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channel, energy, mobility
from .datalake import CellKpmRow, KpmRecord
from .rng import stream_rng
from .scenario import ScenarioConfig, validate

GNB = "gnb"
LTE_ANCHOR = "lte_anchor"

# gNB-to-UE distances are clamped to this when computing path loss, so a UE
# walking over a site keeps a finite link budget
MIN_LINK_DISTANCE_M = 1.0


class ConfigurationError(ValueError):
    """Raised when a simulation is built from an invalid scenario."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid scenario: " + "; ".join(violations))
        self.violations = violations


@dataclass
class CellState:
    cell_id: int
    kind: str  # GNB or LTE_ANCHOR
    position: tuple[float, float]
    active: bool = True
    attached_ues: set[int] = field(default_factory=set)
    load: float = 0.0
    power_w: float = 0.0
    ho_in: int = 0
    ho_out: int = 0


@dataclass
class SimClock:
    step_index: int = 0
    sim_time_ms: int = 0


@dataclass
class TickStats:
    """Network-wide totals for the most recent period."""

    total_served_mbps: float
    total_demand_mbps: float
    total_power_w: float
    energy_j: float


class Simulator:
    """One simulation instance built from an immutable scenario.

    Cell ids are 0..n_gnbs-1 for the controllable gNBs; the LTE anchor gets
    cell_id == n_gnbs and can never be deactivated.
    """

    def __init__(self, config: ScenarioConfig):
        violations = validate(config)
        if violations:
            raise ConfigurationError(violations)
        self.config = config
        n = config.n_gnbs
        self.anchor_id = n
        self.n_cells = n + 1
        self._cell_xy = np.array(
            list(config.gnb_positions) + [config.lte_anchor_position], dtype=float)
        self._tx_dbm = np.array(
            [config.gnb_tx_power_dbm] * n + [config.lte_tx_power_dbm])
        self._fc_ghz = np.array([config.carrier_freq_ghz] * n + [config.lte_freq_ghz])
        self._bw_hz = np.array([config.bandwidth_hz] * n + [config.lte_bandwidth_hz])
        self._noise_mw = 10.0 ** (np.array([
            channel.noise_power_dbm(config.bandwidth_hz, config.noise_figure_db),
            channel.noise_power_dbm(config.lte_bandwidth_hz, config.noise_figure_db),
        ]) / 10.0)
        self.reset()

    # ------------------------------------------------------------------ setup

    def reset(self) -> None:
        """Rebuild the initial state: all gNBs active, UEs placed uniformly
        and attached by max RSRP, clock at zero. RNG streams are re-derived
        from the scenario seed so repeated resets are identical."""
        cfg = self.config
        n_ues, n_gnbs = cfg.n_ues, cfg.n_gnbs
        placement = stream_rng(cfg.seed, "placement")
        self._mobility_rng = stream_rng(cfg.seed, "mobility")
        channel_rng = stream_rng(cfg.seed, "channel")
        traffic_rng = stream_rng(cfg.seed, "traffic")

        self.cells = [
            CellState(cell_id=i, kind=GNB, position=tuple(cfg.gnb_positions[i]))
            for i in range(n_gnbs)
        ]
        self.cells.append(CellState(
            cell_id=self.anchor_id, kind=LTE_ANCHOR,
            position=tuple(cfg.lte_anchor_position)))

        xmin, ymin, xmax, ymax = cfg.area_bounds
        xs = placement.uniform(xmin, xmax, n_ues)
        ys = placement.uniform(ymin, ymax, n_ues)
        headings = self._mobility_rng.uniform(0.0, 2.0 * math.pi, n_ues)
        speeds = self._mobility_rng.uniform(*mobility.SPEED_RANGE_MPS, n_ues)

        n_cbr = math.ceil(cfg.traffic.cbr_fraction * n_ues)
        cbr_rates = traffic_rng.choice(
            np.asarray(cfg.traffic.cbr_rates_mbps, dtype=float), size=n_cbr)
        self.ues = []
        for i in range(n_ues):
            is_cbr = i < n_cbr
            self.ues.append(mobility.UeState(
                imsi=i + 1,
                position=(float(xs[i]), float(ys[i])),
                heading=float(headings[i]),
                speed_mps=float(speeds[i]),
                traffic_class=mobility.CBR if is_cbr else mobility.ELASTIC,
                nominal_rate_mbps=float(cbr_rates[i]) if is_cbr
                else cfg.traffic.elastic_cap_mbps,
            ))

        # LOS state and shadowing per (UE, cell), frozen for the episode
        d2d = self._distances()
        self._is_los = channel_rng.random((n_ues, self.n_cells)) < \
            channel.los_probability(d2d)
        sigma = np.where(self._is_los,
                         channel.LOS_SHADOW_SIGMA_DB, channel.NLOS_SHADOW_SIGMA_DB)
        self._shadowing = channel_rng.standard_normal((n_ues, self.n_cells)) * sigma

        self.clock = SimClock()
        self._period_energies: list[float] = []
        self._recompute_links()
        for ue_idx, ue in enumerate(self.ues):
            best = self._best_candidate(ue_idx)
            target = best if best is not None else self.anchor_id
            ue.serving_cell = target
            self.cells[target].attached_ues.add(ue.imsi)
        # initial KPM snapshot for the first observation; nothing is stored
        # in the datalake and no control period has elapsed yet
        _, self.latest_cell_rows = self._compute_service(mutate=False)
        self.latest_ue_rows: list[KpmRecord] = []

    @property
    def episode_energy_j(self) -> float:
        """Total energy so far, defined as the exact sum of the per-period
        energies (fsum, so the identity survives any number of periods)."""
        return math.fsum(self._period_energies)

    # ------------------------------------------------------------- link math

    def _distances(self) -> np.ndarray:
        ue_xy = np.array([ue.position for ue in self.ues])
        diff = ue_xy[:, None, :] - self._cell_xy[None, :, :]
        return np.maximum(np.hypot(diff[:, :, 0], diff[:, :, 1]), MIN_LINK_DISTANCE_M)

    def _recompute_links(self) -> None:
        cfg = self.config
        d2d = self._distances()
        self.path_loss_db = channel.path_loss_umi(
            d2d, self._fc_ghz[None, :], cfg.gnb_height_m, cfg.ue_height_m,
            self._is_los)
        self.rsrp_dbm = self._tx_dbm[None, :] - self.path_loss_db - self._shadowing

    def link_state(self, imsi: int, cell_id: int) -> channel.LinkState:
        """Materialize the current link between one UE and one cell."""
        i = imsi - 1
        return channel.LinkState(
            ue_id=imsi,
            cell_id=cell_id,
            is_los=bool(self._is_los[i, cell_id]),
            shadowing_db=float(self._shadowing[i, cell_id]),
            path_loss_db=float(self.path_loss_db[i, cell_id]),
            rsrp_dbm=float(self.rsrp_dbm[i, cell_id]),
        )

    # ----------------------------------------------------------- attachment

    def _active_gnb_mask(self) -> np.ndarray:
        return np.array([c.active for c in self.cells[:-1]], dtype=bool)

    def _best_candidate(self, ue_idx: int) -> int | None:
        """Best active gNB at or above the attachment floor, ties to the
        lowest cell id; None when no gNB qualifies."""
        row = self.rsrp_dbm[ue_idx, :-1]
        eligible = self._active_gnb_mask() & (row >= self.config.min_rsrp_dbm)
        if not eligible.any():
            return None
        return int(np.argmax(np.where(eligible, row, -np.inf)))

    def _move_ue(self, ue: mobility.UeState, new_cell: int) -> None:
        old = ue.serving_cell
        self.cells[old].attached_ues.discard(ue.imsi)
        self.cells[old].ho_out += 1
        self.cells[new_cell].attached_ues.add(ue.imsi)
        self.cells[new_cell].ho_in += 1
        ue.serving_cell = new_cell

    def _evaluate_handover(self, ue_idx: int) -> None:
        cfg = self.config
        ue = self.ues[ue_idx]
        serving = ue.serving_cell
        best = self._best_candidate(ue_idx)
        if serving != self.anchor_id and self.cells[serving].active \
                and self.rsrp_dbm[ue_idx, serving] >= cfg.min_rsrp_dbm:
            # healthy serving gNB: leave only for a clearly better neighbor
            if best is not None and best != serving and \
                    self.rsrp_dbm[ue_idx, best] > \
                    self.rsrp_dbm[ue_idx, serving] + cfg.hysteresis_db:
                self._move_ue(ue, best)
        elif serving == self.anchor_id:
            # return from the anchor only with margin, to avoid flapping
            # around the attachment floor
            if best is not None and self.rsrp_dbm[ue_idx, best] >= \
                    cfg.min_rsrp_dbm + cfg.hysteresis_db:
                self._move_ue(ue, best)
        else:
            # serving gNB lost (below floor or switched off): take the best
            # qualifying cell, falling back to the anchor
            target = best if best is not None else self.anchor_id
            if target != serving:
                self._move_ue(ue, target)

    # -------------------------------------------------------------- actions

    def apply_action(self, action) -> None:
        """Set gNB activity from an N-bit vector; bit i is the desired state
        of gNB i. UEs on a newly deactivated cell re-attach immediately."""
        bits = list(action)
        if len(bits) != self.config.n_gnbs:
            raise ValueError(
                f"action length {len(bits)} != n_gnbs {self.config.n_gnbs}")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("action bits must be 0 or 1")
        deactivated: list[CellState] = []
        for i, bit in enumerate(bits):
            cell = self.cells[i]
            was_active = cell.active
            cell.active = bool(bit)
            if was_active and not cell.active and cell.attached_ues:
                deactivated.append(cell)
        for cell in deactivated:
            for imsi in sorted(cell.attached_ues):
                ue = self.ues[imsi - 1]
                best = self._best_candidate(imsi - 1)
                self._move_ue(ue, best if best is not None else self.anchor_id)

    # ----------------------------------------------------------------- tick

    def tick(self) -> tuple[list[KpmRecord], list[CellKpmRow]]:
        """Advance one control period and emit its KPM rows.

        Pipeline order is fixed: mobility, links, handover, service and
        backlog, power and energy, emission, clock advance. Handover
        counters cover everything since the previous tick's emission,
        including re-attachments forced by apply_action.
        """
        dt_s = self.config.control_period_ms / 1000.0
        bounds = self.config.area_bounds
        for ue in self.ues:
            mobility.step_mobility(ue, dt_s, bounds, self._mobility_rng)
        self._recompute_links()
        for ue_idx in range(len(self.ues)):
            self._evaluate_handover(ue_idx)
        ue_rows, cell_rows = self._compute_service(mutate=True)
        self.latest_ue_rows = ue_rows
        self.latest_cell_rows = cell_rows
        self._period_energies.append(self.last_stats.energy_j)
        self.clock.step_index += 1
        self.clock.sim_time_ms = self.clock.step_index * self.config.control_period_ms
        for cell in self.cells:
            cell.ho_in = 0
            cell.ho_out = 0
        return ue_rows, cell_rows

    # -------------------------------------------------------------- service

    def _compute_service(self, mutate: bool) -> tuple[list[KpmRecord], list[CellKpmRow]]:
        """Equal-bandwidth-share service model for the current positions and
        attachment. With ``mutate`` False this is a pure snapshot (used at
        reset): backlogs and demands are left untouched and period energy
        is zero because no time has elapsed.
        """
        cfg = self.config
        dt_s = cfg.control_period_ms / 1000.0
        n_ues = len(self.ues)
        serving = np.array([ue.serving_cell for ue in self.ues])
        counts = np.bincount(serving, minlength=self.n_cells)
        share = np.zeros(self.n_cells)
        nonzero = counts > 0
        share[nonzero] = self._bw_hz[nonzero] / counts[nonzero]

        demands = np.array([mobility.traffic_demand(ue, dt_s) for ue in self.ues])

        lin = 10.0 ** (self.rsrp_dbm / 10.0)
        gnb_active = self._active_gnb_mask()
        total_gnb_mw = (lin[:, :-1] * gnb_active[None, :]).sum(axis=1)
        idx = np.arange(n_ues)
        sig_mw = lin[idx, serving]
        on_anchor = serving == self.anchor_id
        interf_mw = np.where(on_anchor, 0.0, total_gnb_mw - sig_mw)
        noise_mw = np.where(on_anchor, self._noise_mw[1], self._noise_mw[0])
        sinr_lin = sig_mw / (interf_mw + noise_mw)
        sinr_db = 10.0 * np.log10(sinr_lin)

        se = np.minimum(np.log2(1.0 + sinr_lin), cfg.max_spectral_efficiency)
        cap = channel.floor_to_rate_grid(share[serving] * se / 1e6)
        served = np.minimum(demands, cap)
        use_frac = np.divide(served, cap, out=np.zeros(n_ues), where=cap > 0)

        if mutate:
            for i, ue in enumerate(self.ues):
                mobility.apply_service(ue, float(demands[i]), float(served[i]), dt_s)

        ts = self.clock.sim_time_ms
        ue_rows = [
            KpmRecord(
                imsi=ue.imsi,
                timestamp_ms=ts,
                serving_cell_id=int(serving[i]),
                dl_throughput_mbps=float(served[i]),
                sinr_db=float(sinr_db[i]),
                rsrp_dbm=float(self.rsrp_dbm[i, serving[i]]),
                demand_mbps=float(demands[i]),
                backlog_mbits=ue.backlog_mbits,
            )
            for i, ue in enumerate(self.ues)
        ]

        cell_rows: list[CellKpmRow] = []
        powers: list[float] = []
        for cell in self.cells:
            members = np.flatnonzero(serving == cell.cell_id)
            k = len(members)
            if k:
                # grid-quantized rates make this sum exact in float64
                dl = float(served[members].sum())
                load = min(1.0, float(use_frac[members].sum()) / k)
                avg_sinr = float(sinr_db[members].mean())
                avg_rsrp = float(self.rsrp_dbm[members, cell.cell_id].mean())
                avg_backlog = float(np.mean(
                    [self.ues[m].backlog_mbits for m in members]))
                qos_viol = float(np.count_nonzero(
                    served[members] < demands[members])) / k
            else:
                dl, load, avg_sinr, avg_rsrp, avg_backlog, qos_viol = (
                    0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            power = energy.cell_power_w(cell.active, load, cfg.energy)
            cell.load = load
            cell.power_w = power
            powers.append(power)
            cell_rows.append(CellKpmRow(
                cell_id=cell.cell_id,
                timestamp_ms=ts,
                dl_throughput_mbps=dl,
                num_attached_ues=k,
                prb_utilization=load,
                avg_sinr_db=avg_sinr,
                avg_rsrp_dbm=avg_rsrp,
                power_w=power,
                energy_j_last_period=energy.period_energy_j(power, dt_s) if mutate else 0.0,
                is_active=int(cell.active),
                ho_in=cell.ho_in,
                ho_out=cell.ho_out,
                avg_backlog_mbits=avg_backlog,
                qos_violation_ratio=qos_viol,
            ))

        total_power = math.fsum(powers)
        self.last_stats = TickStats(
            total_served_mbps=float(served.sum()),
            total_demand_mbps=float(demands.sum()),
            total_power_w=total_power,
            energy_j=math.fsum(r.energy_j_last_period for r in cell_rows),
        )
        return ue_rows, cell_rows
