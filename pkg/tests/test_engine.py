import math
from dataclasses import replace

import pytest

from cellsleep.engine import (
    GNB,
    LTE_ANCHOR,
    ConfigurationError,
    SimClock,
    Simulator,
)
from cellsleep.scenario import ScenarioConfig, build_default_scenario
from helpers import EMPTY_CELL_SEED, small_config


def test_reset_default_scenario_counts():
    sim = Simulator(build_default_scenario(42))
    gnbs = [c for c in sim.cells if c.kind == GNB]
    anchors = [c for c in sim.cells if c.kind == LTE_ANCHOR]
    assert len(gnbs) == 7 and all(c.active for c in gnbs)
    assert len(anchors) == 1 and anchors[0].active
    assert sum(len(c.attached_ues) for c in sim.cells) == 63
    assert sim.clock == SimClock(0, 0)


def test_reset_is_reproducible():
    sim = Simulator(build_default_scenario(7))
    first = [(ue.position, ue.serving_cell) for ue in sim.ues]
    first_rows = list(sim.latest_cell_rows)
    sim.reset()
    assert [(ue.position, ue.serving_cell) for ue in sim.ues] == first
    assert sim.latest_cell_rows == first_rows


def test_different_seeds_same_topology_different_placement():
    a = Simulator(build_default_scenario(1))
    b = Simulator(build_default_scenario(2))
    assert [c.position for c in a.cells] == [c.position for c in b.cells]
    assert [ue.position for ue in a.ues] != [ue.position for ue in b.ues]


def test_unreachable_floor_sends_everyone_to_anchor():
    cfg = replace(build_default_scenario(42), min_rsrp_dbm=math.inf)
    sim = Simulator(cfg)
    assert all(ue.serving_cell == sim.anchor_id for ue in sim.ues)
    assert len(sim.cells[sim.anchor_id].attached_ues) == 63


def test_invalid_config_rejected_with_violations():
    cfg = replace(build_default_scenario(0), n_ues=0, episode_steps=0)
    with pytest.raises(ConfigurationError) as exc:
        Simulator(cfg)
    assert any("n_ues" in v for v in exc.value.violations)
    assert any("episode_steps" in v for v in exc.value.violations)


def test_apply_action_all_ones_is_idempotent():
    sim = Simulator(build_default_scenario(42))
    before = [(ue.serving_cell) for ue in sim.ues]
    sim.apply_action([1] * 7)
    assert [(ue.serving_cell) for ue in sim.ues] == before
    assert all(c.ho_out == 0 and c.ho_in == 0 for c in sim.cells)


def test_apply_action_rejects_wrong_length_and_values():
    sim = Simulator(build_default_scenario(42))
    with pytest.raises(ValueError):
        sim.apply_action([1] * 6)
    with pytest.raises(ValueError):
        sim.apply_action([1, 1, 1, 1, 1, 1, 2])


def test_deactivation_reattaches_and_counts_ho():
    sim = Simulator(build_default_scenario(42))
    victims = len(sim.cells[4].attached_ues)
    assert victims > 0
    action = [1] * 7
    action[4] = 0
    sim.apply_action(action)
    assert sim.cells[4].attached_ues == set()
    assert sim.cells[4].ho_out == victims
    assert sum(c.ho_in for c in sim.cells) == victims
    assert all(ue.serving_cell != 4 for ue in sim.ues)


def test_all_zeros_action_serves_everyone_from_anchor():
    sim = Simulator(build_default_scenario(42))
    sim.apply_action([0] * 7)
    sim.tick()
    assert all(ue.serving_cell == sim.anchor_id for ue in sim.ues)
    assert len(sim.cells[sim.anchor_id].attached_ues) == 63


def test_tick_emission_counts_and_timestamps():
    sim = Simulator(build_default_scenario(42))
    ue_rows, cell_rows = sim.tick()
    assert len(ue_rows) == 63
    assert len(cell_rows) == 8  # 7 gNBs + anchor
    assert all(r.timestamp_ms == 0 for r in ue_rows)
    ue_rows, cell_rows = sim.tick()
    assert all(r.timestamp_ms == 100 for r in ue_rows)
    assert sim.clock.step_index == 2
    assert sim.clock.sim_time_ms == 200


def test_no_handover_in_static_steady_state():
    # freeze mobility by zeroing speeds after reset
    sim = Simulator(build_default_scenario(42))
    sim.tick()  # settle any initial hysteresis-free attachment residue
    for ue in sim.ues:
        ue.speed_mps = 0.0
    for _ in range(5):
        _, cell_rows = sim.tick()
        for ue in sim.ues:
            ue.speed_mps = 0.0  # periodic re-draws would restore motion
        assert sum(r.ho_in + r.ho_out for r in cell_rows) == 0


def test_conservation_cell_vs_ue_totals():
    sim = Simulator(build_default_scenario(42))
    for _ in range(20):
        ue_rows, cell_rows = sim.tick()
        assert sum(r.dl_throughput_mbps for r in cell_rows) == \
            sum(r.dl_throughput_mbps for r in ue_rows)


def test_no_ue_on_inactive_cell_after_any_tick():
    sim = Simulator(build_default_scenario(42))
    actions = [[1, 0, 1, 0, 1, 0, 1], [0] * 7, [1] * 7, [0, 0, 1, 1, 0, 1, 0]]
    for action in actions:
        sim.apply_action(action)
        for _ in range(3):
            sim.tick()
            for ue in sim.ues:
                assert sim.cells[ue.serving_cell].active
                assert ue.serving_cell is not None


def test_offered_at_least_served_every_tick():
    sim = Simulator(build_default_scenario(3))
    for _ in range(30):
        ue_rows, _ = sim.tick()
        offered = math.fsum(r.demand_mbps for r in ue_rows)
        served = math.fsum(r.dl_throughput_mbps for r in ue_rows)
        assert served <= offered
        assert all(r.backlog_mbits >= 0 for r in ue_rows)


def test_determinism_bitwise_kpm_streams():
    def run():
        sim = Simulator(build_default_scenario(11))
        out = []
        actions = [[1] * 7, [1, 0, 1, 1, 1, 1, 1], [1] * 7, [0, 0, 1, 1, 1, 1, 1]]
        for k in range(40):
            sim.apply_action(actions[k % len(actions)])
            ue_rows, cell_rows = sim.tick()
            out.append((tuple(ue_rows), tuple(cell_rows)))
        return out

    assert run() == run()


def test_load_and_ratios_within_bounds():
    sim = Simulator(build_default_scenario(5))
    for _ in range(10):
        _, cell_rows = sim.tick()
        for r in cell_rows:
            assert 0.0 <= r.prb_utilization <= 1.0
            assert 0.0 <= r.qos_violation_ratio <= 1.0
            assert r.is_active in (0, 1)


def test_anchor_never_deactivates():
    sim = Simulator(build_default_scenario(0))
    sim.apply_action([0] * 7)
    sim.tick()
    anchor = sim.cells[sim.anchor_id]
    assert anchor.active
    assert anchor.power_w > sim.config.energy.p_sleep_w


def test_deactivating_empty_cell_changes_nothing_but_power():
    cfg = small_config(seed=EMPTY_CELL_SEED)
    keep = Simulator(cfg)
    drop = Simulator(cfg)
    assert len(keep.cells[1].attached_ues) == 0
    assert len(keep.cells[0].attached_ues) == 4

    keep.apply_action([1, 1])
    drop.apply_action([1, 0])
    rows_keep = keep.tick()
    rows_drop = drop.tick()

    assert [u.serving_cell for u in keep.ues] == [u.serving_cell for u in drop.ues]
    served_keep = [r.dl_throughput_mbps for r in rows_keep[0]]
    served_drop = [r.dl_throughput_mbps for r in rows_drop[0]]
    assert served_keep == served_drop
    assert drop.last_stats.total_power_w < keep.last_stats.total_power_w


def test_mobility_driven_handovers_fire_in_compact_layout():
    # diffusive walkers rarely cross 1700 m cell boundaries, so use a dense
    # two-cell layout where the hysteresis margin is reachable in minutes
    cfg = ScenarioConfig(
        n_gnbs=2,
        gnb_positions=((-100.0, 0.0), (100.0, 0.0)),
        lte_anchor_position=(0.0, 0.0),
        inter_site_distance_m=200.0,
        n_ues=20,
        area_bounds=(-250.0, -250.0, 250.0, 250.0),
        episode_steps=3000,
        seed=1,
    )
    sim = Simulator(cfg)
    handovers = 0
    for _ in range(3000):
        _, cell_rows = sim.tick()
        handovers += sum(r.ho_in for r in cell_rows)
        assert sum(r.ho_in for r in cell_rows) == \
            sum(r.ho_out for r in cell_rows)
    assert handovers > 0


def test_link_state_accessor_consistency():
    sim = Simulator(build_default_scenario(9))
    link = sim.link_state(1, 0)
    assert link.ue_id == 1 and link.cell_id == 0
    assert link.path_loss_db > 0
    assert link.rsrp_dbm == pytest.approx(
        sim.config.gnb_tx_power_dbm - link.path_loss_db - link.shadowing_db)
