import json
import math
from dataclasses import replace

import pytest

from cellsleep.scenario import (
    EnergyParams,
    RewardWeights,
    TrafficConfig,
    build_default_scenario,
    default_power_normalizer,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate,
)


def test_default_scenario_matches_demo_layout():
    cfg = build_default_scenario(42)
    assert cfg.n_gnbs == 7
    assert cfg.n_ues == 63
    assert cfg.control_period_ms == 100
    assert cfg.lte_anchor_position == (0.0, 0.0)
    assert cfg.gnb_positions[0] == (0.0, 0.0)
    assert cfg.area_bounds == (-2550.0, -2550.0, 2550.0, 2550.0)


def test_first_ring_gnb_is_isd_from_anchor():
    cfg = build_default_scenario(42)
    d = math.dist(cfg.gnb_positions[1], cfg.lte_anchor_position)
    assert d == pytest.approx(1700.0, abs=1e-6)


def test_adjacent_ring_gnbs_exactly_isd_apart():
    cfg = build_default_scenario(0)
    ring = cfg.gnb_positions[1:]
    for k in range(6):
        d = math.dist(ring[k], ring[(k + 1) % 6])
        assert d == pytest.approx(1700.0, abs=1e-6)


def test_build_is_pure_function_of_seed():
    a = build_default_scenario(7)
    b = build_default_scenario(7)
    assert a == b
    assert json.dumps(scenario_to_dict(a)) == json.dumps(scenario_to_dict(b))


def test_seed_only_field_differs_between_seeds():
    a = build_default_scenario(1)
    b = build_default_scenario(2)
    assert a.seed == 1 and b.seed == 2
    assert replace(a, seed=0) == replace(b, seed=0)


def test_default_power_normalizer_covers_anchor():
    e = EnergyParams()
    # 8 cells (7 gNBs + anchor) at full load
    assert default_power_normalizer(7, e) == pytest.approx(8 * 224.0)
    assert build_default_scenario(0).reward.p_max_w == pytest.approx(1792.0)


def test_validate_accepts_defaults_for_many_seeds():
    for seed in range(10):
        assert validate(build_default_scenario(seed)) == []


def test_validate_flags_bad_counts():
    cfg = replace(build_default_scenario(0), n_gnbs=0, gnb_positions=())
    msgs = validate(cfg)
    assert any("n_gnbs" in m for m in msgs)

    cfg = replace(build_default_scenario(0), n_ues=0)
    assert any("n_ues" in m for m in validate(cfg))

    cfg = replace(build_default_scenario(0), episode_steps=0)
    assert any("episode_steps" in m for m in validate(cfg))


def test_validate_names_gnb_outside_bounds():
    base = build_default_scenario(0)
    positions = list(base.gnb_positions)
    positions[3] = (9000.0, 0.0)
    cfg = replace(base, gnb_positions=tuple(positions))
    msgs = validate(cfg)
    assert msgs == ["gnb_positions[3] lies outside area_bounds"]


def test_validate_checks_nested_blocks():
    base = build_default_scenario(0)
    cfg = replace(base, traffic=TrafficConfig(cbr_fraction=1.5))
    assert any("cbr_fraction" in m for m in validate(cfg))
    cfg = replace(base, energy=EnergyParams(p_sleep_w=200.0))
    assert any("p_sleep_w" in m for m in validate(cfg))
    cfg = replace(base, reward=RewardWeights(tau_s=0.0))
    assert any("tau_s" in m for m in validate(cfg))


def test_json_roundtrip(tmp_path):
    cfg = build_default_scenario(13)
    path = tmp_path / "scenario.json"
    save_scenario(cfg, str(path))
    loaded = load_scenario(str(path))
    assert loaded == cfg
    # file uses snake_case field names directly
    data = json.loads(path.read_text())
    assert data["n_gnbs"] == 7
    assert data["traffic"]["cbr_fraction"] == 0.5
    assert data["control_period_ms"] == 100


def test_from_dict_rejects_unknown_fields():
    data = scenario_to_dict(build_default_scenario(0))
    data["bogus"] = 1
    with pytest.raises(TypeError):
        scenario_from_dict(data)
