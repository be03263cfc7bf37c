"""Shared test fixtures: small deterministic scenarios."""

from cellsleep.scenario import ScenarioConfig, TrafficConfig

# Seed 5 of small_config() puts all four demand-limited CBR UEs on cell 0
# and leaves cell 1 empty; tests assert that precondition explicitly.
EMPTY_CELL_SEED = 5


def small_config(seed=0, **kw):
    base = dict(
        n_gnbs=2,
        gnb_positions=((0.0, 0.0), (260.0, 260.0)),
        lte_anchor_position=(0.0, 0.0),
        inter_site_distance_m=360.0,
        n_ues=4,
        area_bounds=(-300.0, -300.0, 300.0, 300.0),
        episode_steps=50,
        seed=seed,
        traffic=TrafficConfig(cbr_fraction=1.0, cbr_rates_mbps=(0.75, 1.5),
                              elastic_cap_mbps=20.0),
    )
    base.update(kw)
    return ScenarioConfig(**base)
