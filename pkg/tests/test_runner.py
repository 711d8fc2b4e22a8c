import json
import math
from fractions import Fraction

import pytest

from geoflow import ConfigError, ExperimentConfig, GeoflowError, run_experiment
from geoflow.runner import QUANTITIES, table_rows, verify_table

SMALL = [
    dict(space="tree(2)", quantity="hcrit", horizons=[1, 2, 3]),
    dict(space="wedge(2)", quantity="sft", horizons=[1, 2, 3]),
    dict(space="tree(2)", quantity="bowen", horizons=[1, 2], options={"verify_separation": 1}),
    dict(space="tree(2)", quantity="delta", R=2),
    dict(space="tree(2)", quantity="md", horizons=[1, 2, 3]),
    dict(space="tree(2)", quantity="hcov", horizons=[2, 3]),
    dict(space="tree(2)", quantity="hgeod", horizons=[2, 3], options={"C": ["a1", "a2"]}),
    dict(space="tree(2)", quantity="ferg", horizons=[1, 2, 3]),
    dict(space="tree(2)", quantity="schedule", horizons=[4], options={"z": "(a1)", "tau": 0, "grid_step": 1}),
    dict(space="tree(2)", quantity="convexity", options={"gamma": "a1", "gamma2": "a2"}),
]


def test_every_quantity_dispatches():
    seen = set()
    for cfg in SMALL:
        rep = run_experiment(ExperimentConfig(**cfg))
        assert rep.quantity == cfg["quantity"]
        assert rep.config["space"] == cfg["space"]
        seen.add(rep.quantity)
    assert seen == set(QUANTITIES)


def test_dispatch_values():
    sft = run_experiment(ExperimentConfig("wedge(3)", "sft", [1]))
    assert sft.slope == pytest.approx(math.log(5), abs=1e-15) and sft.meta["exact"]
    rot = run_experiment(ExperimentConfig("rotation_t4", "sft", [1], options={"partition": "example"}))
    assert rot.slope == 0.0
    groups = run_experiment(ExperimentConfig("wedge(2)", "sft", [1],
                                             options={"partition": [["a1", "A1"], ["a2", "A2"]]}))
    assert groups.slope == pytest.approx(math.log(2), abs=1e-15)
    delta = run_experiment(ExperimentConfig("doubled(2)", "delta", R=2, options={"net": "midpoints"}))
    assert delta.slope == 0.5


def test_config_from_dict_and_file(tmp_path):
    data = {"space": "tree(2)", "quantity": "hcrit", "horizons": [1, 2], "a": "1/2"}
    cfg = ExperimentConfig.from_dict(data)
    assert cfg.a == Fraction(1, 2)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(path) == cfg


@pytest.mark.parametrize("bad", [
    {"space": "tree(2)", "quantity": "nope"},
    {"space": "tree(2)", "quantity": "hcrit", "colour": "red"},
    {"space": "tree(2)", "quantity": "hcrit", "a": 0},
    {"space": "tree(2)", "quantity": "hcrit", "r": -1},
    {"space": "tree(2)", "quantity": "hcrit", "horizons": []},
    {"space": "tree(2)", "quantity": "hcrit", "format": "xml"},
    {"space": "tree(2)", "quantity": "schedule", "options": {"z": "(a1)"}},
    {"space": "tree(2)", "quantity": "bowen", "r": 1},
    {"space": "tree(2)", "quantity": "hcrit", "budget": 0},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_unreadable_inputs(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")
    broken = tmp_path / "space.json"
    broken.write_text('{"base_graph": {"vertices": 1}}')
    with pytest.raises(GeoflowError):
        run_experiment(ExperimentConfig(str(broken), "hcrit", [1]))
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig("tree(x)", "hcrit", [1]))


def test_group_quantities_refused_on_tufted_ray():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig("tufted_ray(exp,6)", "hcrit", [1]))


def test_budget_truncates_horizons(tmp_path):
    out = tmp_path / "partial.csv"
    rep = run_experiment(ExperimentConfig("tree(2)", "hcrit", list(range(1, 12)), budget=500, out=str(out)))
    assert rep.partial
    assert 0 < len(rep.horizons) < 11
    assert out.read_text().count("\n") == len(rep.horizons) + 1


def test_table_rows_are_labelled():
    rows = table_rows()
    assert {r.provenance for r in rows} <= {"PAPER", "DERIVED"}
    assert {r.quantity for r in rows} >= {"sft", "hcrit", "bowen", "delta", "md", "hcov", "hgeod", "property"}
    with pytest.raises(ConfigError):
        verify_table("schedule-x")


def test_verify_table_subset_echoes_one_line_per_row():
    lines = []
    assert verify_table("delta", echo=lines.append)
    assert len(lines) == 3
    assert all(line.startswith("PASS [DERIVED] delta:") for line in lines[:-1])
