import csv
import io

import pytest

from mcim.arch import build
from mcim.config import MultiplierConfig
from mcim.errors import WidthMismatch
from mcim.estimate import (CSV_FIELDS, DEFAULT_WEIGHTS, area, baseline_config, check_weights, expand_grid,
                           perturbed_weights, reweight, savings, sweep, to_csv, to_text, weight_tables)
from mcim.netlist import Netlist


def test_area_of_hand_netlist():
    nl = Netlist()
    x = nl.add_input("x", 3)
    nl.add_input("rst", 1)
    s, c = nl.FA(*x)
    nl.add_output("y", [nl.dff(nl.XOR(s, c)), nl.NOT(c)])
    rep = area(nl)
    assert rep.cell_counts == {"FA": 1, "XOR2": 1, "DFF": 1, "NOT": 1}
    assert rep.weighted_area == 4.5 + 2 + 4 + 0.5
    assert rep.registers == 1 and rep.max_depth == 2


def test_weights_validation():
    with pytest.raises(ValueError):
        check_weights({"NAND3": 1})
    with pytest.raises(ValueError):
        check_weights({"FA": 0})
    assert check_weights({"FA": 5})["FA"] == 5.0


def test_perturbed_tables_are_seeded_and_bounded():
    assert perturbed_weights(1) == perturbed_weights(1)
    assert perturbed_weights(1) != perturbed_weights(2)
    for k, v in perturbed_weights(0).items():
        assert 0.5 * DEFAULT_WEIGHTS[k] <= v <= 1.5 * DEFAULT_WEIGHTS[k]
    assert list(weight_tables()) == ["default", "perturbed0", "perturbed1", "perturbed2"]


def test_reweight_matches_rebuild():
    d = build(MultiplierConfig(16, 16, 4))
    t = perturbed_weights(2)
    assert reweight(area(d), t).weighted_area == pytest.approx(area(d, t).weighted_area)


def test_savings_requires_equal_widths():
    a = build(MultiplierConfig(16, 16, 2))
    b = build(MultiplierConfig(16, 8, 2))
    with pytest.raises(WidthMismatch):
        savings(a, b)
    base = build(baseline_config(a.config))
    assert 0 < savings(a, base) < 100


def test_expand_grid_semantics():
    pts = expand_grid({"arch": "fb", "ct": [2, 4], "width_a": {"values": [8, 16]}})
    assert [(p["width_a"], p["ct"]) for p in pts] == [(w, c) for c in (2, 3, 4) for w in (8, 16)]
    assert len(expand_grid([{"ct": [2, 5, 7]}, {"arch": "star"}])) == 4
    for bad in ("x", [1], {"ct": [5, 2]}, {"ct": {"vals": [1]}}):
        with pytest.raises(ValueError):
            expand_grid(bad)


def test_sweep_isolates_bad_rows():
    rows = sweep([{"arch": "fb", "ct": 2, "width_a": 8, "width_b": 8},
                  {"arch": "star", "ct": 3},
                  {"arch": "fb", "colour": 1}], smoke=50)
    assert [r.status for r in rows] == ["OK", "ERROR", "ERROR"]
    assert "InvalidCT" in rows[1].message
    table = list(csv.DictReader(io.StringIO(to_csv(rows))))
    assert list(table[0]) == CSV_FIELDS
    assert table[0]["latency"] == "2" and table[0]["ppm_dims"] == "8x4"
    text = to_text(rows)
    assert text.splitlines()[0].split()[:4] == ["arch", "M", "N", "ct"]
    assert "# ERROR" in text


def test_sweep_parallel_matches_serial():
    pts = expand_grid({"arch": "fb", "width_a": 8, "width_b": 8, "ct": [2, 4]})
    assert to_csv(sweep(pts, jobs=2)) == to_csv(sweep(pts))
