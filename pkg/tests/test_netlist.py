import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcim.errors import StimulusWidthOverflow, UncheckedNetlist
from mcim.netlist import (CONST0, CONST1, Cell, Kind, Netlist, check, evaluate, kernels, levelize, merge_equivalent, net_levels,
                          pack, run_lanes, simulate, unpack)
from mcim.netlist.core import UNDRIVEN, instantiate


def random_netlist(seed, n_in=4, n_cells=40, n_dff=4):
    """Random sequential netlist: combinational cells only read earlier nets."""
    rng = random.Random(seed)
    nl = Netlist("rand", fold=False)
    nl.add_input("clk", 1)
    nl.add_input("rst", 1)
    nets = list(nl.add_input("x", n_in)) + [CONST0, CONST1]
    qs = nl.reg(n_dff)
    nets += qs
    for _ in range(n_cells):
        kind = rng.choice([Kind.NOT, Kind.AND2, Kind.OR2, Kind.XOR2, Kind.HA, Kind.FA, Kind.MUX2])
        ins = [rng.choice(nets) for _ in range(3)]
        if kind is Kind.NOT:
            nets.append(nl.NOT(ins[0]))
        elif kind is Kind.AND2:
            nets.append(nl.AND(ins[0], ins[1]))
        elif kind is Kind.OR2:
            nets.append(nl.OR(ins[0], ins[1]))
        elif kind is Kind.XOR2:
            nets.append(nl.XOR(ins[0], ins[1]))
        elif kind is Kind.MUX2:
            nets.append(nl.MUX(*ins))
        elif kind is Kind.HA:
            nets.extend(nl.HA(ins[0], ins[1]))
        else:
            nets.extend(nl.FA(*ins))
    nl.drive(qs, [rng.choice(nets[-n_cells:]) for _ in qs])
    nl.add_output("y", [rng.choice(nets) for _ in range(6)])
    return nl


def shuffled(nl, seed):
    """Same circuit with the non-constant cells in a different order."""
    out = Netlist(nl.name, fold=False)
    out.cells = nl.cells[:2] + random.Random(seed).sample(nl.cells[2:], len(nl.cells) - 2)
    out.n_nets, out.inputs, out.outputs, out.rst = nl.n_nets, list(nl.inputs), list(nl.outputs), nl.rst
    return out


def test_builders_fold_constants():
    nl = Netlist()
    x = nl.add_input("x", 2)
    assert nl.AND(x[0], CONST0) == CONST0
    assert nl.AND(x[0], CONST1) == x[0]
    assert nl.OR(x[0], CONST1) == CONST1
    assert nl.XOR(x[0], x[0]) == CONST0
    assert nl.NOT(nl.NOT(x[0])) == x[0]
    assert nl.MUX(CONST1, x[0], x[1]) == x[1]
    nl.FA(x[0], x[1], CONST0)
    assert nl.census() == {"NOT": 1, "HA": 1}


def test_check_finds_problems():
    nl = Netlist(fold=False)
    x = nl.add_input("x", 1)[0]
    a = nl.add_cell(Kind.AND2, (x, UNDRIVEN))[0]
    nl.add_output("y", [a])
    assert {p.kind for p in check(nl)} == {"FloatingNet"}

    loop = Netlist(fold=False)
    x = loop.add_input("x", 1)[0]
    n = loop.new_net()
    y = loop.add_cell(Kind.AND2, (x, n))[0]
    loop.cells.append(Cell(Kind.NOT, (y,), (n,)))
    loop.add_output("y", [y])
    assert [p.kind for p in check(loop)] == ["CombinationalLoop"]
    with pytest.raises(UncheckedNetlist):
        simulate(loop, [{"x": 0}])

    multi = Netlist(fold=False)
    x = multi.add_input("x", 1)[0]
    y = multi.NOT(x)
    multi.cells.append(Cell(Kind.NOT, (x,), (y,)))
    multi.add_output("y", [y])
    assert "MultipleDrivers" in {p.kind for p in check(multi)}


def test_register_loop_is_fine():
    nl = Netlist()
    nl.add_input("rst", 1)
    q = nl.reg(1)
    nl.drive(q, [nl.NOT(q[0])])
    nl.add_output("q", q)
    assert check(nl) == []
    trace = simulate(nl, [{"rst": 1}] + [{"rst": 0}] * 5)
    assert trace.column("q") == [0, 0, 1, 0, 1, 0]


def test_simulate_errors():
    nl = Netlist()
    x = nl.add_input("x", 3)
    nl.add_output("y", [nl.AND(x[0], x[1])])
    with pytest.raises(StimulusWidthOverflow):
        simulate(nl, [{"x": 8}])
    with pytest.raises(ValueError):
        simulate(nl, [{}])


@given(st.lists(st.integers(0, (1 << 200) - 1), min_size=1, max_size=130), st.integers(1, 200))
def test_pack_unpack_round_trip(values, width):
    values = [v & ((1 << width) - 1) for v in values]
    assert unpack(pack(values, width), len(values)) == values


@given(st.integers(0, 10_000))
@settings(max_examples=40)
def test_levels_do_not_depend_on_cell_order(seed):
    nl = random_netlist(seed)
    other = shuffled(nl, seed + 1)
    assert net_levels(nl) == net_levels(other)
    assert levelize(nl)[1] == levelize(other)[1]


def _drive(nl, cycles, seed):
    rng = np.random.default_rng(seed)
    return {"x": rng.integers(0, 1 << 63, size=(cycles, 4, 2), dtype=np.uint64),
            "rst": np.zeros((cycles, 1, 2), dtype=np.uint64)}


@given(st.integers(0, 10_000))
@settings(max_examples=30)
def test_backends_and_cell_order_agree(seed):
    nl = random_netlist(seed)
    drive = _drive(nl, 12, seed)
    results = []
    for name in ("numpy", "numba"):
        kernels.set_backend(name)
        results.append(run_lanes(nl, drive, 12, ["y"], nw=2)["y"])
        results.append(run_lanes(shuffled(nl, seed), drive, 12, ["y"], nw=2)["y"])
    kernels.set_backend("numba")
    for r in results[1:]:
        assert np.array_equal(results[0], r)


@given(st.integers(0, 10_000), st.integers(1, 10))
@settings(max_examples=30)
def test_causality(seed, t):
    """Changing inputs from cycle t on cannot affect outputs before cycle t."""
    nl = random_netlist(seed)
    drive = _drive(nl, 12, seed)
    before = run_lanes(nl, drive, 12, ["y"], nw=2)["y"]
    drive["x"][t:] ^= np.uint64((1 << 64) - 1)
    after = run_lanes(nl, drive, 12, ["y"], nw=2)["y"]
    assert np.array_equal(before[:t], after[:t])


def test_evaluate_adder():
    nl = Netlist()
    a = nl.add_input("a", 4)
    b = nl.add_input("b", 4)
    s, c = zip(*[nl.HA(x, y) for x, y in zip(a, b)])
    nl.add_output("x", list(s))
    out = evaluate(nl, {"a": list(range(16)), "b": [7] * 16}, ["x"])
    assert out["x"] == [v ^ 7 for v in range(16)]


def test_instantiate_copies_groups_and_cells():
    from mcim.compress import ripple_add

    child = Netlist("child")
    a = child.add_input("a", 3)
    b = child.add_input("b", 3)
    child.add_output("s", ripple_add(child, a, b, label="add"))
    parent = Netlist("parent")
    x = parent.add_input("x", 3)
    y = parent.add_input("y", 3)
    s = instantiate(parent, child, {"a": x, "b": y})["s"]
    parent.add_output("s", s)
    assert len(parent.groups) == 1
    assert parent.census() == child.census()
    vals = list(range(8))
    assert evaluate(parent, {"x": vals, "y": vals[::-1]}, ["s"])["s"] == [7] * 8


@given(st.integers(0, 10_000))
@settings(max_examples=30)
def test_merge_equivalent_keeps_behaviour(seed):
    top = Netlist("top", fold=False)
    top.add_input("clk", 1)
    rst = top.add_input("rst", 1)
    x = top.add_input("x", 4)
    outs = []
    for s in (seed, seed, seed + 1):
        outs += instantiate(top, random_netlist(s), {"rst": rst, "x": x})["y"]
    top.add_output("y", outs)
    merged = merge_equivalent(top)
    assert check(merged) == []
    single = sum(1 for c in random_netlist(seed).cells if c.kind not in (Kind.CONST0, Kind.CONST1))
    assert len(merged.cells) <= len(top.cells) - single
    drive = _drive(top, 16, seed)
    drive["rst"] = np.random.default_rng(seed).integers(0, 1 << 63, size=(16, 1, 2), dtype=np.uint64)
    assert np.array_equal(run_lanes(top, drive, 16, ["y"], nw=2)["y"], run_lanes(merged, drive, 16, ["y"], nw=2)["y"])
