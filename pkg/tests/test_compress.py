import random

import pytest
from hypothesis import given, settings, strategies as st

from mcim.compress import (PPArray, Row, build_pp_array, dadda_targets, n_to_2, reduce, ripple_add,
                           stage_bound)
from mcim.config import CompressorKind
from mcim.errors import EmptyOperand, HeightExceedsKind, TooManyRows
from mcim.netlist import CONST0, Netlist, evaluate

TREES = [CompressorKind.DADDA, CompressorKind.ROCOCO, CompressorKind.CUSTOM]


def array_circuit(heights, kind, width=None):
    """Netlist with input ``x`` feeding an array of the given column heights, outputs s/c."""
    nl = Netlist()
    x = nl.add_input("x", sum(heights))
    arr = PPArray()
    i = 0
    for w, h in enumerate(heights):
        for _ in range(h):
            arr.add_bit(w, x[i])
            i += 1
    red = reduce(nl, arr, kind, width)
    nl.add_output("s", red.sum_bits or [CONST0])
    nl.add_output("c", red.carry_bits or [CONST0])
    return nl, arr, red, x


def array_value(arr, x, xv):
    pos = {n: i for i, n in enumerate(x)}
    return arr.value(lambda n: (xv >> pos[n]) & 1 if n in pos else int(n == 1))


def multiplier_circuit(m, n, kind):
    nl = Netlist()
    a = nl.add_input("a", m)
    b = nl.add_input("b", n)
    red = reduce(nl, build_pp_array(nl, a, b), kind)
    nl.add_output("s", red.sum_bits)
    nl.add_output("c", red.carry_bits)
    return nl, red


def test_dadda_targets():
    assert dadda_targets(64) == [63, 42, 28, 19, 13, 9, 6, 4, 3, 2]
    assert dadda_targets(3) == [2]


def test_dadda_8x8_cell_counts():
    _, red = multiplier_circuit(8, 8, CompressorKind.DADDA)
    assert (red.fa, red.ha, red.stages) == (35, 7, 4)


@pytest.mark.parametrize("kind", TREES)
def test_multiplier_arrays_exhaustive_6x6(kind):
    nl, red = multiplier_circuit(6, 6, kind)
    a = [x for x in range(64) for _ in range(64)]
    b = [y for _ in range(64) for y in range(64)]
    out = evaluate(nl, {"a": a, "b": b}, ["s", "c"])
    assert all(s + c == x * y for s, c, x, y in zip(out["s"], out["c"], a, b))
    assert max(max(h) for h in red.stage_heights[-1:]) <= 2


heights = st.lists(st.integers(0, 12), min_size=1, max_size=20).filter(lambda h: sum(h) > 0)


@given(heights, st.sampled_from(TREES), st.integers(0, 2**32))
@settings(max_examples=60)
def test_tree_preserves_value(hs, kind, seed):
    nl, arr, red, x = array_circuit(hs, kind)
    rng = random.Random(seed)
    xs = [rng.getrandbits(len(x)) for _ in range(20)]
    out = evaluate(nl, {"x": xs}, ["s", "c"])
    w = arr.width
    for xv, s, c in zip(xs, out["s"], out["c"]):
        assert (s + c) % (1 << w) == array_value(arr, x, xv) % (1 << w)
    assert red.stages <= stage_bound(max(hs))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=24).filter(lambda h: sum(h) > 0), st.integers(0, 2**32))
@settings(max_examples=60)
def test_fa_chain_preserves_value(hs, seed):
    nl, arr, red, x = array_circuit(hs, CompressorKind.FA_CHAIN)
    rng = random.Random(seed)
    xs = [rng.getrandbits(len(x)) for _ in range(20)]
    out = evaluate(nl, {"x": xs}, ["s", "c"])
    for xv, s, c in zip(xs, out["s"], out["c"]):
        assert s + c == array_value(arr, x, xv)
    assert max(red.stage_heights[-1]) <= 2


def test_fa_chain_rejects_tall_columns():
    with pytest.raises(HeightExceedsKind):
        array_circuit([1, 4, 2], CompressorKind.FA_CHAIN)


def test_empty_operand():
    with pytest.raises(EmptyOperand):
        build_pp_array(Netlist(), [], [2])


@pytest.mark.parametrize("m", range(4, 17))
def test_custom_never_uses_more_full_adders_than_dadda(m):
    for n in (4, m):
        _, dadda = multiplier_circuit(m, n, CompressorKind.DADDA)
        _, custom = multiplier_circuit(m, n, CompressorKind.CUSTOM)
        assert custom.fa <= dadda.fa


@pytest.mark.parametrize("m", [4, 5, 8, 12, 16, 24, 32])
def test_rococo_trailing_zero_carries(m):
    _, red = multiplier_circuit(m, m, CompressorKind.ROCOCO)
    assert red.zero_lsbs > 0
    assert all(c == CONST0 for c in red.carry_bits[:red.zero_lsbs])


def test_modular_reduction_drops_high_columns():
    nl, arr, red, x = array_circuit([3, 5, 7, 9, 4], CompressorKind.DADDA, width=3)
    assert red.width <= 3
    xs = list(range(0, 1 << 20, 997))
    out = evaluate(nl, {"x": xs}, ["s", "c"])
    for xv, s, c in zip(xs, out["s"], out["c"]):
        assert (s + c) % 8 == array_value(arr, x, xv) % 8


@given(st.lists(st.tuples(st.integers(1, 6), st.integers(0, 5), st.booleans()), min_size=1, max_size=10),
       st.integers(0, 2**32))
@settings(max_examples=60)
def test_signed_rows_exact_and_modular(rows_spec, seed):
    nl = Netlist()
    ports = [nl.add_input(f"r{i}", w) for i, (w, _, _) in enumerate(rows_spec)]
    rows = [Row(p, sh, neg) for p, (_, sh, neg) in zip(ports, rows_spec)]
    rng = random.Random(seed)
    vals = {f"r{i}": [rng.getrandbits(w) for _ in range(16)] for i, (w, _, _) in enumerate(rows_spec)}
    top = 1 + max(w + sh for w, sh, _ in rows_spec) + len(rows_spec).bit_length()
    # make totals non-negative by adding a constant
    bias = sum(((1 << w) - 1) << sh for w, sh, neg in rows_spec if neg)
    exact = n_to_2(nl, rows, CompressorKind.DADDA, const=bias, value_bits=top + 1)
    mod = n_to_2(nl, rows, CompressorKind.ROCOCO, width=9, const=bias)
    nl.add_output("es", exact.sum_bits)
    nl.add_output("ec", exact.carry_bits)
    nl.add_output("ms", mod.sum_bits)
    nl.add_output("mc", mod.carry_bits)
    out = evaluate(nl, vals, ["es", "ec", "ms", "mc"])
    for k in range(16):
        total = bias + sum((-1 if neg else 1) * (vals[f"r{i}"][k] << sh) for i, (_, sh, neg) in enumerate(rows_spec))
        assert out["es"][k] + out["ec"][k] == total + exact.offset
        assert (out["ms"][k] + out["mc"][k]) % 512 == total % 512
    assert exact.offset % (1 << (top + 1)) == 0


def test_too_many_rows():
    nl = Netlist()
    x = nl.add_input("x", 2)
    with pytest.raises(TooManyRows):
        n_to_2(nl, [Row(x)] * 11, width=4)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32))
@settings(max_examples=30)
def test_ripple_add(wx, wy, seed):
    nl = Netlist()
    x = nl.add_input("x", wx)
    y = nl.add_input("y", wy)
    nl.add_output("s", ripple_add(nl, x, y, label="add"))
    nl.add_output("t", ripple_add(nl, x, y, width=3))
    rng = random.Random(seed)
    xs = [rng.getrandbits(wx) for _ in range(32)]
    ys = [rng.getrandbits(wy) for _ in range(32)]
    out = evaluate(nl, {"x": xs, "y": ys}, ["s", "t"])
    assert out["s"] == [a + b for a, b in zip(xs, ys)]
    assert out["t"] == [(a + b) % 8 for a, b in zip(xs, ys)]
    assert len(nl.groups) == 1


def test_dot_diagram_lists_every_stage():
    _, red = multiplier_circuit(4, 4, CompressorKind.DADDA)
    text = red.dot_diagram()
    assert text.splitlines()[0] == "stage 0: 1 2 3 4 3 2 1"
    assert len(text.splitlines()) == red.stages + 1
