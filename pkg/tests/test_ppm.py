import random
from math import ceil

import pytest
from hypothesis import given, settings, strategies as st

from mcim.config import CompressorKind
from mcim.errors import EmptyOperand, ExcessiveRecursion, WidthTooSmall
from mcim.netlist import Netlist, evaluate
from mcim.ppm import build_ppm, karatsuba_split


def and_oracle(m, n, levels):
    """AND cells of a Karatsuba PPM, counted from the recursion alone."""
    if levels == 0:
        return m * n
    s = ceil(max(m, n) / 2)
    a0, a1 = min(m, s), m - min(m, s)
    b0, b1 = min(n, s), n - min(n, s)
    sa = max(a0, a1) + 1 if a1 else a0
    sb = max(b0, b1) + 1 if b1 else b0
    total = and_oracle(a0, b0, levels - 1) + and_oracle(sa, sb, levels - 1)
    if a1 and b1:
        total += and_oracle(a1, b1, levels - 1)
    return total


def ppm_circuit(m, n, levels, kind=CompressorKind.DADDA):
    nl = Netlist()
    a = nl.add_input("a", m)
    b = nl.add_input("b", n)
    inst = build_ppm(nl, a, b, kind, levels)
    nl.add_output("s", inst.sum_bits)
    nl.add_output("c", inst.carry_bits)
    nl.add_output("es", inst.exact_sum)
    nl.add_output("ec", inst.exact_carry)
    return nl, inst


def test_split():
    assert karatsuba_split(9) == (5, 4)
    assert karatsuba_split(8) == (4, 4)


@pytest.mark.parametrize("levels", [0, 1])
@pytest.mark.parametrize("kind", [CompressorKind.DADDA, CompressorKind.ROCOCO, CompressorKind.CUSTOM])
def test_exhaustive_7x7(levels, kind):
    nl, inst = ppm_circuit(7, 7, levels, kind)
    a = [x for x in range(128) for _ in range(128)]
    b = [y for _ in range(128) for y in range(128)]
    out = evaluate(nl, {"a": a, "b": b}, ["s", "c", "es", "ec"])
    for k, (x, y) in enumerate(zip(a, b)):
        assert (out["s"][k] + out["c"][k]) % (1 << 14) == x * y
        assert out["es"][k] + out["ec"][k] == x * y + inst.offset


@given(st.integers(4, 40), st.integers(4, 40), st.integers(0, 2), st.integers(0, 2**32))
@settings(max_examples=25)
def test_random_widths(m, n, levels, seed):
    try:
        nl, inst = ppm_circuit(m, n, levels)
    except (ExcessiveRecursion, WidthTooSmall):
        return
    rng = random.Random(seed)
    a = [rng.getrandbits(m) for _ in range(64)]
    b = [rng.getrandbits(n) for _ in range(64)]
    out = evaluate(nl, {"a": a, "b": b}, ["s", "c", "es", "ec"])
    for k, (x, y) in enumerate(zip(a, b)):
        assert (out["s"][k] + out["c"][k]) % (1 << (m + n)) == x * y
        assert out["es"][k] + out["ec"][k] == x * y + inst.offset
    # lopsided operands can leave the high-half product empty
    assert inst.leaf_count <= 3 ** levels


@pytest.mark.parametrize("m,levels", [(16, 1), (16, 2), (33, 2), (65, 3), (128, 3)])
def test_and_counts_match_recursion(m, levels):
    _, inst = ppm_circuit(m, m, levels)
    assert inst.cell_census["AND2"] == and_oracle(m, m, levels)
    assert inst.leaf_count == 3 ** levels


def test_frozen_counts_65():
    got = [ppm_circuit(65, 65, k)[1].cell_census["AND2"] for k in range(4)]
    assert got == [4225, 3269, 2572, 2131]


def test_errors():
    nl = Netlist()
    a = nl.add_input("a", 3)
    with pytest.raises(WidthTooSmall):
        build_ppm(nl, a, a, levels=1)
    x = nl.add_input("x", 6)
    with pytest.raises(ExcessiveRecursion):
        build_ppm(nl, x, x, levels=2)
    with pytest.raises(EmptyOperand):
        build_ppm(nl, [], x)
