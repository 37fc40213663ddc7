"""Partial product multipliers: multipliers without the final addition.

``build_simple`` is an AND array plus a compressor tree.  ``build_karatsuba``
splits both operands once per level and combines three smaller products

    T0 = A0*B0,  T1 = A1*B1,  T2 = (A0+A1)*(B0+B1)
    A*B = T1*2^(2s) + (T2 - T1 - T0)*2^s + T0

where every product is itself a (sum, carry) pair, giving ten rows for one
n:2 compression.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import ceil
from typing import Sequence

from .compress import Row, build_pp_array, n_to_2, reduce, ripple_add
from .config import CompressorKind, parse_enum
from .errors import EmptyOperand, ExcessiveRecursion, WidthTooSmall
from .netlist.core import CONST0, Netlist

MIN_SPLIT_WIDTH = 4


@dataclass
class PpmInstance:
    a_width: int
    b_width: int
    sum_bits: list[int]
    carry_bits: list[int]
    # exact pair: value(exact_sum) + value(exact_carry) == a*b + offset
    exact_sum: list[int]
    exact_carry: list[int]
    offset: int = 0
    leaf_count: int = 1
    levels: int = 0
    cell_census: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.a_width + self.b_width

    def rows(self, shift: int = 0, negative: bool = False) -> list[Row]:
        """The exact pair as two n:2 rows (caller compensates ``offset``)."""
        return [Row(self.exact_sum, shift, negative), Row(self.exact_carry, shift, negative)]


def _census(nl: Netlist, start: int) -> dict:
    return dict(Counter(c.kind.name for c in nl.cells[start:]))


def _fit(bits: Sequence[int], width: int) -> list[int]:
    bits = list(bits[:width])
    return bits + [CONST0] * (width - len(bits))


def build_simple(nl: Netlist, a_bits: Sequence[int], b_bits: Sequence[int],
                 ppm_kind=CompressorKind.DADDA) -> PpmInstance:
    """AND array reduced by ``ppm_kind``; the pair sums exactly to a*b."""
    ppm_kind = parse_enum(CompressorKind, ppm_kind)
    start = len(nl.cells)
    arr = build_pp_array(nl, list(a_bits), list(b_bits))
    red = reduce(nl, arr, ppm_kind)
    w = len(a_bits) + len(b_bits)
    # a*b < 2**w and both rows are non-negative, so bits above w are always 0
    s, c = _fit(red.sum_bits, w), _fit(red.carry_bits, w)
    return PpmInstance(len(a_bits), len(b_bits), s, c, s, c, 0, 1, 0, _census(nl, start))


def karatsuba_split(width: int) -> tuple[int, int]:
    """(low, high) widths; the low half takes the odd bit."""
    return ceil(width / 2), width // 2


def build_karatsuba(nl: Netlist, a_bits: Sequence[int], b_bits: Sequence[int], levels: int = 1,
                    ppm_kind=CompressorKind.DADDA) -> PpmInstance:
    """Recursive Karatsuba PPM with ``levels`` splits (0 means ``build_simple``)."""
    ppm_kind = parse_enum(CompressorKind, ppm_kind)
    if levels <= 0:
        return build_simple(nl, a_bits, b_bits, ppm_kind)
    a_bits, b_bits = list(a_bits), list(b_bits)
    ma, mb = len(a_bits), len(b_bits)
    if min(ma, mb) < MIN_SPLIT_WIDTH:
        raise WidthTooSmall(f"Karatsuba split needs operands >= {MIN_SPLIT_WIDTH} bits, got {ma}x{mb}")
    start = len(nl.cells)
    s = ceil(max(ma, mb) / 2)
    a0, a1 = a_bits[:s], a_bits[s:]
    b0, b1 = b_bits[:s], b_bits[s:]
    sa = ripple_add(nl, a0, a1) if a1 else a0
    sb = ripple_add(nl, b0, b1) if b1 else b0

    def sub(x, y):
        if not x or not y:
            return None
        if levels - 1 >= 1 and min(len(x), len(y)) < MIN_SPLIT_WIDTH:
            raise ExcessiveRecursion(f"{levels} levels split a {ma}x{mb} PPM below {MIN_SPLIT_WIDTH} bits")
        return build_karatsuba(nl, x, y, levels - 1, ppm_kind)

    t0, t1, t2 = sub(a0, b0), sub(a1, b1), sub(sa, sb)
    rows: list[Row] = []
    const = 0
    for term, shift, neg in ((t1, 2 * s, False), (t2, s, False), (t1, s, True), (t0, s, True), (t0, 0, False)):
        if term is None:
            continue
        rows += term.rows(shift, neg)
        const += (term.offset << shift) if neg else -(term.offset << shift)
    w = ma + mb
    res = n_to_2(nl, rows, ppm_kind, const=const, value_bits=w)
    leaves = sum(t.leaf_count for t in (t0, t1, t2) if t is not None)
    return PpmInstance(
        ma, mb,
        _fit(res.sum_bits, w), _fit(res.carry_bits, w),
        list(res.sum_bits), list(res.carry_bits), res.offset,
        leaves, levels, _census(nl, start),
    )


def build_ppm(nl: Netlist, a_bits, b_bits, ppm_kind=CompressorKind.DADDA, levels: int = 0) -> PpmInstance:
    if not a_bits or not b_bits:
        raise EmptyOperand(f"operand widths {len(a_bits)}x{len(b_bits)}")
    if levels:
        return build_karatsuba(nl, a_bits, b_bits, levels, ppm_kind)
    return build_simple(nl, a_bits, b_bits, ppm_kind)
