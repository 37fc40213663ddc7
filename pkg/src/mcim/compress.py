"""Partial-product arrays and carry-save compressor trees.

A :class:`PPArray` is a dot diagram: ``columns[w]`` holds the nets of weight
``2**w``.  :func:`reduce` turns it into a redundant (sum, carry) pair using
one of four schedules:

* ``DaddaTree``   - classic Dadda height targets 2, 3, 4, 6, 9, ...
* ``RoCoCo``      - Dadda targets, plus each stage retires the lowest open
  column to a single bit so the carry vector grows a run of constant-zero LSBs;
* ``Custom``      - cheapest of a few greedy schedules by weighted cell area,
  never using more full adders than Dadda;
* ``FullAdderChain`` - one row of 3:2 cells, for arrays at most 3 bits high.

:func:`n_to_2` stacks signed, shifted rows (negative rows as bitwise
complements plus a constant) and reduces them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .config import CompressorKind, parse_enum
from .errors import EmptyOperand, HeightExceedsKind, TooManyRows
from .netlist.core import CONST0, CONST1, Kind, Netlist

MAX_ROWS = 10


class PPArray:
    """Column-indexed weighted bits."""

    def __init__(self, columns: Iterable[Iterable[int]] = ()):
        self.columns: list[list[int]] = [list(c) for c in columns]

    def _grow(self, w: int) -> None:
        while len(self.columns) <= w:
            self.columns.append([])

    def add_bit(self, w: int, net: int) -> None:
        self._grow(w)
        self.columns[w].append(net)

    def add_row(self, bits: Sequence[int], shift: int = 0) -> None:
        for i, n in enumerate(bits):
            self.add_bit(shift + i, n)

    def add_const(self, value: int) -> None:
        if value < 0:
            raise ValueError("constant must be non-negative")
        w = 0
        while value:
            if value & 1:
                self.add_bit(w, CONST1)
            value >>= 1
            w += 1

    @property
    def width(self) -> int:
        return len(self.columns)

    def heights(self) -> list[int]:
        return [len(c) for c in self.columns]

    @property
    def max_height(self) -> int:
        return max(self.heights(), default=0)

    def value(self, bit_of) -> int:
        """Arithmetic value given ``bit_of(net) -> 0/1``."""
        return sum(sum(bit_of(n) for n in col) << w for w, col in enumerate(self.columns))

    def normalized(self, width: int | None = None) -> "PPArray":
        """Drop CONST0 bits and merge CONST1 bits into a minimal binary constant.

        With ``width`` the array is taken modulo ``2**width``.
        """
        const = 0
        cols: list[list[int]] = []
        for w, col in enumerate(self.columns):
            if width is not None and w >= width:
                break
            keep = []
            for n in col:
                if n == CONST1:
                    const += 1 << w
                elif n != CONST0:
                    keep.append(n)
            cols.append(keep)
        if width is not None:
            const %= 1 << width
        out = PPArray(cols)
        out.add_const(const)
        while out.columns and not out.columns[-1]:
            out.columns.pop()
        return out

    def __repr__(self):
        return f"PPArray(heights={self.heights()})"


def build_pp_array(nl: Netlist, a_bits: Sequence[int], b_bits: Sequence[int]) -> PPArray:
    """AND-gate partial products: column ``w`` collects ``a_i & b_j`` with ``i + j == w``."""
    if not a_bits or not b_bits:
        raise EmptyOperand(f"operand widths {len(a_bits)}x{len(b_bits)}")
    arr = PPArray([[] for _ in range(len(a_bits) + len(b_bits) - 1)])
    for j, bj in enumerate(b_bits):
        for i, ai in enumerate(a_bits):
            arr.columns[i + j].append(nl.AND(ai, bj))
    return arr


@dataclass
class Reduction:
    sum_bits: list[int]
    carry_bits: list[int]
    zero_lsbs: int
    stages: int
    stage_heights: list[list[int]] = field(default_factory=list)
    fa: int = 0
    ha: int = 0
    kind: str = ""

    def __iter__(self):
        yield self.sum_bits
        yield self.carry_bits

    @property
    def width(self) -> int:
        return len(self.sum_bits)

    def dot_diagram(self) -> str:
        """Plain-text column heights per stage (MSB column first)."""
        lines = []
        for i, hs in enumerate(self.stage_heights):
            lines.append(f"stage {i}: " + " ".join(str(h) for h in reversed(hs)))
        return "\n".join(lines)


def dadda_targets(max_height: int) -> list[int]:
    """Dadda heights below ``max_height`` in descending order (ends at 2)."""
    seq = [2]
    while seq[-1] < max_height:
        seq.append(seq[-1] * 3 // 2)
    return [d for d in reversed(seq) if d < max_height]


def _next_target(h: int) -> int:
    return dadda_targets(h)[0]


class _Counter:
    def __init__(self):
        self.fa = 0
        self.ha = 0


def _fa(nl, ctr, x, y, z):
    before = len(nl.cells)
    s, c = nl.FA(x, y, z)
    _count(nl, before, ctr)
    return s, c


def _ha(nl, ctr, x, y):
    before = len(nl.cells)
    s, c = nl.HA(x, y)
    _count(nl, before, ctr)
    return s, c


def _count(nl, before, ctr):
    for cell in nl.cells[before:]:
        if cell.kind is Kind.FA:
            ctr.fa += 1
        elif cell.kind is Kind.HA:
            ctr.ha += 1


def _stage(nl, cols, d, strategy, width, ctr, closed):
    """One reduction stage toward height ``d``; returns the next columns."""
    nxt: list[list[int]] = [[] for _ in range(len(cols) + 1)]
    cin = 0
    retired = False
    for w, bits in enumerate(cols):
        pending = list(bits)
        h = len(pending)
        made = []
        carries = []
        if strategy == "rococo" and not retired and w == closed and cin == 0 and h >= 2:
            # retire this column completely (a short chain is fine here)
            while len(pending) > 1:
                if len(pending) >= 3:
                    s, c = _fa(nl, ctr, pending.pop(0), pending.pop(0), pending.pop(0))
                else:
                    s, c = _ha(nl, ctr, pending.pop(0), pending.pop(0))
                pending.append(s)
                carries.append(c)
            retired = True
        else:
            r = h + cin - d
            nfa, nha = (r // 2, r % 2) if r > 0 else (0, 0)
            if strategy == "fa_prefer" and nha and h >= 3 * (nfa + 1):
                nfa, nha = nfa + 1, 0
            nfa = min(nfa, h // 3)
            nha = 1 if r - 2 * nfa > 0 and h - 3 * nfa >= 2 else 0
            for _ in range(nfa):
                s, c = _fa(nl, ctr, pending.pop(0), pending.pop(0), pending.pop(0))
                made.append(s)
                carries.append(c)
            for _ in range(nha):
                s, c = _ha(nl, ctr, pending.pop(0), pending.pop(0))
                made.append(s)
                carries.append(c)
        nxt[w].extend(pending + made)
        if width is None or w + 1 < width:
            nxt[w + 1].extend(carries)
        cin = len(carries)
    while nxt and not nxt[-1]:
        nxt.pop()
    return nxt


def _closed_prefix(cols) -> int:
    k = 0
    while k < len(cols) and len(cols[k]) <= 1:
        k += 1
    return k


def _run(nl, cols, strategy, width, ctr):
    history = [[len(c) for c in cols]]
    stages = 0
    while cols and max(len(c) for c in cols) > 2:
        d = _next_target(max(len(c) for c in cols))
        cols = _stage(nl, cols, d, strategy, width, ctr, _closed_prefix(cols))
        history.append([len(c) for c in cols])
        stages += 1
        if stages > 200:  # pragma: no cover - defensive
            raise RuntimeError("compressor failed to converge")
    return cols, stages, history


def _fa_chain(nl, cols, width, ctr):
    if any(len(c) > 3 for c in cols):
        raise HeightExceedsKind(f"FullAdderChain needs column heights <= 3, got {max(len(c) for c in cols)}")
    nxt: list[list[int]] = [[] for _ in range(len(cols) + 1)]
    carry_in = False
    for w, bits in enumerate(cols):
        out = None
        if len(bits) == 3:
            s, c = _fa(nl, ctr, *bits)
            out = [s], c
        elif len(bits) == 2 and carry_in:
            s, c = _ha(nl, ctr, *bits)
            out = [s], c
        if out is None:
            nxt[w].extend(bits)
            carry_in = False
        else:
            nxt[w].extend(out[0])
            if width is None or w + 1 < width:
                nxt[w + 1].append(out[1])
            carry_in = True
    while nxt and not nxt[-1]:
        nxt.pop()
    history = [[len(c) for c in cols], [len(c) for c in nxt]]
    return nxt, 1, history


def _cost(ctr, cols) -> float:
    # tree cells plus a ripple adder over the two-bit region
    first = next((w for w, c in enumerate(cols) if len(c) == 2), len(cols))
    return 4.5 * ctr.fa + 2.5 * ctr.ha + 4.5 * max(0, len(cols) - first)


def _scratch(nl: Netlist) -> Netlist:
    s = Netlist("scratch", fold=nl.fold)
    s.n_nets = nl.n_nets
    return s


def reduce(nl: Netlist, arr: PPArray, kind=CompressorKind.DADDA, width: int | None = None) -> Reduction:
    """Compress ``arr`` to two rows whose sum equals its value (mod ``2**width`` if given)."""
    kind = parse_enum(CompressorKind, kind)
    arr = arr.normalized(width)
    cols = [list(c) for c in arr.columns]
    if kind is CompressorKind.FA_CHAIN:
        strategy = "chain"
    elif kind is CompressorKind.ROCOCO:
        strategy = "rococo"
    elif kind is CompressorKind.CUSTOM:
        strategy = _pick_custom(nl, cols, width)
    else:
        strategy = "dadda"
    ctr = _Counter()
    if strategy == "chain":
        cols, stages, history = _fa_chain(nl, cols, width, ctr)
    else:
        cols, stages, history = _run(nl, cols, strategy, width, ctr)
    sum_bits = [c[0] if len(c) > 0 else CONST0 for c in cols]
    carry_bits = [c[1] if len(c) > 1 else CONST0 for c in cols]
    k = 0
    while k < len(carry_bits) and carry_bits[k] == CONST0:
        k += 1
    return Reduction(sum_bits, carry_bits, k, stages, history, ctr.fa, ctr.ha, kind.value)


def _pick_custom(nl, cols, width) -> str:
    best = None
    limit = None
    for strategy in ("dadda", "fa_prefer"):
        ctr = _Counter()
        out, _, _ = _run(_scratch(nl), [list(c) for c in cols], strategy, width, ctr)
        if strategy == "dadda":
            limit = ctr.fa
        elif ctr.fa > limit:
            continue
        cost = _cost(ctr, out)
        if best is None or cost < best[0]:
            best = (cost, strategy)
    return best[1]


def stage_bound(max_height: int) -> int:
    """Upper bound on stages used by the staged schedules."""
    if max_height <= 2:
        return 0
    return math.ceil(math.log(max_height, 1.5)) + 2


# -- signed row stacking ---------------------------------------------------

@dataclass
class Row:
    """``(-1 if negative else 1) * value(bits) * 2**shift``."""

    bits: Sequence[int]
    shift: int = 0
    negative: bool = False


@dataclass
class RowsResult:
    sum_bits: list[int]
    carry_bits: list[int]
    offset: int
    reduction: Reduction

    def __iter__(self):
        yield self.sum_bits
        yield self.carry_bits


def stack_rows(nl: Netlist, rows: Sequence[Row], const: int = 0, width: int | None = None,
               value_bits: int | None = None) -> tuple[PPArray, int]:
    """Dot diagram for a signed row combination plus ``const``.

    Negative rows are complemented over their own width; the missing
    ``2**shift - 2**(n+shift)`` terms are folded into one constant.  With
    ``width`` the constant is reduced mod ``2**width`` and the offset is 0.
    Otherwise ``value_bits`` must bound the (non-negative) true total, and the
    returned offset ``j * 2**value_bits`` satisfies
    ``array value == total + offset``.
    """
    arr = PPArray()
    delta = const
    for r in rows:
        n = len(r.bits)
        if n == 0:
            continue
        if r.negative:
            arr.add_row([nl.NOT(b) for b in r.bits], r.shift)
            delta += (1 << r.shift) - (1 << (n + r.shift))
        else:
            arr.add_row(r.bits, r.shift)
    if width is not None:
        arr.add_const(delta % (1 << width))
        return arr, 0
    if value_bits is None:
        raise ValueError("exact stacking needs value_bits")
    k = delta % (1 << value_bits)
    arr.add_const(k)
    return arr, k - delta


def n_to_2(nl: Netlist, rows: Sequence[Row], kind=CompressorKind.DADDA, width: int | None = None,
           const: int = 0, value_bits: int | None = None) -> RowsResult:
    """Reduce up to ten signed, shifted rows (plus a constant) to a sum/carry pair.

    Modular when ``width`` is given; otherwise exact up to the reported offset.
    """
    live = [r for r in rows if len(r.bits)]
    if len(live) > MAX_ROWS:
        raise TooManyRows(f"{len(live)} rows exceed the {MAX_ROWS}:2 limit")
    arr, offset = stack_rows(nl, live, const, width, value_bits)
    red = reduce(nl, arr, kind, width)
    s, c = red.sum_bits, red.carry_bits
    if width is not None:
        s = (s + [CONST0] * width)[:width]
        c = (c + [CONST0] * width)[:width]
    return RowsResult(s, c, offset, red)


def ripple_add(nl: Netlist, x: Sequence[int], y: Sequence[int], cin: int = CONST0,
               width: int | None = None, label: str | None = None) -> list[int]:
    """Carry-propagate ``x + y + cin`` from HA/FA cells.

    The result has ``max(len(x), len(y)) + 1`` bits unless ``width`` truncates it.
    With ``label`` the cells are recorded as one adder group (emitted as '+').
    """
    n = max(len(x), len(y))
    width = n + 1 if width is None else width
    xs = list(x[:width]) + [CONST0] * (width - len(x[:width]))
    ys = list(y[:width]) + [CONST0] * (width - len(y[:width]))

    def build():
        out, c = [], cin
        for i in range(width):
            if i == width - 1:
                out.append(nl.XOR(nl.XOR(xs[i], ys[i]), c))
            else:
                s, c = nl.FA(xs[i], ys[i], c)
                out.append(s)
        return out

    if label is None or cin != CONST0:
        return build()
    with nl.group(xs, ys, label) as g:
        g["out"] = build()
    return g["out"]
