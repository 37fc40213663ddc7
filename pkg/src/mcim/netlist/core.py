"""Cell-level synchronous netlist.

Nets are plain integers.  Net 0 and net 1 are driven by the CONST0/CONST1 cells
that every netlist starts with.  The builder methods (``AND``, ``FA``, ...) fold
constant operands away, so generators can feed zero-extension bits straight
into arithmetic without paying for dead cells.
"""
from __future__ import annotations

import enum
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class Kind(enum.IntEnum):
    CONST0 = 0
    CONST1 = 1
    NOT = 2
    AND2 = 3
    OR2 = 4
    XOR2 = 5
    HA = 6
    FA = 7
    MUX2 = 8
    DFF = 9


# (inputs, outputs).  MUX2 ins are (sel, d0, d1); DFF ins are (d, rst).
PIN_COUNTS = {
    Kind.CONST0: (0, 1),
    Kind.CONST1: (0, 1),
    Kind.NOT: (1, 1),
    Kind.AND2: (2, 1),
    Kind.OR2: (2, 1),
    Kind.XOR2: (2, 1),
    Kind.HA: (2, 2),
    Kind.FA: (3, 2),
    Kind.MUX2: (3, 1),
    Kind.DFF: (2, 1),
}

COMBINATIONAL = frozenset(k for k in Kind if k not in (Kind.DFF, Kind.CONST0, Kind.CONST1))

CONST0 = 0
CONST1 = 1
UNDRIVEN = -1


@dataclass(slots=True)
class Cell:
    kind: Kind
    ins: tuple
    outs: tuple


@dataclass(frozen=True)
class Port:
    name: str
    nets: tuple

    @property
    def width(self) -> int:
        return len(self.nets)


@dataclass
class AdderGroup:
    """Cells forming one carry-propagate ``a + b`` so emission can fold them into '+'."""

    a: tuple
    b: tuple
    out: tuple
    cells: range
    label: str = "add"


class Netlist:
    def __init__(self, name: str = "top", fold: bool = True):
        self.name = name
        self.fold = fold
        self.inputs: list[Port] = []
        self.outputs: list[Port] = []
        self.cells: list[Cell] = [Cell(Kind.CONST0, (), (CONST0,)), Cell(Kind.CONST1, (), (CONST1,))]
        self.n_nets = 2
        self.groups: list[AdderGroup] = []
        self.probes: dict[str, tuple] = {}
        self.rst: int | None = None
        self._not_cache: dict[int, int] = {}

    # -- structure -------------------------------------------------------
    def new_net(self) -> int:
        n = self.n_nets
        self.n_nets += 1
        return n

    def add_cell(self, kind: Kind, ins: Sequence[int], n_out: int | None = None) -> tuple:
        n_out = PIN_COUNTS[kind][1] if n_out is None else n_out
        outs = tuple(self.new_net() for _ in range(n_out))
        self.cells.append(Cell(kind, tuple(ins), outs))
        return outs

    def add_input(self, name: str, width: int) -> list[int]:
        nets = [self.new_net() for _ in range(width)]
        self.inputs.append(Port(name, tuple(nets)))
        if name == "rst" and width == 1:
            self.rst = nets[0]
        return nets

    def add_output(self, name: str, nets: Iterable[int]) -> None:
        self.outputs.append(Port(name, tuple(nets)))

    def port(self, name: str) -> Port:
        for p in self.inputs + self.outputs:
            if p.name == name:
                return p
        raise KeyError(name)

    def probe(self, name: str, nets: Iterable[int]) -> None:
        self.probes[name] = tuple(nets)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def census(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.cells:
            if c.kind in (Kind.CONST0, Kind.CONST1):
                continue
            counts[c.kind.name] = counts.get(c.kind.name, 0) + 1
        return counts

    @contextmanager
    def group(self, a, b, label="add"):
        """Record the cells built inside the block as one ``a + b`` adder."""
        start = len(self.cells)
        holder: dict = {}
        yield holder
        self.groups.append(AdderGroup(tuple(a), tuple(b), tuple(holder["out"]), range(start, len(self.cells)), label))

    # -- gates with constant folding -------------------------------------
    def NOT(self, x: int) -> int:
        if self.fold:
            if x == CONST0:
                return CONST1
            if x == CONST1:
                return CONST0
            hit = self._not_cache.get(x)
            if hit is not None:
                return hit
        (y,) = self.add_cell(Kind.NOT, (x,))
        self._not_cache[x] = y
        self._not_cache.setdefault(y, x)
        return y

    def AND(self, x: int, y: int) -> int:
        if self.fold:
            if x == CONST0 or y == CONST0:
                return CONST0
            if x == CONST1:
                return y
            if y == CONST1 or x == y:
                return x
        return self.add_cell(Kind.AND2, (x, y))[0]

    def OR(self, x: int, y: int) -> int:
        if self.fold:
            if x == CONST1 or y == CONST1:
                return CONST1
            if x == CONST0:
                return y
            if y == CONST0 or x == y:
                return x
        return self.add_cell(Kind.OR2, (x, y))[0]

    def XOR(self, x: int, y: int) -> int:
        if self.fold:
            if x == y:
                return CONST0
            if x == CONST0:
                return y
            if y == CONST0:
                return x
            if x == CONST1:
                return self.NOT(y)
            if y == CONST1:
                return self.NOT(x)
        return self.add_cell(Kind.XOR2, (x, y))[0]

    def MUX(self, sel: int, d0: int, d1: int) -> int:
        """``sel ? d1 : d0``."""
        if self.fold:
            if sel == CONST0 or d0 == d1:
                return d0
            if sel == CONST1:
                return d1
            if d0 == CONST0 and d1 == CONST1:
                return sel
            if d0 == CONST1 and d1 == CONST0:
                return self.NOT(sel)
            if d0 == CONST0:
                return self.AND(sel, d1)
            if d1 == CONST1:
                return self.OR(sel, d0)
        return self.add_cell(Kind.MUX2, (sel, d0, d1))[0]

    def HA(self, x: int, y: int) -> tuple[int, int]:
        if self.fold:
            if x == CONST0:
                return y, CONST0
            if y == CONST0:
                return x, CONST0
            if x == CONST1 and y == CONST1:
                return CONST0, CONST1
            if x == CONST1:
                return self.NOT(y), y
            if y == CONST1:
                return self.NOT(x), x
        s, c = self.add_cell(Kind.HA, (x, y))
        return s, c

    def FA(self, x: int, y: int, z: int) -> tuple[int, int]:
        if self.fold:
            ops = [x, y, z]
            if CONST0 in ops:
                ops.remove(CONST0)
                return self.HA(*ops)
            if CONST1 in ops:
                ops.remove(CONST1)
                u, v = ops
                return self.NOT(self.XOR(u, v)), self.OR(u, v)
        s, c = self.add_cell(Kind.FA, (x, y, z))
        return s, c

    def MUXV(self, sel: int, d0: Sequence[int], d1: Sequence[int]) -> list[int]:
        return [self.MUX(sel, p, q) for p, q in zip(d0, d1)]

    def ANDV(self, en: int, xs: Sequence[int]) -> list[int]:
        return [self.AND(en, x) for x in xs]

    # -- registers -------------------------------------------------------
    def _rst_net(self, rst):
        if rst is None:
            if self.rst is None:
                raise ValueError("netlist has no rst port; pass rst=CONST0 for a plain register")
            return self.rst
        return rst

    def dff(self, d: int, rst: int | None = None) -> int:
        rst = self._rst_net(rst)
        if self.fold and d == CONST0:
            return CONST0
        return self.add_cell(Kind.DFF, (d, rst))[0]

    def dffv(self, ds: Sequence[int], rst: int | None = None) -> list[int]:
        return [self.dff(d, rst) for d in ds]

    def reg(self, width: int, rst: int | None = None) -> list[int]:
        """Registers whose D input is connected later with :meth:`drive` (feedback paths)."""
        rst = self._rst_net(rst)
        return [self.add_cell(Kind.DFF, (UNDRIVEN, rst))[0] for _ in range(width)]

    def drive(self, qs: Sequence[int], ds: Sequence[int]) -> None:
        if len(qs) != len(ds):
            raise ValueError(f"register width {len(qs)} != data width {len(ds)}")
        index = {c.outs[0]: i for i, c in enumerate(self.cells) if c.kind is Kind.DFF and c.ins[0] == UNDRIVEN}
        for q, d in zip(qs, ds):
            i = index[q]
            cell = self.cells[i]
            self.cells[i] = Cell(Kind.DFF, (d, cell.ins[1]), cell.outs)


def const_bits(value: int, width: int) -> list[int]:
    return [CONST1 if (value >> i) & 1 else CONST0 for i in range(width)]


def drivers(nl: Netlist) -> dict[int, list]:
    """net -> list of drivers; a driver is ('cell', index) or ('port', name)."""
    out: dict[int, list] = {}
    for p in nl.inputs:
        for n in p.nets:
            out.setdefault(n, []).append(("port", p.name))
    for i, c in enumerate(nl.cells):
        for n in c.outs:
            out.setdefault(n, []).append(("cell", i))
    return out


def instantiate(parent: Netlist, child: Netlist, connect: dict[str, Sequence[int]]) -> dict[str, list[int]]:
    """Copy ``child`` into ``parent``; ``connect`` maps each child input port to parent nets.

    Returns the parent nets carrying each child output port.  Unconnected child
    inputs (typically ``clk``) read constant 0.
    """
    remap = {CONST0: CONST0, CONST1: CONST1}
    for p in child.inputs:
        nets = list(connect.get(p.name, [CONST0] * p.width))
        if len(nets) != p.width:
            raise ValueError(f"port {p.name} expects {p.width} bits, got {len(nets)}")
        remap.update(zip(p.nets, nets))

    def m(n):
        if n not in remap:
            remap[n] = parent.new_net()
        return remap[n]

    base = len(parent.cells)
    for c in child.cells:
        if c.kind in (Kind.CONST0, Kind.CONST1):
            continue
        parent.cells.append(Cell(c.kind, tuple(m(n) for n in c.ins), tuple(m(n) for n in c.outs)))
    offset = {i: base + k for k, i in enumerate(i for i, c in enumerate(child.cells) if c.kind not in (Kind.CONST0, Kind.CONST1))}
    for g in child.groups:
        idx = [offset[i] for i in g.cells]
        if idx:
            parent.groups.append(AdderGroup(tuple(m(n) for n in g.a), tuple(m(n) for n in g.b),
                                            tuple(m(n) for n in g.out), range(idx[0], idx[-1] + 1), g.label))
    return {p.name: [m(n) for n in p.nets] for p in child.outputs}
