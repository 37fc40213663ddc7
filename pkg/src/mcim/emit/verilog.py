"""Netlist -> Verilog-2001 text.

Every cell becomes a continuous assignment (HA/FA as a sum/carry pair), all
registers go into clocked always blocks with synchronous reset, and each
carry-propagate adder group is written as a single ``+``.  Net ``k`` is named
``n<k>``, so output is a pure function of the netlist.
"""
from __future__ import annotations

import json

from ..netlist.analysis import require_checked
from ..netlist.core import CONST0, CONST1, Kind, Netlist


class Namer:
    def __init__(self, nl: Netlist):
        self.names: dict[int, str] = {CONST0: "1'b0", CONST1: "1'b1"}
        for p in nl.inputs:
            for i, n in enumerate(p.nets):
                self.names[n] = p.name if p.width == 1 else f"{p.name}[{i}]"

    def __call__(self, net: int) -> str:
        return self.names.get(net) or f"n{net}"


def foldable_groups(nl: Netlist) -> list[int]:
    """Indices of adder groups whose internals are private (safe to emit as '+')."""
    readers: dict[int, set[int]] = {}
    for i, c in enumerate(nl.cells):
        for n in c.ins:
            readers.setdefault(n, set()).add(i)
    port_nets = {n for p in nl.outputs for n in p.nets}
    ok = []
    claimed: set[int] = set()
    for gi, g in enumerate(nl.groups):
        cells = set(g.cells)
        if cells & claimed or not cells:
            continue
        if any(nl.cells[i].kind not in (Kind.NOT, Kind.AND2, Kind.OR2, Kind.XOR2, Kind.HA, Kind.FA) for i in cells):
            continue
        out = set(g.out)
        inner = {n for i in cells for n in nl.cells[i].outs} - out
        if any((readers.get(n, set()) - cells) or n in port_nets for n in inner):
            continue
        ok.append(gi)
        claimed |= cells
    return ok


def _port_decl(direction, p, reg=False):
    kind = f"{direction} reg" if reg else direction
    return f"    {kind} [{p.width - 1}:0] {p.name}" if p.width > 1 else f"    {kind} {p.name}"


def emit_verilog(design, header: str | None = None) -> str:
    nl: Netlist = design.netlist if hasattr(design, "netlist") else design
    require_checked(nl)
    name = Namer(nl)
    lines = []
    if header is None and hasattr(design, "config"):
        header = "config " + json.dumps(design.config.to_dict(), sort_keys=True)
    lines.append(f"// {nl.name}: generated by mcim")
    if header:
        lines.append(f"// {header}")
    ports = [_port_decl("input", p) for p in nl.inputs] + [_port_decl("output", p) for p in nl.outputs]
    lines.append(f"module {nl.name} (")
    lines.append(",\n".join(ports))
    lines.append(");")

    groups = foldable_groups(nl)
    in_group = {i for gi in groups for i in nl.groups[gi].cells}

    wires, regs = [], []
    for i, c in enumerate(nl.cells):
        if c.kind in (Kind.CONST0, Kind.CONST1) or i in in_group:
            continue
        (regs if c.kind is Kind.DFF else wires).extend(c.outs)
    for gi in groups:
        g = nl.groups[gi]
        driven = {n for i in g.cells for n in nl.cells[i].outs}
        wires.extend(n for n in g.out if n in driven)
    for n in sorted(set(wires)):
        lines.append(f"  wire {name(n)};")
    for n in sorted(set(regs)):
        lines.append(f"  reg {name(n)};")
    for gi in groups:
        lines.append(f"  wire [{len(nl.groups[gi].out) - 1}:0] add{gi};")

    lines.append("")
    group_at = {min(nl.groups[gi].cells): gi for gi in groups}
    dffs = []
    for i, c in enumerate(nl.cells):
        if i in group_at:
            lines.extend(_emit_group(nl, group_at[i], name))
        if i in in_group or c.kind in (Kind.CONST0, Kind.CONST1):
            continue
        k = c.kind
        x = [name(n) for n in c.ins]
        o = [name(n) for n in c.outs]
        if k is Kind.NOT:
            lines.append(f"  assign {o[0]} = ~{x[0]};")
        elif k is Kind.AND2:
            lines.append(f"  assign {o[0]} = {x[0]} & {x[1]};")
        elif k is Kind.OR2:
            lines.append(f"  assign {o[0]} = {x[0]} | {x[1]};")
        elif k is Kind.XOR2:
            lines.append(f"  assign {o[0]} = {x[0]} ^ {x[1]};")
        elif k is Kind.MUX2:
            lines.append(f"  assign {o[0]} = {x[0]} ? {x[2]} : {x[1]};")
        elif k is Kind.HA:
            lines.append(f"  assign {o[0]} = {x[0]} ^ {x[1]};")
            lines.append(f"  assign {o[1]} = {x[0]} & {x[1]};")
        elif k is Kind.FA:
            lines.append(f"  assign {o[0]} = {x[0]} ^ {x[1]} ^ {x[2]};")
            lines.append(f"  assign {o[1]} = ({x[0]} & {x[1]}) | ({x[0]} & {x[2]}) | ({x[1]} & {x[2]});")
        elif k is Kind.DFF:
            dffs.append(c)

    lines.append("")
    for p in nl.outputs:
        for i, n in enumerate(p.nets):
            tgt = p.name if p.width == 1 else f"{p.name}[{i}]"
            lines.append(f"  assign {tgt} = {name(n)};")

    by_rst: dict[int, list] = {}
    for c in dffs:
        by_rst.setdefault(c.ins[1], []).append(c)
    for rst in sorted(by_rst):
        cells = by_rst[rst]
        lines.append("")
        lines.append("  always @(posedge clk) begin")
        if rst == CONST0:
            for c in cells:
                lines.append(f"    {name(c.outs[0])} <= {name(c.ins[0])};")
        else:
            lines.append(f"    if ({name(rst)}) begin")
            for c in cells:
                lines.append(f"      {name(c.outs[0])} <= 1'b0;")
            lines.append("    end else begin")
            for c in cells:
                lines.append(f"      {name(c.outs[0])} <= {name(c.ins[0])};")
            lines.append("    end")
        lines.append("  end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _concat(nets, name) -> str:
    return "{" + ", ".join(name(n) for n in reversed(nets)) + "}"


def _emit_group(nl, gi, name):
    g = nl.groups[gi]
    w = len(g.out)
    driven = {n for i in g.cells for n in nl.cells[i].outs}
    out = [f"  assign add{gi} = {_concat(g.a[:w], name)} + {_concat(g.b[:w], name)};"]
    for i, n in enumerate(g.out):
        if n in driven:
            out.append(f"  assign {name(n)} = add{gi}[{i}];")
    return out
