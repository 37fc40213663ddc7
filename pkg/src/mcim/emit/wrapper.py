"""I/O-registered wrapper around a generated multiplier.

The wrapper registers ``rst``, ``a`` and ``b`` on the way in and ``p`` and
``p_valid`` on the way out, so the end-to-end latency is the core latency plus
two.  ``p_valid``'s output register is cleared while either the raw or the
registered reset is high, so no stale valid escapes while the core is coming
out of reset.
"""
from __future__ import annotations

import dataclasses

from ..arch.common import GeneratedDesign
from ..netlist.core import CONST0, Netlist, instantiate

EXTRA_LATENCY = 2


def wrapper_name(design: GeneratedDesign) -> str:
    return f"{design.name}_wrapper"


def wrap(design: GeneratedDesign) -> GeneratedDesign:
    """In-memory equivalent of :func:`emit_wrapper` (core flattened in)."""
    cfg = design.config
    nl = Netlist(wrapper_name(design))
    nl.add_input("clk", 1)
    rst = nl.add_input("rst", 1)[0]
    a = nl.add_input("a", cfg.width_a)
    b = nl.add_input("b", cfg.width_b)
    rst_q = _plain(nl, [rst])[0]
    outs = instantiate(nl, design.netlist, {
        "clk": [CONST0], "rst": [rst_q], "a": _plain(nl, a), "b": _plain(nl, b),
    })
    nl.add_output("p", _plain(nl, outs["p"]))
    nl.add_output("p_valid", _reset(nl, outs["p_valid"], nl.OR(rst, rst_q)))
    return dataclasses.replace(design, netlist=nl, latency=design.latency + EXTRA_LATENCY,
                               info=dict(design.info, wrapped=design.name))


def _plain(nl, nets):
    return [nl.dff(n, CONST0) for n in nets]


def _reset(nl, nets, rst):
    return [nl.dff(n, rst) for n in nets]


def _decl(direction, name, width):
    return f"    {direction} [{width - 1}:0] {name}" if width > 1 else f"    {direction} {name}"


def emit_wrapper(design: GeneratedDesign) -> str:
    cfg = design.config
    m, n, w = cfg.width_a, cfg.width_b, design.product_width
    core = design.name
    lines = [
        f"// {wrapper_name(design)}: registered I/O around {core} (latency {design.latency} + {EXTRA_LATENCY})",
        f"module {wrapper_name(design)} (",
        ",\n".join([
            _decl("input", "clk", 1), _decl("input", "rst", 1), _decl("input", "a", m), _decl("input", "b", n),
            _decl("output reg", "p", w), _decl("output reg", "p_valid", 1),
        ]),
        ");",
        "  reg rst_q;",
        f"  reg [{m - 1}:0] a_q;" if m > 1 else "  reg a_q;",
        f"  reg [{n - 1}:0] b_q;" if n > 1 else "  reg b_q;",
        f"  wire [{w - 1}:0] p_d;",
        "  wire p_valid_d;",
        "",
        f"  {core} u_dut (",
        "    .clk(clk),",
        "    .rst(rst_q),",
        "    .a(a_q),",
        "    .b(b_q),",
        "    .p(p_d),",
        "    .p_valid(p_valid_d)",
        "  );",
        "",
        "  always @(posedge clk) begin",
        "    rst_q <= rst;",
        "    a_q <= a;",
        "    b_q <= b;",
        "    p <= p_d;",
        "  end",
        "",
        "  always @(posedge clk) begin",
        "    if (rst | rst_q) begin",
        "      p_valid <= 1'b0;",
        "    end else begin",
        "      p_valid <= p_valid_d;",
        "    end",
        "  end",
        "endmodule",
    ]
    return "\n".join(lines) + "\n"
