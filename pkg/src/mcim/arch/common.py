"""Pieces shared by every architecture: the design record, port shell and phase counter."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

from ..config import MultiplierConfig, derived_metrics
from ..netlist.core import CONST0, Netlist


@dataclass
class GeneratedDesign:
    netlist: Netlist
    config: MultiplierConfig
    latency: int
    accepted_phase: int = 0
    info: dict = field(default_factory=dict)

    @property
    def ct(self) -> int:
        return self.config.ct

    @property
    def name(self) -> str:
        return self.netlist.name

    @property
    def product_width(self) -> int:
        return self.config.width_a + self.config.width_b


def shell(cfg: MultiplierConfig, name: str | None = None):
    """Netlist with the clk/rst/a/b inputs declared."""
    nl = Netlist(name or cfg.short_name)
    nl.add_input("clk", 1)
    nl.add_input("rst", 1)
    a = nl.add_input("a", cfg.width_a)
    b = nl.add_input("b", cfg.width_b)
    return nl, a, b


def phase_ring(nl: Netlist, ct: int) -> list[int]:
    """One-hot phase nets ``ph[0..ct-1]``; reset lands on phase 0.

    The phase-0 flop is stored inverted so that the all-zero reset state
    decodes as phase 0.
    """
    regs = nl.reg(ct)
    ph = [nl.NOT(regs[0])] + regs[1:]
    nl.drive(regs, [nl.NOT(ph[-1])] + ph[:-1])
    nl.probe("phase", ph)
    return ph


def finish(nl: Netlist, p, p_valid: int, width: int) -> None:
    bits = list(p[:width]) + [CONST0] * (width - len(p[:width]))
    nl.add_output("p", bits)
    nl.add_output("p_valid", [p_valid])


def chunk_width(n: int, ct: int) -> int:
    return ceil(n / ct)


def design(nl, cfg, **info) -> GeneratedDesign:
    return GeneratedDesign(nl, cfg, derived_metrics(cfg).min_latency, 0, info)
