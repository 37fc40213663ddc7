"""Feed-forward multiplier (CT=2): A*B0 is latched, A*B1 arrives one cycle
later, and a 4:2 compressor plus full-width adder combine them with no loop."""
from __future__ import annotations

from ..compress import Row, n_to_2
from ..config import Arch, MultiplierConfig, validate
from ..netlist.core import CONST0
from ..ppm import build_simple
from .adders import final_adder_1ca
from .common import chunk_width, design, finish, phase_ring, shell


def build_feedforward(cfg: MultiplierConfig):
    validate(cfg)
    if cfg.arch is not Arch.FEEDFORWARD:
        raise ValueError(f"expected a FeedForward config, got {cfg.arch.value}")
    M, N = cfg.width_a, cfg.width_b
    c = chunk_width(N, 2)
    nl, a, b = shell(cfg)
    ph0, ph1 = phase_ring(nl, 2)

    b_ext = list(b) + [CONST0] * (2 * c - N)
    a_reg = nl.dffv(a)
    b_hi = nl.dffv(b_ext[c:])
    x = nl.MUXV(ph0, a_reg, a)
    y = nl.MUXV(ph0, b_hi, b_ext[:c])
    ppm = build_simple(nl, x, y, cfg.ppm_kind)
    s_l = nl.dffv(ppm.sum_bits)
    c_l = nl.dffv(ppm.carry_bits)

    width = M + N
    rows = [Row(s_l), Row(c_l), Row(ppm.sum_bits, c), Row(ppm.carry_bits, c)]
    red = n_to_2(nl, rows, cfg.comp_kind, width=width)
    total = final_adder_1ca(nl, red.sum_bits, red.carry_bits)
    finish(nl, total, ph1, width)
    nl.probe("ppm_sum", ppm.sum_bits)
    nl.probe("ppm_carry", ppm.carry_bits)
    return design(nl, cfg, ppm_dims=(M, c), compressor_width=width, adder_width=width,
                  compressor_fa=red.reduction.fa, compressor_ha=red.reduction.ha)
