"""Feedback multiplier: one M x ceil(N/CT) PPM reused for CT chunks of B.

Each cycle the PPM pair and the previous (right-shifted) adder result pass
through a 3:2 compressor and the final adder.  The low chunk of every result is
peeled off into a shift chain; the last cycle's adder output supplies the top
bits of the product.
"""
from __future__ import annotations

from ..compress import Row, n_to_2
from ..config import Arch, MultiplierConfig, validate
from ..netlist.core import CONST0
from ..ppm import build_simple
from .adders import final_adder_1ca
from .common import chunk_width, design, finish, phase_ring, shell


def build_feedback(cfg: MultiplierConfig):
    validate(cfg)
    if cfg.arch is not Arch.FEEDBACK:
        raise ValueError(f"expected a Feedback config, got {cfg.arch.value}")
    M, N, ct = cfg.width_a, cfg.width_b, cfg.ct
    c = chunk_width(N, ct)
    nl, a, b = shell(cfg)
    ph = phase_ring(nl, ct)
    ph0 = ph[0]

    # operand A is taken from the port at phase 0 and held afterwards
    a_reg = nl.reg(M)
    a_eff = nl.MUXV(ph0, a_reg, a)
    nl.drive(a_reg, a_eff)

    # upper chunks of B wait in a shift register, LSB chunk first
    b_ext = list(b) + [CONST0] * (ct * c - N)
    hi = b_ext[c:]
    b_reg = nl.reg(len(hi))
    shifted = b_reg[c:] + [CONST0] * c
    nl.drive(b_reg, nl.MUXV(ph0, shifted, hi))
    chunk = nl.MUXV(ph0, b_reg[:c], b_ext[:c])

    ppm = build_simple(nl, a_eff, chunk, cfg.ppm_kind)
    width = M + c
    acc = nl.reg(M)
    acc_in = nl.ANDV(nl.NOT(ph0), acc)
    red = n_to_2(nl, [Row(ppm.sum_bits), Row(ppm.carry_bits), Row(acc_in)], cfg.comp_kind, width=width)
    total = final_adder_1ca(nl, red.sum_bits, red.carry_bits)
    nl.drive(acc, total[c:])

    # low chunks of earlier cycles; chain[0] is the oldest
    chain = [nl.dffv(total[:c])]
    for _ in range(ct - 2):
        chain.insert(0, nl.dffv(chain[0]))
    p = [bit for blk in chain for bit in blk] + total
    finish(nl, p, ph[-1], M + N)
    nl.probe("acc", acc)
    nl.probe("ppm_sum", ppm.sum_bits)
    nl.probe("ppm_carry", ppm.carry_bits)
    return design(nl, cfg, ppm_dims=(M, c), compressor_width=width, adder_width=width,
                  compressor_fa=red.reduction.fa, compressor_ha=red.reduction.ha)
