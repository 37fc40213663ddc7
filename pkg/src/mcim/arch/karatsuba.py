"""Three-cycle Karatsuba multiplier.

A single (s+1)-square PPM computes T0 = A0*B0, T1 = A1*B1 and
T2 = (A0+A1)*(B0+B1) in phases 0, 1, 2.  Each term is folded into a
carry-save accumulator as it arrives:

    phase 0:  +T0        - T0*2^s
    phase 1:  +T1*2^2s   - T1*2^s
    phase 2:  +T2*2^s

so after phase 2 the accumulator pair sums to A*B (mod 2^(M+N)).  The
negative rows are complemented PPM rows gated to zero in phase 2; their
complement constants cancel exactly in that phase, so one static constant
covers them.
"""
from __future__ import annotations

from math import ceil

from ..compress import Row, n_to_2, ripple_add
from ..config import Arch, FinalAdderKind, MultiplierConfig, validate
from ..netlist.core import CONST0, CONST1
from ..ppm import build_ppm
from .adders import final_adder_1ca, final_adder_3ca
from .common import design, finish, phase_ring, shell


def _pad(bits, width):
    bits = list(bits[:width])
    return bits + [CONST0] * (width - len(bits))


def _shift_mux(nl, ph, bits, shifts, width):
    """Row whose bits are ``bits << shifts[p]`` during phase ``p``."""
    def src(p, j):
        k = j - shifts[p]
        return bits[k] if 0 <= k < len(bits) else CONST0

    return [nl.MUX(ph[0], nl.MUX(ph[1], src(2, j), src(1, j)), src(0, j)) for j in range(width)]


def _phase_const(nl, ph, consts, width):
    out = []
    for j in range(width):
        on = [p for p in range(3) if (consts[p] >> j) & 1]
        if len(on) == 3:
            out.append(CONST1)
            continue
        net = CONST0
        for p in on:
            net = nl.OR(net, ph[p])
        out.append(net)
    return out


def build_karatsuba(cfg: MultiplierConfig):
    validate(cfg)
    if cfg.arch is not Arch.KARATSUBA:
        raise ValueError(f"expected a Karatsuba config, got {cfg.arch.value}")
    M, N = cfg.width_a, cfg.width_b
    W = M + N
    s = ceil(max(M, N) / 2)
    w = s + 1
    nl, a, b = shell(cfg)
    ph = phase_ring(nl, 3)
    ph0, ph1, ph2 = ph

    def operand(port):
        reg = nl.reg(len(port))
        held = nl.MUXV(ph0, reg, port)
        nl.drive(reg, held)
        lo, hi = reg[:s], reg[s:]
        pre = ripple_add(nl, lo, hi) if hi else lo
        return nl.MUXV(ph0, nl.MUXV(ph1, _pad(pre, w), _pad(hi, w)), _pad(port[:s], w))

    x, y = operand(a), operand(b)
    ppm = build_ppm(nl, x, y, cfg.ppm_kind, levels=cfg.karatsuba_levels - 1)

    acc_s, acc_c = nl.reg(W), nl.reg(W)
    live = nl.NOT(ph0)
    shifts = (0, 2 * s, s)
    rows = [Row(nl.ANDV(live, acc_s)), Row(nl.ANDV(live, acc_c))]
    keep = nl.NOT(ph2)
    for bits in (ppm.exact_sum, ppm.exact_carry):
        rows.append(Row(_shift_mux(nl, ph, bits, shifts, W)))
        rows.append(Row(nl.ANDV(keep, bits), s, negative=True))
    if ppm.offset:
        off = ppm.offset
        consts = [(-(off << shifts[p]) + (off << s if p < 2 else 0)) % (1 << W) for p in range(3)]
        rows.append(Row(_phase_const(nl, ph, consts, W)))
    red = n_to_2(nl, rows, cfg.comp_kind, width=W)
    nl.drive(acc_s, red.sum_bits)
    nl.drive(acc_c, red.carry_bits)

    if cfg.fa_kind is FinalAdderKind.THREE_CYCLE:
        p = final_adder_3ca(nl, red.sum_bits, red.carry_bits, (ph2, ph0, ph1), stash=(acc_s, acc_c))
        primed = nl.reg(1)
        nl.drive(primed, [nl.OR(primed[0], ph2)])
        valid = nl.AND(ph1, primed[0])
        adder_width = ceil(W / 3)
    else:
        p = final_adder_1ca(nl, red.sum_bits, red.carry_bits)
        valid = ph2
        adder_width = W
    finish(nl, p, valid, W)
    nl.probe("acc_sum", acc_s)
    nl.probe("acc_carry", acc_c)
    nl.probe("ppm_sum", ppm.sum_bits)
    nl.probe("ppm_carry", ppm.carry_bits)
    nl.probe("ppm_x", x)
    nl.probe("ppm_y", y)
    return design(nl, cfg, ppm_dims=(w, w), compressor_width=W, adder_width=adder_width,
                  compressor_rows=len(rows), ppm_offset=ppm.offset,
                  sub_ppms=3 * ppm.leaf_count, ppm_instances=ppm.leaf_count, ppm_and=ppm.cell_census.get("AND2", 0),
                  compressor_fa=red.reduction.fa, compressor_ha=red.reduction.ha)
