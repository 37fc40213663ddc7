"""Streaming verification of generated multipliers against integer multiplication.

Operands are presented every ``gap * CT`` cycles after a one-cycle reset, many
independent streams side by side (one per simulation lane).  Off-schedule
cycles carry random garbage on ``a``/``b`` so a design that samples at the wrong
time is caught.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arch.common import GeneratedDesign
from .netlist.sim import pack, run_lanes, unpack, words_for

MAX_LANES = 4096


def random_operands(width_a: int, width_b: int, count: int, seed: int = 0) -> tuple[list[int], list[int]]:
    rng = random.Random(seed)
    a = [rng.getrandbits(width_a) for _ in range(count)]
    b = [rng.getrandbits(width_b) for _ in range(count)]
    return a, b


def exhaustive_operands(width_a: int, width_b: int) -> tuple[list[int], list[int]]:
    a = [x for x in range(1 << width_a) for _ in range(1 << width_b)]
    b = [y for _ in range(1 << width_a) for y in range(1 << width_b)]
    return a, b


@dataclass
class Failure:
    index: int
    cycle: int
    a: int
    b: int
    got: int
    expected: int

    def __str__(self):
        return f"vector {self.index} (cycle {self.cycle}): {self.a} * {self.b} gave {self.got}, expected {self.expected}"


@dataclass
class StreamReport:
    vectors: int
    mismatches: int
    first_failure: Failure | None
    first_valid: int | None
    valid_period: int | None
    valid_ok: bool
    latency: int
    ct: int
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.mismatches == 0 and self.valid_ok


class StreamRun:
    """One bit-parallel run; ``value(name, offset)`` reads a net vector per operand pair.

    ``tail`` extends the run past the last product so later probe offsets can be read.
    """

    def __init__(self, design: GeneratedDesign, a_vals: Sequence[int], b_vals: Sequence[int],
                 gap: int = 1, seed: int = 0, record: Sequence[str] = (), lanes: int | None = None,
                 netlist=None, tail: int = 0):
        if len(a_vals) != len(b_vals):
            raise ValueError("operand lists differ in length")
        self.design = design
        nl = netlist if netlist is not None else design.netlist
        cfg = design.config
        self.n = n = len(a_vals)
        self.a_vals, self.b_vals = list(a_vals), list(b_vals)
        self.period = design.ct * gap
        self.lanes = min(n, lanes or MAX_LANES) if n else 1
        self.slots = -(-n // self.lanes) if n else 0
        self.nw = nw = words_for(self.lanes)
        post = max(0, (self.slots - 1) * self.period) + design.latency + tail
        self.cycles = cycles = post + 1

        rng = np.random.default_rng(seed)
        drive = {}
        for name, width, vals in (("a", cfg.width_a, self.a_vals), ("b", cfg.width_b, self.b_vals)):
            planes = rng.integers(0, 1 << 63, size=(cycles, width, nw), dtype=np.uint64) << np.uint64(1)
            planes ^= rng.integers(0, 2, size=(cycles, width, nw), dtype=np.uint64)
            for slot in range(self.slots):
                idx = slice(slot * self.lanes, min(n, (slot + 1) * self.lanes))
                chunk = vals[idx]
                planes[1 + slot * self.period] = pack(chunk, width, nw)
            drive[name] = planes
        rst = np.zeros((cycles, 1, nw), dtype=np.uint64)
        rst[0] = np.uint64((1 << 64) - 1)
        drive["rst"] = rst
        names = ["p", "p_valid"] + [r for r in record if r not in ("p", "p_valid")]
        self.planes = run_lanes(nl, drive, cycles, names, nw)

    def value(self, name: str, offset: int) -> list[int]:
        """Per-vector value of ``name`` at post-reset cycle ``slot*period + offset``."""
        out: list[int] = []
        for slot in range(self.slots):
            count = min(self.lanes, self.n - slot * self.lanes)
            out += unpack(self.planes[name][1 + slot * self.period + offset], count)
        return out

    def report(self) -> StreamReport:
        d = self.design
        L = d.latency
        width = d.product_width
        got = self.value("p", L - 1)
        mism = 0
        first = None
        if width <= 64:
            ga = np.array(got, dtype=np.uint64)
            ex = np.array(self.a_vals, dtype=np.uint64) * np.array(self.b_vals, dtype=np.uint64)
            bad = np.nonzero(ga != ex)[0]
            mism = int(bad.size)
            if mism:
                i = int(bad[0])
                first = self._failure(i, got[i])
        else:
            for i, (g, x, y) in enumerate(zip(got, self.a_vals, self.b_vals)):
                if g != x * y:
                    mism += 1
                    if first is None:
                        first = self._failure(i, g)
        # p_valid must pulse exactly at the product cycles (identical in every lane)
        v = self.planes["p_valid"][1:, 0, :]
        lane_mask = np.zeros(self.nw, dtype=np.uint64)
        for w in range(self.nw):
            k = min(64, self.lanes - 64 * w)
            lane_mask[w] = np.uint64((1 << k) - 1) if k > 0 else np.uint64(0)
        full = np.all((v & lane_mask) == lane_mask, axis=1)
        none = np.all((v & lane_mask) == 0, axis=1)
        ok = bool(np.all(full | none))
        ups = [u for u in range(len(full)) if full[u]]
        exp = [u for u in range(len(full)) if u >= L - 1 and (u - (L - 1)) % d.ct == 0]
        ok = ok and ups == exp
        period = (ups[1] - ups[0]) if len(ups) > 1 else None
        return StreamReport(self.n, mism, first, ups[0] if ups else None, period, ok, L, d.ct)

    def _failure(self, i, got):
        slot = i // self.lanes
        return Failure(i, 1 + slot * self.period + self.design.latency - 1, self.a_vals[i], self.b_vals[i],
                       got, self.a_vals[i] * self.b_vals[i])


def check_stream(design: GeneratedDesign, a_vals, b_vals, gap: int = 1, seed: int = 0,
                 lanes: int | None = None, netlist=None) -> StreamReport:
    return StreamRun(design, a_vals, b_vals, gap, seed, lanes=lanes, netlist=netlist).report()


def check_random(design: GeneratedDesign, count: int, seed: int = 0, gap: int = 1,
                 lanes: int | None = None) -> StreamReport:
    cfg = design.config
    a, b = random_operands(cfg.width_a, cfg.width_b, count, seed)
    return check_stream(design, a, b, gap, seed, lanes)


def check_exhaustive(design: GeneratedDesign, gap: int = 1, seed: int = 0) -> StreamReport:
    cfg = design.config
    a, b = exhaustive_operands(cfg.width_a, cfg.width_b)
    return check_stream(design, a, b, gap, seed)


@dataclass
class EquivalenceReport:
    vectors: int
    mismatches: int
    first_mismatch: tuple | None  # (design index, vector index)
    valid_ok: bool

    @property
    def passed(self) -> bool:
        return self.mismatches == 0 and self.valid_ok


def _lockstep_netlist(designs: Sequence[GeneratedDesign]):
    from .netlist.core import CONST0, Netlist, instantiate

    cfg = designs[0].config
    nl = Netlist("lockstep")
    rst = nl.add_input("rst", 1)
    a = nl.add_input("a", cfg.width_a)
    b = nl.add_input("b", cfg.width_b)
    for i, d in enumerate(designs):
        outs = instantiate(nl, d.netlist, {"clk": [CONST0], "rst": rst, "a": a, "b": b})
        nl.add_output(f"p{i}", outs["p"])
        nl.add_output(f"v{i}", outs["p_valid"])
    return nl


def exhaustive_equivalence(designs: Sequence[GeneratedDesign], nw: int = 64, block: int = 256,
                           limit: int | None = None) -> EquivalenceReport:
    """Stream every operand pair through all ``designs`` at once and compare each
    one's product (at its own latency) with ``designs[0]``'s, bit plane by bit plane.

    Lane ``l`` of step ``k`` carries the pair with index ``g = l + lanes*k``
    (``a`` in the low bits of ``g``).  Off-schedule cycles carry the complement of
    the vector.  ``p_valid`` of every design must pulse exactly on its result
    cycles.  ``limit`` caps the number of steps (for quick partial runs).
    """
    from .netlist import kernels
    from .netlist.analysis import merge_equivalent
    from .netlist.sim import compile_netlist

    cfg = designs[0].config
    ct = designs[0].ct
    m, n = cfg.width_a, cfg.width_b
    if any(d.config.width_a != m or d.config.width_b != n or d.ct != ct for d in designs):
        raise ValueError("designs must share operand widths and CT")
    bits = m + n
    lane_bits = min(bits, (64 * nw).bit_length() - 1)
    nw = max(1, (1 << lane_bits) // 64)
    lanes = 1 << lane_bits
    lane_mask = np.uint64((1 << min(lanes, 64)) - 1)
    steps = 1 << (bits - lane_bits)
    if limit is not None:
        steps = min(steps, limit)
    lats = [d.latency for d in designs]
    lag = max(lats)
    w = designs[0].product_width

    # lane pattern planes: bit q of the lane index
    lane_idx = np.arange(lanes, dtype=np.uint64).reshape(nw, -1)
    shifts = np.arange(lane_idx.shape[1], dtype=np.uint64)
    lane_planes = np.array([np.bitwise_or.reduce(((lane_idx >> np.uint64(q)) & np.uint64(1)) << shifts, axis=1)
                            for q in range(lane_bits)], dtype=np.uint64)

    nl = merge_equivalent(_lockstep_netlist(designs))
    prog = compile_netlist(nl)
    in_nets = np.array([x for p in nl.inputs for x in p.nets], dtype=np.int64)
    rec_nets = np.array([x for p in nl.outputs for x in p.nets], dtype=np.int64)
    span = w + 1
    state = np.zeros((nl.n_nets, nw), dtype=np.uint64)
    state[1] = np.uint64((1 << 64) - 1)
    ones = np.uint64((1 << 64) - 1)

    # reset cycle
    first = np.zeros((1, len(in_nets), nw), dtype=np.uint64)
    first[0, 0] = ones
    ncyc = block * ct
    keep = lag + ct
    buf = np.zeros((keep + ncyc, len(rec_nets), nw), dtype=np.uint64)
    kernels.run_cycles(prog, in_nets, first, rec_nets, buf[keep - 1:keep], state)

    vals = np.zeros((ncyc, len(in_nets), nw), dtype=np.uint64)
    issue = np.zeros((block, bits, nw), dtype=np.uint64)
    issue[:, :lane_bits] = lane_planes[None]
    hi_bits = bits - lane_bits
    mism = 0
    first_bad = None
    valid_ok = True
    done_k = 0
    for j, k0 in enumerate(range(0, steps + -(-lag // ct), block)):
        g0 = 1 + j * ncyc  # global cycle of buf[keep]
        ks = np.arange(k0, k0 + block, dtype=np.uint64)
        if hi_bits:
            kb = (ks[:, None] >> np.arange(hi_bits, dtype=np.uint64)[None, :]) & np.uint64(1)
            issue[:, lane_bits:] = (kb * ones)[:, :, None]
        issue[ks >= np.uint64(steps)] = 0
        vals[0::ct, 1:] = issue
        for ph in range(1, ct):
            vals[ph::ct, 1:] = ~issue
        kernels.run_cycles(prog, in_nets, vals, rec_nets, buf[keep:], state)
        # issue cycle of step k is 1 + k*ct; design i answers at k*ct + L_i
        k_hi = min(steps, (g0 + ncyc - 1 - lag) // ct + 1)
        if k_hi > done_k:
            kk = np.arange(done_k, k_hi)
            ref_rows = buf[kk * ct + lats[0] - g0 + keep, 0:w]
            for i in range(1, len(designs)):
                rows = buf[kk * ct + lats[i] - g0 + keep, i * span:i * span + w]
                diff = np.bitwise_or.reduce((rows ^ ref_rows) & lane_mask, axis=1)
                if diff.any():
                    mism += int(np.unpackbits(diff.view(np.uint8)).sum())
                    if first_bad is None:
                        s, word = np.argwhere(diff)[0]
                        lane = 64 * int(word) + (int(diff[s, word]) & -int(diff[s, word])).bit_length() - 1
                        first_bad = (i, int(kk[s]) * lanes + lane)
            done_k = k_hi
        # p_valid must be all-ones on result cycles and all-zero elsewhere
        g = np.arange(g0, g0 + ncyc)
        for i in range(len(designs)):
            col = buf[keep:, i * span + w] & lane_mask
            off = g - lats[i]
            expect = (off >= 0) & (off % ct == 0)
            if not (np.all(col[expect] == lane_mask) and not np.any(col[~expect])):
                valid_ok = False
        buf[:keep] = buf[-keep:]
    return EquivalenceReport(steps * lanes, mism, first_bad, valid_ok)
