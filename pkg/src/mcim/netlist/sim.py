"""Cycle-accurate interpreter built on the bit-parallel kernels."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import StimulusWidthOverflow
from . import kernels
from .analysis import comb_order, net_levels, require_checked
from .core import Kind, Netlist

MASK64 = (1 << 64) - 1
_ALL_ONES = np.uint64(MASK64)


@dataclass
class Program:
    ops: np.ndarray
    dff_q: np.ndarray
    dff_d: np.ndarray
    dff_r: np.ndarray
    batches: list
    n_nets: int


def compile_netlist(nl: Netlist) -> Program:
    """Check ``nl`` and lower it to op tables (cached on the netlist)."""
    key = (len(nl.cells), nl.n_nets, len(nl.outputs), len(nl.inputs))
    cached = getattr(nl, "_program", None)
    if cached is not None and cached[0] == key:
        return cached[1]
    require_checked(nl)
    order = comb_order(nl)
    ops = np.zeros((len(order), 6), dtype=np.int64)
    for row, i in enumerate(order):
        c = nl.cells[i]
        ins = list(c.ins) + [0] * (3 - len(c.ins))
        outs = list(c.outs) + [c.outs[0]] * (2 - len(c.outs))
        ops[row] = (int(c.kind), *ins, *outs)
    dffs = [c for c in nl.cells if c.kind is Kind.DFF]
    q = np.array([c.outs[0] for c in dffs], dtype=np.int64)
    d = np.array([c.ins[0] for c in dffs], dtype=np.int64)
    r = np.array([c.ins[1] for c in dffs], dtype=np.int64)

    lvl = net_levels(nl)
    groups: dict[tuple[int, int], list[int]] = {}
    for row, i in enumerate(order):
        c = nl.cells[i]
        groups.setdefault((lvl[c.outs[0]], int(c.kind)), []).append(row)
    batches = []
    for (_, kind), rows in sorted(groups.items()):
        sub = ops[rows]
        batches.append((kind, [sub[:, 1], sub[:, 2], sub[:, 3], sub[:, 4], sub[:, 5]]))
    prog = Program(ops, q, d, r, batches, nl.n_nets)
    nl._program = (key, prog)
    return prog


def words_for(lanes: int) -> int:
    return max(1, (lanes + 63) // 64)


def pack(values: Sequence[int], width: int, nw: int | None = None) -> np.ndarray:
    """Lane values -> bit planes of shape (width, nw)."""
    n = len(values)
    nw = words_for(n) if nw is None else nw
    out = np.zeros((width, nw), dtype=np.uint64)
    if width == 0 or n == 0:
        return out
    lane_bit = np.arange(64, dtype=np.uint64)
    for limb in range((width + 63) // 64):
        if isinstance(values, np.ndarray) and values.dtype.kind in "ui" and limb == 0:
            arr = values.astype(np.uint64)
        else:
            arr = np.fromiter(((int(v) >> (64 * limb)) & MASK64 for v in values), dtype=np.uint64, count=n)
        nbits = min(64, width - 64 * limb)
        bits = (arr[None, :] >> np.arange(nbits, dtype=np.uint64)[:, None]) & np.uint64(1)
        padded = np.zeros((nbits, nw * 64), dtype=np.uint64)
        padded[:, :n] = bits
        out[64 * limb : 64 * limb + nbits] = np.bitwise_or.reduce(padded.reshape(nbits, nw, 64) << lane_bit, axis=2)
    return out


def unpack(planes: np.ndarray, n: int) -> list[int]:
    """Bit planes (width, nw) -> list of ``n`` lane values."""
    width, nw = planes.shape
    if width == 0:
        return [0] * n
    bits = ((planes[:, :, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)).reshape(width, nw * 64)[:, :n]
    result = [0] * n
    for limb in range((width + 63) // 64):
        nbits = min(64, width - 64 * limb)
        chunk = bits[64 * limb : 64 * limb + nbits]
        vals = np.bitwise_or.reduce(chunk << np.arange(nbits, dtype=np.uint64)[:, None], axis=0)
        if limb == 0:
            result = [int(x) for x in vals.tolist()]
        else:
            sh = 64 * limb
            result = [r | (int(x) << sh) for r, x in zip(result, vals.tolist())]
    return result


def run_lanes(
    nl: Netlist,
    drive: Mapping[str, np.ndarray],
    cycles: int,
    record: Sequence[str] | None = None,
    nw: int = 1,
) -> dict[str, np.ndarray]:
    """Simulate ``64*nw`` independent lanes for ``cycles`` cycles.

    ``drive[name]`` has shape (cycles, width, nw).  Missing input ports are held
    at 0 (``clk`` is implicit).  Returns recorded planes per port/probe name with
    shape (cycles, width, nw).
    """
    prog = compile_netlist(nl)
    names = list(record) if record is not None else [p.name for p in nl.outputs]
    in_nets, in_blocks = [], []
    for p in nl.inputs:
        if p.name in drive:
            blk = np.asarray(drive[p.name], dtype=np.uint64)
            if blk.shape != (cycles, p.width, nw):
                raise ValueError(f"drive[{p.name!r}] has shape {blk.shape}, expected {(cycles, p.width, nw)}")
            in_nets.extend(p.nets)
            in_blocks.append(blk)
    in_vals = np.concatenate(in_blocks, axis=1) if in_blocks else np.zeros((cycles, 0, nw), np.uint64)
    in_vals = np.ascontiguousarray(in_vals)

    rec_nets, spans = [], {}
    for name in names:
        nets = nl.probes[name] if name in nl.probes else nl.port(name).nets
        spans[name] = (len(rec_nets), len(rec_nets) + len(nets))
        rec_nets.extend(nets)
    rec_vals = np.zeros((cycles, len(rec_nets), nw), dtype=np.uint64)

    state = np.zeros((nl.n_nets, nw), dtype=np.uint64)
    state[1] = _ALL_ONES
    kernels.run_cycles(
        prog,
        np.asarray(in_nets, dtype=np.int64),
        in_vals,
        np.asarray(rec_nets, dtype=np.int64),
        rec_vals,
        state,
    )
    return {name: rec_vals[:, a:b] for name, (a, b) in spans.items()}


@dataclass
class SimTrace:
    """Per-cycle port values of a single-lane run."""

    inputs: list[dict[str, int]] = field(default_factory=list)
    outputs: list[dict[str, int]] = field(default_factory=list)
    probes: list[dict[str, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.outputs)

    def column(self, name: str) -> list[int]:
        src = self.outputs if self.outputs and name in self.outputs[0] else self.probes
        return [row[name] for row in src]


def simulate(
    nl: Netlist,
    stimulus: Sequence[Mapping[str, int]],
    cycles: int | None = None,
    probes: Sequence[str] = (),
) -> SimTrace:
    """Run one copy of the circuit; ``stimulus[t]`` maps input port -> value for cycle t.

    If ``cycles`` exceeds the stimulus length, the last stimulus row is held.
    """
    cycles = len(stimulus) if cycles is None else cycles
    if cycles and not stimulus:
        raise ValueError("stimulus is empty")
    rows = [dict(stimulus[min(t, len(stimulus) - 1)]) for t in range(cycles)]
    drive = {}
    for p in nl.inputs:
        if p.name == "clk":
            continue
        vals = []
        for t, row in enumerate(rows):
            if p.name not in row:
                raise ValueError(f"stimulus cycle {t} does not drive input {p.name!r}")
            v = int(row[p.name])
            if v < 0 or v >> p.width:
                raise StimulusWidthOverflow(f"cycle {t}: {p.name}={v} does not fit {p.width} bits")
            vals.append(v)
        drive[p.name] = _single_lane(vals, p.width)
    out_names = [p.name for p in nl.outputs]
    rec = run_lanes(nl, drive, cycles, out_names + list(probes), nw=1)
    trace = SimTrace(inputs=rows)
    weights = {}
    for name, planes in rec.items():
        bits = (planes[:, :, 0] & np.uint64(1)).astype(object)
        weights[name] = [sum(int(b) << i for i, b in enumerate(bits[t])) for t in range(cycles)]
    for t in range(cycles):
        trace.outputs.append({n: weights[n][t] for n in out_names})
        if probes:
            trace.probes.append({n: weights[n][t] for n in probes})
    return trace


def _single_lane(vals: list[int], width: int) -> np.ndarray:
    out = np.zeros((len(vals), width, 1), dtype=np.uint64)
    for t, v in enumerate(vals):
        for i in range(width):
            if (v >> i) & 1:
                out[t, i, 0] = 1
    return out


def evaluate(nl: Netlist, values: Mapping[str, Sequence[int]], record: Sequence[str] | None = None) -> dict[str, list[int]]:
    """Settle the circuit once per lane: ``values[port]`` lists one value per lane.

    Registers hold their reset value 0, so this is meant for combinational blocks.
    """
    n = len(next(iter(values.values()))) if values else 1
    nw = words_for(n)
    drive = {name: pack(v, nl.port(name).width, nw)[None] for name, v in values.items()}
    rec = run_lanes(nl, drive, 1, record, nw)
    return {name: unpack(planes[0], n) for name, planes in rec.items()}
