"""Bit-parallel cycle kernels.

Every net owns a row of uint64 words; bit ``j`` of word ``w`` is lane
``64*w + j``, an independent copy of the circuit.  Two interchangeable
back-ends evaluate a compiled netlist:

* ``numba``: one jitted loop over the topologically ordered op table;
* ``numpy``: the same ops grouped by (level, kind) and applied as vectorised
  fancy-index updates.

Set ``MCIM_DISABLE_NUMBA=1`` to force the numpy path (also used automatically
when numba cannot be imported).
"""
from __future__ import annotations

import os

import numpy as np

from .core import Kind

OP_NOT = int(Kind.NOT)
OP_AND = int(Kind.AND2)
OP_OR = int(Kind.OR2)
OP_XOR = int(Kind.XOR2)
OP_HA = int(Kind.HA)
OP_FA = int(Kind.FA)
OP_MUX = int(Kind.MUX2)

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

_backend = "numpy" if (os.environ.get("MCIM_DISABLE_NUMBA", "") not in ("", "0") or not NUMBA_AVAILABLE) else "numba"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not installed")
    _backend = name


def run_cycles(prog, in_nets, in_vals, rec_nets, rec_vals, state):
    """Advance ``state`` through ``in_vals.shape[0]`` clock cycles.

    Per cycle: drive inputs, settle combinational logic, record ``rec_nets``,
    then clock every DFF (``q <= d & ~rst``).
    """
    if _backend == "numba":
        _run_numba(prog.ops, prog.dff_q, prog.dff_d, prog.dff_r, in_nets, in_vals, rec_nets, rec_vals, state)
    else:
        _run_numpy(prog, in_nets, in_vals, rec_nets, rec_vals, state)


def _run_numpy(prog, in_nets, in_vals, rec_nets, rec_vals, state):
    q, d, r = prog.dff_q, prog.dff_d, prog.dff_r
    for t in range(in_vals.shape[0]):
        state[in_nets] = in_vals[t]
        for kind, cols in prog.batches:
            if kind == OP_NOT:
                state[cols[3]] = ~state[cols[0]]
            elif kind == OP_AND:
                state[cols[3]] = state[cols[0]] & state[cols[1]]
            elif kind == OP_OR:
                state[cols[3]] = state[cols[0]] | state[cols[1]]
            elif kind == OP_XOR:
                state[cols[3]] = state[cols[0]] ^ state[cols[1]]
            elif kind == OP_MUX:
                s = state[cols[0]]
                state[cols[3]] = (state[cols[1]] & ~s) | (state[cols[2]] & s)
            elif kind == OP_HA:
                x, y = state[cols[0]], state[cols[1]]
                state[cols[3]] = x ^ y
                state[cols[4]] = x & y
            elif kind == OP_FA:
                x, y, z = state[cols[0]], state[cols[1]], state[cols[2]]
                xy = x ^ y
                state[cols[3]] = xy ^ z
                state[cols[4]] = (x & y) | (z & xy)
        rec_vals[t] = state[rec_nets]
        if q.size:
            state[q] = state[d] & ~state[r]


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _run_numba(ops, dq, dd, dr, in_nets, in_vals, rec_nets, rec_vals, v):  # pragma: no cover - jitted
        nw = v.shape[1]
        nd = dq.shape[0]
        tmp = np.empty((nd, nw), dtype=np.uint64)
        for t in range(in_vals.shape[0]):
            for i in range(in_nets.shape[0]):
                for w in range(nw):
                    v[in_nets[i], w] = in_vals[t, i, w]
            for k in range(ops.shape[0]):
                kind = ops[k, 0]
                a = ops[k, 1]
                b = ops[k, 2]
                c = ops[k, 3]
                o = ops[k, 4]
                o2 = ops[k, 5]
                if kind == 2:
                    for w in range(nw):
                        v[o, w] = ~v[a, w]
                elif kind == 3:
                    for w in range(nw):
                        v[o, w] = v[a, w] & v[b, w]
                elif kind == 4:
                    for w in range(nw):
                        v[o, w] = v[a, w] | v[b, w]
                elif kind == 5:
                    for w in range(nw):
                        v[o, w] = v[a, w] ^ v[b, w]
                elif kind == 6:
                    for w in range(nw):
                        x = v[a, w]
                        y = v[b, w]
                        v[o, w] = x ^ y
                        v[o2, w] = x & y
                elif kind == 7:
                    for w in range(nw):
                        x = v[a, w]
                        y = v[b, w]
                        z = v[c, w]
                        xy = x ^ y
                        v[o, w] = xy ^ z
                        v[o2, w] = (x & y) | (z & xy)
                elif kind == 8:
                    for w in range(nw):
                        s = v[a, w]
                        v[o, w] = (v[b, w] & ~s) | (v[c, w] & s)
            for i in range(rec_nets.shape[0]):
                for w in range(nw):
                    rec_vals[t, i, w] = v[rec_nets[i], w]
            for i in range(nd):
                for w in range(nw):
                    tmp[i, w] = v[dd[i], w] & ~v[dr[i], w]
            for i in range(nd):
                for w in range(nw):
                    v[dq[i], w] = tmp[i, w]

else:  # pragma: no cover
    _run_numba = None
