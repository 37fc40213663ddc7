"""Output pipelining with backward relocation over the loop-free output cone.

``P`` register ranks are added at the outputs and then spread, level balanced,
over the combinational cells that feed only the outputs (or each other).  Cells
on a register feedback loop are never crossed, so loop timing is untouched.
"""
from __future__ import annotations

import copy
from dataclasses import replace
from math import ceil

import networkx as nx

from ..netlist.analysis import require_checked
from ..netlist.core import COMBINATIONAL, Cell, Netlist, Port, drivers
from .common import GeneratedDesign


def loop_cells(nl: Netlist) -> set[int]:
    """Cells on some directed cycle (through registers) of the cell graph."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(nl.cells)))
    drv = {}
    for i, c in enumerate(nl.cells):
        for n in c.outs:
            drv[n] = i
    for i, c in enumerate(nl.cells):
        for n in c.ins:
            j = drv.get(n)
            if j is not None:
                g.add_edge(j, i)
    out = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            out |= comp
        else:
            (i,) = comp
            if g.has_edge(i, i):
                out.add(i)
    return out


def output_cone(nl: Netlist) -> set[int]:
    """Loop-free combinational cells whose every reader is in the cone or an output."""
    loops = loop_cells(nl)
    cone = {i for i, c in enumerate(nl.cells) if c.kind in COMBINATIONAL and i not in loops}
    readers: dict[int, list[int]] = {}
    for i, c in enumerate(nl.cells):
        for n in c.ins:
            readers.setdefault(n, []).append(i)
    changed = True
    while changed:
        changed = False
        for i in sorted(cone):
            if any(r not in cone for n in nl.cells[i].outs for r in readers.get(n, ())):
                cone.discard(i)
                changed = True
    return cone


def pipeline(design: GeneratedDesign, stages: int) -> GeneratedDesign:
    if stages < 0:
        raise ValueError("pipeline stages must be >= 0")
    if stages == 0:
        return design
    src = design.netlist
    require_checked(src)
    nl = copy.copy(src)
    nl.cells = list(src.cells)
    nl.inputs = list(src.inputs)
    nl.groups = list(src.groups)
    nl.probes = dict(src.probes)
    nl._not_cache = {}
    nl.__dict__.pop("_program", None)

    cone = output_cone(src)
    drv = drivers(src)
    cell_of = {n: j for n, ds in drv.items() for kind, j in ds if kind == "cell"}

    # levels inside the cone, counted from its boundary
    level: dict[int, int] = {}
    order = _topo(src, cone)
    net_level: dict[int, int] = {}
    for i in order:
        c = src.cells[i]
        lv = 1 + max((net_level.get(n, 0) for n in c.ins), default=0)
        level[i] = lv
        for n in c.outs:
            net_level[n] = lv
    depth = max(level.values(), default=0)
    g = max(1, ceil(depth / (stages + 1)))
    stage_of = {i: min(stages, (lv - 1) // g) for i, lv in level.items()}

    def net_stage(n):
        j = cell_of.get(n)
        return stage_of[j] if j in stage_of else 0

    chains: dict[int, list[int]] = {}

    def delayed(n, d):
        chain = chains.setdefault(n, [n])
        while len(chain) <= d:
            chain.append(nl.dff(chain[-1]))
        return chain[d]

    touched = set()
    for i in order:
        c = src.cells[i]
        k = stage_of[i]
        ins = tuple(delayed(n, k - net_stage(n)) for n in c.ins)
        if ins != c.ins:
            nl.cells[i] = Cell(c.kind, ins, c.outs)
            touched.add(i)
    nl.outputs = [Port(p.name, tuple(delayed(n, stages - net_stage(n)) for n in p.nets)) for p in src.outputs]
    nl.groups = [grp for grp in src.groups if not any(i in touched for i in grp.cells)]
    info = dict(design.info, pipeline_stages=stages, cone_cells=len(cone), stage_levels=g)
    return replace(design, netlist=nl, latency=design.latency + stages, info=info)


def _topo(nl: Netlist, cone: set[int]) -> list[int]:
    g = nx.DiGraph()
    g.add_nodes_from(sorted(cone))
    drv = {n: i for i, c in enumerate(nl.cells) for n in c.outs}
    for i in sorted(cone):
        for n in nl.cells[i].ins:
            j = drv.get(n)
            if j in cone:
                g.add_edge(j, i)
    return list(nx.lexicographical_topological_sort(g))
