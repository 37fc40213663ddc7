"""Structural checks and levelization."""
from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from ..errors import UncheckedNetlist
from .core import COMBINATIONAL, PIN_COUNTS, UNDRIVEN, Cell, Kind, Netlist, Port, drivers


@dataclass(frozen=True)
class Problem:
    kind: str  # CombinationalLoop | MultipleDrivers | FloatingNet | PinCount
    message: str
    nets: tuple = ()

    def __str__(self):
        return f"{self.kind}: {self.message}"


def check(nl: Netlist) -> list[Problem]:
    """Return every structural problem; an empty list means the netlist is sound."""
    problems: list[Problem] = []
    drv = drivers(nl)
    for net, ds in sorted(drv.items()):
        if len(ds) > 1:
            problems.append(Problem("MultipleDrivers", f"net {net} driven by {ds}", (net,)))
    for i, c in enumerate(nl.cells):
        n_in, n_out = PIN_COUNTS[c.kind]
        if len(c.ins) != n_in or len(c.outs) != n_out:
            problems.append(Problem("PinCount", f"cell {i} {c.kind.name} has {len(c.ins)}/{len(c.outs)} pins"))
        for n in c.ins:
            if n == UNDRIVEN or n not in drv:
                problems.append(Problem("FloatingNet", f"cell {i} {c.kind.name} reads undriven net {n}", (n,)))
    for p in nl.outputs:
        for n in p.nets:
            if n not in drv:
                problems.append(Problem("FloatingNet", f"output {p.name} bit reads undriven net {n}", (n,)))
    if any(pr.kind in ("PinCount",) for pr in problems):
        return problems
    try:
        comb_order(nl, drv)
    except CycleError as e:
        cyc = tuple(e.args[1]) if len(e.args) > 1 else ()
        nets = tuple(n for i in cyc for n in nl.cells[i].outs)
        problems.append(Problem("CombinationalLoop", f"cells {list(cyc)} form a loop through nets {list(nets)}", nets))
    return problems


def require_checked(nl: Netlist) -> None:
    problems = check(nl)
    if problems:
        raise UncheckedNetlist(problems)


def comb_order(nl: Netlist, drv=None) -> list[int]:
    """Combinational cell indices in topological order (raises CycleError on loops)."""
    drv = drv if drv is not None else drivers(nl)
    ts = TopologicalSorter()
    for i, c in enumerate(nl.cells):
        if c.kind not in COMBINATIONAL:
            continue
        preds = []
        for n in c.ins:
            for kind, j in drv.get(n, ()):
                if kind == "cell" and nl.cells[j].kind in COMBINATIONAL:
                    preds.append(j)
        ts.add(i, *preds)
    order = list(ts.static_order())
    # TopologicalSorter order among independent nodes is deterministic for a
    # given insertion order; keep it so simulation schedules are stable.
    return order


def levelize(nl: Netlist) -> tuple[dict[int, int], int]:
    """Combinational level per cell (ports, constants and DFF outputs are level 0)."""
    require_checked(nl)
    net_level = net_levels(nl)
    levels: dict[int, int] = {}
    for i, c in enumerate(nl.cells):
        if c.kind in COMBINATIONAL:
            levels[i] = net_level[c.outs[0]]
        else:
            levels[i] = 0
    return levels, max(levels.values(), default=0)


def net_levels(nl: Netlist) -> list[int]:
    lvl = [0] * nl.n_nets
    for i in comb_order(nl):
        c = nl.cells[i]
        v = 1 + max((lvl[n] for n in c.ins), default=0)
        for n in c.outs:
            lvl[n] = v
    return lvl


def depth_of(nl: Netlist, nets) -> int:
    """Deepest combinational level among ``nets``."""
    lvl = net_levels(nl)
    return max((lvl[n] for n in nets), default=0)


def fanout(nl: Netlist) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for i, c in enumerate(nl.cells):
        for n in c.ins:
            out.setdefault(n, []).append(i)
    return out


def merge_equivalent(nl: Netlist) -> Netlist:
    """Copy of ``nl`` with structurally equivalent cells merged.

    Computes the coarsest partition of cells such that cells in one class have
    the same kind and pairwise equivalent input nets (registers included, so
    identical feedback loops collapse too).  Every register starts at 0, hence
    nets in one class carry the same value on every cycle and the reduced
    netlist behaves identically at its ports.  Used to simulate several copies
    of near-identical circuits side by side without paying for the shared part.
    """
    require_checked(nl)
    drv = {}
    for i, c in enumerate(nl.cells):
        for k, n in enumerate(c.outs):
            drv[n] = (i, k)
    cls = [(-1 - i) if c.kind in (Kind.CONST0, Kind.CONST1) else int(c.kind) for i, c in enumerate(nl.cells)]

    def net_key(n, cls):
        d = drv.get(n)
        return ("in", n) if d is None else (cls[d[0]], d[1])

    count = len(set(cls))
    while True:
        ids: dict = {}
        new = [ids.setdefault((cls[i], tuple(net_key(n, cls) for n in c.ins)), len(ids))
               for i, c in enumerate(nl.cells)]
        cls = new
        if len(ids) == count:
            break
        count = len(ids)

    rep: dict[int, int] = {}
    for i, k in enumerate(cls):
        rep.setdefault(k, i)

    def r(n):
        d = drv.get(n)
        return n if d is None else nl.cells[rep[cls[d[0]]]].outs[d[1]]

    out = Netlist(nl.name, fold=nl.fold)
    out.cells = [Cell(c.kind, tuple(r(n) for n in c.ins), c.outs)
                 for i, c in enumerate(nl.cells) if rep[cls[i]] == i]
    out.inputs = list(nl.inputs)
    out.outputs = [Port(p.name, tuple(r(n) for n in p.nets)) for p in nl.outputs]
    out.probes = {k: tuple(r(n) for n in v) for k, v in nl.probes.items()}
    out.n_nets = nl.n_nets
    out.rst = nl.rst
    return out
