"""Technology-independent area and depth estimates.

Areas are in NAND2-equivalent units from a per-cell weight table.  The default
weights are engineering guesses, not library data, so comparisons should only
ever rely on orderings and trends (which are re-checked under perturbed
tables).
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .config import Arch, CompressorKind, MultiplierConfig, arch_defaults, violations
from .errors import MCIMError, WidthMismatch
from .netlist.analysis import levelize
from .netlist.core import Kind, Netlist

DEFAULT_WEIGHTS: dict[str, float] = {
    "NOT": 0.5, "AND2": 1.0, "OR2": 1.0, "XOR2": 2.0, "HA": 2.5, "FA": 4.5, "MUX2": 2.0, "DFF": 4.0,
}

CSV_FIELDS = [
    "arch", "ct", "ppm", "comp", "fa", "K", "P", "M", "N", "cells_FA", "cells_HA", "cells_AND", "regs",
    "weighted_area", "depth", "latency", "savings_pct", "ppm_dims", "status",
]


def check_weights(weights: Mapping[str, float]) -> dict[str, float]:
    table = dict(DEFAULT_WEIGHTS)
    for k, v in weights.items():
        if k not in DEFAULT_WEIGHTS:
            raise ValueError(f"unknown cell kind {k!r} in weight table")
        if not v > 0:
            raise ValueError(f"weight for {k} must be positive, got {v}")
        table[k] = float(v)
    return table


def perturbed_weights(seed: int, spread: float = 0.5) -> dict[str, float]:
    """Default table with each weight scaled by a seeded factor in [1-spread, 1+spread]."""
    rng = random.Random(seed)
    return {k: v * rng.uniform(1 - spread, 1 + spread) for k, v in DEFAULT_WEIGHTS.items()}


PERTURBED_SEEDS = (0, 1, 2)


def weight_tables() -> dict[str, dict[str, float]]:
    """The default table plus the three fixed perturbations used for trend checks."""
    out = {"default": dict(DEFAULT_WEIGHTS)}
    for s in PERTURBED_SEEDS:
        out[f"perturbed{s}"] = perturbed_weights(s)
    return out


@dataclass
class AreaReport:
    cell_counts: dict[str, int]
    weighted_area: float
    registers: int
    max_depth: int
    weights: dict[str, float] = field(default_factory=dict)

    def count(self, kind: str) -> int:
        return self.cell_counts.get(kind, 0)


def _netlist(obj) -> Netlist:
    return obj.netlist if hasattr(obj, "netlist") else obj


def area(design, weights: Mapping[str, float] | None = None) -> AreaReport:
    """Cell census, weighted area and combinational depth of a design or netlist."""
    table = check_weights(weights or {})
    nl = _netlist(design)
    counts = nl.census()
    total = sum(table[k] * n for k, n in sorted(counts.items()))
    _, depth = levelize(nl)
    return AreaReport(counts, total, counts.get(Kind.DFF.name, 0), depth, table)


def reweight(report: AreaReport, weights: Mapping[str, float]) -> AreaReport:
    """Same census under another weight table (no rebuild needed)."""
    table = check_weights(weights)
    total = sum(table[k] * n for k, n in sorted(report.cell_counts.items()))
    return AreaReport(dict(report.cell_counts), total, report.registers, report.max_depth, table)


def savings(design, baseline, weights: Mapping[str, float] | None = None) -> float:
    """Percentage area saved by ``design`` relative to ``baseline``."""
    for d in (design, baseline):
        if not hasattr(d, "config"):
            raise TypeError("savings() needs GeneratedDesign arguments")
    if (design.config.width_a, design.config.width_b) != (baseline.config.width_a, baseline.config.width_b):
        raise WidthMismatch(
            f"{design.config.width_a}x{design.config.width_b} vs {baseline.config.width_a}x{baseline.config.width_b}"
        )
    return savings_pct(area(design, weights).weighted_area, area(baseline, weights).weighted_area)


def savings_pct(a: float, base: float) -> float:
    return 100.0 * (1.0 - a / base)


def baseline_config(cfg: MultiplierConfig) -> MultiplierConfig:
    """The single-cycle reference multiplier for ``cfg``'s operand widths."""
    return MultiplierConfig(cfg.width_a, cfg.width_b, 1, Arch.STAR, cfg.ppm_kind, CompressorKind.DADDA)


# -- grids and sweeps -------------------------------------------------------

_INT_FIELDS = {"width_a", "width_b", "ct", "karatsuba_levels", "extra_pipeline_stages"}


def expand_grid(grid: Any) -> list[dict]:
    """Grid JSON -> list of flat config dicts, in deterministic order.

    The grid is a list of objects (a single object is accepted too).  Within an
    object, an integer field given as ``[lo, hi]`` is an inclusive range, any
    other list enumerates values, and ``{"values": [...]}`` enumerates
    explicitly.  Fields vary in object key order, last key fastest.
    """
    if isinstance(grid, dict):
        grid = [grid]
    if not isinstance(grid, list):
        raise ValueError("grid must be a JSON list of objects")
    out = []
    for entry in grid:
        if not isinstance(entry, dict):
            raise ValueError(f"grid entry must be an object, got {entry!r}")
        keys, choices = [], []
        for k, v in entry.items():
            keys.append(k)
            if isinstance(v, dict):
                if set(v) != {"values"} or not isinstance(v["values"], list):
                    raise ValueError(f"field {k}: expected {{'values': [...]}}")
                choices.append(list(v["values"]))
            elif isinstance(v, list):
                if k in _INT_FIELDS and len(v) == 2 and all(isinstance(x, int) for x in v):
                    lo, hi = v
                    if lo > hi:
                        raise ValueError(f"field {k}: empty range {v}")
                    choices.append(list(range(lo, hi + 1)))
                else:
                    choices.append(list(v))
            else:
                choices.append([v])
        for combo in itertools.product(*choices):
            out.append(dict(zip(keys, combo)))
    return out


@dataclass
class SweepRow:
    config: dict
    status: str
    values: dict = field(default_factory=dict)
    message: str = ""

    def csv_dict(self) -> dict:
        c = self.config
        base = {
            "arch": c.get("arch", ""), "ct": c.get("ct", ""), "ppm": c.get("ppm_kind", ""),
            "comp": c.get("comp_kind", ""), "fa": c.get("fa_kind", ""), "K": c.get("karatsuba_levels", ""),
            "P": c.get("extra_pipeline_stages", ""), "M": c.get("width_a", ""), "N": c.get("width_b", ""),
        }
        base.update({k: "" for k in CSV_FIELDS[9:]})
        base.update(self.values)
        base["status"] = self.status
        return base


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def _evaluate_point(args) -> SweepRow:
    raw, weights, smoke, seed = args
    from .arch import build
    from .harness import check_random

    try:
        cfg = MultiplierConfig.from_dict(arch_defaults(raw))
    except (TypeError, ValueError) as e:
        return SweepRow(dict(raw), "ERROR", message=str(e))
    found = violations(cfg)
    if found:
        return SweepRow(cfg.to_dict(), "ERROR", message="; ".join(map(str, found)))
    try:
        design = build(cfg)
        rep = area(design, weights)
        base = area(build(baseline_config(cfg)), weights)
        status = "OK"
        message = ""
        if smoke:
            r = check_random(design, smoke, seed)
            if not r.passed:
                status = "FAIL"
                message = str(r.first_failure) if r.first_failure else "p_valid schedule mismatch"
    except MCIMError as e:
        return SweepRow(cfg.to_dict(), "ERROR", message=str(e))
    dims = design.info.get("ppm_dims")
    values = {
        "cells_FA": rep.count("FA"), "cells_HA": rep.count("HA"), "cells_AND": rep.count("AND2"),
        "regs": rep.registers, "weighted_area": round(rep.weighted_area, 2), "depth": rep.max_depth,
        "latency": design.latency, "savings_pct": round(savings_pct(rep.weighted_area, base.weighted_area), 2),
        "ppm_dims": f"{dims[0]}x{dims[1]}" if dims else "",
    }
    return SweepRow(cfg.to_dict(), status, values, message)


def sweep(points: Iterable[Mapping], weights: Mapping[str, float] | None = None, smoke: int = 0,
          seed: int = 0, jobs: int = 1) -> list[SweepRow]:
    """Evaluate each config point; bad points become ERROR/FAIL rows, never exceptions."""
    work = [(dict(p), dict(weights or {}), smoke, seed) for p in points]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_evaluate_point, work))
    return [_evaluate_point(w) for w in work]


def to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.csv_dict().items()})
    return buf.getvalue()


TEXT_COLUMNS = ["arch", "M", "N", "ct", "K", "fa", "comp", "ppm", "P", "latency", "weighted_area",
                "savings_pct", "depth", "regs", "cells_FA", "cells_HA", "cells_AND", "ppm_dims", "status"]


def to_text(rows: Sequence[SweepRow]) -> str:
    """Aligned table: architecture and parameters first, then results."""
    table = [TEXT_COLUMNS] + [[_fmt(r.csv_dict()[c]) for c in TEXT_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(TEXT_COLUMNS))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table]
    for r in rows:
        if r.message:
            lines.append(f"# {r.status} {json.dumps(r.config, sort_keys=True)}: {r.message}")
    return "\n".join(lines) + "\n"


__all__ = [
    "AreaReport", "CSV_FIELDS", "DEFAULT_WEIGHTS", "SweepRow", "area", "baseline_config",
    "expand_grid", "perturbed_weights", "reweight", "savings", "savings_pct", "sweep", "to_csv", "to_text",
    "weight_tables",
]
