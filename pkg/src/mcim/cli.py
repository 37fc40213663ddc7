"""``mcim`` command line: generate, simulate, estimate, sweep.

Exit codes: 0 pass, 1 simulation failure, 2 configuration error, 3 I/O error,
4 malformed sweep grid.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .arch import build
from .config import MultiplierConfig, arch_defaults, derived_metrics, violations
from .emit import DEFAULT_VECTORS, write_bundle
from .errors import ConfigError, MCIMError
from .estimate import (area, baseline_config, expand_grid, savings_pct, sweep, to_csv, to_text,
                       weight_tables)
from .harness import check_random
from .netlist.core import Netlist, instantiate

EXIT_OK, EXIT_SIM, EXIT_CONFIG, EXIT_IO, EXIT_GRID = 0, 1, 2, 3, 4
DEFAULT_SEED = 1
SMOKE_VECTORS = 100

_FLAG_FIELDS = {
    "arch": "arch", "width_a": "width_a", "width_b": "width_b", "ct": "ct", "ppm": "ppm_kind",
    "comp": "comp_kind", "fa": "fa_kind", "levels": "karatsuba_levels", "pipeline": "extra_pipeline_stages",
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with config fields (flags override it)")
    p.add_argument("--arch", help="Star, Feedback (FB), FeedForward (FF) or Karatsuba")
    p.add_argument("--width-a", type=int, help="width of operand a (M)")
    p.add_argument("--width-b", type=int, help="width of operand b (N)")
    p.add_argument("--ct", type=int, help="cycles per multiplication (throughput 1/ct)")
    p.add_argument("--ppm", help="compressor inside the partial-product multiplier")
    p.add_argument("--comp", help="accumulation compressor (FullAdderChain, DaddaTree, RoCoCo, Custom)")
    p.add_argument("--fa", help="final adder: 1CA or 3CA")
    p.add_argument("--levels", type=int, help="Karatsuba recursion levels K")
    p.add_argument("--pipeline", type=int, help="extra pipeline stages P")


def load_config(args) -> MultiplierConfig:
    """Defaults, then the --config file, then individual flags."""
    data: dict = {}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot read config file: {e}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise CliError(EXIT_CONFIG, f"config file is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise CliError(EXIT_CONFIG, "config file must hold a flat JSON object")
    for flag, fld in _FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            data[fld] = v
    try:
        cfg = MultiplierConfig.from_dict(arch_defaults(data))
    except (TypeError, ValueError) as e:
        raise CliError(EXIT_CONFIG, f"invalid configuration: {e}") from None
    found = violations(cfg)
    if found:
        raise CliError(EXIT_CONFIG, "invalid configuration:\n" + "\n".join(f"  {v}" for v in found))
    return cfg


def inject_fault(design, bit: int | None = None):
    """Copy of ``design`` with one product bit inverted (for exercising failure paths)."""
    src = design.netlist
    nl = Netlist(src.name)
    conn = {p.name: nl.add_input(p.name, p.width) for p in src.inputs}
    outs = instantiate(nl, src, conn)
    p = list(outs["p"])
    k = len(p) // 2 if bit is None else bit
    p[k] = nl.NOT(p[k])
    nl.add_output("p", p)
    nl.add_output("p_valid", outs["p_valid"])
    return dataclasses.replace(design, netlist=nl)


def _summary(design) -> str:
    cfg = design.config
    m = derived_metrics(cfg)
    return (f"{design.name}: {cfg.arch.value} {cfg.width_a}x{cfg.width_b}, throughput {m.throughput}, "
            f"latency {design.latency}, accepted phase {design.accepted_phase}")


def cmd_generate(args) -> int:
    cfg = load_config(args)
    design = build(cfg)
    out = Path(args.out or ".")
    try:
        written = write_bundle(design, out, force=args.force, vectors=args.vectors or DEFAULT_VECTORS,
                               seed=args.seed)
    except FileExistsError as e:
        raise CliError(EXIT_IO, str(e)) from None
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write bundle: {e}") from None
    print(_summary(design))
    for p in written:
        print(f"  wrote {p}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    design = build(cfg)
    if args.inject_fault:
        design = inject_fault(design)
    n = DEFAULT_VECTORS if args.vectors is None else args.vectors
    print(_summary(design))
    if n == 0:
        print("PASS 0/0 (no vectors)")
        return EXIT_OK
    rep = check_random(design, n, args.seed)
    if rep.passed:
        print(f"PASS {n}/{n}")
        return EXIT_OK
    print(f"FAIL {rep.mismatches}/{n} mismatches")
    if rep.first_failure is not None:
        print(f"first failure: {rep.first_failure}")
    if not rep.valid_ok:
        print(f"p_valid schedule wrong: first pulse at cycle {rep.first_valid}, period {rep.valid_period}, "
              f"expected first pulse at {design.latency - 1} and period {design.ct}")
    return EXIT_SIM


def cmd_estimate(args) -> int:
    cfg = load_config(args)
    design = build(cfg)
    base = build(baseline_config(cfg))
    print(_summary(design))
    rep = area(design)
    print("cells: " + ", ".join(f"{k}={v}" for k, v in sorted(rep.cell_counts.items())))
    print(f"registers {rep.registers}, combinational depth {rep.max_depth}")
    for label, table in weight_tables().items():
        a = area(design, table).weighted_area
        b = area(base, table).weighted_area
        print(f"{label:>11}: area {a:10.2f}  single-cycle baseline {b:10.2f}  savings {savings_pct(a, b):6.2f}%")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        text = Path(args.grid).read_text()
    except OSError as e:
        raise CliError(EXIT_GRID, f"cannot read grid file: {e}") from None
    try:
        points = expand_grid(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError) as e:
        raise CliError(EXIT_GRID, f"malformed grid: {e}") from None
    weights = None
    if args.weights:
        try:
            weights = json.loads(Path(args.weights).read_text())
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot read weights file: {e}") from None
        except json.JSONDecodeError as e:
            raise CliError(EXIT_CONFIG, f"weights file is not valid JSON: {e}") from None
    smoke = SMOKE_VECTORS if args.vectors is None else args.vectors
    try:
        rows = sweep(points, weights, smoke=smoke, seed=args.seed, jobs=args.jobs)
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e)) from None
    csv_text, table = to_csv(rows), to_text(rows)
    if args.out:
        out = Path(args.out)
        targets = {out / "sweep.csv": csv_text, out / "sweep.txt": table}
        clash = [p for p in targets if p.exists()]
        if clash and not args.force:
            raise CliError(EXIT_IO, f"refusing to overwrite {', '.join(map(str, clash))} (use --force)")
        try:
            out.mkdir(parents=True, exist_ok=True)
            for p, body in targets.items():
                p.write_text(body)
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot write sweep results: {e}") from None
    print(table, end="")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcim", description="Multi-cycle integer multiplier generator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for all randomness")
        p.add_argument("--vectors", type=int, help="number of test vectors")
        p.add_argument("--out", help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing files")

    g = sub.add_parser("generate", help="write design, wrapper, testbench and manifest")
    _config_args(g)
    common(g)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="check the design against integer multiplication")
    _config_args(s)
    common(s)
    s.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="cell census, weighted area and savings")
    _config_args(e)
    e.set_defaults(func=cmd_estimate)

    w = sub.add_parser("sweep", help="estimate (and smoke-simulate) every point of a grid")
    w.add_argument("grid", help="grid JSON file")
    common(w)
    w.add_argument("--weights", help="JSON weight table overriding the defaults")
    w.add_argument("--jobs", type=int, default=1, help="worker processes")
    w.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ConfigError as e:
        print("invalid configuration:\n" + "\n".join(f"  {v}" for v in e.violations), file=sys.stderr)
        return EXIT_CONFIG
    except MCIMError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
