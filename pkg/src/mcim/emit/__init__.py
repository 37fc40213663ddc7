from .bundle import bundle_files, write_bundle
from .reader import parse_modules, read_verilog
from .testbench import (DEFAULT_SEED, DEFAULT_VECTORS, Schedule, TestbenchResult, emit_testbench,
                        parse_testbench, run_external, run_testbench)
from .verilog import emit_verilog, foldable_groups
from .wrapper import EXTRA_LATENCY, emit_wrapper, wrap, wrapper_name

__all__ = [
    "DEFAULT_SEED", "DEFAULT_VECTORS", "EXTRA_LATENCY", "Schedule", "TestbenchResult", "bundle_files",
    "emit_testbench", "emit_verilog", "emit_wrapper", "foldable_groups", "parse_modules", "parse_testbench",
    "read_verilog", "run_external", "run_testbench", "wrap", "wrapper_name", "write_bundle",
]
