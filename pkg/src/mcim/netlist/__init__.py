from .analysis import Problem, check, depth_of, fanout, levelize, merge_equivalent, net_levels, require_checked
from .core import CONST0, CONST1, AdderGroup, Cell, Kind, Netlist, Port, const_bits
from .sim import SimTrace, compile_netlist, evaluate, pack, run_lanes, simulate, unpack, words_for

__all__ = [
    "AdderGroup", "CONST0", "CONST1", "Cell", "Kind", "Netlist", "Port", "Problem", "SimTrace",
    "check", "compile_netlist", "const_bits", "depth_of", "fanout", "levelize", "merge_equivalent", "net_levels",
    "evaluate", "pack", "require_checked", "run_lanes", "simulate", "unpack", "words_for",
]
