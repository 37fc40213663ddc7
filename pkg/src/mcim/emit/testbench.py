"""Self-checking Verilog testbench for the wrapper, plus an in-process runner.

Stimulus comes from a 64-bit LCG (``s = s*6364136223846793005 +
1442695040888963407``); each draw takes ``s[63:32]`` and wider operands are
assembled from successive draws, lowest 32 bits first.  Every cycle draws a
fresh ``a`` then ``b``; on issue cycles the values are kept as a test vector and
on all other cycles they are garbage the design must ignore.

:func:`run_testbench` replays exactly the same schedule on the netlist read
back from the emitted Verilog, so the bundle can be checked without an external
simulator.  :func:`run_external` drives Icarus Verilog when it is installed.
"""
from __future__ import annotations

import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..arch.common import GeneratedDesign
from ..errors import VerilogParseError
from ..netlist.sim import run_lanes
from .reader import read_verilog
from .wrapper import EXTRA_LATENCY, wrapper_name

LCG_MUL = 6364136223846793005
LCG_INC = 1442695040888963407
MASK64 = (1 << 64) - 1
DEFAULT_VECTORS = 200
DEFAULT_SEED = 1
RST_CYCLES = 2


def lcg_stream(seed: int):
    state = seed & MASK64
    while True:
        state = (state * LCG_MUL + LCG_INC) & MASK64
        yield state >> 32


def draw(stream, width: int) -> int:
    v = 0
    for k in range(0, width, 32):
        v |= next(stream) << k
    return v & ((1 << width) - 1)


@dataclass
class Schedule:
    m: int
    n: int
    ct: int
    lat: int
    vectors: int
    seed: int
    rst_cycles: int = RST_CYCLES

    @property
    def cycles(self) -> int:
        return self.rst_cycles + (self.vectors - 1) * self.ct + self.lat

    def stimulus(self):
        """Per-cycle (rst, a, b) and the issued vectors."""
        s = lcg_stream(self.seed)
        rows, vecs = [], []
        for cyc in range(self.cycles):
            u = cyc - self.rst_cycles
            a = draw(s, self.m)
            b = draw(s, self.n)
            if u >= 0 and u % self.ct == 0 and u // self.ct < self.vectors:
                vecs.append((a, b))
            rows.append((1 if u < 0 else 0, a, b))
        return rows, vecs

    def result_index(self, u: int) -> int | None:
        k = u - (self.lat - 1)
        if k >= 0 and k % self.ct == 0 and k // self.ct < self.vectors:
            return k // self.ct
        return None


def emit_testbench(design: GeneratedDesign, vectors: int = DEFAULT_VECTORS, seed: int = DEFAULT_SEED) -> str:
    cfg = design.config
    m, n = cfg.width_a, cfg.width_b
    lat = design.latency + EXTRA_LATENCY
    tb = f"{design.name}_tb"
    wm = max(m, n) + 32
    text = f"""// {tb}: self-checking testbench for {wrapper_name(design)}
`timescale 1ns/1ps
module {tb};
  localparam M = {m};
  localparam N = {n};
  localparam CT = {cfg.ct};
  localparam LAT = {lat};
  localparam VECTORS = {vectors};
  localparam RST_CYCLES = {RST_CYCLES};
  localparam [63:0] SEED = 64'd{seed & MASK64};
  localparam TOTAL = RST_CYCLES + (VECTORS - 1) * CT + LAT;

  reg clk = 1'b0;
  reg rst = 1'b1;
  reg [M-1:0] a = {{M{{1'b0}}}};
  reg [N-1:0] b = {{N{{1'b0}}}};
  wire [M+N-1:0] p;
  wire p_valid;

  reg [63:0] state;
  reg [{wm - 1}:0] tmp;
  reg [M-1:0] a_hist [0:VECTORS-1];
  reg [N-1:0] b_hist [0:VECTORS-1];
  reg [M+N-1:0] expected;
  integer cyc, u, k, j, pass_n, fail_n;

  {wrapper_name(design)} dut (
    .clk(clk),
    .rst(rst),
    .a(a),
    .b(b),
    .p(p),
    .p_valid(p_valid)
  );

  always #5 clk = ~clk;

  task draw;
    input integer width;
    begin
      tmp = 0;
      for (k = 0; k < width; k = k + 32) begin
        state = state * 64'd{LCG_MUL} + 64'd{LCG_INC};
        tmp = tmp | (state[63:32] << k);
      end
    end
  endtask

  initial begin
    state = SEED;
    pass_n = 0;
    fail_n = 0;
    for (cyc = 0; cyc < TOTAL; cyc = cyc + 1) begin
      @(negedge clk);
      u = cyc - RST_CYCLES;
      rst = (u < 0);
      draw(M);
      a = tmp[M-1:0];
      draw(N);
      b = tmp[N-1:0];
      if (u >= 0 && u % CT == 0 && u / CT < VECTORS) begin
        a_hist[u / CT] = a;
        b_hist[u / CT] = b;
      end
      #1;
      if (u >= 0) begin
        j = u - (LAT - 1);
        if (j >= 0 && j % CT == 0 && j / CT < VECTORS) begin
          expected = a_hist[j / CT];
          expected = expected * b_hist[j / CT];
          if (p_valid === 1'b1 && p === expected) begin
            pass_n = pass_n + 1;
          end else begin
            fail_n = fail_n + 1;
            $display("MISMATCH vector %0d: a=%0d b=%0d p=%0d p_valid=%b expected %0d",
                     j / CT, a_hist[j / CT], b_hist[j / CT], p, p_valid, expected);
          end
        end else if (p_valid !== 1'b0) begin
          fail_n = fail_n + 1;
          $display("UNEXPECTED p_valid at cycle %0d", u);
        end
      end
    end
    $display("PASS %0d FAIL %0d", pass_n, fail_n);
    $finish;
  end
endmodule
"""
    return text


_PARAM = re.compile(r"localparam\s+(?:\[[^\]]*\]\s*)?(\w+)\s*=\s*(?:\d+'d)?(\d+)\s*;")
_DUT = re.compile(r"^\s*(\w+)\s+dut\s*\(", re.M)


def parse_testbench(text: str) -> tuple[Schedule, str]:
    """Recover the schedule parameters and wrapper module name from testbench text."""
    params = {k: int(v) for k, v in _PARAM.findall(text)}
    need = ("M", "N", "CT", "LAT", "VECTORS", "SEED")
    missing = [k for k in need if k not in params]
    m = _DUT.search(text)
    if missing or not m:
        raise VerilogParseError(f"testbench is missing {missing or ['dut instance']}")
    sched = Schedule(params["M"], params["N"], params["CT"], params["LAT"], params["VECTORS"], params["SEED"],
                     params.get("RST_CYCLES", RST_CYCLES))
    return sched, m.group(1)


@dataclass
class TestbenchResult:
    passed: int
    failed: int
    messages: list

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def summary(self) -> str:
        return f"PASS {self.passed} FAIL {self.failed}"


def run_testbench(tb_text: str, sources: Sequence[str]) -> TestbenchResult:
    """Execute the testbench's schedule on the netlist read from ``sources``."""
    sched, top = parse_testbench(tb_text)
    nl = read_verilog(list(sources), top=top)
    rows, vecs = sched.stimulus()
    cycles = len(rows)
    drive = {
        "rst": _planes([r[0] for r in rows], 1),
        "a": _planes([r[1] for r in rows], sched.m),
        "b": _planes([r[2] for r in rows], sched.n),
    }
    rec = run_lanes(nl, drive, cycles, ["p", "p_valid"], nw=1)
    p_vals = _values(rec["p"])
    v_vals = _values(rec["p_valid"])
    passed = failed = 0
    msgs = []
    for cyc in range(sched.rst_cycles, cycles):
        u = cyc - sched.rst_cycles
        j = sched.result_index(u)
        if j is not None:
            a, b = vecs[j]
            if v_vals[cyc] == 1 and p_vals[cyc] == a * b:
                passed += 1
            else:
                failed += 1
                msgs.append(f"MISMATCH vector {j}: a={a} b={b} p={p_vals[cyc]} p_valid={v_vals[cyc]} expected {a * b}")
        elif v_vals[cyc] != 0:
            failed += 1
            msgs.append(f"UNEXPECTED p_valid at cycle {u}")
    return TestbenchResult(passed, failed, msgs)


def _planes(vals, width):
    out = np.zeros((len(vals), width, 1), dtype=np.uint64)
    for t, v in enumerate(vals):
        for i in range(width):
            if (v >> i) & 1:
                out[t, i, 0] = 1
    return out


def _values(planes):
    bits = planes[:, :, 0] & np.uint64(1)
    return [sum(int(x) << i for i, x in enumerate(row)) for row in bits.tolist()]


def run_external(tb_path: Path, sources: Sequence[Path], simulator: str = "iverilog") -> TestbenchResult | None:
    """Run with Icarus Verilog if available; None when the tool is missing."""
    if shutil.which(simulator) is None or shutil.which("vvp") is None:
        return None
    with tempfile.TemporaryDirectory() as tmp:
        exe = Path(tmp) / "tb.vvp"
        subprocess.run([simulator, "-g2001", "-o", str(exe), str(tb_path), *map(str, sources)],
                       check=True, capture_output=True, text=True)
        out = subprocess.run(["vvp", str(exe)], check=True, capture_output=True, text=True).stdout
    m = re.search(r"PASS (\d+) FAIL (\d+)", out)
    if not m:
        raise RuntimeError(f"simulator output has no summary line:\n{out}")
    return TestbenchResult(int(m.group(1)), int(m.group(2)), [l for l in out.splitlines() if l.startswith(("MISMATCH", "UNEXPECTED"))])
