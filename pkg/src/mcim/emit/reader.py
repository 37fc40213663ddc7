"""Structural reader for the Verilog subset this package writes.

Handles module headers (ANSI or not), wire/reg declarations, continuous
assignments with ``~ & ^ | + ?:``, concatenations, bit/part selects, clocked
always blocks with if/else and nonblocking assignments, and one level of
named-port instantiation (flattened).  XOR/majority assignment pairs are
recognised as HA/FA cells, so emitted designs read back cell for cell.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Sequence

from ..compress import ripple_add
from ..errors import VerilogParseError
from ..netlist.core import CONST0, CONST1, UNDRIVEN, Cell, Kind, Netlist, const_bits, instantiate

_TOKEN = re.compile(
    r"\s*(?:(//[^\n]*|/\*.*?\*/)|(\d+'[bBdDhHoO][0-9a-fA-F_xXzZ]+)|(\d+)|([A-Za-z_][A-Za-z0-9_$]*)"
    r"|(<=|[()\[\]{},;:?=~&|^+@.#*-]))",
    re.S,
)


def tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise VerilogParseError(f"unexpected character {text[pos:pos + 20]!r} at offset {pos}")
        pos = m.end()
        if m.group(1):
            continue
        if m.group(2):
            out.append(("num", m.group(2)))
        elif m.group(3):
            out.append(("int", m.group(3)))
        elif m.group(4):
            out.append(("id", m.group(4)))
        else:
            out.append(("op", m.group(5)))
    return out


@dataclass
class Module:
    name: str
    ports: list[str] = field(default_factory=list)
    dirs: dict[str, str] = field(default_factory=dict)
    widths: dict[str, int] = field(default_factory=dict)
    regs: set = field(default_factory=set)
    assigns: list = field(default_factory=list)
    always: list = field(default_factory=list)
    instances: list = field(default_factory=list)


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers -------------------------------------------------------
    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", "")

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def accept(self, value):
        if self.peek()[1] == value and self.peek()[0] in ("op", "id"):
            self.i += 1
            return True
        return False

    def expect(self, value):
        t = self.next()
        if t[1] != value:
            raise VerilogParseError(f"expected {value!r}, got {t[1]!r} (token {self.i})")
        return t

    def ident(self):
        t = self.next()
        if t[0] != "id":
            raise VerilogParseError(f"expected identifier, got {t[1]!r} (token {self.i})")
        return t[1]

    def integer(self):
        t = self.next()
        if t[0] != "int":
            raise VerilogParseError(f"expected integer, got {t[1]!r}")
        return int(t[1])

    # -- structure -------------------------------------------------------------
    def parse(self) -> dict[str, Module]:
        mods = {}
        while self.peek()[0] != "eof":
            if self.peek()[1] == "`timescale":
                raise VerilogParseError("compiler directives are not supported")
            self.expect("module")
            m = self.module()
            mods[m.name] = m
        return mods

    def range_(self):
        if self.accept("["):
            hi = self.integer()
            self.expect(":")
            lo = self.integer()
            self.expect("]")
            if lo != 0:
                raise VerilogParseError("only [msb:0] ranges are supported")
            return hi + 1
        return 1

    def module(self) -> Module:
        m = Module(self.ident())
        self.expect("(")
        if not self.accept(")"):
            while True:
                if self.peek()[1] in ("input", "output"):
                    d = self.next()[1]
                    is_reg = self.accept("reg")
                    self.accept("wire")
                    w = self.range_()
                    name = self.ident()
                    m.ports.append(name)
                    m.dirs[name] = d
                    m.widths[name] = w
                    if is_reg:
                        m.regs.add(name)
                else:
                    m.ports.append(self.ident())
                if self.accept(")"):
                    break
                self.expect(",")
        self.expect(";")
        while not self.accept("endmodule"):
            self.item(m)
        return m

    def names(self):
        out = [self.ident()]
        while self.accept(","):
            out.append(self.ident())
        self.expect(";")
        return out

    def item(self, m: Module):
        t = self.peek()[1]
        if t in ("input", "output"):
            self.next()
            is_reg = self.accept("reg")
            self.accept("wire")
            w = self.range_()
            for n in self.names():
                m.dirs[n] = t
                m.widths[n] = w
                if is_reg:
                    m.regs.add(n)
        elif t in ("wire", "reg"):
            self.next()
            w = self.range_()
            for n in self.names():
                m.widths[n] = w
                if t == "reg":
                    m.regs.add(n)
        elif t == "assign":
            self.next()
            lhs = self.lvalue()
            self.expect("=")
            rhs = self.expr()
            self.expect(";")
            m.assigns.append((lhs, rhs))
        elif t == "always":
            self.next()
            self.expect("@")
            self.expect("(")
            self.expect("posedge")
            clk = self.ident()
            self.expect(")")
            m.always.append((clk, self.stmt()))
        elif self.peek()[0] == "id" and self.peek(1)[0] == "id":
            mod = self.ident()
            inst = self.ident()
            self.expect("(")
            conns = {}
            if not self.accept(")"):
                while True:
                    self.expect(".")
                    port = self.ident()
                    self.expect("(")
                    conns[port] = None if self.peek()[1] == ")" else self.expr()
                    self.expect(")")
                    if self.accept(")"):
                        break
                    self.expect(",")
            self.expect(";")
            m.instances.append((mod, inst, conns))
        else:
            raise VerilogParseError(f"unsupported module item starting with {t!r}")

    def stmt(self):
        if self.accept("begin"):
            body = []
            while not self.accept("end"):
                body.append(self.stmt())
            return ("block", body)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.stmt()
            other = self.stmt() if self.accept("else") else ("block", [])
            return ("if", cond, then, other)
        lhs = self.lvalue()
        self.expect("<=")
        rhs = self.expr()
        self.expect(";")
        return ("nb", lhs, rhs)

    def lvalue(self):
        if self.accept("{"):
            parts = [self.lvalue()]
            while self.accept(","):
                parts.append(self.lvalue())
            self.expect("}")
            return ("concat", parts)
        return self.ref(self.ident())

    def ref(self, name):
        if self.accept("["):
            hi = self.integer()
            if self.accept(":"):
                lo = self.integer()
                self.expect("]")
                return ("slice", name, hi, lo)
            self.expect("]")
            return ("index", name, hi)
        return ("id", name)

    # -- expressions -----------------------------------------------------------
    def expr(self):
        c = self.binary(0)
        if self.accept("?"):
            t = self.expr()
            self.expect(":")
            f = self.expr()
            return ("mux", c, t, f)
        return c

    _LEVELS = [("|", "or"), ("^", "xor"), ("&", "and"), ("+", "add")]

    def binary(self, level):
        if level == len(self._LEVELS):
            return self.unary()
        op, tag = self._LEVELS[level]
        node = self.binary(level + 1)
        while self.peek() == ("op", op):
            self.next()
            node = (tag, node, self.binary(level + 1))
        return node

    def unary(self):
        if self.accept("~"):
            return ("not", self.unary())
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("{"):
            parts = [self.expr()]
            while self.accept(","):
                parts.append(self.expr())
            self.expect("}")
            return ("concat", parts)
        t = self.next()
        if t[0] == "num":
            return _literal(t[1])
        if t[0] == "int":
            return ("num", None, int(t[1]))
        if t[0] == "id":
            return self.ref(t[1])
        raise VerilogParseError(f"unexpected token {t[1]!r} in expression")


def _literal(text):
    size, rest = text.split("'")
    base = {"b": 2, "d": 10, "h": 16, "o": 8}[rest[0].lower()]
    digits = rest[1:].replace("_", "")
    if re.search(r"[xXzZ]", digits):
        raise VerilogParseError(f"x/z literals are not supported: {text}")
    return ("num", int(size), int(digits, base))


def _refs(e, out):
    tag = e[0]
    if tag in ("id", "index", "slice"):
        out.add(e[1])
    elif tag in ("not",):
        _refs(e[1], out)
    elif tag in ("and", "or", "xor", "add"):
        _refs(e[1], out)
        _refs(e[2], out)
    elif tag == "mux":
        for x in e[1:]:
            _refs(x, out)
    elif tag == "concat":
        for x in e[1]:
            _refs(x, out)
    return out


def _bitref(e):
    if e[0] in ("index", "id", "num"):
        return e
    return None


def _is_fa_pair(s_expr, c_expr):
    if s_expr[0] != "xor" or s_expr[1][0] != "xor":
        return None
    p, q, r = s_expr[1][1], s_expr[1][2], s_expr[2]
    if not all(_bitref(x) for x in (p, q, r)):
        return None
    want = ("or", ("or", ("and", p, q), ("and", p, r)), ("and", q, r))
    return (p, q, r) if c_expr == want else None


def _is_ha_pair(s_expr, c_expr):
    if s_expr[0] != "xor" or not (_bitref(s_expr[1]) and _bitref(s_expr[2])):
        return None
    if s_expr[1][0] == "xor":
        return None
    p, q = s_expr[1], s_expr[2]
    return (p, q) if c_expr == ("and", p, q) else None


class Elaborator:
    def __init__(self, modules: dict[str, Module]):
        self.modules = modules
        self.cache: dict[str, Netlist] = {}

    def netlist(self, name: str) -> Netlist:
        if name not in self.cache:
            if name not in self.modules:
                raise VerilogParseError(f"unknown module {name!r}")
            self.cache[name] = self._build(self.modules[name])
        return self.cache[name]

    def _build(self, m: Module) -> Netlist:
        nl = Netlist(m.name, fold=False)
        self.nl = nl
        self.m = m
        bits: dict[str, list] = {}
        self.bits = bits
        for p in m.ports:
            if p not in m.dirs:
                raise VerilogParseError(f"port {p} has no direction")
            if m.dirs[p] == "input":
                bits[p] = nl.add_input(p, m.widths[p])
        for name, w in m.widths.items():
            bits.setdefault(name, [None] * w)

        # registers get their Q nets up front, which breaks every loop
        next_state: dict[tuple[str, int], tuple] = {}
        for clk, body in m.always:
            self._exec(body, next_state, None)
        dff_cells = {}
        for (name, i) in sorted(next_state):
            q = nl.add_cell(Kind.DFF, (UNDRIVEN, UNDRIVEN))[0]
            bits[name][i] = q
            dff_cells[(name, i)] = len(nl.cells) - 1

        stmts = self._statements(m)
        driver: dict[str, set] = {}
        for sid, st in enumerate(stmts):
            for name in st["drives"]:
                driver.setdefault(name, set()).add(sid)
        ts = TopologicalSorter()
        for sid, st in enumerate(stmts):
            deps = set()
            for name in st["reads"]:
                deps |= driver.get(name, set())
            deps.discard(sid)
            ts.add(sid, *sorted(deps))
        try:
            order = list(ts.static_order())
        except CycleError as e:
            raise VerilogParseError(f"combinational loop through statements {e.args[1]}") from None
        for sid in order:
            self._run(stmts[sid])

        for (name, i), tree in sorted(next_state.items()):
            d, rst = self._dff_inputs(tree, name, i)
            cell_i = dff_cells[(name, i)]
            nl.cells[cell_i] = Cell(Kind.DFF, (d, rst), nl.cells[cell_i].outs)
            if rst == CONST0 or rst is None:
                nl.cells[cell_i] = Cell(Kind.DFF, (d, CONST0), nl.cells[cell_i].outs)
        for p in m.ports:
            if m.dirs[p] == "output":
                vec = bits[p]
                if any(b is None for b in vec):
                    raise VerilogParseError(f"output {p} is not fully driven")
                nl.add_output(p, vec)
        if "rst" in [p.name for p in nl.inputs]:
            nl.rst = nl.port("rst").nets[0]
        return nl

    # -- statements -----------------------------------------------------------
    def _statements(self, m: Module):
        stmts = []
        assigns = m.assigns
        i = 0
        while i < len(assigns):
            lhs, rhs = assigns[i]
            if i + 1 < len(assigns) and lhs[0] in ("id", "index"):
                lhs2, rhs2 = assigns[i + 1]
                fa = _is_fa_pair(rhs, rhs2)
                ha = None if fa else _is_ha_pair(rhs, rhs2)
                if (fa or ha) and lhs2[0] in ("id", "index"):
                    ops = fa or ha
                    reads = set()
                    for x in ops:
                        _refs(x, reads)
                    stmts.append({"kind": "FA" if fa else "HA", "ops": ops, "lhs": (lhs, lhs2),
                                  "reads": reads, "drives": {lhs[1], lhs2[1]}})
                    i += 2
                    continue
            stmts.append({"kind": "assign", "lhs": lhs, "rhs": rhs, "reads": _refs(rhs, set()),
                          "drives": _refs(lhs, set())})
            i += 1
        for mod, inst, conns in m.instances:
            child = self.modules.get(mod)
            if child is None:
                raise VerilogParseError(f"instance {inst} of unknown module {mod}")
            reads, drives = set(), set()
            for port, e in conns.items():
                if e is None:
                    continue
                if child.dirs.get(port) == "input":
                    _refs(e, reads)
                elif child.dirs.get(port) == "output":
                    _refs(e, drives)
                else:
                    raise VerilogParseError(f"{mod} has no port {port}")
            stmts.append({"kind": "inst", "mod": mod, "conns": conns, "reads": reads, "drives": drives})
        return stmts

    def _targets(self, lv) -> list[tuple[str, int]]:
        tag = lv[0]
        if tag == "id":
            return [(lv[1], i) for i in range(len(self.bits[lv[1]]))]
        if tag == "index":
            return [(lv[1], lv[2])]
        if tag == "slice":
            return [(lv[1], i) for i in range(lv[3], lv[2] + 1)]
        if tag == "concat":
            out = []
            for part in reversed(lv[1]):
                out += self._targets(part)
            return out
        raise VerilogParseError(f"bad assignment target {lv!r}")

    def _bind(self, lv, nets):
        tg = self._targets(lv)
        nets = list(nets[: len(tg)]) + [CONST0] * (len(tg) - len(nets))
        for (name, i), n in zip(tg, nets):
            if name not in self.bits:
                raise VerilogParseError(f"assignment to undeclared {name}")
            if self.bits[name][i] is not None and self.m.dirs.get(name) == "input":
                raise VerilogParseError(f"assignment to input {name}")
            self.bits[name][i] = n

    def _run(self, st):
        nl = self.nl
        if st["kind"] == "assign":
            w = len(self._targets(st["lhs"]))
            self._bind(st["lhs"], self.eval(st["rhs"], w))
        elif st["kind"] in ("FA", "HA"):
            ins = [self.eval(x, 1)[0] for x in st["ops"]]
            s, c = nl.add_cell(Kind[st["kind"]], ins)
            self._bind(st["lhs"][0], [s])
            self._bind(st["lhs"][1], [c])
        else:
            child = self.sub(st["mod"])
            mod = self.modules[st["mod"]]
            connect = {}
            for port, e in st["conns"].items():
                if e is not None and mod.dirs[port] == "input":
                    connect[port] = self.eval(e, mod.widths[port])[: mod.widths[port]]
                    connect[port] += [CONST0] * (mod.widths[port] - len(connect[port]))
            outs = instantiate(nl, child, connect)
            for port, e in st["conns"].items():
                if e is not None and mod.dirs[port] == "output":
                    self._bind(e, outs[port])

    def sub(self, name):
        saved = (self.nl, self.m, self.bits)
        try:
            return self.netlist(name)
        finally:
            self.nl, self.m, self.bits = saved

    # -- always blocks -------------------------------------------------------------
    def _exec(self, s, state, cond):
        tag = s[0]
        if tag == "block":
            for x in s[1]:
                self._exec(x, state, cond)
        elif tag == "if":
            then_state: dict = {}
            else_state: dict = {}
            self._exec(s[2], then_state, None)
            self._exec(s[3], else_state, None)
            for key in sorted(set(then_state) | set(else_state)):
                hold = state.get(key, ("q", key))
                state[key] = ("mux", s[1], then_state.get(key, hold), else_state.get(key, hold))
        elif tag == "nb":
            tg = self._targets_static(s[1])
            for j, key in enumerate(tg):
                state[key] = ("bit", s[2], j, len(tg))
        else:
            raise VerilogParseError(f"unsupported statement {tag}")

    def _targets_static(self, lv):
        m = self.m
        tag = lv[0]
        if tag == "id":
            return [(lv[1], i) for i in range(m.widths[lv[1]])]
        if tag == "index":
            return [(lv[1], lv[2])]
        if tag == "slice":
            return [(lv[1], i) for i in range(lv[3], lv[2] + 1)]
        out = []
        for part in reversed(lv[1]):
            out += self._targets_static(part)
        return out

    def _tree_net(self, t):
        if t[0] == "q":
            name, i = t[1]
            return self.bits[name][i]
        if t[0] == "bit":
            nets = self.eval(t[1], t[3])
            return nets[t[2]] if t[2] < len(nets) else CONST0
        c = self._one(self.eval(t[1], 1))
        return self.nl.MUX(c, self._tree_net(t[3]), self._tree_net(t[2]))

    def _dff_inputs(self, tree, name, i):
        # "if (r) q <= 0; else q <= d" becomes a reset pin
        if tree[0] == "mux" and tree[2][0] == "bit" and tree[2][1][0] == "num" and tree[2][1][2] == 0:
            rst = self._one(self.eval(tree[1], 1))
            return self._tree_net(tree[3]), rst
        return self._tree_net(tree), CONST0

    # -- expressions -----------------------------------------------------------------
    def _one(self, nets):
        out = nets[0]
        for n in nets[1:]:
            out = self.nl.OR(out, n)
        return out

    def _vec(self, name):
        v = self.bits.get(name)
        if v is None:
            raise VerilogParseError(f"undeclared identifier {name}")
        if any(b is None for b in v):
            raise VerilogParseError(f"{name} is read before it is driven")
        return v

    def eval(self, e, ctx: int = 1) -> list[int]:
        nl = self.nl
        tag = e[0]
        if tag == "id":
            return list(self._vec(e[1]))
        if tag == "index":
            v = self.bits.get(e[1])
            if v is None or v[e[2]] is None:
                raise VerilogParseError(f"{e[1]}[{e[2]}] is read before it is driven")
            return [v[e[2]]]
        if tag == "slice":
            v = self.bits[e[1]]
            part = v[e[3]: e[2] + 1]
            if any(b is None for b in part):
                raise VerilogParseError(f"{e[1]}[{e[2]}:{e[3]}] is read before it is driven")
            return list(part)
        if tag == "num":
            width = e[1] if e[1] is not None else max(32, e[2].bit_length())
            return const_bits(e[2], width)
        if tag == "not":
            return [nl.NOT(b) for b in self.eval(e[1], ctx)]
        if tag in ("and", "or", "xor"):
            x, y = self.eval(e[1], ctx), self.eval(e[2], ctx)
            w = max(len(x), len(y))
            x += [CONST0] * (w - len(x))
            y += [CONST0] * (w - len(y))
            op = {"and": nl.AND, "or": nl.OR, "xor": nl.XOR}[tag]
            return [op(p, q) for p, q in zip(x, y)]
        if tag == "add":
            x, y = self.eval(e[1], ctx), self.eval(e[2], ctx)
            w = max(len(x), len(y), ctx)
            nl.fold = True
            try:
                return ripple_add(nl, x, y, width=w, label="add")
            finally:
                nl.fold = False
        if tag == "mux":
            c = self._one(self.eval(e[1], 1))
            t, f = self.eval(e[2], ctx), self.eval(e[3], ctx)
            w = max(len(t), len(f))
            t += [CONST0] * (w - len(t))
            f += [CONST0] * (w - len(f))
            return [nl.MUX(c, q, p) for p, q in zip(t, f)]
        if tag == "concat":
            out = []
            for part in reversed(e[1]):
                out += self.eval(part, 1)
            return out
        raise VerilogParseError(f"unsupported expression {tag}")


def parse_modules(sources: Sequence[str] | str) -> dict[str, Module]:
    if isinstance(sources, str):
        sources = [sources]
    mods: dict[str, Module] = {}
    for text in sources:
        mods.update(Parser(text).parse())
    return mods


def read_verilog(sources: Sequence[str] | str, top: str | None = None) -> Netlist:
    """Elaborate Verilog text (one or more sources) into a flat netlist."""
    mods = parse_modules(sources)
    if not mods:
        raise VerilogParseError("no modules found")
    if top is None:
        used = {inst[0] for m in mods.values() for inst in m.instances}
        tops = [n for n in mods if n not in used]
        if len(tops) != 1:
            raise VerilogParseError(f"cannot pick a top module among {tops}; pass top=")
        top = tops[0]
    return Elaborator(mods).netlist(top)
