"""Final carry-propagate adders: the single-cycle 1CA and the folded 3CA."""
from __future__ import annotations

from math import ceil
from typing import Sequence

from ..compress import ripple_add
from ..errors import WidthNotPositive
from ..netlist.core import CONST0, Netlist


def _check(s, c):
    if len(s) != len(c):
        raise ValueError(f"adder inputs differ in width: {len(s)} vs {len(c)}")
    if not s:
        raise WidthNotPositive("adder width must be positive")


def final_adder_1ca(nl: Netlist, s: Sequence[int], c: Sequence[int]) -> list[int]:
    """Ripple ``s + c`` modulo ``2**len(s)``, tagged so emission writes a single '+'."""
    _check(s, c)
    return ripple_add(nl, s, c, width=len(s), label="final_adder")


def final_adder_3ca(nl: Netlist, s: Sequence[int], c: Sequence[int], phases: Sequence[int],
                    stash: tuple[Sequence[int], Sequence[int]] | None = None) -> list[int]:
    """One ``ceil(w/3)``-bit adder slice reused over three cycles.

    ``phases = (p0, p1, p2)`` are one-hot nets.  The pair ``(s, c)`` must be
    live during ``p0``; ``stash`` must hold the same pair during ``p1`` (fresh
    registers are created when omitted).  The returned sum is valid during
    ``p2``, two cycles after the inputs.
    """
    _check(s, c)
    w = len(s)
    g = ceil(w / 3)
    p0, p1, _ = phases
    if stash is None:
        stash = (nl.dffv(s[g:]), nl.dffv(c[g:]))
        stash = ([CONST0] * g + stash[0], [CONST0] * g + stash[1])
    hs, hc = stash

    def seg(bits, k):
        part = list(bits[k * g:(k + 1) * g])
        return part + [CONST0] * (g - len(part))

    # the top segment is copied out of the stash while it is still valid
    ys, yc = nl.dffv(seg(hs, 2)), nl.dffv(seg(hc, 2))
    x = nl.MUXV(p0, nl.MUXV(p1, ys, seg(hs, 1)), seg(s, 0))
    y = nl.MUXV(p0, nl.MUXV(p1, yc, seg(hc, 1)), seg(c, 0))
    carry = nl.reg(1)
    cin = nl.AND(nl.NOT(p0), carry[0])
    total = ripple_add(nl, x, y, cin)
    nl.drive(carry, [total[g]])
    r1 = nl.dffv(total[:g])
    r0 = nl.dffv(r1)
    return (r0 + r1 + total[:g])[:w]
