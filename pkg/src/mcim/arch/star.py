"""Single-cycle baseline: one full PPM and a 1CA."""
from __future__ import annotations

from ..config import Arch, MultiplierConfig, validate
from ..ppm import build_simple
from .adders import final_adder_1ca
from .common import design, finish, shell


def build_star(cfg: MultiplierConfig):
    validate(cfg)
    if cfg.arch is not Arch.STAR:
        raise ValueError(f"expected a Star config, got {cfg.arch.value}")
    nl, a, b = shell(cfg)
    ppm = build_simple(nl, a, b, cfg.ppm_kind)
    total = final_adder_1ca(nl, ppm.sum_bits, ppm.carry_bits)
    width = cfg.width_a + cfg.width_b
    finish(nl, total, nl.NOT(nl.rst), width)
    return design(nl, cfg, ppm_dims=(cfg.width_a, cfg.width_b), compressor_width=width, adder_width=width)
