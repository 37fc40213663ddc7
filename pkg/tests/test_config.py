import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mcim import Arch, CompressorKind, FinalAdderKind, MultiplierConfig, derived_metrics, validate
from mcim.config import arch_defaults, karatsuba_ppm_width, karatsuba_recursion_ok, parse_enum, violations
from mcim.errors import ConfigError


def codes(cfg):
    return {v.code for v in violations(cfg)}


def test_defaults_are_valid_feedback():
    cfg = MultiplierConfig()
    assert validate(cfg) is cfg
    assert cfg.arch is Arch.FEEDBACK and cfg.comp_kind is CompressorKind.FA_CHAIN


@pytest.mark.parametrize("text,member", [
    ("FB", Arch.FEEDBACK), ("ff", Arch.FEEDFORWARD), ("Karatsuba", Arch.KARATSUBA), ("star", Arch.STAR),
    ("DW02", CompressorKind.DADDA), ("rococo", CompressorKind.ROCOCO), ("FAS", CompressorKind.FA_CHAIN),
    ("3CA", FinalAdderKind.THREE_CYCLE), ("OneCycle", FinalAdderKind.ONE_CYCLE),
])
def test_aliases(text, member):
    assert parse_enum(type(member), text) is member


def test_unknown_alias():
    with pytest.raises(ValueError):
        MultiplierConfig(arch="systolic")


@pytest.mark.parametrize("arch,ct,ok", [
    ("star", 1, True), ("star", 2, False), ("ff", 2, True), ("ff", 3, False),
    ("karatsuba", 3, True), ("karatsuba", 4, False), ("fb", 1, False), ("fb", 8, True),
])
def test_ct_rules(arch, ct, ok):
    cfg = MultiplierConfig(8, 8, ct, arch, comp_kind="fas" if arch == "fb" else "dadda")
    assert ("InvalidCT" not in codes(cfg)) == ok


def test_three_cycle_adder_rules():
    assert "InvalidFA" in codes(MultiplierConfig(8, 8, 2, "fb", fa_kind="3ca"))
    assert "InvalidFA" in codes(MultiplierConfig(8, 8, 4, "fb", fa_kind="3ca"))
    assert not codes(MultiplierConfig(8, 8, 3, "karatsuba", comp_kind="dadda", fa_kind="3ca"))


def test_fa_chain_only_in_feedback():
    assert "InvalidCompressor" in codes(MultiplierConfig(8, 8, 1, "star"))
    assert "InvalidCompressor" in codes(MultiplierConfig(8, 8, 2, "fb", ppm_kind="fas"))


def test_every_violation_reported():
    cfg = MultiplierConfig(1, 8, 2, "karatsuba", fa_kind="3ca", karatsuba_levels=0, extra_pipeline_stages=-1)
    with pytest.raises(ConfigError) as e:
        validate(cfg)
    got = {v.code for v in e.value.violations}
    assert {"InvalidWidth", "InvalidCT", "InvalidFA", "InvalidCompressor", "InvalidLevels", "InvalidPipeline"} <= got


def test_karatsuba_levels_limit():
    assert karatsuba_ppm_width(8, 8) == 5
    assert karatsuba_recursion_ok(5, 0) and not karatsuba_recursion_ok(3, 1)
    assert not codes(MultiplierConfig(16, 16, 3, "karatsuba", comp_kind="dadda", karatsuba_levels=3))
    assert not codes(MultiplierConfig(8, 8, 3, "karatsuba", comp_kind="dadda", karatsuba_levels=2))
    assert "InvalidLevels" in codes(MultiplierConfig(8, 8, 3, "karatsuba", comp_kind="dadda", karatsuba_levels=3))


def test_derived_metrics():
    m = derived_metrics(MultiplierConfig(16, 16, 4))
    assert m.throughput == Fraction(1, 4) and m.chunk_width == 4 and m.latency == 4
    k = derived_metrics(MultiplierConfig(16, 16, 3, "karatsuba", comp_kind="dadda", fa_kind="3ca",
                                         extra_pipeline_stages=2))
    assert (k.min_latency, k.latency) == (5, 7)
    assert derived_metrics(MultiplierConfig(8, 8, 1, "star", comp_kind="dadda")).latency == 1


def test_json_round_trip_and_unknown_fields():
    cfg = MultiplierConfig(12, 9, 3, "fb", "rococo", "custom")
    assert MultiplierConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        MultiplierConfig.from_dict({"width_a": 8, "colour": "red"})
    with pytest.raises(ValueError):
        MultiplierConfig.from_json(json.dumps([1, 2]))


def test_arch_defaults_fill_compressor():
    assert arch_defaults({"arch": "ff"})["comp_kind"] == "DaddaTree"
    assert "comp_kind" not in arch_defaults({"arch": "fb"})
    assert arch_defaults({"arch": "star", "comp_kind": "rococo"})["comp_kind"] == "rococo"


def test_short_names():
    assert MultiplierConfig(8, 8, 3, "karatsuba", comp_kind="dadda", fa_kind="3ca").short_name == "mcim_karat_8x8_ct3_k1_3ca"
    assert MultiplierConfig(16, 16, 2, "ff", comp_kind="dadda", extra_pipeline_stages=2).short_name == "mcim_ff_16x16_ct2_p2"


@given(st.integers(2, 200), st.integers(2, 200), st.integers(2, 16))
def test_feedback_chunk_width_covers_operand(m, n, ct):
    cfg = MultiplierConfig(m, n, ct)
    if violations(cfg):
        assert n < ct
        return
    c = derived_metrics(cfg).chunk_width
    assert c * ct >= n and (c - 1) * ct < n
