import pytest

from mcim.arch import build, loop_cells, output_cone, pipeline
from mcim.config import MultiplierConfig
from mcim.estimate import area
from mcim.cli import inject_fault
from mcim.harness import check_random, exhaustive_equivalence


def cfg(**kw):
    return MultiplierConfig(**{"width_a": 12, "width_b": 12, **kw})


def test_zero_stages_is_identity():
    d = build(cfg(arch="ff", ct=2, comp_kind="dadda"))
    assert pipeline(d, 0) is d


@pytest.mark.parametrize("kw", [
    dict(arch="ff", ct=2, comp_kind="dadda"),
    dict(arch="star", ct=1, comp_kind="rococo"),
    dict(arch="fb", ct=3),
    dict(arch="karatsuba", ct=3, comp_kind="dadda"),
    dict(arch="karatsuba", ct=3, comp_kind="dadda", fa_kind="3ca"),
])
def test_latency_grows_by_p_and_function_is_kept(kw):
    base = build(cfg(**kw))
    depths = [area(base).max_depth]
    for p in (1, 2, 3):
        d = build(cfg(extra_pipeline_stages=p, **kw))
        assert d.latency == base.latency + p
        r = check_random(d, 400, seed=p)
        assert r.passed, r
        assert check_random(d, 200, seed=p, gap=2).passed
        depths.append(area(d).max_depth)
    assert depths == sorted(depths, reverse=True)


def test_loops_are_not_crossed():
    base = build(cfg(arch="fb", ct=4))
    piped = build(cfg(arch="fb", ct=4, extra_pipeline_stages=2))
    loops_before = {c.kind for i, c in enumerate(base.netlist.cells) if i in loop_cells(base.netlist)}
    assert len(loop_cells(piped.netlist)) == len(loop_cells(base.netlist))
    assert loops_before


def test_cone_excludes_loop_cells():
    d = build(cfg(arch="fb", ct=2))
    assert not (output_cone(d.netlist) & loop_cells(d.netlist))


def test_feedforward_depth_drops():
    d0 = build(cfg(arch="ff", ct=2, comp_kind="dadda", width_a=16, width_b=16))
    d2 = build(cfg(arch="ff", ct=2, comp_kind="dadda", width_a=16, width_b=16, extra_pipeline_stages=2))
    assert area(d2).max_depth < area(d0).max_depth
    assert d2.info["pipeline_stages"] == 2


def test_lockstep_equivalence_is_exhaustive_and_catches_faults():
    designs = [build(MultiplierConfig(8, 8, 2, "ff", comp_kind="dadda", extra_pipeline_stages=p)) for p in range(3)]
    rep = exhaustive_equivalence(designs)
    assert rep.passed and rep.vectors == 1 << 16
    bad = exhaustive_equivalence([designs[0], inject_fault(designs[2], bit=5)])
    assert bad.mismatches > 0 and bad.first_mismatch[0] == 1
    small = [build(MultiplierConfig(3, 3, 3, "fb", extra_pipeline_stages=p)) for p in range(2)]
    assert exhaustive_equivalence(small).passed
