from ..config import Arch, MultiplierConfig, validate
from .adders import final_adder_1ca, final_adder_3ca
from .common import GeneratedDesign, phase_ring
from .feedback import build_feedback
from .feedforward import build_feedforward
from .karatsuba import build_karatsuba
from .pipeline import loop_cells, output_cone, pipeline
from .star import build_star

BUILDERS = {
    Arch.STAR: build_star,
    Arch.FEEDBACK: build_feedback,
    Arch.FEEDFORWARD: build_feedforward,
    Arch.KARATSUBA: build_karatsuba,
}


def build(cfg: MultiplierConfig) -> GeneratedDesign:
    """Validated config -> complete design, pipelined when requested."""
    validate(cfg)
    design = BUILDERS[cfg.arch](cfg)
    return pipeline(design, cfg.extra_pipeline_stages)


__all__ = [
    "BUILDERS", "GeneratedDesign", "build", "build_feedback", "build_feedforward", "build_karatsuba",
    "build_star", "final_adder_1ca", "final_adder_3ca", "loop_cells", "output_cone", "phase_ring", "pipeline",
]
