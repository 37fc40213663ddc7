"""Generator, simulator and estimator for multi-cycle folded integer multipliers."""
from .config import Arch, CompressorKind, FinalAdderKind, MultiplierConfig, derived_metrics, validate

__version__ = "0.1.0"
