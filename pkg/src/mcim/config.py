"""Generator parameter space: the multiplier configuration, its validation and
JSON (de)serialisation."""
from __future__ import annotations

import dataclasses
import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Any, Mapping

from .errors import ConfigError


class Arch(str, enum.Enum):
    STAR = "Star"
    FEEDBACK = "Feedback"
    FEEDFORWARD = "FeedForward"
    KARATSUBA = "Karatsuba"


class CompressorKind(str, enum.Enum):
    DADDA = "DaddaTree"
    ROCOCO = "RoCoCo"
    CUSTOM = "Custom"
    FA_CHAIN = "FullAdderChain"


class FinalAdderKind(str, enum.Enum):
    ONE_CYCLE = "OneCycle"
    THREE_CYCLE = "ThreeCycle"


_ALIASES = {
    Arch: {
        "star": Arch.STAR, "fb": Arch.FEEDBACK, "feedback": Arch.FEEDBACK,
        "ff": Arch.FEEDFORWARD, "feedforward": Arch.FEEDFORWARD, "feed-forward": Arch.FEEDFORWARD,
        "karatsuba": Arch.KARATSUBA, "karat": Arch.KARATSUBA,
    },
    CompressorKind: {
        "daddatree": CompressorKind.DADDA, "dadda": CompressorKind.DADDA, "dw02": CompressorKind.DADDA,
        "rococo": CompressorKind.ROCOCO, "custom": CompressorKind.CUSTOM,
        "fulladderchain": CompressorKind.FA_CHAIN, "fas": CompressorKind.FA_CHAIN, "fa": CompressorKind.FA_CHAIN,
    },
    FinalAdderKind: {
        "onecycle": FinalAdderKind.ONE_CYCLE, "1ca": FinalAdderKind.ONE_CYCLE,
        "threecycle": FinalAdderKind.THREE_CYCLE, "3ca": FinalAdderKind.THREE_CYCLE,
    },
}


def parse_enum(cls, value):
    """Accept enum members, canonical names or the short aliases used in tables (FB, 3CA, DW02...)."""
    if isinstance(value, cls):
        return value
    key = str(value).strip().lower()
    try:
        return _ALIASES[cls][key]
    except KeyError:
        raise ValueError(f"unknown {cls.__name__} value {value!r}") from None


@dataclass(frozen=True)
class MultiplierConfig:
    width_a: int = 16
    width_b: int = 16
    ct: int = 2
    arch: Arch = Arch.FEEDBACK
    ppm_kind: CompressorKind = CompressorKind.DADDA
    comp_kind: CompressorKind = CompressorKind.FA_CHAIN
    fa_kind: FinalAdderKind = FinalAdderKind.ONE_CYCLE
    karatsuba_levels: int = 1
    extra_pipeline_stages: int = 0

    def __post_init__(self):
        object.__setattr__(self, "arch", parse_enum(Arch, self.arch))
        object.__setattr__(self, "ppm_kind", parse_enum(CompressorKind, self.ppm_kind))
        object.__setattr__(self, "comp_kind", parse_enum(CompressorKind, self.comp_kind))
        object.__setattr__(self, "fa_kind", parse_enum(FinalAdderKind, self.fa_kind))

    def replace(self, **changes) -> "MultiplierConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, enum.Enum):
                d[k] = v.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MultiplierConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**dict(data))

    @classmethod
    def from_json(cls, text: str) -> "MultiplierConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a flat JSON object")
        return cls.from_dict(data)

    @property
    def short_name(self) -> str:
        tag = {Arch.STAR: "star", Arch.FEEDBACK: "fb", Arch.FEEDFORWARD: "ff", Arch.KARATSUBA: "karat"}[self.arch]
        name = f"mcim_{tag}_{self.width_a}x{self.width_b}_ct{self.ct}"
        if self.arch is Arch.KARATSUBA:
            name += f"_k{self.karatsuba_levels}"
        if self.fa_kind is FinalAdderKind.THREE_CYCLE:
            name += "_3ca"
        if self.extra_pipeline_stages:
            name += f"_p{self.extra_pipeline_stages}"
        return name


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class DerivedMetrics:
    throughput: Fraction
    chunk_width: int
    min_latency: int
    latency: int


def arch_defaults(data: Mapping[str, Any]) -> dict[str, Any]:
    """Fill ``comp_kind`` for non-Feedback archs when left unset.

    The accumulation chain only exists inside Feedback, so elsewhere an unset
    compressor means a Dadda tree rather than an invalid combination.
    """
    out = dict(data)
    if "comp_kind" not in out and "arch" in out:
        try:
            arch = parse_enum(Arch, out["arch"])
        except ValueError:
            return out
        if arch is not Arch.FEEDBACK:
            out["comp_kind"] = CompressorKind.DADDA.value
    return out


def karatsuba_split(width: int) -> tuple[int, int]:
    """(low, high) operand halves; the low half takes the odd bit."""
    return (width + 1) // 2, width // 2


def karatsuba_ppm_width(width_a: int, width_b: int) -> int:
    """Square PPM width used by the folded Karatsuba datapath (one extra bit for A0+A1)."""
    low, _ = karatsuba_split(max(width_a, width_b))
    return low + 1


def karatsuba_recursion_ok(width: int, levels: int) -> bool:
    if levels <= 0:
        return True
    if width < 4:
        return False
    low, high = karatsuba_split(width)
    return all(karatsuba_recursion_ok(w, levels - 1) for w in (low, high, low + 1))


def violations(cfg: MultiplierConfig) -> list[Violation]:
    """Every invariant the configuration breaks (empty when valid)."""
    out: list[Violation] = []
    add = lambda code, msg: out.append(Violation(code, msg))

    if not isinstance(cfg.width_a, int) or cfg.width_a < 2:
        add("InvalidWidth", f"width_a must be an integer >= 2, got {cfg.width_a!r}")
    if not isinstance(cfg.width_b, int) or cfg.width_b < 2:
        add("InvalidWidth", f"width_b must be an integer >= 2, got {cfg.width_b!r}")
    if not isinstance(cfg.ct, int) or cfg.ct < 1:
        add("InvalidCT", f"ct must be a positive integer, got {cfg.ct!r}")
        return out
    if isinstance(cfg.width_b, int) and cfg.width_b >= 2 and cfg.width_b < cfg.ct:
        add("InvalidWidth", f"width_b={cfg.width_b} leaves an empty chunk at ct={cfg.ct}")

    need = {Arch.STAR: "== 1", Arch.FEEDFORWARD: "== 2", Arch.KARATSUBA: "== 3", Arch.FEEDBACK: ">= 2"}[cfg.arch]
    ok = {
        Arch.STAR: cfg.ct == 1,
        Arch.FEEDFORWARD: cfg.ct == 2,
        Arch.KARATSUBA: cfg.ct == 3,
        Arch.FEEDBACK: cfg.ct >= 2,
    }[cfg.arch]
    if not ok:
        add("InvalidCT", f"{cfg.arch.value} requires ct {need}, got {cfg.ct}")

    if cfg.fa_kind is FinalAdderKind.THREE_CYCLE:
        if cfg.ct < 3:
            add("InvalidFA", f"3CA needs a throughput <= 1/3 (ct >= 3), got ct={cfg.ct}")
        elif cfg.arch is not Arch.KARATSUBA:
            add("InvalidFA", f"3CA cannot sit inside the {cfg.arch.value} datapath")

    if cfg.comp_kind is CompressorKind.FA_CHAIN and cfg.arch is not Arch.FEEDBACK:
        add("InvalidCompressor", "FullAdderChain compressor is only valid for Feedback")
    if cfg.ppm_kind is CompressorKind.FA_CHAIN:
        add("InvalidCompressor", "FullAdderChain cannot reduce a partial-product array")

    if not isinstance(cfg.karatsuba_levels, int) or cfg.karatsuba_levels < 1:
        add("InvalidLevels", f"karatsuba_levels must be >= 1, got {cfg.karatsuba_levels!r}")
    elif cfg.arch is Arch.KARATSUBA and isinstance(cfg.width_a, int) and isinstance(cfg.width_b, int):
        w = karatsuba_ppm_width(cfg.width_a, cfg.width_b)
        if not karatsuba_recursion_ok(w, cfg.karatsuba_levels - 1):
            add("InvalidLevels", f"{cfg.karatsuba_levels} Karatsuba levels split a {w}-bit PPM below 4 bits")

    if not isinstance(cfg.extra_pipeline_stages, int) or cfg.extra_pipeline_stages < 0:
        add("InvalidPipeline", f"extra_pipeline_stages must be >= 0, got {cfg.extra_pipeline_stages!r}")
    return out


def validate(cfg: MultiplierConfig) -> MultiplierConfig:
    """Return ``cfg`` unchanged, or raise :class:`ConfigError` listing every violation."""
    found = violations(cfg)
    if found:
        raise ConfigError(found)
    return cfg


def derived_metrics(cfg: MultiplierConfig) -> DerivedMetrics:
    validate(cfg)
    if cfg.arch is Arch.STAR:
        lat = 1
    elif cfg.arch is Arch.KARATSUBA:
        lat = 5 if cfg.fa_kind is FinalAdderKind.THREE_CYCLE else 3
    else:
        lat = cfg.ct
    return DerivedMetrics(
        throughput=Fraction(1, cfg.ct),
        chunk_width=ceil(cfg.width_b / cfg.ct),
        min_latency=lat,
        latency=lat + cfg.extra_pipeline_stages,
    )
