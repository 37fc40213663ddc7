"""Write a design, its wrapper, testbench, config and manifest to a directory."""
from __future__ import annotations

import json
from pathlib import Path

from ..arch.common import GeneratedDesign
from .testbench import DEFAULT_SEED, DEFAULT_VECTORS, emit_testbench
from .verilog import emit_verilog
from .wrapper import EXTRA_LATENCY, emit_wrapper, wrapper_name


def bundle_files(design: GeneratedDesign, vectors: int = DEFAULT_VECTORS, seed: int = DEFAULT_SEED) -> dict[str, str]:
    """File name -> contents, in a fixed order."""
    name = design.name
    cfg = design.config
    files = {
        f"{name}.v": emit_verilog(design),
        f"{name}_wrapper.v": emit_wrapper(design),
        f"{name}_tb.v": emit_testbench(design, vectors, seed),
        "config.json": cfg.to_json() + "\n",
    }
    manifest = {
        "module_name": name,
        "wrapper_module": wrapper_name(design),
        "testbench_module": f"{name}_tb",
        "M": cfg.width_a,
        "N": cfg.width_b,
        "CT": cfg.ct,
        "L": design.latency,
        "wrapper_latency": design.latency + EXTRA_LATENCY,
        "accepted_phase": design.accepted_phase,
        "testbench_vectors": vectors,
        "testbench_seed": seed,
        "files": sorted(files) + ["manifest.json"],
    }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return files


def write_bundle(design: GeneratedDesign, out_dir, force: bool = False, vectors: int = DEFAULT_VECTORS,
                 seed: int = DEFAULT_SEED) -> list[Path]:
    """Write all bundle files; refuses to overwrite existing ones unless ``force``."""
    out = Path(out_dir)
    files = bundle_files(design, vectors, seed)
    clash = [out / f for f in files if (out / f).exists()]
    if clash and not force:
        raise FileExistsError(f"refusing to overwrite {', '.join(str(p) for p in clash)} (use force)")
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, text in files.items():
        path = out / fname
        path.write_text(text)
        written.append(path)
    return written
