"""Command-line front end.

Every command takes its parameters from an optional JSON ``--config`` file,
overridden by explicit flags, and writes its results plus a
``manifest.json`` into ``--out`` (default: ``$HOSESIM_OUT`` or the current
directory).  Exit status: 0 success, 1 numerical failure, 2 configuration
error; failures also leave an ``error.json`` behind.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import device, geometry, magnetostatics, pulse, rfguard
from .errors import ConfigurationError, HoseSimError

log = logging.getLogger("hosesim")

RNG_ALGORITHM = "numpy.random.PCG64"

# -- run configuration ----------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict[str, Any]
    seed: int | None
    output_dir: Path

    def digest(self) -> str:
        doc = {"command": self.command, "params": self.params, "seed": self.seed}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def rng(self) -> np.random.Generator:
        if self.seed is None:
            raise ConfigurationError("a seed is required whenever noise is requested")
        return np.random.Generator(np.random.PCG64(self.seed))


def _load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None


def _resolve(command: str, defaults: Mapping[str, Any], args: argparse.Namespace) -> RunConfig:
    params = dict(defaults)
    seed = None
    if args.config is not None:
        doc = _load_json(args.config)
        if not isinstance(doc, Mapping):
            raise ConfigurationError(f"{args.config}: expected a JSON object")
        unknown = sorted(set(doc) - set(defaults) - {"seed"})
        if unknown:
            raise ConfigurationError(f"{args.config}: unknown key(s) {', '.join(unknown)} for '{command}'")
        seed = doc.get("seed")
        params.update({k: v for k, v in doc.items() if k != "seed"})
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if args.seed is not None:
        seed = args.seed
    if seed is not None and not isinstance(seed, int):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    out = Path(args.out or os.environ.get("HOSESIM_OUT") or ".")
    return RunConfig(command, params, seed, out)


def _versions() -> dict[str, str]:
    from . import __version__

    out = {"python": platform.python_version(), "hosesim": __version__}
    for pkg in ("numpy", "scipy", "pyamg"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _g(x) -> str:
    return format(float(x), ".17g")


# -- commands -------------------------------------------------------------

FIELD_DEFAULTS = {
    "scene": None,  # path to a scene JSON, an inline scene object, or None for the built device
    "spacing": 50e-6,
    "current": None,
    "method": "amg",
    "tolerance": 1e-10,
    "min_cells": 2.0,
}


def _scene_from(value) -> geometry.Scene:
    if value is None:
        return geometry.build_paper_scene()
    if isinstance(value, Mapping):
        return geometry.Scene.from_dict(value)
    return geometry.Scene.load_json(value)


def cmd_field(cfg: RunConfig) -> list[str]:
    p = cfg.params
    scene = _scene_from(p["scene"])
    if p["current"] is not None:
        scene = scene.with_current(float(p["current"]))
    grid = geometry.GridSpec.covering(scene.domain, float(p["spacing"]))
    mg = geometry.rasterize(scene, grid, min_cells=float(p["min_cells"]))
    opts = magnetostatics.SolverOptions(tolerance=float(p["tolerance"]), method=p["method"])
    field = magnetostatics.solve(mg, opts)
    summary = magnetostatics.summary(field, scene)
    summary["grid"] = {"nr": grid.nr, "nz": grid.nz, "spacing": grid.spacing, "z_min": grid.z_min}
    summary["coil_current"] = scene.coil.current
    summary["inductance_h"] = (magnetostatics.inductance(field, mg, scene.coil.current)
                               if scene.coil.current else None)
    check = magnetostatics.hole_flux_check(field, scene)
    summary["hole_flux"] = None if check is None else {
        "z": check.z, "hole_flux_wb": check.hole_flux, "core_flux_wb": check.core_flux,
        "ratio": check.ratio if check.core_flux else None,
    }
    summary["saturation"] = [
        {"region": e.region, "max_b": e.max_b, "saturation_b": e.saturation_b, "saturated": e.saturated}
        for e in magnetostatics.saturation_report(field, scene, mg)
    ]
    magnetostatics.write_field_csv(field, cfg.output_dir / "field.csv")
    _write_json(cfg.output_dir / "summary.json", summary)
    return ["field.csv", "summary.json"]


SCENE_DEFAULTS = {"preset": "device", "overrides": None}


def cmd_scene(cfg: RunConfig) -> list[str]:
    """Write a preset scene as JSON for editing and reuse with ``field``."""
    p = cfg.params
    if p["preset"] == "device":
        scene = geometry.build_paper_scene(p["overrides"])
    elif p["preset"] == "vacuum":
        base = geometry.build_paper_scene(p["overrides"])
        scene = geometry.vacuum_scene(base.coil, base.domain, base.probes)
    else:
        variants = dict(geometry.design_variants())
        if p["preset"] not in variants:
            raise ConfigurationError(f"unknown scene preset {p['preset']!r}")
        scene = variants[p["preset"]]
    scene.save_json(cfg.output_dir / "scene.json")
    return ["scene.json"]


FLUXMAP_DEFAULTS = {
    "pair": None,  # pair JSON path or inline object; None for the measured pair
    "bias_min": -1.5,
    "bias_max": 1.5,
    "points": 601,
    "noise_hz": 0.0,
    "fit": False,
    "input": None,  # flux-map CSV to fit instead of the synthesised one
    "init": None,  # initial pair for the fit; defaults to the generating pair
}


def _pair_from(value) -> device.CoupledPairSpec:
    if value is None:
        return device.measured_pair()
    doc = value if isinstance(value, Mapping) else _load_json(value)
    return device.CoupledPairSpec.from_dict(doc)


def cmd_fluxmap(cfg: RunConfig) -> list[str]:
    p = cfg.params
    pair = _pair_from(p["pair"])
    outputs = []
    if p["input"] is not None:
        table = device.read_fluxmap_csv(p["input"])
    else:
        n = int(p["points"])
        biases = np.linspace(float(p["bias_min"]), float(p["bias_max"]), n) if n > 0 else np.zeros(0)
        table = device.synth_fluxmap(pair, biases)
        if float(p["noise_hz"]) > 0:
            table = device.add_noise(table, float(p["noise_hz"]), cfg.rng())
        device.write_fluxmap_csv(table, cfg.output_dir / "fluxmap.csv")
        outputs.append("fluxmap.csv")
        info = {"records": len(table), "flagged_biases": list(table.flagged)}
        if len(table):
            b_gap, gap = device.min_branch_gap(pair, biases)
            info.update({"min_gap_bias": b_gap, "min_gap_hz": gap})
        _write_json(cfg.output_dir / "fluxmap.json", info)
        outputs.append("fluxmap.json")
    if p["fit"]:
        init = pair if p["init"] is None else _pair_from(p["init"])
        result = device.fit_fluxmap(table, init)
        device.write_fit_json(result, cfg.output_dir / "fit.json")
        outputs.append("fit.json")
    return outputs


PULSE_DEFAULTS = {
    "shape": "square",  # square | predistorted | deconvolved
    "tau": 2e-6,
    "dt": 1e-9,
    "duration": 20e-6,
    "t_start": 1e-6,
    "edge": 20e-9,
    "amplitude": None,  # bias step; derived from detuning_hz when absent
    "detuning_hz": 700e6,
    "cap": 40.0,
    "band": 0.01,
    "max_settle": None,
    "lam": 1e-6,
    "blur": 0.0,
    "f_max": 6.6e9,
    "e_c": 295e6,
    "d": 0.31,
    "k": 1.0,
    "offset": 0.0,
}


def cmd_pulse(cfg: RunConfig) -> list[str]:
    p = cfg.params
    spec = device.TransmonSpec(float(p["f_max"]), float(p["e_c"]), float(p["d"]))
    transfer = device.FluxTransfer(float(p["k"]), float(p["offset"]))
    tau, dt = float(p["tau"]), float(p["dt"])
    plant = pulse.PlantModel.first_order(tau)
    amp = p["amplitude"]
    if amp is None:
        amp = pulse.bias_for_detuning(spec, transfer, float(p["detuning_hz"])) if p["detuning_hz"] else 0.0
    amp = float(amp)
    t_start, duration = float(p["t_start"]), float(p["duration"])
    report: dict[str, Any] = {"shape": p["shape"], "amplitude": amp, "tau_s": tau, "dt_s": dt}
    if p["shape"] == "square":
        u = pulse.square_smoothed(amp, t_start, duration - t_start, float(p["edge"]), dt, duration)
    elif p["shape"] == "predistorted":
        cons = pulse.PredistortionConstraints(float(p["cap"]), float(p["band"]),
                                              None if p["max_settle"] is None else float(p["max_settle"]))
        res = pulse.constrained_predistort(tau, amp if amp else 1.0, cons, dt, duration, t_start)
        u = res.waveform if amp else res.waveform.with_samples(np.zeros(len(res.waveform)))
        report["predistortion"] = res.to_dict()
    elif p["shape"] == "deconvolved":
        target = pulse.step(amp, dt, duration, t_start)
        u = pulse.deconvolve(plant, target, float(p["lam"]))
        resid = pulse.convolution_residual(plant, u, target)
        report["deconvolution"] = {"lambda": float(p["lam"]), "max_abs_residual": float(np.max(np.abs(resid)))}
    else:
        raise ConfigurationError(f"unknown pulse shape {p['shape']!r}")
    y = pulse.plant_response(plant, u)
    trace = pulse.frequency_trace(spec, transfer, u, plant, float(p["blur"]))
    if amp:
        final = amp
        plateau = y
        if p["shape"] == "square":
            # judge settling on the flat top only, before the falling edge
            stop = duration - t_start - float(p["edge"])
            plateau = y.with_samples(y.samples[: max(int(stop / dt), 2)])
        settle = {}
        for band in (0.01, 0.05, 0.1):
            settle[f"{band:g}"] = pulse.settling_time(plateau, final, band, onset=t_start)
        report["settle_s"] = settle
        if p["shape"] == "square":
            report["rise_10_90_s"] = pulse.rise_time(y, final)
            f_final = device.f01(spec, transfer.phi(final))
            report["steady_detuning_hz"] = spec.f_max - f_final
    report["f01_min_hz"] = float(np.min(trace.samples))
    report["f01_max_hz"] = float(np.max(trace.samples))
    pulse.write_waveform_csv(u, cfg.output_dir / "input.csv")
    pulse.write_waveform_csv(y, cfg.output_dir / "response.csv")
    pulse.write_waveform_csv(trace, cfg.output_dir / "trace.csv", column="f01_hz")
    _write_json(cfg.output_dir / "report.json", report)
    return ["input.csv", "response.csv", "trace.csv", "report.json"]


SWEEP_DEFAULTS = {
    "variants": None,  # list of {"name", "overrides"} or {"name", "scene"}; None for the three built-in designs
    "spacing": 50e-6,
    "line_offset": 1e-3,
    "line_length": 5e-3,
    "line_points": 101,
    "min_cells": 1.0,
}


def _variants_from(value) -> list[tuple[str, Callable[[], geometry.Scene]]]:
    if value is None:
        return [(name, (lambda ov=ov: geometry.build_paper_scene(ov))) for name, ov in geometry.DESIGN_VARIANTS]
    out = []
    for k, item in enumerate(value):
        if not isinstance(item, Mapping):
            raise ConfigurationError(f"variant {k}: expected an object")
        extra = set(item) - {"name", "overrides", "scene"}
        if extra:
            raise ConfigurationError(f"variant {k}: unknown field(s) {', '.join(sorted(extra))}")
        name = str(item.get("name", f"variant_{k}"))
        if "scene" in item:
            out.append((name, (lambda v=item["scene"]: _scene_from(v))))
        else:
            out.append((name, (lambda ov=item.get("overrides") or {}: geometry.build_paper_scene(ov))))
    return out


def cmd_sweep(cfg: RunConfig) -> list[str]:
    p = cfg.params
    n = int(p["line_points"])
    rows = []
    results = []
    for index, (name, make) in enumerate(_variants_from(p["variants"])):
        try:
            scene = make()
            tip = max(reg.z_max for reg in scene.regions) if scene.regions else scene.coil.z_max
            z = tip + float(p["line_offset"])
            mg = geometry.rasterize(scene, geometry.GridSpec.covering(scene.domain, float(p["spacing"])),
                                    min_cells=float(p["min_cells"]))
            field = magnetostatics.solve(mg)
            r, bz = magnetostatics.line_profile(field, z, float(p["line_length"]), n)
        except HoseSimError as exc:
            results.append({"index": index, "name": name, "error": f"{type(exc).__name__}: {exc}"})
            continue
        peak = int(np.argmax(np.abs(bz)))
        results.append({"index": index, "name": name, "z": z, "peak_b_z": float(bz[peak]), "peak_r": float(r[peak]),
                        "iterations": field.iterations})
        rows.extend((index, name, ri, bi) for ri, bi in zip(r, bz))
    with open(cfg.output_dir / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant_index", "variant", "r", "b_z"])
        for index, name, ri, bi in rows:
            w.writerow([index, name, _g(ri), _g(bi)])
    ok = [v for v in results if "error" not in v]
    if ok:
        base = abs(ok[0]["peak_b_z"])
        for v in ok:
            v["ratio_to_first"] = abs(v["peak_b_z"]) / base if base else None
    _write_json(cfg.output_dir / "sweep.json", {"variants": results})
    return ["sweep.csv", "sweep.json"]


RF_DEFAULTS = {
    "waveguides": None,  # list of {"kind", "length", "a", "b" | "diameter", "name", "frequency"}
    "stub_lengths": None,
}


def cmd_rf(cfg: RunConfig) -> list[str]:
    p = cfg.params
    if p["waveguides"] is None:
        specs = [(rfguard.HOSE_CUT, 60e9), (rfguard.WALL_BORE, 20e9)]
    else:
        specs = []
        for k, item in enumerate(p["waveguides"]):
            if not isinstance(item, Mapping) or "frequency" not in item:
                raise ConfigurationError(f"waveguide {k}: expected an object with a frequency")
            doc = {key: v for key, v in item.items() if key != "frequency"}
            specs.append((rfguard.WaveguideSpec.from_dict(doc), float(item["frequency"])))
    stubs = [10e-3] if p["stub_lengths"] is None else [float(x) for x in p["stub_lengths"]]
    rfguard.write_report_json(rfguard.report(specs, stubs), cfg.output_dir / "rf.json")
    return ["rf.json"]


COMMANDS: dict[str, tuple[Callable[[RunConfig], list[str]], dict[str, Any], str]] = {
    "field": (cmd_field, FIELD_DEFAULTS, "solve a scene and export the field"),
    "scene": (cmd_scene, SCENE_DEFAULTS, "write a preset scene as JSON"),
    "fluxmap": (cmd_fluxmap, FLUXMAP_DEFAULTS, "synthesise and optionally fit a two-qubit flux map"),
    "pulse": (cmd_pulse, PULSE_DEFAULTS, "design a flux pulse and simulate the qubit frequency"),
    "sweep": (cmd_sweep, SWEEP_DEFAULTS, "compare hose/coil designs by the field past the hose tip"),
    "rf": (cmd_rf, RF_DEFAULTS, "waveguide cut-off and attenuation report"),
}


# -- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hosesim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with command parameters")
        sp.add_argument("--out", help="output directory (default $HOSESIM_OUT or .)")
        sp.add_argument("--seed", type=int, help="seed for any stochastic step")

    f = sub.add_parser("field", help=COMMANDS["field"][2])
    common(f)
    f.add_argument("--scene", help="scene JSON file (default: the built device)")
    f.add_argument("--spacing", type=float)
    f.add_argument("--current", type=float)
    f.add_argument("--method", choices=magnetostatics.METHODS)
    f.add_argument("--tolerance", type=float)
    f.add_argument("--min-cells", dest="min_cells", type=float)

    s = sub.add_parser("scene", help=COMMANDS["scene"][2])
    common(s)
    s.add_argument("--preset", help="device, vacuum or a design-sweep variant name")

    m = sub.add_parser("fluxmap", help=COMMANDS["fluxmap"][2])
    common(m)
    m.add_argument("--pair", help="pair specification JSON")
    m.add_argument("--bias-min", dest="bias_min", type=float)
    m.add_argument("--bias-max", dest="bias_max", type=float)
    m.add_argument("--points", type=int)
    m.add_argument("--noise-hz", dest="noise_hz", type=float)
    m.add_argument("--fit", action="store_const", const=True)
    m.add_argument("--input", help="flux-map CSV to fit")
    m.add_argument("--init", help="initial pair for the fit")

    p = sub.add_parser("pulse", help=COMMANDS["pulse"][2])
    common(p)
    p.add_argument("--shape", choices=("square", "predistorted", "deconvolved"))
    for name in ("tau", "dt", "duration", "t_start", "edge", "amplitude", "detuning_hz", "cap", "band",
                 "max_settle", "lam", "blur", "f_max", "e_c", "d", "k", "offset"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)

    w = sub.add_parser("sweep", help=COMMANDS["sweep"][2])
    common(w)
    w.add_argument("--spacing", type=float)
    w.add_argument("--line-offset", dest="line_offset", type=float)
    w.add_argument("--line-length", dest="line_length", type=float)
    w.add_argument("--line-points", dest="line_points", type=int)

    r = sub.add_parser("rf", help=COMMANDS["rf"][2])
    common(r)
    return parser


def _error_doc(exc: BaseException, code: int) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "exit_code": code}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    func, defaults, _ = COMMANDS[args.command]
    out_dir = Path(args.out or os.environ.get("HOSESIM_OUT") or ".")
    start = time.perf_counter()
    try:
        cfg = _resolve(args.command, defaults, args)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        outputs = func(cfg)
    except (HoseSimError, np.linalg.LinAlgError, FloatingPointError, OSError) as exc:
        if isinstance(exc, HoseSimError):
            code = exc.exit_code
        elif isinstance(exc, OSError):
            code = 2
        else:
            code = 1
        doc = _error_doc(exc, code)
        print(json.dumps(doc), file=sys.stderr)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            _write_json(out_dir / "error.json", doc)
        except OSError:
            pass
        return code
    manifest = {
        "command": cfg.command,
        "config": cfg.params,
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "rng": RNG_ALGORITHM,
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - start,
        "outputs": outputs,
    }
    _write_json(cfg.output_dir / "manifest.json", _jsonable(manifest))
    return 0


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
