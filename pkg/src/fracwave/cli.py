"""Command-line front end.

    fracwave run CONFIG [--out DIR]
    fracwave sweep CONFIG --eta 0,0.001,0.01 [--out DIR] [--parallel]
    fracwave validate-fractional [--R 10 --M 10000]
    fracwave preset NAME --out DIR

Exit codes: 0 success, 2 config parse error, 3 validation error, 4 runtime failure.
Errors are also printed to stderr as one JSON object. ``FRACWAVE_OUTPUT_DIR``
overrides ``output.dir``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .analysis import Snapshot, fit_decay_series
from .errors import (
    ConfigParseError,
    FracwaveError,
    InsufficientData,
    NonFiniteState,
    SolveFailure,
    ValidationError,
)
from .experiments import validate_fractional_battery
from .model import PRESETS, SimConfig, config_as_dict, format_config, load_config, validate
from .stepper import run

log = logging.getLogger("fracwave")

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3, 4
OUTPUT_ENV = "FRACWAVE_OUTPUT_DIR"


def _error(code: int, exc: BaseException, **extra) -> int:
    payload = {"status": "error", "exit_code": code, "kind": type(exc).__name__,
               "message": str(exc)}
    if isinstance(exc, ValidationError):
        payload["violations"] = [
            {"name": v.name, "value": _jsonable(v.value), "constraint": v.constraint}
            for v in exc.violations
        ]
    if isinstance(exc, NonFiniteState):
        payload["step"] = exc.step
    payload.update(extra)
    print(json.dumps(payload), file=sys.stderr)
    return code


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _output_dir(config: SimConfig, override: str | None) -> Path:
    return Path(override or os.environ.get(OUTPUT_ENV) or config.output.dir)


def _write_manifest(out: Path, config: SimConfig | None, status: str, outputs: dict,
                    wall: float, error: str = "") -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "status": status,
        "config_echo": format_config(config) if config is not None else None,
        "config": config_as_dict(config) if config is not None else None,
        "outputs": outputs,
        "wall_clock_seconds": wall,
    }
    if error:
        manifest["error"] = error
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_jsonable) + "\n")


def execute(config: SimConfig, out: Path) -> dict:
    """Run a validated config and write energy, snapshot and decay artifacts."""
    out.mkdir(parents=True, exist_ok=True)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    x = config.grid.x
    snapshots = []

    def save_snapshot(n, t, state):
        path = snap_dir / f"snapshot_{n:07d}.csv"
        Snapshot(t, x, state.U).to_csv(path)
        snapshots.append(str(path))

    result = run(config, [(config.output.snapshot_stride, save_snapshot)])
    energy_path = out / "energy.csv"
    result.energy.to_csv(energy_path)
    try:
        fit = fit_decay_series(result.energy)
        report = fit.report()
    except InsufficientData as exc:
        fit = None
        report = f"slope=nan, C=nan, rms=nan, window=[], note={exc}"
    decay_path = out / "decay.txt"
    decay_path.write_text(report + "\n")
    return {"energy": str(energy_path), "snapshots": snapshots, "decay": str(decay_path),
            "fit": fit, "E_end": float(result.energy.E_raw[-1])}


def cmd_run(config_path: str, out_override: str | None = None) -> int:
    t0 = time.perf_counter()
    try:
        config = load_config(config_path)
    except ConfigParseError as exc:
        return _error(EXIT_PARSE, exc, path=str(config_path))
    out = _output_dir(config, out_override)
    try:
        validate(config)
    except ValidationError as exc:
        _write_manifest(out, config, "invalid", {}, time.perf_counter() - t0, str(exc))
        return _error(EXIT_INVALID, exc)
    try:
        arts = execute(config, out)
    except (NonFiniteState, SolveFailure) as exc:
        _write_manifest(out, config, "failed", {}, time.perf_counter() - t0, str(exc))
        return _error(EXIT_RUNTIME, exc)
    except ConfigParseError as exc:  # unreadable tabulated initial condition
        return _error(EXIT_PARSE, exc)
    outputs = {k: arts[k] for k in ("energy", "snapshots", "decay")}
    _write_manifest(out, config, "completed", outputs, time.perf_counter() - t0)
    log.info("run finished: %s", out)
    return EXIT_OK


def _format_value(v: float) -> str:
    return f"{v:.17g}"


def _sweep_one(args):
    config, out = args
    try:
        arts = execute(config, out)
        fit = arts["fit"]
        if fit is None:
            return (config.fractional.eta, math.nan, math.nan, math.nan, "insufficient data")
        return (config.fractional.eta, fit.slope, fit.C, fit.rms, "")
    except FracwaveError as exc:
        return (config.fractional.eta, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def parse_values(text: str) -> list[float]:
    vals = [float(s) for s in text.replace(" ", "").split(",") if s]
    return list(dict.fromkeys(vals))


def cmd_sweep(config_path: str, etas: list[float], out_override: str | None = None,
              parallel: bool = False) -> int:
    try:
        base = load_config(config_path)
    except ConfigParseError as exc:
        return _error(EXIT_PARSE, exc, path=str(config_path))
    if not etas:
        return _error(EXIT_INVALID, ValueError("empty list of eta values"))
    try:
        validate(base)
        configs = [validate(replace(base, fractional=replace(base.fractional, eta=e)))
                   for e in dict.fromkeys(etas)]
    except ValidationError as exc:
        return _error(EXIT_INVALID, exc)
    out = _output_dir(base, out_override)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(c, out / f"eta_{c.fractional.eta:.6g}") for c in configs]
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    lines = ["eta,slope,C,rms"]
    for eta, slope, C, rms, err in rows:
        lines.append(",".join(_format_value(v) for v in (eta, slope, C, rms)))
        if err:
            print(json.dumps({"status": "run_failed", "eta": eta, "message": err}),
                  file=sys.stderr)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_validate_fractional(R: float = 10.0, M: int = 10000) -> int:
    for case in validate_fractional_battery(R, M):
        status = "PASS" if case.passed else "FAIL"
        print(f"{status}  {case.name}: max_rel_error={case.max_rel_error:.3e} "
              f"(tolerance {case.tolerance:g})")
    return EXIT_OK


def cmd_preset(name: str, out_dir: str) -> int:
    if name not in PRESETS:
        return _error(EXIT_INVALID, KeyError(f"unknown preset {name!r}; "
                                             f"choose from {sorted(PRESETS)}"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = PRESETS[name]
    cfg = replace(cfg, output=replace(cfg.output, dir=str(out / name)))
    path = out / f"{name}.cfg"
    path.write_text(format_config(cfg))
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracwave", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one simulation from a config file")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (overrides output.dir)")

    s = sub.add_parser("sweep", help="run one simulation per eta value")
    s.add_argument("config")
    s.add_argument("--eta", required=True, help="comma-separated eta values")
    s.add_argument("--out", default=None)
    s.add_argument("--parallel", action="store_true")

    v = sub.add_parser("validate-fractional", help="diffusive vs convolution checks")
    v.add_argument("--R", type=float, default=10.0)
    v.add_argument("--M", type=int, default=10000)

    pr = sub.add_parser("preset", help="write a named preset as a config file")
    pr.add_argument("name", choices=sorted(PRESETS))
    pr.add_argument("--out", required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        try:
            etas = parse_values(args.eta)
        except ValueError as exc:
            return _error(EXIT_PARSE, exc)
        return cmd_sweep(args.config, etas, args.out, args.parallel)
    if args.command == "validate-fractional":
        return cmd_validate_fractional(args.R, args.M)
    return cmd_preset(args.name, args.out)


if __name__ == "__main__":
    sys.exit(main())
