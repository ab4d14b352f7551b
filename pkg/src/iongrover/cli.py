"""Command-line front end: run configs, reproduce figure data, self-validate.

Outputs are plot-ready CSV (LF line endings, 17-significant-digit floats) and
JSON result/manifest files; nothing is rendered.  Runs are bit-for-bit
reproducible: the only randomness anywhere is shot sampling, which is off
unless a shot count is configured together with an explicit --seed.

Exit codes: 0 success, 1 validation-suite failure, 2 bad config, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path


from . import __version__
from .dynamics import IntegratorConfig, IntegrationError
from .grover import build_plan, detect, run_search, sample_detection
from .imperfections import infidelity_sweep
from .model import (
    ImperfectionSettings,
    PulseSettings,
    SearchConfig,
    SearchResult,
)
from .pulses import NoSolutionError, rms_area

FIG4_EPSILONS = [round(0.01 * i, 2) for i in range(21)]
FIG4_IONS = [1, 5, 10]


class ConfigError(ValueError):
    """The run config file is malformed or fails validation."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def load_config(path: Path) -> SearchConfig:
    """Parse and validate a JSON search config (strict: unknown keys rejected)."""
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(raw, {"schema_version", "n_ions", "marked_index", "mode",
                          "variant", "iterations", "pulse", "imperfection",
                          "integrator", "shots"}, "config")
    if raw.get("schema_version", 1) != 1:
        raise ConfigError(f"unsupported schema_version {raw.get('schema_version')!r}")
    for key in ("n_ions", "marked_index"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")

    pulse_raw = raw.get("pulse", {})
    _reject_unknown(pulse_raw, {"shape", "width", "spacing", "peak_coupling"},
                    "pulse")
    imp_raw = raw.get("imperfection", {})
    _reject_unknown(imp_raw, {"epsilon", "scaling", "calibration", "reflection",
                              "custom_factors"}, "imperfection")
    integ_raw = raw.get("integrator", {})
    _reject_unknown(integ_raw, {"steps_per_pulse", "window", "norm_tolerance",
                                "trajectory_stride"}, "integrator")
    factors = imp_raw.get("custom_factors")
    try:
        return SearchConfig(
            n_ions=int(raw["n_ions"]),
            marked_index=int(raw["marked_index"]),
            mode=raw.get("mode", "ideal"),
            variant=raw.get("variant", "probabilistic"),
            iterations=raw.get("iterations"),
            pulse=PulseSettings(
                shape=pulse_raw.get("shape", "sech"),
                width=float(pulse_raw.get("width", 1.0)),
                spacing=float(pulse_raw.get("spacing", 30.0)),
                peak_coupling=pulse_raw.get("peak_coupling"),
            ),
            imperfection=ImperfectionSettings(
                epsilon=float(imp_raw.get("epsilon", 0.0)),
                scaling=imp_raw.get("scaling", "field"),
                calibration=imp_raw.get("calibration", "calibrated"),
                reflection=imp_raw.get("reflection", "adapted"),
                custom_factors=tuple(factors) if factors is not None else None,
            ),
            integrator=IntegratorConfig(
                steps_per_pulse=int(integ_raw.get("steps_per_pulse", 4000)),
                window=float(integ_raw.get("window", 15.0)),
                norm_tolerance=float(integ_raw.get("norm_tolerance", 1e-9)),
                trajectory_stride=int(integ_raw.get("trajectory_stride", 8)),
            ),
            shots=raw.get("shots"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _fmt(cell) for cell in row
        ))
    _write_text(path, "\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _trajectory_rows(result: SearchResult, marked_index: int) -> list[list]:
    rows = []
    for t, pops in zip(result.trajectory_times, result.trajectory_populations):
        p_marked = pops[marked_index]
        p_slot0 = pops[0]
        rows.append([t, p_marked, p_slot0, float(pops.sum()) - p_marked - p_slot0])
    return rows


def _manifest(out_dir: Path, command: str, arguments: dict, resolved: dict,
              files: list[Path]) -> None:
    outputs = []
    for path in files:
        data = path.read_bytes()
        outputs.append({
            "path": path.name,
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        })
    _write_json(out_dir / "manifest.json", {
        "tool": "iongrover",
        "version": __version__,
        "command": command,
        "arguments": arguments,
        "resolved_parameters": resolved,
        "outputs": outputs,
    })


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(Path(args.config))
    if cfg.shots is not None and args.seed is None:
        raise ConfigError("shot sampling requires an explicit --seed")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_search(cfg)
    detection = detect(result.final_state)

    payload = {
        "schema_version": 1,
        "success_probability": result.success_probability,
        "iterations_executed": result.iterations_executed,
        "parameters_used": result.parameters_used,
        "detection": {
            "found": detection.found,
            "residual": detection.residual,
            "residual_flagged": detection.residual_flagged,
            "probabilities": detection.probabilities.tolist(),
        },
        "final_state": [[z.real, z.imag] for z in result.final_state.amplitudes],
    }
    if cfg.shots is not None:
        counts = sample_detection(result.final_state, cfg.shots, args.seed)
        payload["shots"] = {
            "count": cfg.shots,
            "seed": args.seed,
            "no_click": int(counts[0]),
            "ion_counts": counts[1:].tolist(),
        }
    result_path = out_dir / "result.json"
    _write_json(result_path, payload)
    traj_path = out_dir / "trajectory.csv"
    _write_csv(traj_path, ["time", "p_marked", "p_slot0", "p_other_total"],
               _trajectory_rows(result, cfg.marked_index))
    _manifest(out_dir, "run", {"config": str(args.config)},
              result.parameters_used, [result_path, traj_path])
    return 0


def _pulse_timeline_rows(cfg: SearchConfig) -> list[list]:
    plan = build_plan(cfg)
    rows = [[0, "init", plan.init_pulse.center, plan.init_pulse.shape.width,
             rms_area(plan.init_pulse), plan.init_pulse.detuning]]
    for k, (oracle, reflection) in enumerate(plan.steps, start=1):
        rows.append([2 * k - 1, "oracle", oracle.center, oracle.shape.width,
                     rms_area(oracle), oracle.detuning])
        rows.append([2 * k, "global", reflection.center, reflection.shape.width,
                     rms_area(reflection), reflection.detuning])
    return [[str(r[0]), r[1], r[2], r[3], r[4], r[5]] for r in rows]


def _cmd_reproduce(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    resolved: dict = {}
    if args.figure == "fig3":
        for variant in ("probabilistic", "deterministic"):
            cfg = SearchConfig(n_ions=15, marked_index=8, mode="physical",
                               variant=variant)
            result = run_search(cfg)
            path = out_dir / f"fig3_{variant}.csv"
            _write_csv(path, ["time", "p_marked", "p_slot0", "p_other_total"],
                       _trajectory_rows(result, cfg.marked_index))
            files.append(path)
            resolved[variant] = result.parameters_used
            if variant == "deterministic":
                pulses_path = out_dir / "fig3_pulses.csv"
                _write_csv(pulses_path,
                           ["index", "kind", "center", "width", "rms_area",
                            "detuning"],
                           _pulse_timeline_rows(cfg))
                files.append(pulses_path)
    else:
        rows = infidelity_sweep(20, FIG4_IONS, FIG4_EPSILONS, steps=3,
                                mode="physical", jobs=args.jobs)
        path = out_dir / "fig4_infidelity.csv"
        _write_csv(path, ["epsilon", "ion", "infidelity"],
                   [[r.epsilon, str(r.marked_index), r.infidelity] for r in rows])
        files.append(path)
        resolved = {"n_ions": 20, "steps": 3, "ions": FIG4_IONS,
                    "epsilons": FIG4_EPSILONS}
    _manifest(out_dir, "reproduce", {"figure": args.figure}, resolved, files)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    from .validation import run_suite

    checks = run_suite(args.suite)
    passed = all(c.passed for c in checks)
    report = {
        "suite": args.suite,
        "passed": passed,
        "checks": [c.to_dict() for c in checks],
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "validation_report.json", report)
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: value={c.value:.3e} tol={c.tolerance:.0e}",
              file=sys.stderr)
    return 0 if passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iongrover",
        description="Grover search on a trapped-ion chain, exact or pulse-level.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one search from a JSON config")
    run_p.add_argument("--config", required=True, help="path to JSON config")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="RNG seed, required iff the config enables shots")
    run_p.set_defaults(func=_cmd_run)

    rep_p = sub.add_parser("reproduce", help="emit the data behind a figure")
    rep_p.add_argument("--figure", required=True, choices=("fig3", "fig4"))
    rep_p.add_argument("--out", required=True, help="output directory")
    rep_p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for sweep cells")
    rep_p.set_defaults(func=_cmd_reproduce)

    val_p = sub.add_parser("validate", help="run the self-check suite")
    val_p.add_argument("--suite", required=True, choices=("fast", "full"))
    val_p.add_argument("--out", default=None,
                       help="directory for the JSON report (default: stdout)")
    val_p.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IntegrationError, NoSolutionError) as exc:
        # NoSolutionError subclasses ValueError, so numerical failures must be
        # picked off before the config-error net below
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: config invalid: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
