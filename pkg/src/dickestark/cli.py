"""Command-line entry point.

Subcommands
-----------
scan       frequency sweep with peak detection (CSV + JSON peak report)
protocol   compile and run a pulse sequence (per-step CSV + JSON summary)
effective  resonance solution, couplings, durations, and the selectivity table
validate   machine-readable invariant report; nonzero exit on any failure

Each command reads either ``--config FILE`` (grammar in config.py) or
``--preset NAME``. Outputs go to ``--out DIR`` (created if needed); nothing
is written until a run has fully succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import presets
from .config import ConfigError, RunConfig, ScanConfig, load_config
from .dynamics import observables, write_trajectory_csv
from .effective import (
    DegenerateDetuningError,
    ResonanceBracketError,
    ratio_from_omega_q,
    rwa_validity_report,
    solve_resonance,
    target_coupling,
    pulse_duration,
)
from .model import BasisKind, ModelParams, build_space, default_n_max, dicke_state
from .protocol import (
    CutoffExceededError,
    compile_dicke_ladder,
    compile_ghz4,
    compile_from_rules,
    protocol_from_json,
    run_protocol,
)
from .scan import peak_report, resonance_scan, scan_grid


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _scan_config_from_preset(name: str) -> tuple[ModelParams, ScanConfig]:
    preset = presets.scan_preset(name)
    scan = ScanConfig(
        target=preset.target,
        initial_k=preset.initial_k,
        initial_n=preset.initial_n,
        window=preset.window,
        points=preset.points,
        duration=None,
        min_height=preset.min_height,
    )
    return preset.params, scan


def cmd_scan(config: RunConfig, preset_name: str | None, out_dir: Path, fmt: str) -> int:
    if preset_name is not None:
        params, scan_cfg = _scan_config_from_preset(preset_name)
        if config.model is not None:
            params = replace(
                config.model, n_max=config.model.n_max if config.model_n_max_explicit else params.n_max
            )
    else:
        if config.model is None or config.scan is None:
            raise ConfigError("scan requires [model] and [scan] sections (or --preset)")
        params, scan_cfg = config.model, config.scan
        if not config.model_n_max_explicit:
            params = replace(params, n_max=default_n_max(scan_cfg.initial_n, params.n_qubits))

    target = scan_cfg.target
    omega_q_star = solve_resonance(target, params)
    predicted = ratio_from_omega_q(omega_q_star, params)
    tuned = replace(params, omega_q=omega_q_star)
    duration = (
        scan_cfg.duration
        if scan_cfg.duration is not None
        else pulse_duration(target, tuned, 0.5)
    )

    space = build_space(params, BasisKind.SYMMETRIC)
    psi0 = dicke_state(space, scan_cfg.initial_k, scan_cfg.initial_n)
    grid = scan_grid(scan_cfg.window, scan_cfg.points)
    curve = resonance_scan(psi0, grid, duration, params, space)
    report = peak_report(curve, target, predicted, scan_cfg.min_height)

    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        curve.write_csv(out_dir / "scan.csv")
    else:
        _write_json(
            out_dir / "scan.json",
            {
                "ratio": [float(r) for r in curve.ratios],
                "nq": [float(v) for v in curve.nq],
                "nph": [float(v) for v in curve.nph],
                "duration": curve.duration,
            },
        )
    _write_json(out_dir / "peaks.json", report.to_jsonable())
    print(
        f"scan {target.label()}: peak at {report.location:.6f}"
        f" (predicted {report.predicted_location:.6f},"
        f" error {report.abs_error:.2e}), height {report.height:.4f}"
    )
    return 0


def _compile_protocol(config: RunConfig, preset_name: str | None):
    if preset_name is None and config.protocol is not None and config.protocol.preset:
        preset_name = config.protocol.preset

    if preset_name is not None:
        if preset_name == "dicke_ladder_4":
            base = ModelParams(
                n_qubits=4,
                coupling=presets.FIRST_ORDER_COUPLING,
                stark_u=presets.FIRST_ORDER_STARK,
                n_max=default_n_max(0, 4),
            )
            params = _merge_model(config, base)
            return compile_dicke_ladder(4, 4, params), params
        if preset_name == "ghz_4":
            base = ModelParams(
                n_qubits=4,
                coupling=presets.SECOND_ORDER_COUPLING,
                stark_u=presets.SECOND_ORDER_STARK,
                n_max=default_n_max(0, 4),
            )
            params = _merge_model(config, base)
            return compile_ghz4(params), params
        known = ", ".join(presets.PROTOCOL_PRESETS)
        raise ConfigError(f"unknown protocol preset {preset_name!r}; known: {known}")

    if config.protocol is None:
        raise ConfigError("protocol requires a [protocol] section (or --preset)")
    if config.protocol.file is not None:
        proto = protocol_from_json(Path(config.protocol.file).read_text(encoding="utf-8"))
        n_max = (
            config.model.n_max
            if (config.model is not None and config.model_n_max_explicit)
            else default_n_max(proto.initial[1] + 2, proto.n_qubits)
        )
        return proto, proto.base_params(n_max)
    if config.model is None:
        raise ConfigError("inline protocols require a [model] section")
    inline = config.protocol.inline
    params = config.model
    if not config.model_n_max_explicit:
        top = max(
            [inline.initial[1]]
            + [n for rule in inline.rules for _, n in rule.target.pair()]
        )
        params = replace(params, n_max=default_n_max(top, params.n_qubits))
    proto = compile_from_rules(
        name="custom",
        params=params,
        rules=list(inline.rules),
        initial=inline.initial,
        target_kind=inline.target_kind,
        target_cell=inline.target_cell,
    )
    return proto, params


def _merge_model(config: RunConfig, base: ModelParams) -> ModelParams:
    if config.model is None:
        return base
    n_max = config.model.n_max if config.model_n_max_explicit else base.n_max
    return replace(config.model, n_max=n_max)


def cmd_protocol(config: RunConfig, preset_name: str | None, out_dir: Path, fmt: str) -> int:
    proto, params = _compile_protocol(config, preset_name)
    space = build_space(params, BasisKind.SYMMETRIC)
    samples = config.protocol.samples if config.protocol is not None else 400
    result = run_protocol(proto, params, space, samples=samples)

    nq, nph, _ = observables(result.final)
    summary = {
        "protocol": proto.name,
        "steps": [
            {
                "label": step.label,
                "omega_q": step.omega_q,
                "ratio": ratio_from_omega_q(step.omega_q, params),
                "duration": step.duration,
            }
            for step in proto.steps
        ],
        "fidelity": result.fidelity_optimized if proto.target_kind == "ghz" else result.fidelity,
        "fidelity_phase_exact": result.fidelity,
        "fidelity_phase_optimized": result.fidelity_optimized,
        "target_phase": result.target_phase,
        "final_nq": nq,
        "final_nph": nph,
        "step_boundary_populations": [
            {f"k{k}_n{n}": p for (k, n), p in pops.items() if p > 1e-12}
            for pops in result.step_boundary_populations()
        ],
    }

    out_dir.mkdir(parents=True, exist_ok=True)
    for index, traj in enumerate(result.per_step, start=1):
        write_trajectory_csv(
            out_dir / f"step{index}_trajectory.csv", traj, coupling=params.coupling
        )
    (out_dir / "protocol.json").write_text(proto.to_json() + "\n", encoding="utf-8")
    _write_json(out_dir / "summary.json", summary)
    print(
        f"protocol {proto.name}: fidelity {summary['fidelity']:.4f}"
        f" (phase-exact {result.fidelity:.4f}), final <N_q> = {nq:.3f}"
    )
    return 0


def cmd_effective(config: RunConfig, preset_name: str | None, out_dir: Path, fmt: str) -> int:
    if preset_name is not None:
        preset = presets.scan_preset(preset_name)
        params, target = preset.params, preset.target
        if config.model is not None:
            params = _merge_model(config, params)
    else:
        if config.model is None or config.effective is None:
            raise ConfigError("effective requires [model] and [effective] sections (or --preset)")
        params, target = config.model, config.effective

    omega_q = solve_resonance(target, params)
    tuned = replace(params, omega_q=omega_q)
    space = build_space(tuned, BasisKind.SYMMETRIC)
    coupling = target_coupling(target, tuned)
    report = rwa_validity_report(target, tuned, space)
    payload = {
        "target": {
            "kind": target.kind,
            "order": target.order,
            "n0": target.n0,
            "k0": target.k0,
            "label": target.label(),
        },
        "omega_q": omega_q,
        "ratio": ratio_from_omega_q(omega_q, params),
        "coupling": coupling,
        "duration_half_period": pulse_duration(target, tuned, 0.5),
        "duration_quarter_period": pulse_duration(target, tuned, 0.25),
        "min_competing_ratio_adjacent": report.min_ratio(adjacent_only=True),
        "min_competing_ratio_all": report.min_ratio(),
        "channels": report.rows(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "effective.json", payload)
    print(
        f"effective {target.label()}: ratio {payload['ratio']:.6f},"
        f" coupling {coupling:.6g}, min adjacent |delta|/Omega"
        f" {payload['min_competing_ratio_adjacent']:.1f}"
    )
    return 0


def cmd_validate(config: RunConfig, out_dir: Path, fmt: str) -> int:
    from .validate import run_validation

    checks, ok = run_validation(draws=config.validate.draws, seed=config.validate.seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        out_dir / "validation.json",
        {"passed": ok, "checks": [c.to_jsonable() for c in checks]},
    )
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name} [{check.scale}] {check.detail}".rstrip())
    print("validation:", "all checks passed" if ok else "FAILURES present")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickestark",
        description="Selective interactions, resonance scans, and state-preparation"
        " protocols for N qubits coupled to a resonator with a photon-number-"
        "dependent frequency shift.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("scan", "sweep the qubit frequency and report resonance peaks"),
        ("protocol", "compile and execute a state-preparation sequence"),
        ("effective", "solve a resonance and report couplings and selectivity"),
        ("validate", "run the invariant suite and emit a pass/fail report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="INI run configuration")
        if name != "validate":
            p.add_argument("--preset", help="named preset (fig2a..fig8, dicke_ladder_4, ghz_4)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="data format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else _empty_config()
        fmt = args.format or config.output.format
        out_dir = args.out if args.out != Path("out") or not args.config else Path(config.output.directory)
        preset = getattr(args, "preset", None)
        if args.command == "scan":
            return cmd_scan(config, preset, out_dir, fmt)
        if args.command == "protocol":
            return cmd_protocol(config, preset, out_dir, fmt)
        if args.command == "effective":
            return cmd_effective(config, preset, out_dir, fmt)
        return cmd_validate(config, out_dir, fmt)
    except (
        ConfigError,
        ResonanceBracketError,
        DegenerateDetuningError,
        CutoffExceededError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _empty_config() -> RunConfig:
    from .config import OutputConfig, ValidateConfig

    return RunConfig(
        model=None,
        model_n_max_explicit=False,
        scan=None,
        protocol=None,
        effective=None,
        validate=ValidateConfig(),
        output=OutputConfig(),
    )


if __name__ == "__main__":
    raise SystemExit(main())
