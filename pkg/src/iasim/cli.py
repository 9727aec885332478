"""Command-line front end: config ingestion, subcommands, CSV/manifest output."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .beamformer import InfeasibleAlignment, design_beamformers, verify_alignment
from .channel import (CORRELATION_PRESETS, CorrelationSpec, CsiSpec,
                      draw_channel_set, error_variance)
from .dof import (enumerate_outer, outer_bound_problem, plan_antennas,
                  planned_config, closed_form_bound, closed_form_bound_terms,
                  closed_form_bound_value)
from .network import NetworkConfig, check_feasibility, validate
from .simulator import SimulationSpec, run, sweep, sweep_grid, SWEEP_AXES

CSV_HEADER = "snr_db,mean_sum_rate,p10,p50,p90,dof_estimate,excluded_trials"


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1; code 2 is reserved for infeasibility
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def load_raw_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if "spec" in raw:  # run manifest: reuse its resolved spec verbatim
        raw = raw["spec"]
    return raw


def _correlation_from_raw(raw: dict) -> CorrelationSpec:
    section = raw.get("correlation", {}) or {}
    preset = section.get("preset")
    if preset is not None:
        if preset not in CORRELATION_PRESETS:
            raise ConfigError(f"unknown correlation preset {preset!r}; "
                              f"choose from {sorted(CORRELATION_PRESETS)}")
        return CORRELATION_PRESETS[preset]
    return CorrelationSpec(
        tx_model=section.get("tx_model", "none"),
        rx_model=section.get("rx_model", "none"),
        tx_coeff=float(section.get("tx_coeff", 0.0)),
        rx_coeff=float(section.get("rx_coeff", 0.0)))


def _csi_from_raw(raw: dict) -> CsiSpec:
    section = raw.get("csi", {}) or {}
    perfect = bool(section.get("perfect", "alpha" not in section))
    if perfect:
        return CsiSpec()
    return CsiSpec.mismatch(float(section.get("alpha", 0.0)),
                            float(section.get("beta", 0.0)))


def build_spec(raw: dict, args: argparse.Namespace | None = None) -> SimulationSpec:
    """Resolve a raw config mapping plus CLI overrides into a SimulationSpec."""
    try:
        cells = int(raw.get("cells", 3))
        config = NetworkConfig(
            cells=cells,
            overlap=int(raw.get("overlap", 2)),
            m_tx=tuple(int(v) for v in raw["tx_antennas"]),
            n_rx=tuple(int(v) for v in raw["rx_antennas"]),
            demand=tuple(tuple(int(v) for v in row) for row in raw["demand"]))
        corr = _correlation_from_raw(raw)
        csi = _csi_from_raw(raw)
        snr = tuple(float(v) for v in raw.get("snr_db", [30.0]))
        trials = int(raw.get("trials", 10000))
        seed = int(raw.get("seed", 0))
        noise = float(raw.get("noise_power", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc

    if args is not None:
        if getattr(args, "corr_preset", None):
            corr = CORRELATION_PRESETS[args.corr_preset]
        if getattr(args, "alpha", None) is not None or \
                getattr(args, "beta", None) is not None:
            if args.alpha is None or args.beta is None:
                raise ConfigError("--alpha and --beta must be given together")
            csi = CsiSpec.mismatch(args.alpha, args.beta)
        if getattr(args, "snr", None):
            snr = tuple(float(v) for v in args.snr.split(","))
        if getattr(args, "trials", None) is not None:
            trials = args.trials
        if getattr(args, "seed", None) is not None:
            seed = args.seed

    bad = validate(config)
    if bad:
        raise ConfigError("invalid network configuration: " + "; ".join(bad))
    try:
        return SimulationSpec(config=config, corr=corr, csi=csi,
                              snr_points_db=snr, trials=trials,
                              master_seed=seed, noise_power=noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def spec_to_dict(spec: SimulationSpec) -> dict:
    return {
        "cells": spec.config.cells,
        "overlap": spec.config.overlap,
        "tx_antennas": list(spec.config.m_tx),
        "rx_antennas": list(spec.config.n_rx),
        "demand": [list(row) for row in spec.config.demand],
        "correlation": {
            "tx_model": spec.corr.tx_model,
            "rx_model": spec.corr.rx_model,
            "tx_coeff": float(np.real(spec.corr.tx_coeff)),
            "rx_coeff": float(np.real(spec.corr.rx_coeff)),
        },
        "csi": {
            "perfect": spec.csi.perfect,
            "alpha": spec.csi.alpha,
            "beta": spec.csi.beta,
        },
        "snr_db": list(spec.snr_points_db),
        "trials": spec.trials,
        "seed": spec.master_seed,
        "noise_power": spec.noise_power,
    }


def spec_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _output_path(args, default_name: str) -> Path:
    if getattr(args, "output", None):
        return Path(args.output)
    return Path(os.environ.get("IASIM_OUTPUT_DIR", ".")) / default_name


def _summary_row(s, prefix: str = "") -> str:
    return (f"{prefix}{_fmt(s.snr_db)},{_fmt(s.mean_sum_rate)},"
            f"{_fmt(s.percentile(0.1))},{_fmt(s.percentile(0.5))},"
            f"{_fmt(s.percentile(0.9))},{_fmt(s.dof_estimate)},"
            f"{s.excluded_trials}")


def _write_manifest(path: Path, resolved: dict, started: str, finished: str,
                    excluded: int, extra: dict | None = None) -> None:
    manifest = {
        "spec": resolved,
        "spec_hash": spec_hash(resolved),
        "tool_version": __version__,
        "started": started,
        "finished": finished,
        "excluded_trials": excluded,
    }
    if extra:
        manifest.update(extra)
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def cmd_simulate(args) -> int:
    try:
        spec = build_spec(load_raw_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = check_feasibility(spec.config)
    if not report.passed:
        print(f"infeasible configuration:\n{report}", file=sys.stderr)
        return 2

    started = _now()
    summaries = run(spec, collect_raw=args.raw)
    finished = _now()

    out = _output_path(args, "results.csv")
    lines = [CSV_HEADER] + [_summary_row(s) for s in summaries]
    _atomic_write(out, "\n".join(lines) + "\n")
    excluded = sum(s.excluded_trials for s in summaries)
    _write_manifest(out.with_suffix(".manifest.json"), spec_to_dict(spec),
                    started, finished, excluded)
    if args.raw:
        raw_lines = ["trial,snr_db,user,rate"]
        for s in summaries:
            for t, row in enumerate(s.per_user_rates):
                for u, rate in enumerate(row, start=1):
                    raw_lines.append(f"{t},{_fmt(s.snr_db)},{u},{_fmt(rate)}")
        _atomic_write(out.with_suffix(".raw.csv"), "\n".join(raw_lines) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_dof(args) -> int:
    try:
        spec = build_spec(load_raw_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    problem = outer_bound_problem(spec.config)
    bound = closed_form_bound(problem.q, problem.n_rx)
    value = closed_form_bound_value(problem.q, problem.n_rx)
    terms = closed_form_bound_terms(problem.q, problem.n_rx)
    binding = [label for label, v in terms if v == value]
    print(f"Q = {problem.q}  N = {problem.n_rx}")
    print(f"closed-form stream bound = {bound}  (continuous minimum {value:g})")
    print(f"binding terms: {'; '.join(binding)}")
    try:
        oracle = enumerate_outer(problem)
    except ValueError as exc:
        print(f"oracle skipped: {exc}")
        return 0
    print(f"oracle total = {oracle.total}")
    print("oracle allocation:")
    for i, row in enumerate(oracle.allocation, start=1):
        print(f"  BS {i}: {row}")
    print(f"oracle binding: {'; '.join(oracle.binding) or '(none)'}")
    if oracle.capacity_notes:
        print(f"capacity notes: {'; '.join(oracle.capacity_notes)}")
    if oracle.total != bound:
        print(f"DIVERGENCE: closed form {bound} vs oracle {oracle.total}")
    if args.json:
        payload = {
            "q": list(problem.q), "n_rx": list(problem.n_rx),
            "closed_form": bound, "closed_form_continuous": value,
            "binding": binding,
            "oracle_total": oracle.total,
            "oracle_allocation": [list(r) for r in oracle.allocation],
            "oracle_binding": list(oracle.binding),
        }
        _atomic_write(Path(args.json), json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_plan(args) -> int:
    try:
        with open(args.demand, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
        if isinstance(raw, dict):
            raw = raw["demand"]
        demand = tuple(tuple(int(v) for v in row) for row in raw)
        plan = plan_antennas(demand)
    except (OSError, yaml.YAMLError, KeyError, TypeError, ValueError) as exc:
        print(f"cannot plan from {args.demand}: {exc}", file=sys.stderr)
        return 1
    print(f"M = {plan.m_tx}")
    print(f"N = {plan.n_rx}")
    print(f"Q = {plan.q_final}")
    if plan.trace:
        print("updates:")
        for step in plan.trace:
            print(f"  [{step.stage}] user {step.user}: Q_{step.target_bs} "
                  f"{step.previous} -> {step.q_bar}")
    else:
        print("updates: (none)")
    config = planned_config(plan, demand)
    print(f"feasibility: {check_feasibility(config)}")
    return 0


def cmd_verify(args) -> int:
    try:
        spec = build_spec(load_raw_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = check_feasibility(spec.config)
    if not report.passed:
        print(f"infeasible configuration:\n{report}", file=sys.stderr)
        return 2
    rho = 10.0 ** (spec.snr_points_db[0] / 10.0)
    tau = error_variance(spec.csi, rho)
    rng = np.random.default_rng(np.random.SeedSequence((spec.master_seed, 0, 0)))
    links = draw_channel_set(spec.config, spec.corr, tau, rng)
    bf = design_beamformers(links, spec.config, rng)
    on_known = verify_alignment(links, bf, spec.config, channel="known")
    print(f"designed channels: {on_known}")
    if tau > 0:
        on_true = verify_alignment(links, bf, spec.config, channel="true")
        print(f"realized channels (tau={tau:.4g}): {on_true}")
        return 0
    return 0 if on_known.passed else 1


def cmd_sweep(args) -> int:
    try:
        spec = build_spec(load_raw_config(args.config), args)
        values = [float(v) for v in args.values.split(",")]
        values2 = ([float(v) for v in args.values2.split(",")]
                   if args.values2 else None)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    started = _now()
    lines = []
    errors = []
    if values2 is None:
        lines.append(f"{args.axis},{CSV_HEADER}")
        for point in sweep(spec, args.axis, values):
            if point.summaries is None:
                errors.append(f"{args.axis}={point.value:g}: {point.error}")
                lines.append(f"{_fmt(point.value)},nan,nan,nan,nan,nan,nan,-1")
                continue
            for s in point.summaries:
                lines.append(_summary_row(s, prefix=f"{_fmt(point.value)},"))
    else:
        if args.axis != "tx_antennas":
            print("two-axis sweeps pair tx_antennas with rx_corr_coeff",
                  file=sys.stderr)
            return 1
        lines.append(f"tx_antennas,rx_corr_coeff,{CSV_HEADER}")
        for point in sweep_grid(spec, [int(v) for v in values], values2):
            prefix = f"{point.tx_antennas},{_fmt(point.rx_coeff)},"
            if point.summaries is None:
                errors.append(f"M={point.tx_antennas}, r={point.rx_coeff:g}: "
                              f"{point.error}")
                lines.append(prefix + "nan,nan,nan,nan,nan,nan,-1")
                continue
            for s in point.summaries:
                lines.append(_summary_row(s, prefix=prefix))
    finished = _now()
    out = _output_path(args, "sweep.csv")
    _atomic_write(out, "\n".join(lines) + "\n")
    extra = {"sweep": {"axis": args.axis, "values": values}}
    if values2 is not None:
        extra["sweep"]["axis2"] = "rx_corr_coeff"
        extra["sweep"]["values2"] = values2
    _write_manifest(out.with_suffix(".manifest.json"), spec_to_dict(spec),
                    started, finished, 0, extra=extra)
    for note in errors:
        print(f"infeasible point: {note}", file=sys.stderr)
    print(f"wrote {out}")
    return 0


def _add_common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required,
                   help="YAML config file (or a previous run's manifest)")
    p.add_argument("--output", help="output file path")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--trials", type=int, help="override trial count")
    p.add_argument("--snr", help="override SNR points, comma-separated dB")
    p.add_argument("--corr-preset", choices=sorted(CORRELATION_PRESETS),
                   help="override correlation with a named preset")
    p.add_argument("--alpha", type=float, help="CSI error SNR exponent")
    p.add_argument("--beta", type=float, help="CSI error scale")


def main(argv=None) -> int:
    parser = _Parser(prog="iasim",
                     description="Three-cell interference-alignment simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[], help="Monte Carlo rate run")
    _add_common(p)
    p.add_argument("--raw", action="store_true",
                   help="also dump per-trial per-user rates")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dof", help="closed-form DoF bound vs oracle")
    _add_common(p)
    p.add_argument("--json", help="optional machine-readable output path")
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("plan", help="minimum antenna configuration")
    p.add_argument("--demand", required=True,
                   help="YAML file with the stream-demand matrix")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="one-shot alignment check")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="parameter sweep")
    _add_common(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--values2",
                   help="comma-separated rx correlation coefficients for a "
                        "two-axis grid (with --axis tx_antennas)")
    p.set_defaults(func=cmd_sweep)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # keep main() callable from tests
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InfeasibleAlignment as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
