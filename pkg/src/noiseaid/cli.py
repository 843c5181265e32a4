"""Command-line entry point: simulate / sweep / cost / check-conditions.

Configurations are JSON files; ``--config`` accepts a path or the name of
a bundled preset (fig2, fig3, fig4, fig5a, fig5b, fig6, cost).  Outputs
land in ``<out>/<preset>/``.  Exit codes: 0 success, 1 validation error,
2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from noiseaid import conditions, harness
from noiseaid.errors import ValidationError
from noiseaid.harness import DEFAULT_DELTA_THRESHOLD
from noiseaid.noise import CoherenceMode

PRESETS = ("fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6", "cost")


def load_config(config: str):
    """Resolve --config to (name, dict): a file path or a bundled preset."""
    if os.path.exists(config):
        with open(config) as fh:
            return os.path.splitext(os.path.basename(config))[0], json.load(fh)
    if config in PRESETS:
        text = resources.files("noiseaid.presets").joinpath(f"{config}.json").read_text()
        return config, json.loads(text)
    raise FileNotFoundError(f"config not found: {config!r} (not a file, not a bundled preset)")


def apply_overrides(cfg: dict, sets, seed=None) -> dict:
    for item in sets or ():
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    if seed is not None:
        cfg["seeds"] = [seed]
    return cfg


def _outdir(out: str, name: str) -> str:
    path = os.path.join(out, name)
    os.makedirs(path, exist_ok=True)
    return path


def cmd_simulate(cfg: dict, outdir: str) -> str:
    spec = harness.experiment_from_dict(cfg)
    stride = int(cfg.get("trajectory_stride", 100))
    per_seed = {}
    first_traj = None
    for seed in spec.seeds:
        res = harness.run_scenario(spec, seed)
        if first_traj is None:
            first_traj = res.trajectory
        per_seed[str(seed)] = {
            "delta": res.delta,
            "psi": res.psi,
            "decay_rate": res.decay_rate,
            "diverged_at": res.trajectory.diverged_at,
        }
    harness.write_trajectory_csv(first_traj, os.path.join(outdir, "trajectory.csv"), stride)
    harness.write_report_json({"config": cfg, "metrics": per_seed}, os.path.join(outdir, "report.json"))
    first = per_seed[str(spec.seeds[0])]
    return (
        f"delta={first['delta']:.6g} psi={first['psi']:.6g} "
        f"decay_rate={first['decay_rate']:.6g}"
    )


def cmd_sweep(cfg: dict, outdir: str, jobs: int) -> str:
    spec = harness.experiment_from_dict(cfg)
    modes = [CoherenceMode.from_name(m) for m in cfg.get("modes", ["common"])]
    sigma_grid = cfg.get("sigma_grid")
    if sigma_grid is None:
        sigma_grid = [0.5 * i for i in range(13)]
    threshold = float(cfg.get("delta_threshold", DEFAULT_DELTA_THRESHOLD))
    result = harness.intensity_sweep(spec, modes, sigma_grid, spec.seeds, jobs=jobs)
    harness.write_sweep_csv(result, os.path.join(outdir, "sweep.csv"))
    harness.write_aggregates_csv(result, os.path.join(outdir, "aggregates.csv"))
    thresholds = {
        m.value: harness.threshold_from_sweep(result, m.value, threshold) for m in modes
    }
    harness.write_report_json(
        {"config": cfg, "delta_threshold": threshold, "sigma_star": thresholds},
        os.path.join(outdir, "report.json"),
    )
    pretty = " ".join(f"sigma*({m})={v:g}" for m, v in thresholds.items())
    return pretty


def cmd_cost(cfg: dict, outdir: str) -> str:
    shared = {k: v for k, v in cfg.items() if k not in ("unaided", "aided")}
    spec_unaided = harness.experiment_from_dict({**shared, **cfg["unaided"]})
    spec_aided = harness.experiment_from_dict({**shared, **cfg["aided"]})
    psi_unaided, psi_aided = harness.cost_comparison(spec_unaided, spec_aided)
    harness.write_report_json(
        {"config": cfg, "psi_unaided": psi_unaided, "psi_aided": psi_aided},
        os.path.join(outdir, "report.json"),
    )
    return f"psi_unaided={psi_unaided:.6g} psi_aided={psi_aided:.6g}"


def _matrix(value):
    return np.asarray(value, dtype=float)


def _channels(items):
    return tuple(
        conditions.NoiseChannel(
            sigma=float(ch["sigma"]),
            K=_matrix(ch["K"]) if "K" in ch else None,
            J=_matrix(ch["J"]) if "J" in ch else None,
            alpha=float(ch.get("alpha", 0.0)),
        )
        for ch in items
    )


def cmd_check_conditions(cfg: dict, outdir) -> str:
    inputs = conditions.ConditionInputs(
        A=_matrix(cfg["A"]),
        P=_matrix(cfg["P"]),
        L=_matrix(cfg["L"]) if "L" in cfg else None,
        R=_matrix(cfg["R"]) if "R" in cfg else None,
        epsilon=cfg.get("epsilon", "auto"),
        aiding=_channels(cfg.get("aiding", ())),
        disturbance=_channels(cfg.get("disturbance", ())),
        linear_system=bool(cfg.get("linear_system", False)),
    )
    kind = cfg.get("kind", "theorem1")
    if kind == "theorem1":
        report = conditions.q_theorem1(inputs)
    elif kind == "theorem2":
        report = conditions.q_theorem2(inputs)
    elif kind == "corollary":
        report = conditions.q_corollary(inputs, cfg["c"])
    else:
        raise ValidationError(f"unknown condition kind {kind!r}")
    payload = report.to_dict()
    if cfg.get("solve_min_intensity"):
        payload["sigma_star"] = conditions.min_aiding_intensity(
            inputs, cfg["c"], tol=float(cfg.get("tol", 1e-8))
        )
    print(json.dumps(harness._sanitize_json(payload), indent=2, sort_keys=True))
    if outdir is not None:
        harness.write_report_json(payload, os.path.join(outdir, "report.json"))
    summary = f"passes={payload['passes']} lambda_min_Q={payload['lambda_min_Q']:.6g}"
    if "sigma_star" in payload:
        summary += f" sigma_star={payload['sigma_star']:.6g}"
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noiseaid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "cost", "check-conditions"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="config file path or preset name")
        sp.add_argument("--out", default="out", help="output directory root")
        sp.add_argument("--seed", type=int, default=None, help="replace the seed list")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument(
            "--set",
            action="append",
            dest="sets",
            metavar="KEY=VALUE",
            help="override a config key (dotted path, JSON value); repeatable",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        name, cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.sets, args.seed)
        if args.command == "check-conditions":
            outdir = _outdir(args.out, name) if args.out else None
            summary = cmd_check_conditions(cfg, outdir)
        else:
            outdir = _outdir(args.out, name)
            if args.command == "simulate":
                summary = cmd_simulate(cfg, outdir)
            elif args.command == "sweep":
                summary = cmd_sweep(cfg, outdir, args.jobs)
            else:
                summary = cmd_cost(cfg, outdir)
        print(summary)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
