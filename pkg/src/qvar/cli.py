"""Command-line front end: config ingestion, analysis, CSV/JSON emission.

Subcommands:
  analyze       full VaR analysis, JSON report
  distribution  exact loss distribution as CSV (loss,probability,cdf)
  resources     qubit/gate accounting as JSON
  compare       consistency table across exact, classical, IQAE and MC paths

Configs are JSON documents; every run echoes the fully resolved config so
reports are self-describing, and all output is deterministic for a given
(config, seed) pair.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import jsonschema
import numpy as np

from .estimation import IqaeConfig, exact_amplitude, iqae
from .gaussian import discretize_normal
from .objective import build_a_circuit
from .resources import estimate_resources
from .risk import (EstimationFailure, exact_loss_distribution, expected_loss,
                   monte_carlo_distribution, var_bisection)
from .uncertainty import Asset, Portfolio

VARIANT_CHOICES = ("multi_rotation", "single_rotation", "single_factor")
ENCODING_CHOICES = ("exact", "linear")
ESTIMATOR_CHOICES = ("exact", "iqae", "classical")
MODE_CHOICES = ("s_free", "weighted_sum")

DEFAULTS = {
    "bound_sigmas": 3.0,
    "shots_per_round": 100,
    "max_rounds": 64,
    "seed": 0,
    "variant": "multi_rotation",
    "encoding": "linear",
    "estimator": "iqae",
    "mode": "s_free",
    "mc_paths": 100_000,
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["risk_factors", "assets", "analysis"],
    "additionalProperties": False,
    "properties": {
        "risk_factors": {
            "type": "object",
            "required": ["count", "qubits_per_factor"],
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "qubits_per_factor": {
                    "oneOf": [
                        {"type": "integer", "minimum": 1},
                        {"type": "array", "minItems": 1,
                         "items": {"type": "integer", "minimum": 1}},
                    ]
                },
                "bound_sigmas": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "assets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["lgd", "p0", "rho", "alphas"],
                "additionalProperties": False,
                "properties": {
                    "lgd": {"type": "number", "minimum": 0},
                    "p0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                    "alphas": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                },
            },
        },
        "analysis": {
            "type": "object",
            "required": ["alpha"],
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "confidence": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "shots_per_round": {"type": "integer", "minimum": 1},
                "max_rounds": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "variant": {"enum": list(VARIANT_CHOICES)},
                "encoding": {"enum": list(ENCODING_CHOICES)},
                "estimator": {"enum": list(ESTIMATOR_CHOICES)},
                "mode": {"enum": list(MODE_CHOICES)},
                "mc_paths": {"type": "integer", "minimum": 1},
            },
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration, with a field-path diagnostic."""


def load_config(path: str, overrides=None) -> dict:
    """Read, validate and resolve a config file; returns the resolved dict.

    Command-line overrides are merged before schema validation so they obey
    the same constraints as config values.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    cfg = json.loads(json.dumps(raw))        # deep copy
    if overrides and isinstance(cfg.get("analysis"), dict):
        cfg["analysis"].update({k: v for k, v in overrides.items() if v is not None})

    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        listing = "; ".join(
            ("/".join(str(p) for p in err.absolute_path) or "<root>") + ": " + err.message
            for err in errors)
        raise ConfigError(f"{path}: schema violations: {listing}")

    analysis = cfg["analysis"]
    factors = cfg["risk_factors"]
    factors.setdefault("bound_sigmas", DEFAULTS["bound_sigmas"])
    for key in ("shots_per_round", "max_rounds", "seed", "variant",
                "encoding", "estimator", "mode", "mc_paths"):
        analysis.setdefault(key, DEFAULTS[key])

    r = factors["count"]
    qubits = factors["qubits_per_factor"]
    if isinstance(qubits, list):
        if len(qubits) != r:
            raise ConfigError(
                f"risk_factors.qubits_per_factor: expected {r} entries, got {len(qubits)}")
    else:
        factors["qubits_per_factor"] = [qubits] * r
    for idx, asset in enumerate(cfg["assets"]):
        if len(asset["alphas"]) != r:
            raise ConfigError(
                f"assets[{idx}].alphas: expected {r} weights, got {len(asset['alphas'])}")
    if analysis["variant"] == "single_factor" and r != 1:
        raise ConfigError(
            f"analysis.variant: single_factor requires risk_factors.count = 1, got {r}")
    if analysis["estimator"] == "iqae":
        for key in ("epsilon", "confidence"):
            if key not in analysis:
                raise ConfigError(f"analysis.{key}: required when estimator is 'iqae'")
    return cfg


def config_to_inputs(cfg: dict):
    """Build the portfolio, factor grids and estimator from a resolved config."""
    analysis = cfg["analysis"]
    factors = cfg["risk_factors"]
    portfolio = Portfolio([
        Asset(lgd=a["lgd"], p0=a["p0"], rho=a["rho"], alphas=tuple(a["alphas"]))
        for a in cfg["assets"]])
    grids = [discretize_normal(n_z, 0.0, 1.0, factors["bound_sigmas"])
             for n_z in factors["qubits_per_factor"]]
    if analysis["estimator"] == "iqae":
        estimator = IqaeConfig(
            epsilon=analysis["epsilon"],
            confidence=analysis["confidence"],
            shots_per_round=analysis["shots_per_round"],
            max_rounds=analysis["max_rounds"],
            seed=analysis["seed"],
        )
    else:
        estimator = analysis["estimator"]
    return portfolio, grids, estimator


def _resource_variant(variant: str) -> str:
    # single_factor is the R=1 special case of the multi-rotation accounting
    return "multi_rotation" if variant == "single_factor" else variant


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_analyze(cfg: dict, output: str | None) -> int:
    portfolio, grids, estimator = config_to_inputs(cfg)
    analysis = cfg["analysis"]
    try:
        result = var_bisection(
            portfolio, grids, analysis["alpha"], estimator,
            variant=analysis["variant"], encoding=analysis["encoding"],
            mode=analysis["mode"])
    except EstimationFailure as exc:
        trace = [{k: v for k, v in asdict(p).items() if v is not None}
                 for p in exc.trace]
        _emit(_dump_json({"config": cfg, "error": str(exc),
                          "results": {"bisection_trace": trace}}), output)
        print(f"error: {exc}; partial report written", file=sys.stderr)
        return 1
    naive_el = sum(a.lgd * a.p0 for a in portfolio.assets)
    trace = [{k: v for k, v in asdict(p).items() if v is not None}
             for p in result.bisection_trace]
    report = {
        "config": cfg,
        "results": {
            "var": result.var,
            "alpha": result.alpha,
            "cdf_at_var": result.cdf_at_var,
            "expected_loss": result.expected_loss,
            "naive_expected_loss": naive_el,
            "economic_capital": result.economic_capital,
            "estimator": analysis["estimator"],
            "bisection_trace": trace,
            "total_quantum_samples": sum(
                p.quantum_samples or 0 for p in result.bisection_trace) or None,
        },
        "resources": asdict(estimate_resources(
            portfolio, grids, _resource_variant(analysis["variant"]), analysis["mode"])),
    }
    failed = [p for p in result.bisection_trace if p.converged is False]
    if failed:
        report["results"]["estimation_failures"] = [p.threshold for p in failed]
    _emit(_dump_json(report), output)
    if failed:
        print(f"error: estimation did not converge at thresholds "
              f"{[p.threshold for p in failed]}; partial report written", file=sys.stderr)
        return 1
    return 0


def cmd_distribution(cfg: dict, output: str | None) -> int:
    portfolio, grids, _ = config_to_inputs(cfg)
    dist = exact_loss_distribution(portfolio, grids)
    lines = ["loss,probability,cdf"]
    cum = 0.0
    for loss, prob in zip(dist.losses, dist.probs):
        cum += prob
        lines.append(f"{loss:.12g},{prob:.12g},{cum:.12g}")
    _emit("\n".join(lines) + "\n", output)
    return 0


def cmd_resources(cfg: dict, output: str | None) -> int:
    portfolio, grids, _ = config_to_inputs(cfg)
    analysis = cfg["analysis"]
    report = estimate_resources(
        portfolio, grids, _resource_variant(analysis["variant"]), analysis["mode"])
    _emit(_dump_json({"config": cfg, "resources": asdict(report)}), output)
    return 0


def cmd_compare(cfg: dict, output: str | None) -> int:
    portfolio, grids, _ = config_to_inputs(cfg)
    analysis = cfg["analysis"]
    for key in ("epsilon", "confidence"):
        if key not in analysis:
            raise ConfigError(f"analysis.{key}: required by the compare command")
    epsilon = analysis["epsilon"]
    confidence = analysis["confidence"]
    dist = exact_loss_distribution(portfolio, grids)
    mc = monte_carlo_distribution(portfolio, grids, analysis["mc_paths"],
                                  analysis["seed"])
    header = (f"{'threshold':>12}  {'classical':>12}  {'exact':>12}  {'|e-c|':>9}  "
              f"{'iqae':>12}  {'|q-e|':>9}  {'<=eps':>5}  {'mc':>12}  {'|m-e|':>9}  {'<=3sd':>5}")
    lines = [header, "-" * len(header)]
    ok = True
    for i, x in enumerate(dist.losses):
        x = float(x)
        classical = dist.cdf(x)
        a_circ = build_a_circuit(portfolio, grids, x, variant=analysis["variant"],
                                 encoding=analysis["encoding"], mode=analysis["mode"])
        exact = exact_amplitude(a_circ)
        q = iqae(a_circ, IqaeConfig(epsilon=epsilon, confidence=confidence,
                                    shots_per_round=analysis["shots_per_round"],
                                    max_rounds=analysis["max_rounds"],
                                    seed=analysis["seed"] + i))
        mc_val = mc.cdf(x)
        sigma = max(np.sqrt(exact * (1 - exact) / analysis["mc_paths"]), 1e-12)
        q_ok = abs(q.estimate - exact) <= epsilon
        mc_ok = abs(mc_val - exact) <= 3 * sigma
        ok = ok and q_ok
        lines.append(
            f"{x:>12.6g}  {classical:>12.9f}  {exact:>12.9f}  {abs(exact - classical):>9.2e}  "
            f"{q.estimate:>12.9f}  {abs(q.estimate - exact):>9.2e}  {str(q_ok):>5}  "
            f"{mc_val:>12.9f}  {abs(mc_val - exact):>9.2e}  {str(mc_ok):>5}")
    lines.append("")
    lines.append(f"expected loss (model): {expected_loss(dist):.12g}")
    lines.append(f"monte carlo paths: {analysis['mc_paths']}, seed: {analysis['seed']}")
    _emit("\n".join(lines) + "\n", output)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qvar",
        description="Credit-risk VaR engine on an embedded statevector simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("analyze", "run the VaR analysis and emit a JSON report"),
            ("distribution", "emit the exact loss distribution as CSV"),
            ("resources", "emit the qubit/gate accounting as JSON"),
            ("compare", "cross-check exact, classical, IQAE and Monte Carlo paths")):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", required=True, help="path to a JSON config")
        cmd.add_argument("--output", default=None, help="output path (default: stdout)")
        cmd.add_argument("--seed", type=int, default=None, help="override analysis.seed")
        cmd.add_argument("--estimator", choices=ESTIMATOR_CHOICES, default=None)
        cmd.add_argument("--variant", choices=VARIANT_CHOICES, default=None)
        cmd.add_argument("--encoding", choices=ENCODING_CHOICES, default=None)
        cmd.add_argument("--mode", choices=MODE_CHOICES, default=None)
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "distribution": cmd_distribution,
    "resources": cmd_resources,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "estimator": args.estimator,
        "variant": args.variant,
        "encoding": args.encoding,
        "mode": args.mode,
    }
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg, args.output)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
