"""Command-line entry point: ``revpomdp {check,qual,value,simulate}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .belief import Belief
from .model import MissingSectionError, ModelError, Pomdp, check_revealing, delta_min, format_fraction
from .modelio import ModelParseError, load_model
from .oracle import (OracleLimitExceeded, simulate, support_witness_policy, uniform_random_policy,
                     uniform_reliable_policy)
from .qualitative import belief_reach_region, initial_support, parity_region, to_dot
from .quantitative import (DEFAULT_MAX_GRID, DEFAULT_MAX_HORIZON, ResourceLimitExceeded, belief_reach_value,
                           extract_policy, parity_value, probe_transform, stopping_parameters)

SCHEMA = "revpomdp.report/1"
EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2
OBJECTIVES = ("parity", "reach", "belief-reach")
POLICIES = ("extracted", "support-witness", "uniform-reliable", "uniform-random")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: Path
    objective: str = "parity"
    epsilon: float = 0.05
    horizon: int | None = None
    grid_k: int | None = None
    seed: int = 0
    runs: int = 1000
    cutoff: int = 200
    policy: str = "extracted"
    structured: bool = False
    emit_dot: Path | None = None
    histogram: Path | None = None
    max_grid: int = DEFAULT_MAX_GRID
    max_horizon: int = DEFAULT_MAX_HORIZON
    early_stop: bool = True

    def __post_init__(self):
        if self.command in ("value", "simulate") and not 0 < self.epsilon < 1:
            raise UsageError("--epsilon must lie in (0,1)")
        if self.runs < 1:
            raise UsageError("--runs must be at least 1")
        if self.cutoff < 1:
            raise UsageError("--cutoff must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.horizon is not None and self.horizon < 0:
            raise UsageError("--horizon must be non-negative")
        if self.grid_k is not None and self.grid_k < 1:
            raise UsageError("--grid-k must be positive")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, type=Path, help="model document (JSON)")
    common.add_argument("--objective", choices=OBJECTIVES, default="parity")
    common.add_argument("--json", action="store_true", help="structured output")
    common.add_argument("--epsilon", type=float, default=0.05)
    common.add_argument("--horizon", type=int, help="override the theoretical horizon T")
    common.add_argument("--grid-k", type=int, help="override the grid resolution k")
    common.add_argument("--max-grid", type=_positive_int, default=DEFAULT_MAX_GRID)
    common.add_argument("--max-horizon", type=_positive_int, default=DEFAULT_MAX_HORIZON)
    common.add_argument("--no-early-stop", action="store_true", help="always run the full horizon")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--runs", type=int, default=1000)
    common.add_argument("--cutoff", type=int, default=200, help="simulation length")
    common.add_argument("--policy", choices=POLICIES, default="extracted")
    common.add_argument("--emit-dot", type=Path, help="write the support MDP as Graphviz")
    common.add_argument("--histogram", type=Path, help="write the hitting-time histogram as CSV")

    parser = argparse.ArgumentParser(prog="revpomdp", description="Analyse revealing POMDPs.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="validate a model and report revealing/stopping data")
    sub.add_parser("qual", parents=[common], help="almost-sure and limit-sure verdicts")
    sub.add_parser("value", parents=[common], help="approximate optimal value")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo runs of a policy")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command, model=ns.model, objective=ns.objective, epsilon=ns.epsilon, horizon=ns.horizon,
        grid_k=ns.grid_k, seed=ns.seed, runs=ns.runs, cutoff=ns.cutoff, policy=ns.policy, structured=ns.json,
        emit_dot=ns.emit_dot, histogram=ns.histogram, max_grid=ns.max_grid, max_horizon=ns.max_horizon,
        early_stop=not ns.no_early_stop,
    )


# ---------------------------------------------------------------------------
# objectives


@dataclass
class Reduced:
    """The model, objective data and query the engines actually run on.

    Parity keeps its priorities; belief-reach keeps its targets; reach is
    rewritten with the probe action into belief-reach of a fresh state.
    """

    model: Pomdp
    priorities: dict | None
    targets: frozenset | None
    query: Belief

    def region(self):
        if self.priorities is not None:
            return parity_region(self.model, self.priorities)
        return belief_reach_region(self.model, self.targets)


def reduce_objective(model: Pomdp, objective: str) -> Reduced:
    b0 = Belief.initial(model)
    if objective == "parity":
        return Reduced(model, dict(model.require_priorities()), None, b0)
    if objective == "belief-reach":
        return Reduced(model, None, frozenset(model.require_targets()), b0)
    pm = probe_transform(model)
    lifted = Belief(tuple(b0.probs) + (Fraction(0), Fraction(0)))
    return Reduced(pm.model, None, frozenset([pm.top]), lifted)


def _names(model: Pomdp, states) -> list[str]:
    return [s for s in model.states if s in states]


# ---------------------------------------------------------------------------
# commands


def cmd_check(cfg: RunConfig, model: Pomdp) -> dict:
    ok, bad = check_revealing(model)
    out = {
        "states": len(model.states), "actions": len(model.actions), "signals": len(model.signals),
        "revealing": ok, "delta_min": format_fraction(delta_min(model)),
        "violations": [f"({s},{a}) -> {t} never announced" for s, a, t in bad],
    }
    if ok:
        p = stopping_parameters(model)
        out["stopping"] = {"n": p.n, "q": format_fraction(p.q)}
    return out


def cmd_qual(cfg: RunConfig, model: Pomdp) -> dict:
    red = reduce_objective(model, cfg.objective)
    region = red.region()
    start = frozenset(red.model.states[i] for i in red.query.support)
    almost = start in region.winning
    out = {
        "objective": cfg.objective,
        "almost_sure": almost,
        "limit_sure": almost,
        "limit_sure_basis": "equals almost-sure on revealing models",
        "winning_states": _names(red.model, region.states),
        "winning_supports": len(region.winning),
        "supports": len(region.support_mdp.supports),
    }
    if cfg.emit_dot is not None:
        cfg.emit_dot.write_text(to_dot(region.support_mdp, region.winning), encoding="utf-8")
    return out


def _value_options(cfg: RunConfig, record_policy: bool = False) -> dict:
    return dict(early_stop=cfg.early_stop, horizon=cfg.horizon, k=cfg.grid_k, max_grid=cfg.max_grid,
                max_horizon=cfg.max_horizon, record_policy=record_policy)


def _solve(cfg: RunConfig, model: Pomdp, record_policy: bool = False):
    red = reduce_objective(model, cfg.objective)
    opts = _value_options(cfg, record_policy)
    if cfg.objective == "parity":
        report = parity_value(red.model, red.priorities, cfg.epsilon, red.query, **opts)
    else:
        report = belief_reach_value(red.model, red.targets, cfg.epsilon, red.query, **opts)
    return red, report


def cmd_value(cfg: RunConfig, model: Pomdp) -> dict:
    red, report = _solve(cfg, model)
    out = {"objective": cfg.objective}
    out.update(report.record())
    if cfg.objective == "parity":
        out["targets"] = _names(model, report.targets)
    return out


def cmd_simulate(cfg: RunConfig, model: Pomdp) -> dict:
    red = reduce_objective(model, cfg.objective)
    region = red.region()
    targets = region.states if cfg.objective == "parity" else red.targets
    out = {"objective": cfg.objective, "policy": cfg.policy}
    if cfg.policy == "extracted":
        _, report = _solve(cfg, model, record_policy=True)
        policy = extract_policy(red.model, report.solution, region=region if cfg.objective == "parity" else None)
        out["value"] = report.value
    elif cfg.policy == "support-witness":
        policy = support_witness_policy(red.model, region, initial_support(red.model))
    elif cfg.policy == "uniform-reliable":
        policy = uniform_reliable_policy(red.model, targets, start=red.query)
    else:
        policy = uniform_random_policy(red.model)
    stats = simulate(red.model, policy, "parity" if cfg.objective == "parity" else "reach", cfg.cutoff, cfg.runs,
                     cfg.seed, targets=targets, initial=red.query, workers=_threads())
    sim = stats.to_dict()
    sim["predicate"] = sim.pop("objective")
    out.update(sim)
    if cfg.histogram is not None:
        cfg.histogram.write_text(stats.histogram_csv(), encoding="utf-8")
    return out


COMMANDS = {"check": cmd_check, "qual": cmd_qual, "value": cmd_value, "simulate": cmd_simulate}


def _threads() -> int:
    raw = os.environ.get("REVPOMDP_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"REVPOMDP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"REVPOMDP_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# output


def _human_value(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6f}"
    if isinstance(v, list):
        return "{" + ", ".join(str(x) for x in v) + "}" if v and not isinstance(v[0], int) else str(v)
    if isinstance(v, dict):
        return ", ".join(f"{k}={_human_value(x)}" for k, x in v.items())
    return str(v)


def render(cfg: RunConfig, report: dict) -> str:
    if cfg.structured:
        doc = {"schema": SCHEMA, "command": cfg.command}
        doc.update({k: v for k, v in report.items() if k != "seconds"})
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    lines = []
    for k, v in report.items():
        if k == "hitting_histogram":
            v = " ".join(f"{t}:{c}" for t, c in enumerate(v) if c) or "none"
        elif isinstance(v, list) and not v:
            v = "none"
        lines.append(f"{k.replace('_', ' ')}: {_human_value(v)}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        model = load_model(cfg.model)
    except ModelParseError as exc:
        for e in exc.errors:
            err.write(f"{cfg.model}:{e}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"cannot read {cfg.model}: {exc.strerror or exc}\n")
        return EXIT_USAGE
    try:
        report = COMMANDS[cfg.command](cfg, model)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ModelError, MissingSectionError, ResourceLimitExceeded, OracleLimitExceeded, ValueError) as exc:
        err.write(f"analysis error: {exc}\n")
        return EXIT_ANALYSIS
    out.write(render(cfg, report))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        _threads()
    except UsageError as exc:
        sys.stderr.write(f"revpomdp: error: {exc}\n")
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
