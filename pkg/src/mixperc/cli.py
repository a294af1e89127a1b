"""
Command-line interface.

    mixperc scp --formula recycling --n 2,4,8 --alpha 0.5 --lam 0:1:0.05
    mixperc scp --preset fig4a --out fig4a.csv
    mixperc verify
    mixperc percolate --lattice square --size 64 --p 0.4:0.6:0.05
    mixperc threshold --lattice triangular --size 128 --trials 400
    mixperc network --lattice triangular --size 64 --lam 0.84 --distances 1,8,32
    mixperc network --network networks/cycle.json

Flags override values from ``--config`` (a JSON object keyed by flag name),
which override built-in defaults. The resolved configuration is echoed to
stderr and into the output metadata.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 internal numeric error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from scipy.optimize import brentq

from . import __version__
from .errors import ConvergenceError, DomainError, StateError
from .network import BondModel, Strategy, feasibility_check, load_network, run_network
from .percolation import (
    THRESHOLDS,
    Kind,
    LatticeSpec,
    build_lattice,
    crossing_probability,
    estimate_threshold,
)
from .protocols import (
    majorization_pair_scp,
    scp_cep_1d,
    scp_cep_square,
    scp_direct_1d,
    scp_distillable_subspace,
    scp_hybrid_1d,
    scp_pair,
    scp_recycling,
    scp_square,
)
from .qstate import PmsParams, PureSchmidt, pms_density
from .sweep import SweepResult, frange, grid
from .verify import run_verification

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

# keys that only affect how a run executes, not what it computes
EXECUTION_KEYS = {"out", "workers", "config", "command"}

DEFAULTS = {
    "scp": {"formula": "pair", "alpha": "0.5", "beta": None, "gamma": "0", "delta": "0",
            "lam": "0:1:0.05", "nu": None, "n": "2", "preset": None},
    "verify": {"tol": 1e-10},
    "percolate": {"lattice": "square", "size": 64, "boundary": "wrap", "p": "0.6", "trials": 200},
    "threshold": {"lattice": "triangular", "size": 128, "trials": 400, "tol": 0.005},
    "network": {"lattice": "triangular", "size": 64, "boundary": "wrap", "strategy": "cep_pairwise",
                "alpha": 0.5, "beta": None, "gamma": 0.0, "lam": 0.84, "nu": None, "n": None,
                "p_bond": None, "distances": "1,2,4,8", "pairs": None, "trials": 1000,
                "network": None},
}
COMMON = {"seed": 12345, "format": "csv", "out": None, "workers": 1}


class InputError(Exception):
    pass


def parse_values(text, integer: bool = False) -> list:
    """``"0.5"``, ``"2,4,8"`` or ``"start:stop:step"`` (inclusive) to a list."""
    if isinstance(text, (int, float)):
        vals = [text]
    else:
        text = str(text).strip()
        try:
            if ":" in text:
                start, stop, step = (float(x) for x in text.split(":"))
                vals = frange(start, stop, step)
            else:
                vals = [float(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise InputError(f"cannot parse value list {text!r}: {exc}") from None
    if not vals:
        raise InputError(f"empty value list {text!r}")
    if integer:
        if any(v != int(v) for v in vals):
            raise InputError(f"expected integers, got {text!r}")
        return [int(v) for v in vals]
    return [float(v) for v in vals]


# --- scp formulas -----------------------------------------------------------

# name -> (parameter symbols, evaluator taking a dict, output column)
SCP_FORMULAS: dict = {
    "pair": (("alpha", "gamma", "lam", "beta", "delta", "nu"),
             lambda q: scp_pair(PmsParams(q["alpha"], q["gamma"], q["lam"]),
                                PmsParams(q["beta"], q["delta"], q["nu"])), "p_pair"),
    "subspace": (("n", "alpha", "lam"),
                 lambda q: scp_distillable_subspace(q["n"], q["alpha"], q["lam"]), "p_subspace"),
    "recycling": (("n", "alpha", "lam"),
                  lambda q: scp_recycling(q["n"], q["alpha"], q["lam"]), "p_recycling"),
    "cep1d": (("alpha", "lam", "beta", "nu"),
              lambda q: scp_cep_1d(q["alpha"], q["lam"], q["beta"], q["nu"]), "p_cep"),
    "hybrid": (("alpha", "lam", "beta", "nu"),
               lambda q: scp_hybrid_1d(q["alpha"], q["lam"], q["beta"], q["nu"]), "p_h"),
    "direct": (("alpha", "lam", "beta", "nu"),
               lambda q: scp_direct_1d(q["alpha"], q["lam"], q["beta"], q["nu"]), "p_d"),
    "square": (("alpha", "lam", "beta", "nu"),
               lambda q: scp_square(q["alpha"], q["lam"], q["beta"], q["nu"]), "p_sq"),
    "cep_square": (("alpha", "lam", "beta", "nu"),
                   lambda q: scp_cep_square(q["alpha"], q["lam"], q["beta"], q["nu"]), "p_cep_square"),
    "majorization": (("alpha",), lambda q: majorization_pair_scp(PureSchmidt(q["alpha"])), "p_majorization"),
}


def _sweep(axes: list, columns: list, evaluators: list, meta: dict) -> SweepResult:
    res = SweepResult([name for name, _ in axes] + columns, metadata=meta)
    skipped = 0
    for point in grid(axes):
        try:
            vals = [fn(point) for fn in evaluators]
        except DomainError as exc:
            skipped += 1
            print(f"skipped {point}: {exc}", file=sys.stderr)
            continue
        res.add(*point.values(), *vals)
    res.metadata["skipped_rows"] = skipped
    return res


def cmd_scp(cfg: dict) -> SweepResult:
    preset = cfg.get("preset")
    if preset:
        return PRESETS[preset](cfg)
    formula = cfg["formula"]
    if formula not in SCP_FORMULAS:
        raise InputError(f"unknown formula {formula!r}; choose from {sorted(SCP_FORMULAS)}")
    symbols, fn, column = SCP_FORMULAS[formula]
    if cfg.get("beta") is None:
        cfg["beta"] = cfg["alpha"]
    if cfg.get("nu") is None:
        cfg["nu"] = cfg["lam"]
    axes = [(s, parse_values(cfg[s], integer=(s == "n"))) for s in symbols]
    return _sweep(axes, [column], [fn], _meta(cfg))


def preset_fig2a(cfg: dict) -> SweepResult:
    cfg.update(formula="recycling", alpha="0.5", n="2,4,6,8,16", lam="0:1:0.01")
    axes = [("n", parse_values(cfg["n"], True)), ("lam", parse_values(cfg["lam"]))]
    return _sweep(axes, ["p_recycling"], [lambda q: scp_recycling(q["n"], 0.5, q["lam"])], _meta(cfg))


def preset_fig2b(cfg: dict) -> SweepResult:
    cfg.update(alpha="0.5", lam="0:1:0.01")
    cols = ["p_subspace_n3", "p_subspace_n4", "p_subspace_n16", "p_recycling_n4"]
    fns = [lambda q, k=k: scp_distillable_subspace(k, 0.5, q["lam"]) for k in (3, 4, 16)]
    fns.append(lambda q: scp_recycling(4, 0.5, q["lam"]))
    meta = _meta(cfg)
    meta["thresholds"] = {k.value: THRESHOLDS[k] for k in (Kind.TRIANGULAR, Kind.SQUARE, Kind.HONEYCOMB)}
    return _sweep([("lam", parse_values(cfg["lam"]))], cols, fns, meta)


def preset_fig4a(cfg: dict) -> SweepResult:
    cfg.update(lam="0.95", nu="0.95", beta="0.5", alpha="0:1:0.01")
    lam, nu, beta = 0.95, 0.95, 0.5
    fns = [lambda q, f=f: f(q["alpha"], lam, beta, nu)
           for f in (scp_cep_1d, scp_hybrid_1d, scp_direct_1d, scp_cep_square, scp_square)]
    cols = ["p_cep", "p_h", "p_d", "p_cep_square", "p_sq"]
    return _sweep([("alpha", parse_values(cfg["alpha"]))], cols, fns, _meta(cfg))


def purity_threshold(scp: Callable[[float], float], threshold: float) -> tuple:
    """Smallest ``lam`` with ``scp(lam) = threshold`` and the purity there (alpha = 1/2)."""
    if scp(1.0) < threshold:
        raise DomainError("threshold not reachable even at lam = 1")
    if scp(1.0) == threshold:
        lam = 1.0
    else:
        lam = brentq(lambda x: scp(x) - threshold, 0.0, 1.0, xtol=1e-14)
    return lam, pms_density(PmsParams(0.5, 0.0, lam)).purity()


def preset_purity(cfg: dict) -> SweepResult:
    cases = []
    for kind in (Kind.TRIANGULAR, Kind.SQUARE, Kind.HONEYCOMB):
        cases.append((2, kind, lambda x: scp_pair(PmsParams(0.5, 0, x), PmsParams(0.5, 0, x))))
        cases.append((3, kind, lambda x: scp_distillable_subspace(3, 0.5, x)))
    res = SweepResult(["lattice", "edges", "threshold", "lam_min", "purity_min"], metadata=_meta(cfg))
    skipped = 0
    for edges, kind, fn in cases:
        try:
            lam, purity = purity_threshold(fn, THRESHOLDS[kind])
        except DomainError:
            skipped += 1
            continue
        res.add(kind.value, edges, THRESHOLDS[kind], lam, purity)
    res.metadata["skipped_rows"] = skipped
    return res


PRESETS = {"fig2a": preset_fig2a, "fig2b": preset_fig2b, "fig4a": preset_fig4a, "purity": preset_purity}


# --- other commands ---------------------------------------------------------


def cmd_verify(cfg: dict) -> list:
    return run_verification(tol=float(cfg["tol"]))


def _spec(cfg: dict) -> LatticeSpec:
    return LatticeSpec(cfg["lattice"], int(cfg["size"]), cfg.get("boundary", "wrap"))


def cmd_percolate(cfg: dict) -> SweepResult:
    spec = _spec(cfg)
    g = build_lattice(spec)
    res = SweepResult(["p", "crossing_probability", "stderr", "largest_cluster_fraction"], metadata=_meta(cfg))
    for p in parse_values(cfg["p"]):
        est, largest = crossing_probability(g, p, int(cfg["trials"]), int(cfg["seed"]), int(cfg["workers"]))
        res.add(p, est.value, est.stderr, largest)
    return res


def cmd_threshold(cfg: dict) -> SweepResult:
    spec = _spec(cfg)
    est = estimate_threshold(spec, int(cfg["trials"]), float(cfg["tol"]), int(cfg["seed"]), int(cfg["workers"]))
    res = SweepResult(
        ["size", "trials", "estimate", "reference", "deviation", "crossing_at_estimate"], metadata=_meta(cfg)
    )
    res.add(est.size, est.trials, est.estimate, est.reference, est.deviation, est.crossing_at_estimate)
    return res


def _bond_model(cfg: dict, strat: Strategy) -> BondModel:
    alpha, lam, gamma = float(cfg["alpha"]), float(cfg["lam"]), float(cfg["gamma"])
    if strat.kind.value in ("cep_recycling", "cep_subspace"):
        n = int(cfg["n"] or 2)
        return BondModel.identical(n, alpha, lam, gamma)
    beta = float(cfg["beta"] if cfg.get("beta") is not None else alpha)
    nu = float(cfg["nu"] if cfg.get("nu") is not None else lam)
    return BondModel((PmsParams(alpha, gamma, lam), PmsParams(beta, gamma, nu)))


def _pairs(cfg: dict, spec: LatticeSpec) -> list:
    g = build_lattice(spec)
    origin = (0,) * spec.dim
    if cfg.get("pairs"):
        out = []
        for chunk in str(cfg["pairs"]).split(";"):
            a, b = chunk.split(":")
            out.append((g.node(*parse_values(a, True)), g.node(*parse_values(b, True))))
        return out
    step = 2 if spec.kind is Kind.FCC else 1  # fcc coordinates advance in pairs along an axis
    return [
        (g.node(*origin), g.node(*((d * step) % spec.extent,) + origin[1:]))
        for d in parse_values(cfg["distances"], True)
    ]


def cmd_network(cfg: dict) -> SweepResult:
    if cfg.get("network"):
        net = load_network(cfg["network"])
        fz = feasibility_check(net)
        res = SweepResult(["feasible", "flow"], metadata=_meta(cfg))
        res.metadata["witness"] = {"paths": fz.paths, "cut": fz.cut}
        res.add(fz.feasible, fz.flow)
        return res
    spec = _spec(cfg)
    strat = Strategy(cfg["strategy"], int(cfg["n"]) if cfg.get("n") else None)
    model = _bond_model(cfg, strat)
    res = run_network(
        spec, model, strat, _pairs(cfg, spec), int(cfg["trials"]), int(cfg["seed"]),
        int(cfg["workers"]), None if cfg.get("p_bond") is None else float(cfg["p_bond"]),
    )
    res.metadata["config"] = _meta(cfg)["config"]
    return res


COMMANDS = {
    "scp": cmd_scp,
    "percolate": cmd_percolate,
    "threshold": cmd_threshold,
    "network": cmd_network,
}


def _meta(cfg: dict) -> dict:
    echo = {k: v for k, v in sorted(cfg.items()) if k not in EXECUTION_KEYS}
    return {"command": cfg["command"], "config": echo, "seed": cfg.get("seed"), "version": __version__}


# --- argument handling --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixperc", description="Entanglement percolation with mixed states.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        S = argparse.SUPPRESS
        p.add_argument("--config", default=S, help="JSON file of flag values")
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--trials", type=int, default=S)
        p.add_argument("--out", default=S, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=S)
        p.add_argument("--workers", type=int, default=S, help="threads for Monte Carlo trials")
        return p

    S = argparse.SUPPRESS
    p = common(sub.add_parser("scp", help="evaluate a conversion-probability formula over a grid"))
    p.add_argument("--formula", choices=sorted(SCP_FORMULAS), default=S)
    p.add_argument("--preset", choices=sorted(PRESETS), default=S)
    for sym in ("alpha", "beta", "gamma", "delta", "lam", "nu", "n"):
        p.add_argument(f"--{sym}", default=S, help="value, comma list or start:stop:step")

    p = common(sub.add_parser("verify", help="check closed forms against exact enumeration"))
    p.add_argument("--tol", type=float, default=S)

    for name, hlp in (("percolate", "crossing probability sweep"), ("threshold", "estimate a percolation threshold")):
        p = common(sub.add_parser(name, help=hlp))
        p.add_argument("--lattice", choices=[k.value for k in Kind], default=S)
        p.add_argument("--size", type=int, default=S)
        if name == "percolate":
            p.add_argument("--boundary", choices=["open", "wrap"], default=S)
            p.add_argument("--p", default=S, help="value, comma list or start:stop:step")
        else:
            p.add_argument("--tol", type=float, default=S)

    p = common(sub.add_parser("network", help="feasibility of a network file, or a percolating lattice run"))
    p.add_argument("--network", default=S, help="network description (JSON); reports feasibility")
    p.add_argument("--lattice", choices=[k.value for k in Kind], default=S)
    p.add_argument("--size", type=int, default=S)
    p.add_argument("--boundary", choices=["open", "wrap"], default=S)
    p.add_argument("--strategy", default=S)
    for sym in ("alpha", "beta", "gamma", "lam", "nu"):
        p.add_argument(f"--{sym}", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--p-bond", dest="p_bond", type=float, default=S)
    p.add_argument("--distances", default=S, help="lattice steps from the origin along axis 0 (a step is two hops on fcc)")
    p.add_argument("--pairs", default=S, help="explicit pairs 'x,y:x,y;...'")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {**COMMON, **DEFAULTS[args.command]}
    flags = vars(args)
    if "config" in flags:
        try:
            with open(flags["config"]) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {flags['config']!r}: {exc}") from None
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update({k: v for k, v in flags.items() if k != "config"})
    return cfg


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        print(json.dumps({"resolved_config": cfg}, sort_keys=True, default=str), file=sys.stderr)
        if args.command == "verify":
            results = cmd_verify(cfg)
            report = "\n".join(r.line() for r in results) + "\n"
            if cfg["format"] == "json":
                report = json.dumps(
                    [{"name": r.name, "passed": r.passed, "max_deviation": r.max_deviation,
                      "tolerance": r.tolerance, "cases": r.cases, "worst": r.worst} for r in results],
                    indent=2, sort_keys=True,
                ) + "\n"
            _emit(report, cfg["out"])
            return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
        res = COMMANDS[args.command](cfg)
        _emit(res.render(cfg["format"]), cfg["out"])
        return EXIT_OK
    except (InputError, DomainError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StateError, ConvergenceError, FloatingPointError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
