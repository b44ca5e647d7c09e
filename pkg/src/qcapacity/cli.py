"""Command-line front end.

Every command prints one JSON report on stdout and a short summary on
stderr. Exit codes: 0 success, 1 verification failure, 2 input error,
3 resource cap.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import OptimizerConfig, config_dict, holevo_minimax, n_copy_q1, q1
from .channels import load_channel, load_state, parse_zoo_spec
from .entropy_measures import relative_entropy
from .errors import DimensionOverflow, DimTooLarge, QCapacityError
from .states import von_neumann_entropy
from .superactivation import GAP_TOL, ZERO_CAP_TOL, analyze_pair
from .verification import run_suite

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


def _digest_file(path: str) -> dict:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return {"source": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def resolve_channel(spec: str):
    """``zoo:NAME(P1,...)`` or a channel-spec file path."""
    if spec.startswith("zoo:"):
        ch = parse_zoo_spec(spec[4:])
        digest = {"source": spec, "sha256": hashlib.sha256(spec.encode()).hexdigest()}
    else:
        digest = _digest_file(spec)
        ch = load_channel(spec)
    return ch, digest


def _jsonable(x):
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        max_iters=args.max_iters,
        conv_tol=args.tol,
        step_init=args.step_init,
        ensemble_size=args.ensemble_size,
        seed=args.seed,
        workers=args.workers,
        max_dim_in=args.max_dim,
    )


def cmd_entropy(args):
    inputs = {"state": _digest_file(args.state)}
    rho = load_state(args.state)
    results = {"entropy": von_neumann_entropy(rho)}
    summary = f"S(rho) = {results['entropy']:.10g} bits"
    if args.sigma:
        inputs["sigma"] = _digest_file(args.sigma)
        sigma = load_state(args.sigma)
        d = relative_entropy(rho, sigma)
        results["relative_entropy"] = d.value
        results["support_violation"] = d.support_violation
        summary += f"; D(rho||sigma) = {'inf' if d.support_violation else f'{d.value:.10g}'}"
    return inputs, None, results, summary, EXIT_OK


def cmd_capacity(args):
    ch, digest = resolve_channel(args.channel)
    cfg = _config(args)
    rep = n_copy_q1(ch, args.copies, cfg) if args.copies > 1 else q1(ch, cfg)
    results = rep.to_dict()
    summary = f"Q1 lower bound = {rep.value:.10g} bits per copy (n={rep.copies}, form={rep.form}, converged={rep.converged})"
    return {"channel": digest}, cfg, results, summary, EXIT_OK


def cmd_holevo(args):
    ch, digest = resolve_channel(args.channel)
    cfg = _config(args)
    rep = holevo_minimax(ch, cfg)
    summary = f"chi = {rep.value:.10g} bits, certificate gap {rep.certificate_gap:.3g} (converged={rep.converged})"
    return {"channel": digest}, cfg, rep.to_dict(), summary, EXIT_OK


def cmd_superactivation(args):
    a, da = resolve_channel(args.channel_a)
    b, db = resolve_channel(args.channel_b)
    cfg = _config(args)
    rep = analyze_pair(a, b, cfg, gap_tol=args.gap_tol, zero_cap_tol=args.zero_cap_tol)
    summary = (
        f"verdict {rep.verdict.value} (both_zero={rep.both_zero}); gap {rep.additivity_gap:.4g} bits; "
        f"residuals opt {rep.product_residual_optimal:.3g} avg {rep.product_residual_average:.3g}; "
        f"negativity {rep.negativity_optimal:.3g}"
    )
    return {"channel_a": da, "channel_b": db}, cfg, rep.to_dict(include_reports=True), summary, EXIT_OK


def cmd_verify(args):
    if args.trials < 0:
        raise InputError("--trials must be non-negative")
    checks = run_suite(args.suite, args.trials, args.seed)
    passed = all(c.passed for c in checks)
    results = {"suite": args.suite, "trials": args.trials, "seed": args.seed, "passed": passed, "checks": [c.to_dict() for c in checks]}
    lines = [f"{c.name}: max deviation {c.max_deviation:.3e} (tol {c.tolerance:g}) {'pass' if c.passed else 'FAIL'}" for c in checks]
    return {}, None, results, "\n".join(lines) or "no trials", EXIT_OK if passed else EXIT_VERIFY


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    d = OptimizerConfig()
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=d.conv_tol, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--step-init", type=float, default=d.step_init)
    p.add_argument("--ensemble-size", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-dim", type=int, default=d.max_dim_in, help="cap on the (joint) input dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="von Neumann entropy and relative entropy of state files")
    p.add_argument("--state", required=True)
    p.add_argument("--sigma")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("capacity", help="single-use quantum capacity lower bound")
    p.add_argument("--channel", required=True, help="channel file or zoo:NAME(PARAMS)")
    p.add_argument("--copies", type=int, default=1)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("holevo", help="Holevo capacity with divergence-radius certificate")
    p.add_argument("--channel", required=True)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_holevo)

    p = sub.add_parser("superactivation", help="additivity and product-state analysis of a channel pair")
    p.add_argument("--channel-a", required=True)
    p.add_argument("--channel-b", required=True)
    p.add_argument("--gap-tol", type=float, default=GAP_TOL)
    p.add_argument("--zero-cap-tol", type=float, default=ZERO_CAP_TOL)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_superactivation)

    p = sub.add_parser("verify", help="randomized identity suites")
    p.add_argument("--suite", choices=["factorization", "identities"], required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        inputs, cfg, results, summary, code = args.func(args)
    except (DimTooLarge, DimensionOverflow) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (QCapacityError, InputError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {
        "command": args.command,
        "inputs": inputs,
        "config": config_dict(cfg) if cfg is not None else None,
        "results": _jsonable(results),
        "runtime_ms": int(round(1000 * (time.perf_counter() - start))),
        "tool_version": __version__,
    }
    print(json.dumps(report, sort_keys=True))
    print(summary, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
