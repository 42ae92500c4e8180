"""Command-line front end: ``riskmdp {validate,eval,conditions,analyze,solve,simulate}``.

Reports are deterministic for fixed inputs except for the final timing
entry. All reals are rendered with 12 significant digits; infinite and
non-existent values appear as the tokens ``+inf``, ``-inf`` and
``nonexistent(<reason>)``.

Exit codes: 0 success, 1 invalid input, 2 I/O error, 3 engine error,
4 violated precondition.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from .conditions import CONDITION_IDS, ConditionContext, check_conditions
from .errors import (
    IncompatibleUtilityError,
    MdpFormatError,
    MdpValidationError,
    PolicyError,
    PreconditionError,
    RiskMdpError,
)
from .expo import exp_infinite_value
from .horizon import finite_horizon_eu
from .linear import linear_infinite_value
from .mdp import parse_mdp, validate
from .outcome import format_ext
from .policy import parse_policy, policy_guard
from .probe import limit_probe
from .simulate import sample_eu
from .solve import check_solve_precondition, risk_vi_solve
from .utility import parse_utility
from .verdict import analyze

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_ENGINE, EXIT_PRECONDITION = range(5)


class _Inputs:
    """Reads input files once and records their digests."""

    def __init__(self):
        self.digests = {}

    def text(self, role: str, path: str) -> str:
        with open(path, "rb") as fh:
            raw = fh.read()
        self.digests[role] = {"path": path, "sha256": hashlib.sha256(raw).hexdigest()}
        return raw.decode("utf-8")

    def mdp(self, path, strict=True):
        return parse_mdp(self.text("mdp", path), strict=strict)

    def policy(self, path, mdp):
        pi = parse_policy(self.text("policy", path))
        pi.check(mdp)
        return pi

    def utility(self, path):
        return parse_utility(self.text("utility", path))


def _outcomes(vals: dict) -> dict:
    return {s: o.token() for s, o in vals.items()}


def _numeric_states(vals: dict) -> list[str]:
    return [s for s, o in vals.items() if o.numeric]


# ---------------------------------------------------------------------------
# commands; each returns (result mapping, exit code)


def cmd_validate(args, inp):
    mdp = inp.mdp(args.mdp, strict=False)
    diags = validate(mdp)
    result = {"states": len(mdp.states), "actions": len(mdp.actions),
              "valid": "yes" if not diags else "no"}
    if diags:
        result["diagnostics"] = [str(d) for d in diags]
        for d in diags:
            print(f"riskmdp: {d}", file=sys.stderr)
        return result, EXIT_INVALID
    return result, EXIT_OK


def cmd_eval(args, inp):
    mdp = inp.mdp(args.mdp)
    pi = inp.policy(args.policy, mdp)
    u = inp.utility(args.utility)
    method = args.method
    result = {"utility": u.describe(), "policy": pi.describe()}
    if args.infinite:
        if method == "enumerate":
            raise IncompatibleUtilityError("trajectory enumeration needs a finite --horizon")
        if method == "matrix" and u.form != "exponential":
            raise IncompatibleUtilityError("the matrix method needs an exponential utility")
        if method == "probe":
            vals, engine = limit_probe(mdp, pi, u), "probe"
        elif u.form == "exponential":
            vals, engine = exp_infinite_value(mdp, pi, u.gamma), "matrix"
        elif u.form == "linear":
            vals, engine = linear_infinite_value(mdp, pi), "fundamental-matrix"
        else:
            vals, engine = limit_probe(mdp, pi, u), "probe"
        result.update(horizon="infinite", engine=engine, values=_outcomes(vals),
                      numeric_states=_numeric_states(vals))
        return result, EXIT_OK
    if method == "probe":
        raise IncompatibleUtilityError("the probe only classifies infinite-horizon limits; "
                                       "use --infinite")
    if method == "auto":
        engine = {"exponential": "matrix", "linear": "linear"}.get(u.form, "atoms")
    else:
        engine = method
    vec = finite_horizon_eu(mdp, pi, u, args.horizon, method=engine)
    result.update(horizon=str(args.horizon), engine=engine,
                  values={s: format_ext(v) for s, v in vec.as_dict().items()})
    return result, EXIT_OK


def _condition_rows(reports) -> dict:
    rows = {}
    for rep in reports:
        row = {"status": rep.status}
        if rep.witness is not None:
            row["witness"] = rep.witness.describe()
        if rep.parameters:
            row["parameters"] = ", ".join(
                f"{k}={format_ext(v) if isinstance(v, float) else v}"
                for k, v in rep.parameters.items()
            )
        if rep.numeric:
            row["numeric"] = "yes"
        if rep.quantifier_note:
            row["quantifier"] = rep.quantifier_note
        rows[rep.id] = row
    return rows


def cmd_conditions(args, inp):
    mdp = inp.mdp(args.mdp)
    u = inp.utility(args.utility)
    ids = None
    if args.ids:
        ids = [i.strip().upper() for i in args.ids.split(",") if i.strip()]
        bad = [i for i in ids if i not in CONDITION_IDS]
        if bad:
            raise MdpFormatError(f"unknown condition id(s) {', '.join(bad)}", "--ids")
    reports = check_conditions(mdp, u, ids, context=ConditionContext(mdp, policy_guard()))
    return {"utility": u.describe(), "conditions": _condition_rows(reports)}, EXIT_OK


def cmd_analyze(args, inp):
    mdp = inp.mdp(args.mdp)
    u = inp.utility(args.utility)
    v = analyze(mdp, u, policy_guard())
    result = {
        "utility": u.describe(),
        "values_exist": v.values_exist,
        "optimal_values_exist": v.optimal_values_exist,
        "optimal_values_finite": v.optimal_values_finite,
    }
    if v.table2_cell is not None:
        result["table2_cell"] = v.table2_cell
    result["citations"] = [f"{ref}: {why}" for ref, why in v.citations]
    result["notes"] = list(v.notes)
    result["conditions"] = {cid: rep.status for cid, rep in v.conditions.items()}
    return result, EXIT_OK


def cmd_solve(args, inp):
    mdp = inp.mdp(args.mdp)
    case = check_solve_precondition(mdp, args.gamma, policy_guard())
    sol = risk_vi_solve(mdp, args.gamma, tol=args.tol, guard=policy_guard())
    return {
        "gamma": format_ext(args.gamma),
        "case": case,
        "actions": dict(sol.policy.rule),
        "values": {s: format_ext(v) for s, v in sol.values.as_dict().items()},
        "bellman_residual": format(sol.residual, ".3e"),
        "iterations": str(sol.iterations),
        "exact_evaluation": "yes" if sol.exact else "no",
    }, EXIT_OK


def cmd_simulate(args, inp):
    mdp = inp.mdp(args.mdp)
    pi = inp.policy(args.policy, mdp)
    u = inp.utility(args.utility)
    start = args.start or mdp.initial or mdp.states[0]
    if start not in mdp.index:
        raise MdpFormatError(f"unknown start state {start!r}", "--start")
    est = sample_eu(mdp, pi, start, u, args.horizon, args.samples, args.seed)
    result = {
        "utility": u.describe(), "start": start, "horizon": str(args.horizon),
        "samples": str(est.n), "seed": str(est.seed),
        "mean": format_ext(est.mean), "stderr": format_ext(est.stderr),
    }
    try:
        exact = finite_horizon_eu(mdp, pi, u, args.horizon)[start]
    except RiskMdpError as exc:
        result["exact"] = f"unavailable ({exc})"
        return result, EXIT_OK
    gap = abs(est.mean - exact)
    agree = gap <= 4 * est.stderr if est.stderr > 0 else gap <= 1e-12 * max(1.0, abs(exact))
    result.update(exact=format_ext(exact), within_4_stderr="yes" if agree else "no")
    return result, EXIT_OK


COMMANDS = {
    "validate": cmd_validate, "eval": cmd_eval, "conditions": cmd_conditions,
    "analyze": cmd_analyze, "solve": cmd_solve, "simulate": cmd_simulate,
}


# ---------------------------------------------------------------------------
# rendering


def _render_text(node, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, val in node.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render_text(val, indent + 1))
        elif isinstance(val, list):
            lines.append(f"{pad}{key}:" + ("" if val else " (none)"))
            lines.extend(f"{pad}  - {item}" for item in val)
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_render_text(report)) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskmdp",
        description="Existence and finiteness of expected utilities in MDPs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check an MDP file")
    p.add_argument("mdp")

    p = sub.add_parser("eval", parents=[common], help="evaluate a stationary policy")
    p.add_argument("mdp")
    p.add_argument("policy")
    p.add_argument("utility")
    horizon = p.add_mutually_exclusive_group(required=True)
    horizon.add_argument("--horizon", type=int, metavar="T")
    horizon.add_argument("--infinite", action="store_true")
    p.add_argument("--method", choices=("auto", "matrix", "enumerate", "probe"),
                   default="auto")

    p = sub.add_parser("conditions", parents=[common], help="check conditions C1..C18")
    p.add_argument("mdp")
    p.add_argument("utility")
    p.add_argument("--ids", help="comma-separated ids such as C5,C10 (default: all "
                                 "compatible with the utility)")

    p = sub.add_parser("analyze", parents=[common], help="existence/finiteness verdict")
    p.add_argument("mdp")
    p.add_argument("utility")

    p = sub.add_parser("solve", parents=[common],
                       help="optimal SD policy for an exponential utility")
    p.add_argument("mdp")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate")
    p.add_argument("mdp")
    p.add_argument("policy")
    p.add_argument("utility")
    p.add_argument("--start")
    p.add_argument("--horizon", type=int, required=True, metavar="T")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (PreconditionError, IncompatibleUtilityError)):
        return EXIT_PRECONDITION
    if isinstance(exc, (MdpFormatError, MdpValidationError, PolicyError)):
        return EXIT_INVALID
    return EXIT_ENGINE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    echo = ["riskmdp", *(sys.argv[1:] if argv is None else argv)]
    report = {"command": " ".join(echo)}
    inp = _Inputs()
    t0 = time.perf_counter()
    try:
        result, code = COMMANDS[args.command](args, inp)
    except (OSError, RiskMdpError, ValueError, ArithmeticError) as exc:
        code = _exit_code(exc)
        kind = "I/O error" if code == EXIT_IO else type(exc).__name__
        print(f"riskmdp: {kind}: {exc}", file=sys.stderr)
        return code
    report["inputs"] = inp.digests
    report.update(result)
    report["timing"] = f"{time.perf_counter() - t0:.4f} s"
    sys.stdout.write(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
