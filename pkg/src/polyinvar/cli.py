"""
Command-line interface.

Exit codes
----------
0   success (fit converged, audit compliant, verdict as expected)
1   audit non-compliant, or invariance check found a violation
2   solver rejection, non-converged fit, failed trials, or an
    inconclusive counterexample search
64  unusable input: unreadable or malformed files, bad flags
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import monomials as mono
from .dataset import read_csv
from .harness import (
    ConditionNotMet,
    TrialConfig,
    audit_penalty,
    check_fit_invariance,
    search_counterexample,
)
from .monomials import IndexSet
from .polynomial import Polynomial, translate
from .solvers import LossSpec, NoUniqueSolution, fit

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ModelSpec:
    index_set: IndexSet
    loss: LossSpec
    description: str = ""

    @property
    def arity(self) -> int:
        return self.index_set.arity

    def to_json(self) -> dict:
        out = {"arity": self.arity, "monomials": self.index_set.to_json(), "loss": self.loss.to_json()}
        if self.description:
            out["description"] = self.description
        return out

    @classmethod
    def from_json(cls, obj) -> "ModelSpec":
        try:
            arity = int(obj["arity"])
            index_set = IndexSet(obj["monomials"], arity=arity)
            loss = LossSpec.from_json(obj.get("loss", {"penalty": {"family": "none"}}), arity)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model spec: {exc}") from None
        if len(index_set) == 0:
            raise ValueError("model has no monomials")
        bad = [list(m) for m in loss.penalty.weights if m not in index_set]
        if bad:
            raise ValueError(f"penalized monomials not in the model: {bad}")
        return cls(index_set, loss, str(obj.get("description", "")))


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse(loader, obj, path):
    try:
        return loader(obj)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _emit(args, payload, pretty_text=None):
    if args.pretty and pretty_text is not None:
        text = pretty_text
    else:
        text = json.dumps(_json_safe(payload), indent=2 if args.pretty else None, allow_nan=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _fmt_exp(m) -> str:
    return "(" + ",".join(str(e) for e in m) + ")"


def cmd_fit(args) -> int:
    model = _parse(ModelSpec.from_json, _load_json(args.model), args.model)
    try:
        data = read_csv(args.data, arity=model.arity)
    except (OSError, ValueError) as exc:
        raise UsageError(f"{args.data}: {exc}") from None
    if model.loss.g != "identity":
        raise UsageError("only g = 'identity' can be fitted")
    try:
        result = fit(data, model.index_set, model.loss.penalty)
    except (NoUniqueSolution, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    lines = [f"{'monomial':>14}  coefficient"]
    lines += [f"{_fmt_exp(m):>14}  {c:.12g}" for m, c in result.model.items()]
    lines += [f"ssr={result.ssr:.12g} loss={result.loss:.12g} "
              f"iterations={result.iterations} converged={result.converged}"]
    if result.condition_warning:
        lines.append(f"warning: {result.condition_warning}")
    _emit(args, result.to_json(), "\n".join(lines))
    return EXIT_OK if result.converged else EXIT_SOLVER


def cmd_audit(args) -> int:
    model = _parse(ModelSpec.from_json, _load_json(args.model), args.model)
    report = audit_penalty(model.index_set, model.loss.penalty.penalized)
    text = "\n".join([
        f"downward closed:            {report.downward_closed}",
        f"penalized only greatest:    {report.penalized_subset_of_greatest}",
        f"compliant:                  {report.compliant}",
        f"missing divisors:           {[list(m) for m in report.missing_divisors]}",
        f"offending penalized terms:  {[list(m) for m in report.offending_penalized]}",
    ])
    _emit(args, report.to_json(), text)
    return EXIT_OK if report.compliant else EXIT_MISMATCH


def cmd_shift(args) -> int:
    f = _parse(Polynomial.from_json, _load_json(args.poly), args.poly)
    if len(args.by) != f.arity:
        raise UsageError(f"shift has {len(args.by)} entries, polynomial arity is {f.arity}")
    if not all(math.isfinite(v) for v in args.by):
        raise UsageError("shift entries must be finite")
    g = translate(f, args.by)
    text = "\n".join(f"{_fmt_exp(m):>14}  {c:.12g}" for m, c in g.items())
    _emit(args, g.to_json(), text)
    return EXIT_OK


def _index_set_cmd(args, op) -> int:
    model = _parse(ModelSpec.from_json, _load_json(args.model), args.model)
    try:
        result = op(model.index_set)
    except mono.CapacityError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, result.to_json(), "\n".join(_fmt_exp(m) for m in result))
    return EXIT_OK


def cmd_greatest(args) -> int:
    return _index_set_cmd(args, mono.greatest_monomials)


def cmd_closure(args) -> int:
    return _index_set_cmd(args, mono.downward_closure)


def cmd_check(args) -> int:
    obj = _load_json(args.config)
    if args.seed is not None and isinstance(obj, dict):
        obj = dict(obj, seed=args.seed)
    config = _parse(TrialConfig.from_json, obj, args.config)
    compliant = audit_penalty(config.index_set, config.penalty.penalized).compliant
    mode = args.mode
    if mode == "auto":
        mode = "invariance" if compliant else "counterexample"
    if mode == "counterexample" and compliant:
        raise UsageError("condition satisfied; search vacuous")
    if mode == "invariance" and not compliant:
        raise UsageError("condition not met; use --mode counterexample")

    if mode == "invariance":
        try:
            report = check_fit_invariance(config)
        except RuntimeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        except ConditionNotMet as exc:  # pragma: no cover - audited above
            raise UsageError(str(exc)) from None
        text = "\n".join([
            f"verdict:               {report.verdict}",
            f"tolerance:             {report.tolerance:g}",
            f"max pred discrepancy:  {report.max_pred_discrepancy:.3e}",
            f"max coeff discrepancy: {report.max_coeff_discrepancy:.3e}",
            f"failed trials:         {report.failed_trials}/{len(report.trials)}",
        ])
        payload = {"mode": mode, **report.to_json(details=args.details)}
        _emit(args, payload, text)
        if report.failed_trials:
            return EXIT_SOLVER
        return EXIT_OK if report.verdict == "invariant" else EXIT_MISMATCH

    violation = search_counterexample(config)
    if violation is None:
        _emit(args, {"mode": mode, "violation": None, "result": "inconclusive",
                     "trials": config.trials},
              f"no violation in {config.trials} trials (inconclusive)")
        return EXIT_SOLVER
    text = "\n".join([
        f"violation in trial {violation.trial} (seed {violation.seed})",
        f"shift:                 {violation.shift}",
        f"pred discrepancy:      {violation.pred_discrepancy:.3e}",
        f"relative discrepancy:  {violation.rel_discrepancy:.3e}",
        f"data digest:           {violation.data_digest}",
    ])
    _emit(args, {"mode": mode, "violation": violation.to_json(), "result": "violated"}, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--seed", type=int, help="override the master seed of a check config")

    parser = argparse.ArgumentParser(
        prog="polyinvar",
        description="Penalized polynomial regression and translation-invariance checks.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit a model to CSV data")
    p.add_argument("data", help="CSV with columns x1..xp,y")
    p.add_argument("model", help="model spec JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("audit", parents=[common], help="check the invariance condition of a model spec")
    p.add_argument("model")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("shift", parents=[common], help="print f(x + P) for a polynomial JSON")
    p.add_argument("poly")
    p.add_argument("--by", type=float, nargs="+", required=True, metavar="P",
                   help="shift vector, one value per variable")
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("check", parents=[common], help="run randomized invariance trials")
    p.add_argument("config", help="trial config JSON")
    p.add_argument("--mode", choices=("auto", "invariance", "counterexample"), default="auto")
    p.add_argument("--details", action="store_true", help="include per-trial records")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("greatest", parents=[common], help="greatest monomials of a model spec")
    p.add_argument("model")
    p.set_defaults(func=cmd_greatest)

    p = sub.add_parser("closure", parents=[common], help="downward closure of a model spec")
    p.add_argument("model")
    p.set_defaults(func=cmd_closure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
