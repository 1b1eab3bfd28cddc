"""Command-line front end.

Verbs: ``solve``, ``generate``, ``evaluate`` and ``verify``.  Results are JSON
documents on stdout (or ``--out``); failures print a JSON error object on
stderr.  Exit codes: 0 ok, 1 internal error or failed verification,
2 infeasible, 3 limit reached, 4 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bench import TooLarge, brute_force_solve, policy_gap
from .problems.capital_budgeting import generate_cb
from .problems.explicit import BUILTIN, random_explicit
from .problems.sahlp import generate_sahlp
from .runner import ALGORITHMS, add_metrics, prepare, problem_kind, run, sample_scenarios

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_BAD_INPUT = 0, 1, 2, 3, 4
STATUS_EXIT = {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "limit_reached": EXIT_LIMIT}


class BadInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadInput(message)


def _add_generator_args(p):
    p.add_argument("--n", type=int, default=5, help="nodes (sahlp) or projects (cb)")
    p.add_argument("--m", type=int, default=4, help="risk factors (cb)")
    p.add_argument("--gamma-frac", default="0.1",
                   help="budget fraction of n^2: 0.02, 0.1 or 'custom' with --gamma")
    p.add_argument("--gamma", type=float, help="explicit budget when --gamma-frac custom")
    p.add_argument("--deviation-mult", type=float, choices=[1.0, 10.0], default=1.0)
    p.add_argument("--style", choices=["ap", "cab"], default="ap")
    p.add_argument("--alpha", type=float, help="inter-hub discount (cab style)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tworo", description="Binary two-stage robust optimization solver.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve an instance")
    solve.add_argument("--problem", choices=["explicit", "sahlp", "cb"])
    solve.add_argument("--instance", help="builtin name (t1, t2) or instance file")
    solve.add_argument("--algo", choices=ALGORITHMS, default="bnb")
    solve.add_argument("--branching", choices=["avg", "opt"], default="avg")
    solve.add_argument("--oracle", choices=["auto", "mip", "enum"], default="auto")
    solve.add_argument("--time-limit", type=float)
    solve.add_argument("--node-limit", type=int)
    solve.add_argument("--threads", type=int, default=1)
    solve.add_argument("--scenarios", type=int, default=10,
                       help="sampled scenarios for the policy gap (0 disables metrics)")
    solve.add_argument("--out")
    _add_generator_args(solve)

    gen = sub.add_parser("generate", help="write a random instance")
    gen.add_argument("--problem", choices=["explicit", "sahlp", "cb"], required=True)
    gen.add_argument("--out")
    _add_generator_args(gen)

    ev = sub.add_parser("evaluate", help="policy gap of a saved report on sampled scenarios")
    ev.add_argument("--instance", required=True)
    ev.add_argument("--report", required=True)
    ev.add_argument("--scenarios", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--oracle", choices=["auto", "mip", "enum"], default="auto")
    ev.add_argument("--out")

    ver = sub.add_parser("verify", help="compare bnb (both branchings), ccg and brute force")
    ver.add_argument("--count", type=int, default=12)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")
    return parser


def _gamma_args(args):
    if args.gamma_frac == "custom":
        if args.gamma is None or args.gamma < 0:
            raise BadInput("--gamma-frac custom needs a non-negative --gamma")
        return 0.0, args.gamma
    try:
        frac = float(args.gamma_frac)
    except ValueError:
        raise BadInput(f"invalid --gamma-frac {args.gamma_frac!r}") from None
    if frac not in (0.02, 0.1):
        raise BadInput("--gamma-frac must be 0.02, 0.1 or custom")
    return frac, None


def _generate(problem: str, args):
    if args.n < 1:
        raise BadInput("--n must be positive")
    if problem == "sahlp":
        frac, gamma = _gamma_args(args)
        return generate_sahlp(args.n, frac, args.deviation_mult, args.seed, args.style,
                              args.alpha, gamma)
    if problem == "cb":
        if args.m < 1:
            raise BadInput("--m must be positive")
        return generate_cb(args.n, args.m, args.seed)
    return random_explicit(np.random.default_rng(args.seed), name=f"explicit-s{args.seed}")


def _load(spec: str, problem):
    if spec in BUILTIN:
        if problem not in (None, "explicit"):
            raise BadInput(f"builtin instance {spec!r} is an explicit problem")
        return BUILTIN[spec]()
    path = Path(spec)
    if not path.is_file():
        raise BadInput(f"no such instance file or builtin: {spec!r}")
    inst = io.load_instance(path)
    kind = problem_kind(inst)
    if problem is not None and kind != problem:
        raise BadInput(f"instance file holds a {kind} problem, not {problem}")
    return inst


def _emit(doc: dict, out) -> None:
    text = io.dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _solve(args) -> int:
    if args.instance:
        inst = _load(args.instance, args.problem)
    elif args.problem in ("sahlp", "cb", "explicit"):
        inst = _generate(args.problem, args)
    else:
        raise BadInput("give --instance or --problem with generator parameters")
    if args.threads < 1:
        raise BadInput("--threads must be at least 1")
    prep = prepare(inst, args.oracle)
    report = run(prep, args.algo, args.branching, args.node_limit, args.time_limit, args.threads)
    if args.algo in ("bnb", "ccg") and args.scenarios > 0 and report.status == "optimal":
        add_metrics(prep, report, args.scenarios, args.seed)
    _emit(io.report_to_dict(report), args.out)
    return STATUS_EXIT[report.status]


def _evaluate(args) -> int:
    inst = _load(args.instance, None)
    report = io.load_report(args.report)
    if report.incumbent_x is None or not report.policy:
        raise BadInput("report has no incumbent and policy pool")
    prep = prepare(inst, args.oracle)
    pool = [prep.spec.solution(x, y) for x, y in report.policy]
    mean, per, skipped = policy_gap(pool, report.incumbent_x, prep.spec, prep.oracle,
                                    sample_scenarios(prep.U, args.scenarios, args.seed))
    _emit({"format_version": io.FORMAT_VERSION, "policy_gap": mean, "per_scenario": per,
           "skipped": skipped, "seed": args.seed}, args.out)
    return EXIT_OK


def verify_instances(count: int, seed: int):
    """Small instances cycling through the three problem families."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        fam = i % 3
        if fam == 0:
            out.append(random_explicit(rng, 2, 3, 2, name=f"explicit-{i}"))
        elif fam == 1:
            out.append(generate_cb(int(rng.integers(2, 5)), int(rng.choice([2, 4])),
                                   seed=int(rng.integers(1 << 30))))
        else:
            out.append(generate_sahlp(int(rng.integers(3, 5)), float(rng.choice([0.02, 0.1])),
                                      seed=int(rng.integers(1 << 30))))
    return out


def _verify(args) -> int:
    rows, all_ok = [], True
    for inst in verify_instances(args.count, args.seed):
        prep = prepare(inst)
        ref, _ = brute_force_solve(prep.spec, prep.U)
        vals = {"brute": prep.spec.sign * ref}
        for algo, br in (("bnb", "avg"), ("bnb", "opt"), ("ccg", "avg")):
            rep = run(prep, algo, br)
            vals[f"{algo}-{br}" if algo == "bnb" else algo] = rep.value
        ok = all(v is not None and abs(v - vals["brute"]) <= 1e-6 for v in vals.values())
        all_ok &= ok
        rows.append({"instance": inst.name, "values": vals, "agree": ok})
    _emit({"format_version": io.FORMAT_VERSION, "agree": all_ok, "instances": rows}, args.out)
    return EXIT_OK if all_ok else EXIT_ERROR


def _generate_cmd(args) -> int:
    _emit(io.instance_to_dict(_generate(args.problem, args)), args.out)
    return EXIT_OK


def _error(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "type": type(exc).__name__,
                                           "message": str(exc)}}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        handler = {"solve": _solve, "generate": _generate_cmd, "evaluate": _evaluate,
                   "verify": _verify}[args.verb]
        return handler(args)
    except (BadInput, io.FormatError, TooLarge, ValueError, OSError) as exc:
        return _error(EXIT_BAD_INPUT, exc)
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)
    except Exception as exc:  # report, never crash silently
        return _error(EXIT_ERROR, exc)


if __name__ == "__main__":
    sys.exit(main())
