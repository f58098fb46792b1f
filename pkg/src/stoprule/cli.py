"""Command-line surface: every rule, the oracles, simulation and reports.

Exit codes: 0 success, 1 invalid input or schema, 2 model-assumption
violation, 3 internal guard (oracle size caps, oracle mismatch). Output is
byte-identical across runs: no timestamps, all randomness pinned by --seed
(falling back to the STOPRULE_SEED environment variable, then 0).
Human-readable tables print probabilities with 6 decimals; --format json
emits full-precision values that re-parse exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from . import lap as lap_mod
from . import montecarlo as mc
from .errors import AssumptionError, GuardError
from .ferguson import bernoulli_sla, bernoulli_sla_model, monotone_check
from .markov import (
    MarkovSpec,
    TamakiSpec,
    forward_threshold_policy,
    hy_homogeneous_policy,
    hy_nonhomogeneous_policy,
    markov_from_tamaki,
    markov_policy_value,
    tamaki_markov_threshold,
)
from .multi_select import multi_select_rule
from .multiplicative import last_m_threshold, last_m_value, mth_last_threshold
from .odds import (
    OddsSequence,
    StoppingPolicy,
    ThresholdRule,
    dice,
    one_over_e_check,
    secretary,
    threshold,
    win_probability,
    with_availability,
)
from .problemfile import load_problem
from .verify import (
    ENUM_MAX_N,
    DP_MAX_N_PARAMETERIZED,
    Objective,
    dp_optimal,
    dp_optimal_markov,
    enumerate_policy_value,
)

ORACLE_TOLERANCE = 1e-12


def _default_seed() -> int:
    raw = os.environ.get("STOPRULE_SEED", "0")
    try:
        return int(raw)
    except ValueError as err:
        raise ValueError(f"STOPRULE_SEED must be an integer, got {raw!r}") from err


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as err:
        raise ValueError(f"{flag} expects a comma-separated number list") from err


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("table", "json"), default="table", help="output format"
    )


def _add_sequence_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--file", help="problem file (JSON, schema-validated)")
    parser.add_argument(
        "--model", choices=("explicit-odds", "secretary", "dice"), help="built-in model"
    )
    parser.add_argument("--p", help="comma-separated success probabilities")
    parser.add_argument("--n", type=int, help="horizon for secretary/dice")
    parser.add_argument("--faces", type=int, default=6, help="die faces (dice model)")
    parser.add_argument("--availability", help="comma-separated availability probabilities")


def _sequence_from_args(args: argparse.Namespace) -> OddsSequence:
    if args.file:
        problem = load_problem(args.file)
        if not isinstance(problem.model, OddsSequence):
            raise ValueError(
                f"this command needs an independent-trials model, got {problem.kind!r}"
            )
        return problem.model
    if args.p:
        seq = OddsSequence(_parse_float_list(args.p, "--p"))
    elif args.model == "secretary":
        if args.n is None:
            raise ValueError("--model secretary needs --n")
        seq = secretary(args.n)
    elif args.model == "dice":
        if args.n is None:
            raise ValueError("--model dice needs --n")
        seq = dice(args.n, args.faces)
    elif args.model == "explicit-odds":
        raise ValueError("--model explicit-odds needs --p")
    else:
        raise ValueError("give a model: --file, --p, or --model with its flags")
    if args.availability:
        seq = with_availability(seq, _parse_float_list(args.availability, "--availability"))
    return seq


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if value != 0.0 and abs(value) < 1e-4:
            return f"{value:.6g}"
        return f"{value:.6f}"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    width = max(len(key) for key in payload)
    for key, value in payload.items():
        print(f"{key.ljust(width)}  {_format_value(value)}")


def _cmd_threshold(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    rule = threshold(seq)
    bound = one_over_e_check(seq)
    payload = {
        "n": seq.n,
        "threshold": rule.s,
        "window": seq.n - rule.s + 1,
        "win_probability": win_probability(seq, rule),
        "one_over_e_applicable": bound.applicable,
    }
    if bound.margin is not None:
        payload["one_over_e_margin"] = bound.margin
    _emit(payload, args.format)
    return 0


def _cmd_value(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    rule = ThresholdRule(args.s) if args.s is not None else threshold(seq)
    payload = {
        "n": seq.n,
        "threshold": rule.s,
        "win_probability": win_probability(seq, rule),
        "optimal_threshold": threshold(seq).s,
    }
    _emit(payload, args.format)
    return 0


def _cmd_mth_last(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    rule = mth_last_threshold(seq, args.m)
    payload: dict[str, Any] = {"n": seq.n, "m": args.m, "threshold": rule.s}
    if seq.n <= ENUM_MAX_N:
        payload["rule_value"] = enumerate_policy_value(
            seq, StoppingPolicy.from_threshold(rule, seq.n), Objective.mth_last(args.m)
        )
    _emit(payload, args.format)
    return 0


def _cmd_last_m(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    rule = last_m_threshold(seq, args.m)
    payload = {
        "n": seq.n,
        "m": args.m,
        "threshold": rule.s,
        "win_probability": last_m_value(seq, args.m),
    }
    _emit(payload, args.format)
    return 0


def _cmd_multi_select(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    rule = multi_select_rule(seq, args.chances)
    payload: dict[str, Any] = {
        "n": seq.n,
        "chances": args.chances,
        "thresholds": list(rule.thresholds),
    }
    if seq.n <= ENUM_MAX_N:
        payload["rule_value"] = enumerate_policy_value(
            seq, rule.masks(), Objective.multi_select(args.chances)
        )
    _emit(payload, args.format)
    return 0


def _cmd_markov(args: argparse.Namespace) -> int:
    if args.file:
        problem = load_problem(args.file)
        model = problem.model
        if isinstance(model, TamakiSpec):
            return _markov_tamaki(model, args)
        if not isinstance(model, MarkovSpec):
            raise ValueError(f"markov command needs a markov model, got {problem.kind!r}")
        if args.tamaki:
            raise ValueError("--tamaki only applies to flag-built chains")
        if len(set(model.alphas)) == 1 and len(set(model.betas)) == 1:
            return _markov_homogeneous(model.alphas[0], model.betas[0], model.N, model.rho, args)
        return _markov_nonhomogeneous(model, args)
    if args.tamaki:
        if not (args.alphas and args.betas):
            raise ValueError("--tamaki needs --alphas and --betas (transition lists)")
        spec = TamakiSpec.from_transitions(
            _parse_float_list(args.alphas, "--alphas"),
            _parse_float_list(args.betas, "--betas"),
            rho=args.rho,
        )
        return _markov_tamaki(spec, args)
    if args.alphas or args.betas:
        if args.N is None:
            raise ValueError("--alphas/--betas need --N (lists carry indices 0..N)")
        spec = MarkovSpec(
            N=args.N,
            alphas=tuple(_parse_float_list(args.alphas or "", "--alphas")),
            betas=tuple(_parse_float_list(args.betas or "", "--betas")),
            rho=args.rho,
        )
        return _markov_nonhomogeneous(spec, args)
    if args.alpha is None or args.beta is None or args.N is None:
        raise ValueError("markov needs --alpha --beta --N, or --alphas/--betas, or --file")
    return _markov_homogeneous(args.alpha, args.beta, args.N, args.rho, args)


def _markov_payload(spec: MarkovSpec, policy) -> dict:
    value = markov_policy_value(spec, policy)
    payload = {
        "N": spec.N,
        "rho": spec.rho,
        "policy": list(policy.phi),
        "islands": [f"{low}..{high}" for low, high in policy.islands()],
        "policy_value": value,
    }
    if spec.N <= 25:
        optimum = dp_optimal_markov(spec).optimal_value
        payload["dp_value"] = optimum
        payload["dp_gap"] = optimum - value
    return payload


def _markov_homogeneous(alpha, beta, N, rho, args) -> int:
    policy = hy_homogeneous_policy(alpha, beta, N)
    spec = MarkovSpec.homogeneous(alpha, beta, N, rho=rho)
    payload = {"kind": "homogeneous", "alpha": alpha, "beta": beta}
    payload.update(_markov_payload(spec, policy))
    _emit(payload, args.format)
    return 0


def _markov_nonhomogeneous(spec: MarkovSpec, args) -> int:
    policy = hy_nonhomogeneous_policy(spec)
    payload = {"kind": "non-homogeneous"}
    payload.update(_markov_payload(spec, policy))
    _emit(payload, args.format)
    return 0


def _markov_tamaki(spec: TamakiSpec, args) -> int:
    rule = tamaki_markov_threshold(spec)
    mspec = markov_from_tamaki(spec)
    policy = forward_threshold_policy(rule, spec.n)
    payload = {
        "kind": "tamaki-markov",
        "n": spec.n,
        "threshold": rule.s,
        "rule_value": markov_policy_value(mspec, policy),
    }
    if mspec.N <= 25:
        optimum = dp_optimal_markov(mspec).optimal_value
        payload["dp_value"] = optimum
        payload["dp_gap"] = optimum - payload["rule_value"]
    _emit(payload, args.format)
    return 0


def _cmd_ferguson(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    sla_rule = bernoulli_sla(seq, args.m)
    tail_rule = last_m_threshold(seq, args.m)
    payload = {
        "n": seq.n,
        "m": args.m,
        "one_sla_threshold": sla_rule.s,
        "multiplicative_threshold": tail_rule.s,
        "derivations_agree": sla_rule.s == tail_rule.s,
        "monotone": monotone_check(bernoulli_sla_model(seq, args.m)),
    }
    _emit(payload, args.format)
    return 0


def _cmd_lap(args: argparse.Namespace) -> int:
    if args.times is not None:
        trace = lap_mod.ArrivalTrace(_parse_float_list(args.times, "--times"), args.T)
        outcome = lap_mod.lap_play(trace)
        payload = {
            "T": args.T,
            "arrivals": list(trace.times),
            "stopped_at": outcome.stopped_ordinal,
            "win": outcome.win,
        }
        _emit(payload, args.format)
        return 0
    model = lap_mod.LapModel(base_rate=args.rate, thin_p=args.thin_p)
    report = lap_mod.lap_win_estimate(
        model, T=args.T, trials=args.trials, seed=args.seed, workers=args.workers
    )
    payload = {
        "T": args.T,
        "rate": args.rate,
        "thin_p": args.thin_p,
        "trials": report.trials,
        "seed": report.seed,
        "estimate": report.estimate,
        "stderr": report.stderr,
        "ci95": list(report.ci95),
    }
    _emit(payload, args.format)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    objective = Objective(args.objective, args.m)
    if args.file:
        problem = load_problem(args.file)
        if isinstance(problem.model, MarkovSpec):
            return _simulate_markov(problem.model, args)
        if problem.empirical_n is not None:
            seq = None
            n = problem.empirical_n
            if args.policy != "empirical":
                raise ValueError("empirical problem files simulate the empirical policy")
        elif isinstance(problem.model, OddsSequence):
            seq = problem.model
            n = seq.n
        else:
            raise ValueError(f"cannot simulate model kind {problem.kind!r}")
    else:
        seq = _sequence_from_args(args)
        n = seq.n
    if args.policy == "empirical":
        if seq is None:
            raise ValueError("empirical simulation still needs true probabilities (--p/--model)")
        policy = mc.empirical_odds_policy(n)
    elif args.policy == "optimal":
        if objective.kind == "last-success":
            policy = StoppingPolicy.from_threshold(threshold(seq), n)
        elif objective.kind == "mth-last":
            policy = StoppingPolicy.from_threshold(mth_last_threshold(seq, objective.m), n)
        elif objective.kind == "any-of-last-m":
            policy = StoppingPolicy.from_threshold(last_m_threshold(seq, objective.m), n)
        else:
            policy = multi_select_rule(seq, objective.m)
    else:  # threshold policy at explicit index
        if args.s is None:
            raise ValueError("--policy threshold needs --s")
        policy = StoppingPolicy.from_threshold(args.s, n)
    report = mc.simulate(
        seq, policy, objective, trials=args.trials, seed=args.seed, workers=args.workers
    )
    payload = {
        "objective": objective.kind,
        "m": objective.m,
        "policy": args.policy if args.policy != "threshold" else f"threshold {args.s}",
        "trials": report.trials,
        "seed": report.seed,
        "estimate": report.estimate,
        "stderr": report.stderr,
        "ci95": list(report.ci95),
    }
    _emit(payload, args.format)
    return 0


def _simulate_markov(spec: MarkovSpec, args) -> int:
    policy = dp_optimal_markov(spec).optimal_policy
    report = mc.simulate(spec, policy, trials=args.trials, seed=args.seed, workers=args.workers)
    payload = {
        "objective": "last-success",
        "policy": "markov dp mask",
        "trials": report.trials,
        "seed": report.seed,
        "estimate": report.estimate,
        "stderr": report.stderr,
        "ci95": list(report.ci95),
        "exact_value": markov_policy_value(spec, policy),
    }
    _emit(payload, args.format)
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    seq = _sequence_from_args(args)
    objective = Objective(args.objective, args.m)
    if seq.n > DP_MAX_N_PARAMETERIZED and objective.kind != "last-success":
        raise GuardError(f"oracle check for {objective.kind} capped at n = {DP_MAX_N_PARAMETERIZED}")
    if objective.kind == "last-success":
        rule_value = win_probability(seq, threshold(seq))
        policy = StoppingPolicy.from_threshold(threshold(seq), seq.n)
    elif objective.kind == "mth-last":
        policy = StoppingPolicy.from_threshold(mth_last_threshold(seq, objective.m), seq.n)
        rule_value = enumerate_policy_value(seq, policy, objective)
    elif objective.kind == "any-of-last-m":
        policy = StoppingPolicy.from_threshold(last_m_threshold(seq, objective.m), seq.n)
        rule_value = last_m_value(seq, objective.m)
    else:
        rule = multi_select_rule(seq, objective.m)
        policy = rule.masks()
        rule_value = enumerate_policy_value(seq, policy, objective)
    optimum = dp_optimal(seq, objective).optimal_value
    enumerated = (
        enumerate_policy_value(seq, policy, objective) if seq.n <= ENUM_MAX_N else None
    )
    gap = abs(rule_value - optimum)
    payload = {
        "objective": objective.kind,
        "m": objective.m,
        "rule_value": rule_value,
        "dp_value": optimum,
        "abs_gap": gap,
        "tolerance": ORACLE_TOLERANCE,
        "match": gap <= ORACLE_TOLERANCE,
    }
    if enumerated is not None:
        payload["enumeration_value"] = enumerated
        payload["enumeration_gap"] = abs(enumerated - rule_value)
    _emit(payload, args.format)
    if not payload["match"]:
        print(f"mismatch beyond {ORACLE_TOLERANCE}", file=sys.stderr)
        return 3
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import generate_reports

    summary = generate_reports(args.out, seed=args.seed, quick=args.quick)
    payload: dict[str, Any] = {"out_dir": args.out}
    for section, info in summary.items():
        for key, value in info.items():
            payload[f"{section}.{key}"] = value
    _emit(payload, args.format)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve_forever

    serve_forever(host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stoprule",
        description="Threshold rules, oracles and simulators for stop-on-the-last-success problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="sum-the-odds threshold and win probability")
    _add_sequence_flags(p)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("value", help="win probability of a threshold rule")
    _add_sequence_flags(p)
    p.add_argument("--s", type=int, help="threshold index (default: optimal)")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_value)

    p = sub.add_parser("mth-last", help="stop exactly on the m-th last success")
    _add_sequence_flags(p)
    p.add_argument("--m", type=int, required=True)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_mth_last)

    p = sub.add_parser("last-m", help="stop on any of the last m successes")
    _add_sequence_flags(p)
    p.add_argument("--m", type=int, required=True)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_last_m)

    p = sub.add_parser("multi-select", help="nested thresholds for multiple selection chances")
    _add_sequence_flags(p)
    p.add_argument("--chances", "--M", dest="chances", type=int, required=True)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_multi_select)

    p = sub.add_parser("markov", help="threshold policies for Markov-dependent indicators")
    p.add_argument("--file", help="problem file (JSON)")
    p.add_argument("--alpha", type=float, help="P(next=1 | current=0), homogeneous")
    p.add_argument("--beta", type=float, help="P(next=0 | current=1), homogeneous")
    p.add_argument("--N", type=int, help="backward horizon (indices N..0)")
    p.add_argument("--alphas", help="comma list, indices 0..N (or transitions with --tamaki)")
    p.add_argument("--betas", help="comma list, indices 0..N (or transitions with --tamaki)")
    p.add_argument("--rho", type=float, default=0.5, help="P(first observed state = 1)")
    p.add_argument("--tamaki", action="store_true", help="forward-chain threshold variant")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_markov)

    p = sub.add_parser("ferguson", help="one-stage look-ahead on the Bernoulli reduction")
    _add_sequence_flags(p)
    p.add_argument("--m", type=int, required=True)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_ferguson)

    p = sub.add_parser("lap", help="last-arrival problem: play a trace or estimate the win rate")
    p.add_argument("--T", type=float, required=True, help="horizon")
    p.add_argument("--times", help="comma list of arrival times: play this trace")
    p.add_argument("--rate", type=float, default=1.0, help="base arrival rate")
    p.add_argument("--thin-p", dest="thin_p", type=float, default=1.0, help="success probability")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_lap)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of a policy's win rate")
    _add_sequence_flags(p)
    p.add_argument(
        "--policy", choices=("optimal", "empirical", "threshold"), default="optimal"
    )
    p.add_argument("--s", type=int, help="threshold index for --policy threshold")
    p.add_argument(
        "--objective",
        choices=("last-success", "mth-last", "any-of-last-m", "multi-select"),
        default="last-success",
    )
    p.add_argument("--m", type=int, default=1, help="objective parameter")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle-check", help="closed-form rule vs DP optimum vs enumeration")
    _add_sequence_flags(p)
    p.add_argument(
        "--objective",
        choices=("last-success", "mth-last", "any-of-last-m", "multi-select"),
        default="last-success",
    )
    p.add_argument("--m", type=int, default=1)
    _add_format_flag(p)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("report", help="write discrepancy tables and figures")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quick", action="store_true", help="smaller instance sets")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the loopback advisor service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return 0 if exit_request.code in (0, None) else 1
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        try:
            args.seed = _default_seed()
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except AssumptionError as err:
        print(f"assumption violated: {err}", file=sys.stderr)
        return 2
    except GuardError as err:
        print(f"guard: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
