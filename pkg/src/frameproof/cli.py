"""Command-line entry point: ``frameproof <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .analysis import (
    DETERMINISTIC_FRAMEPROOF_RATES,
    FINGERPRINTING_RATES,
    concat_design,
    minimal_fraction_estimate,
    optimal_rate,
)
from .ensembles import codebook_from_text, codebook_to_text, expand_key
from .harness import (
    Attack,
    ExperimentSpec,
    report_emit,
    run_attack_experiment,
    run_framing_experiment,
)
from .keys import BernoulliParams, ConcatParams, Ensemble, Key, LinearParams, random_seed, seed_from_hex
from .validation import validate_concatenated, validate_linear, validate_lookup
from .vectors import SymbolVector


def _write(out: str | None, data: bytes) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _seed(text: str | None) -> bytes:
    return random_seed() if text is None else seed_from_hex(text)


def _params(args: argparse.Namespace):
    ens = Ensemble(args.ensemble)
    if ens is Ensemble.BERNOULLI:
        _need(args, "n", "users")
        return BernoulliParams(args.n, args.users, 0.5 if args.p is None else args.p, args.distinct)
    if ens is Ensemble.LINEAR:
        _need(args, "n", "rate")
        return LinearParams(args.n, args.rate, args.users, args.q)
    _need(args, "t", "xi")
    design = concat_design(args.t, args.q, args.xi, args.m)
    K = design.K if args.K is None else args.K
    return ConcatParams(args.q, K, args.t, args.xi, design.m, args.p)


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise SystemExit(f"{args.ensemble} ensemble needs {', '.join(missing)}")


def cmd_rates(args: argparse.Namespace) -> int:
    lines = ["t,p_star,rate" + (",deterministic,fingerprinting" if args.compare else "")]
    for t in range(2, args.tmax + 1):
        r = optimal_rate(t)
        row = f"{t},{r.p_star:.6f},{r.rate:.4f}"
        if args.compare:
            row += f",{DETERMINISTIC_FRAMEPROOF_RATES.get(t, '')},{FINGERPRINTING_RATES.get(t, '')}"
        lines.append(row)
    _write(args.out, ("\n".join(lines) + "\n").encode())
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    key = Key(_seed(args.seed), _params(args))
    code = expand_key(key)
    if key.ensemble is Ensemble.LINEAR:
        code, cb = code
    elif key.ensemble is Ensemble.CONCAT:
        key = code.key
        M = args.users if args.users is not None else code.size
        if M > 1 << 16:
            raise SystemExit(f"code has {code.size} users; pass --users to write a prefix of the codebook")
        cb = code.codebook(M)
    else:
        cb = code
    _write(args.out, codebook_to_text(cb, key).encode())
    if args.key_out:
        Path(args.key_out).write_text(key.to_text())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cb, key = codebook_from_text(Path(args.code).read_text())
    if key.ensemble is Ensemble.BERNOULLI:
        check = lambda y: validate_lookup(cb, y)  # noqa: E731
    elif key.ensemble is Ensemble.LINEAR:
        code, _ = expand_key(key)
        check = lambda y: validate_linear(code, y)  # noqa: E731
    else:
        inst = expand_key(key)
        check = lambda y: validate_concatenated(inst, y)  # noqa: E731
    all_ok = True
    out = []
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            y = SymbolVector.from_hex(line, cb.n, cb.q)
            record = {"fingerprint": line, **check(y).to_dict()}
        except ValueError as exc:
            record = {"fingerprint": line, "valid": False, "detail": "malformed", "error": str(exc)}
        all_ok &= record["valid"]
        out.append(json.dumps(record))
    _write(args.out, "".join(ln + "\n" for ln in out).encode())
    return 0 if all_ok else 1


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    seed = _seed(args.seed).hex()
    return ExperimentSpec(
        params=_params(args),
        t=args.t,
        trials=args.trials,
        seed=seed,
        coalition=args.coalition,
        mode=args.mode,
    )


def cmd_attack(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    transcript: list = []
    report = run_attack_experiment(spec, Attack(args.attack), workers=args.workers, transcript=transcript)
    _write(args.out, report_emit(report, args.format, args.timing))
    if args.transcript:
        Path(args.transcript).write_text("".join(json.dumps(r) + "\n" for r in transcript))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = ExperimentSpec.from_dict(json.loads(Path(args.spec).read_text()))
    report = run_framing_experiment(spec, workers=args.workers)
    _write(args.out, report_emit(report, args.format, args.timing))
    return 0


def cmd_minimal(args: argparse.Namespace) -> int:
    params = LinearParams(args.n, args.rate, q=args.q)
    est = minimal_fraction_estimate(params, args.instances, Key(_seed(args.seed), params), args.samples)
    data = asdict(est)
    data["reports"] = [asdict(r) for r in est.reports]
    _write(args.out, (json.dumps(data, indent=2) + "\n").encode())
    return 0


def cmd_concat_design(args: argparse.Namespace) -> int:
    design = concat_design(args.t, args.q, args.xi, args.m)
    _write(args.out, (json.dumps(asdict(design), indent=2) + "\n").encode())
    return 0


def _add_code_args(p: argparse.ArgumentParser, ensemble_required: bool = True) -> None:
    p.add_argument("--ensemble", choices=[e.value for e in Ensemble], required=ensemble_required)
    p.add_argument("--seed", help="master seed as hex (up to 256 bits); random if omitted")
    p.add_argument("--n", type=int, help="fingerprint length (bernoulli, linear)")
    p.add_argument("--users", type=int, help="number of users M")
    p.add_argument("--p", type=float, help="Bernoulli bias (bernoulli; inner bias for concat)")
    p.add_argument("--rate", type=float, help="design rate R (linear)")
    p.add_argument("--q", type=int, default=2, help="alphabet (linear) or outer field size (concat)")
    p.add_argument("--K", type=int, help="outer dimension (concat); largest admissible by default")
    p.add_argument("--xi", type=float, help="design slack (concat)")
    p.add_argument("--m", type=int, help="inner code length (concat); ceil(4 log2 N) by default")
    p.add_argument("--distinct", action="store_true", help="resample duplicate Bernoulli rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frameproof", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="optimal Bernoulli bias and rate per coalition size (CSV)")
    p.add_argument("--tmax", type=int, default=5)
    p.add_argument("--compare", action="store_true", help="append reference columns")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("gen", help="expand a key into a codebook file")
    _add_code_args(p)
    p.add_argument("--t", type=int, help="target coalition size (concat)")
    p.add_argument("--key-out", help="also write the key file here")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="validate hex fingerprints read from stdin")
    p.add_argument("--code", required=True, help="codebook file written by gen")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("attack", help="run an attack campaign")
    p.add_argument("--attack", choices=[a.value for a in Attack], required=True)
    _add_code_args(p)
    p.add_argument("--t", type=int, required=True, help="coalition size")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--coalition", choices=["first", "random"], default="first")
    p.add_argument("--mode", choices=["narrow", "wide"], default="narrow")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identity)")
    p.add_argument("--transcript", help="write per-trial JSON records here")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("simulate", help="estimate framing probability from a JSON experiment spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte-identity)")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("minimal", help="minimal-codeword fraction of random linear codes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--samples", type=int, help="sample this many codewords instead of enumerating")
    p.add_argument("--seed")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_minimal)

    p = sub.add_parser("concat-design", help="outer code dimension and rates for a concatenated design")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_concat_design)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
