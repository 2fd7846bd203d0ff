"""Seeded Monte Carlo estimation of framing and attack-success probabilities."""

from __future__ import annotations

import enum
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import binomtest

from .coalition import (
    Coalition,
    EnvelopeMode,
    affine_attack,
    attack_record,
    build_envelope,
    framing_check_assigned,
    framing_check_concatenated,
    framing_check_linear_full,
    random_envelope_member,
    xor_attack,
)
from .ensembles import (
    build_concatenated,
    concat_encode,
    resolve_concat,
    sample_bernoulli,
    sample_linear_codebook,
)
from .field_linalg import rs_message
from .keys import (
    ConcatParams,
    Ensemble,
    Key,
    LinearParams,
    Params,
    params_from_dict,
    params_to_dict,
    seed_from_hex,
    seed_from_int,
    trial_seed,
)
from .validation import validate_concatenated, validate_linear, validate_lookup
from .vectors import SymbolVector

log = logging.getLogger(__name__)

SEED_RULE = "trial_seed = sha256(master, 'trial', index)[:8] (64-bit, big-endian)"
CSV_HEADER = "spec_hash,trials,framings,estimate,ci_lo,ci_hi"


class CoalitionPolicy(str, enum.Enum):
    FIRST_T = "first"
    RANDOM = "random"


class Attack(str, enum.Enum):
    XOR = "xor"
    AFFINE = "affine"
    RANDOM_ENVELOPE = "random-envelope"


COALITION_NOTES = {
    CoalitionPolicy.FIRST_T: (
        "coalition fixed to users 0..t-1; taken as representative of every "
        "t-coalition because the random ensembles are exchangeable over user "
        "indices (a modeling argument, not a property checked here)"
    ),
    CoalitionPolicy.RANDOM: "coalition drawn uniformly per trial from the trial key",
}


@dataclass(frozen=True)
class ExperimentSpec:
    params: Params
    t: int
    trials: int
    seed: str
    coalition: CoalitionPolicy = CoalitionPolicy.FIRST_T
    mode: EnvelopeMode = EnvelopeMode.NARROW
    check: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "coalition", CoalitionPolicy(self.coalition))
        object.__setattr__(self, "mode", EnvelopeMode(self.mode))
        if isinstance(self.params, ConcatParams):
            object.__setattr__(self, "params", resolve_concat(self.params))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.t < 1:
            raise ValueError("coalition size must be >= 1")
        if self.t > self.users:
            raise ValueError(f"coalition size {self.t} exceeds the {self.users} users")
        if self.check is not None and self.check not in ("assigned", "full"):
            raise ValueError(f"unknown framing check {self.check!r}")
        if self.check == "full" and self.ensemble is Ensemble.BERNOULLI:
            raise ValueError("the Bernoulli ensemble has no full-code check; use 'assigned'")
        if self.check == "assigned" and self.ensemble is Ensemble.CONCAT:
            raise ValueError("concatenated experiments use the exact full-code check")
        seed_from_hex(self.seed)
        if self.check is None:
            default = "assigned" if self.ensemble is Ensemble.BERNOULLI else "full"
            object.__setattr__(self, "check", default)

    @property
    def ensemble(self) -> Ensemble:
        return Key(bytes(32), self.params).ensemble

    @property
    def users(self) -> int:
        p = self.params
        if isinstance(p, LinearParams):
            return p.users
        if isinstance(p, ConcatParams):
            return p.q**p.K
        return p.M

    @property
    def primary_check(self) -> str:
        return self.check

    def to_dict(self) -> dict:
        return {
            "ensemble": self.ensemble.value,
            "params": params_to_dict(self.params),
            "t": self.t,
            "trials": self.trials,
            "seed": self.seed,
            "coalition": self.coalition.value,
            "mode": self.mode.value,
            "check": self.primary_check,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        return cls(
            params=params_from_dict(raw["ensemble"], raw["params"]),
            t=int(raw["t"]),
            trials=int(raw["trials"]),
            seed=str(raw["seed"]),
            coalition=raw.get("coalition", "first"),
            mode=raw.get("mode", "narrow"),
            check=raw.get("check"),
        )

    def spec_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def trial_key(self, index: int) -> Key:
        return Key(seed_from_int(trial_seed(seed_from_hex(self.seed), index)), self.params)


@dataclass(frozen=True)
class SimulationReport:
    spec: dict
    spec_hash: str
    trials: int
    framings: int
    estimate: float
    ci_lo: float
    ci_hi: float
    seed_rule: str = SEED_RULE
    coalition_note: str = ""
    extra: dict = field(default_factory=dict)
    elapsed_s: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "trials": self.trials,
            "framings": self.framings,
            "estimate": self.estimate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seed_rule": self.seed_rule,
            "coalition_note": self.coalition_note,
            "extra": self.extra,
        }
        if include_timing:
            out["elapsed_s"] = self.elapsed_s
        return out


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


def _report(spec: ExperimentSpec, count: int, extra: dict, elapsed: float) -> SimulationReport:
    lo, hi = clopper_pearson(count, spec.trials)
    return SimulationReport(
        spec=spec.to_dict(),
        spec_hash=spec.spec_hash(),
        trials=spec.trials,
        framings=count,
        estimate=count / spec.trials,
        ci_lo=lo,
        ci_hi=hi,
        coalition_note=COALITION_NOTES[spec.coalition],
        extra=extra,
        elapsed_s=elapsed,
    )


def _coalition(spec: ExperimentSpec, key: Key) -> Coalition:
    if spec.coalition is CoalitionPolicy.FIRST_T:
        return Coalition.first(spec.t)
    return Coalition.random(spec.t, spec.users, key.stream("coalition"))


def _run_trials(fn: Callable[[int], dict], trials: int, workers: int) -> list[dict]:
    if workers <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves trial order, so merging is deterministic
        return list(pool.map(fn, range(trials)))


def _concat_user(inst, message) -> int:
    return sum(d * inst.q**l for l, d in enumerate(message))


def _framing_trial(spec: ExperimentSpec, index: int) -> dict:
    key = spec.trial_key(index)
    coalition = _coalition(spec, key)
    ens = spec.ensemble
    if ens is Ensemble.BERNOULLI:
        cb = sample_bernoulli(key)
        victim = framing_check_assigned(cb, coalition, spec.mode)
        return {"framed": victim is not None, "assigned": victim is not None}
    if ens is Ensemble.LINEAR:
        code, cb = sample_linear_codebook(key)
        victim = framing_check_assigned(cb, coalition, spec.mode)
        out = {"assigned": victim is not None}
        if code.q == 2:
            out["full"] = framing_check_linear_full(code, coalition.fingerprints(cb), spec.mode) is not None
        out["framed"] = out[spec.primary_check]
        return out
    inst = build_concatenated(key)
    fps = [concat_encode(inst, inst.message_for_user(u)) for u in coalition.members]
    witness = framing_check_concatenated(inst, fps, spec.mode)
    return {"framed": witness is not None, "full": witness is not None}


def run_framing_experiment(spec: ExperimentSpec, workers: int = 1) -> SimulationReport:
    """Fraction of trials in which the coalition's envelope holds an innocent
    fingerprint; each trial draws a fresh code from its own child seed."""
    start = time.perf_counter()
    outcomes = _run_trials(lambda i: _framing_trial(spec, i), spec.trials, workers)
    count = sum(o["framed"] for o in outcomes)
    extra = {"kind": "framing", "check": spec.primary_check}
    for name in ("assigned", "full"):
        if all(name in o for o in outcomes):
            extra[f"framings_{name}"] = sum(o[name] for o in outcomes)
    elapsed = time.perf_counter() - start
    log.info("framing experiment %s: %d/%d in %.2fs", spec.spec_hash(), count, spec.trials, elapsed)
    return _report(spec, count, extra, elapsed)


def check_attack_applicable(spec: ExperimentSpec, attack: Attack) -> None:
    ens = spec.ensemble
    if attack is Attack.XOR:
        if ens is not Ensemble.LINEAR or spec.t != spec.params.q + 1:
            raise ValueError("the sum attack needs a linear ensemble and t = q + 1")
    elif attack is Attack.AFFINE:
        if ens is not Ensemble.LINEAR or spec.params.q <= 2 or spec.t != 2:
            raise ValueError("the affine attack needs a linear ensemble over q > 2 and t = 2")


def _attack_trial(spec: ExperimentSpec, attack: Attack, index: int) -> dict:
    key = spec.trial_key(index)
    coalition = _coalition(spec, key)
    rng = key.stream("attack")
    ens = spec.ensemble
    if ens is Ensemble.CONCAT:
        inst = build_concatenated(key)
        fps = [concat_encode(inst, inst.message_for_user(u)) for u in coalition.members]
    else:
        if ens is Ensemble.LINEAR:
            code, cb = sample_linear_codebook(key)
        else:
            cb = sample_bernoulli(key)
        fps = coalition.fingerprints(cb)

    if attack is Attack.XOR:
        forgery = xor_attack(fps)
    elif attack is Attack.AFFINE:
        alpha = int(rng.integers(2, spec.params.q))
        forgery = affine_attack(fps[0], fps[1], alpha)
    else:
        forgery = random_envelope_member(build_envelope(fps, spec.mode), rng)

    framed = None
    if ens is Ensemble.CONCAT:
        verdict = validate_concatenated(inst, forgery)
        if verdict.valid:
            outer = [inst.inner_rows[i].index((forgery.packed >> (i * inst.m)) & ((1 << inst.m) - 1)) for i in range(inst.N)]
            user = _concat_user(inst, rs_message(inst.field, inst.N, inst.K, outer))
            framed = None if user in coalition.members else user
    elif ens is Ensemble.LINEAR:
        verdict = validate_linear(code, forgery)
        framed = _assigned_index(cb, forgery, coalition)
    else:
        verdict = validate_lookup(cb, forgery)
        framed = _assigned_index(cb, forgery, coalition)
    outside = forgery.packed not in {fp.packed for fp in fps}
    return {
        "success": verdict.valid and outside,
        "record": attack_record(coalition, spec.mode, forgery, verdict.valid, framed),
    }


def _assigned_index(cb, y: SymbolVector, coalition: Coalition) -> int | None:
    members = set(coalition.members)
    for idx, v in enumerate(cb.packed):
        if v == y.packed and idx not in members:
            return idx
    return None


def run_attack_experiment(
    spec: ExperimentSpec,
    attack: Attack | str,
    workers: int = 1,
    transcript: list | None = None,
) -> SimulationReport:
    """Fraction of trials whose forgery is accepted by the matching validator
    and differs from every coalition fingerprint."""
    attack = Attack(attack)
    check_attack_applicable(spec, attack)
    start = time.perf_counter()
    outcomes = _run_trials(lambda i: _attack_trial(spec, attack, i), spec.trials, workers)
    count = sum(o["success"] for o in outcomes)
    if transcript is not None:
        transcript.extend(o["record"] for o in outcomes)
    framed = sum(o["record"]["framed"] is not None for o in outcomes)
    extra = {"kind": "attack", "attack": attack.value, "framed_assigned_users": framed}
    return _report(spec, count, extra, time.perf_counter() - start)


def report_emit(report: SimulationReport, fmt: str = "json", include_timing: bool = False) -> bytes:
    """Serialise a report with a fixed field order."""
    if fmt == "json":
        return (json.dumps(report.to_dict(include_timing), indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        row = [report.spec_hash, report.trials, report.framings, report.estimate, report.ci_lo, report.ci_hi]
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {fmt!r}")


def calibrate_clopper_pearson(p: float, trials: int, runs: int, seed: int) -> float:
    """Coverage of the 95% interval over ``runs`` synthetic experiments with known p."""
    rng = np.random.Generator(np.random.Philox(seed))
    hits = 0
    for k in rng.binomial(trials, p, size=runs):
        lo, hi = clopper_pearson(int(k), trials)
        hits += lo <= p <= hi
    return hits / runs
