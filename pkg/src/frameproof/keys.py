"""Secret keys and their deterministic expansion into random streams."""

from __future__ import annotations

import enum
import hashlib
import math
import secrets
from dataclasses import asdict, dataclass, fields, replace
from typing import Union

import numpy as np

SEED_BYTES = 32


class Ensemble(str, enum.Enum):
    BERNOULLI = "bernoulli"
    LINEAR = "linear"
    CONCAT = "concat"


@dataclass(frozen=True)
class BernoulliParams:
    n: int
    M: int
    p: float
    distinct: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("length n must be >= 1")
        if self.M < 1:
            raise ValueError("user count M must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"bias p={self.p} outside [0, 1]")

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.n


@dataclass(frozen=True)
class LinearParams:
    n: int
    R: float
    M: int | None = None
    q: int = 2

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("length n must be >= 1")
        if not 0.0 < self.R < 1.0:
            raise ValueError(f"design rate R={self.R} outside (0, 1)")

    @property
    def check_rows(self) -> int:
        # guard against n*(1-R) landing a hair above an integer
        return math.ceil(self.n * (1.0 - self.R) - 1e-9)

    @property
    def users(self) -> int:
        if self.M is not None:
            return self.M
        return self.q ** math.floor(self.n * self.R + 1e-9)


@dataclass(frozen=True)
class ConcatParams:
    """Outer [q-1, K] Reed-Solomon code over GF(q) with independent inner
    Bernoulli codes of length ``m`` and size ``q``.

    ``m`` and ``p`` default (when None) to ``default_inner_length(q-1)`` and
    the optimal bias for coalition size ``t``; see :func:`resolve_concat`.
    """

    q: int
    K: int
    t: int
    xi: float
    m: int | None = None
    p: float | None = None
    distinct: bool = True

    @property
    def N(self) -> int:
        return self.q - 1

    @property
    def distance(self) -> int:
        return self.N - self.K + 1


Params = Union[BernoulliParams, LinearParams, ConcatParams]

PARAM_TYPES = {
    Ensemble.BERNOULLI: BernoulliParams,
    Ensemble.LINEAR: LinearParams,
    Ensemble.CONCAT: ConcatParams,
}


def ensemble_of(params: Params) -> Ensemble:
    for ens, cls in PARAM_TYPES.items():
        if isinstance(params, cls):
            return ens
    raise TypeError(f"not a parameter record: {params!r}")


def _sha256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return h.digest()


def seed_from_hex(text: str) -> bytes:
    raw = bytes.fromhex(text.strip().removeprefix("0x"))
    if len(raw) > SEED_BYTES:
        raise ValueError(f"seed longer than {SEED_BYTES * 8} bits")
    return raw.rjust(SEED_BYTES, b"\0")


def seed_from_int(value: int) -> bytes:
    return value.to_bytes(SEED_BYTES, "big")


def random_seed() -> bytes:
    return secrets.token_bytes(SEED_BYTES)


def trial_seed(master: bytes, index: int) -> int:
    """64-bit child seed for trial ``index``: truncated SHA-256 of (master, index)."""
    return int.from_bytes(_sha256(master, b"trial", index.to_bytes(8, "big"))[:8], "big")


@dataclass(frozen=True)
class Key:
    seed: bytes
    params: Params

    def __post_init__(self) -> None:
        if len(self.seed) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes")

    @classmethod
    def from_hex(cls, text: str, params: Params) -> "Key":
        return cls(seed_from_hex(text), params)

    @classmethod
    def from_int(cls, value: int, params: Params) -> "Key":
        return cls(seed_from_int(value), params)

    @property
    def ensemble(self) -> Ensemble:
        return ensemble_of(self.params)

    @property
    def seed_hex(self) -> str:
        return self.seed.hex()

    def stream(self, label: str) -> np.random.Generator:
        """Philox counter-mode generator keyed by (seed, ensemble, label)."""
        digest = _sha256(self.seed, self.ensemble.value.encode(), label.encode())
        return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "little")))

    def child(self, index: int, params: Params) -> "Key":
        """Independent key for sub-instance ``index`` (e.g. an outer coordinate)."""
        return Key(_sha256(self.seed, b"child", index.to_bytes(8, "big")), params)

    def with_params(self, params: Params) -> "Key":
        return replace(self, params=params)

    # -- key file: first line hex seed, then key=value lines

    def to_text(self) -> str:
        lines = [self.seed_hex, f"ensemble={self.ensemble.value}"]
        for name, value in params_to_dict(self.params).items():
            lines.append(f"{name}={'' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Key":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        seed = seed_from_hex(lines[0])
        kv = dict(ln.split("=", 1) for ln in lines[1:])
        ens = Ensemble(kv.pop("ensemble"))
        return cls(seed, params_from_dict(ens, kv))


def params_to_dict(params: Params) -> dict:
    return asdict(params)


def params_from_dict(ensemble: Ensemble | str, raw: dict) -> Params:
    cls = PARAM_TYPES[Ensemble(ensemble)]
    kwargs = {}
    for f in fields(cls):
        if f.name not in raw:
            continue
        value = raw[f.name]
        if value is None or value == "" or value == "None":
            kwargs[f.name] = None
            continue
        if f.name in ("p", "R", "xi"):
            kwargs[f.name] = float(value)
        elif f.name == "distinct":
            kwargs[f.name] = value if isinstance(value, bool) else str(value).lower() == "true"
        else:
            kwargs[f.name] = int(value)
    unknown = set(raw) - {f.name for f in fields(cls)}
    if unknown:
        raise ValueError(f"unknown parameters for {Ensemble(ensemble).value}: {sorted(unknown)}")
    return cls(**kwargs)
