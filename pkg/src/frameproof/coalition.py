"""Coalitions, the marking assumption, envelopes, framing checks and the
explicit forgeries against linear codes."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .field_linalg import FieldTable, field_table, gfq_mul, rs_interpolate, solve_masked
from .vectors import SymbolVector, symbol_mask


class EnvelopeMode(str, enum.Enum):
    NARROW = "narrow"
    WIDE = "wide"


class UnsupportedModeError(ValueError):
    """The requested envelope mode has no exact check for this code."""


@dataclass(frozen=True)
class Coalition:
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a coalition needs at least one member")
        if any(b <= a for a, b in zip(self.members, self.members[1:])):
            raise ValueError("coalition members must be strictly increasing")
        if self.members[0] < 0:
            raise ValueError("user indices are non-negative")

    @classmethod
    def of(cls, members) -> "Coalition":
        return cls(tuple(sorted(set(int(u) for u in members))))

    @classmethod
    def first(cls, t: int) -> "Coalition":
        return cls(tuple(range(t)))

    @classmethod
    def random(cls, t: int, M: int, rng: np.random.Generator) -> "Coalition":
        return cls(tuple(sorted(int(u) for u in rng.choice(M, size=t, replace=False))))

    @property
    def t(self) -> int:
        return len(self.members)

    def check(self, M: int) -> None:
        if self.members[-1] >= M:
            raise ValueError(f"coalition member {self.members[-1]} out of range for {M} users")

    def fingerprints(self, cb) -> list[SymbolVector]:
        self.check(len(cb))
        return [cb[u] for u in self.members]


def _check_shapes(fps: Sequence[SymbolVector]) -> tuple[int, int]:
    if not fps:
        raise ValueError("need at least one fingerprint")
    n, q = fps[0].n, fps[0].q
    for fp in fps:
        if fp.n != n or fp.q != q:
            raise ValueError("fingerprints differ in length or alphabet")
    return n, q


def _difference_mask(fps: Sequence[SymbolVector]) -> int:
    ref = fps[0].packed
    diff = 0
    for fp in fps[1:]:
        diff |= fp.packed ^ ref
    return diff


def detectable_positions(fps: Sequence[SymbolVector]) -> frozenset[int]:
    """Coordinates where the fingerprints do not all agree."""
    n, q = _check_shapes(fps)
    diff = _difference_mask(fps)
    return SymbolVector(n, q, diff).support()


@dataclass(frozen=True)
class EnvelopeSpec:
    """Per-coordinate description of the forgeries a coalition can build.

    ``allowed[i]`` is a one-element set for undetectable (fixed) coordinates.
    ``fixed_mask`` covers the bits of every fixed coordinate, whose symbols are
    taken from ``reference``.
    """

    mode: EnvelopeMode
    n: int
    q: int
    reference: SymbolVector
    fixed_mask: int
    allowed: tuple[frozenset[int], ...]

    def is_fixed(self, i: int) -> bool:
        return bool(self.fixed_mask >> (i * self.reference.width) & 1)

    @property
    def detectable(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if not self.is_fixed(i))

    @property
    def cardinality(self) -> int:
        return math.prod(len(a) for a in self.allowed)

    @cached_property
    def _restricted(self) -> tuple[tuple[int, frozenset[int]], ...]:
        # detectable coordinates whose allowed set is not the whole alphabet
        return tuple(
            (i, a) for i, a in enumerate(self.allowed) if not self.is_fixed(i) and len(a) < self.q
        )


def build_envelope(fps: Sequence[SymbolVector], mode: EnvelopeMode | str = EnvelopeMode.NARROW) -> EnvelopeSpec:
    mode = EnvelopeMode(mode)
    n, q = _check_shapes(fps)
    diff = _difference_mask(fps)
    detect = SymbolVector(n, q, diff).support()
    fixed_mask = symbol_mask(n, q, (i for i in range(n) if i not in detect))
    columns = list(zip(*(fp.symbols() for fp in fps))) if n else []
    alphabet = frozenset(range(q))
    allowed = []
    for i in range(n):
        if i not in detect:
            allowed.append(frozenset((columns[i][0],)))
        elif mode is EnvelopeMode.NARROW:
            allowed.append(frozenset(columns[i]))
        else:
            allowed.append(alphabet)
    return EnvelopeSpec(mode, n, q, fps[0], fixed_mask, tuple(allowed))


def envelope_contains(env: EnvelopeSpec, y: SymbolVector) -> bool:
    if y.n != env.n or y.q != env.q:
        raise ValueError(f"vector of length {y.n} does not fit envelope of length {env.n}")
    if (y.packed ^ env.reference.packed) & env.fixed_mask:
        return False
    if env.mode is EnvelopeMode.WIDE or env.q == 2:
        return True
    return all(y[i] in a for i, a in env._restricted)


def enumerate_envelope(env: EnvelopeSpec, cap: int = 1 << 16) -> list[SymbolVector]:
    """Every member of the envelope in lexicographic order (coordinate 0 most significant)."""
    card = env.cardinality
    if card > cap:
        raise ValueError(f"envelope has {card} members, more than the cap of {cap}")
    choices = [sorted(a) for a in env.allowed]
    return [SymbolVector.from_symbols(sym, env.q) for sym in itertools.product(*choices)]


def random_envelope_member(env: EnvelopeSpec, rng: np.random.Generator) -> SymbolVector:
    """Uniform draw from the envelope."""
    symbols = [sorted(a)[int(rng.integers(len(a)))] if len(a) > 1 else next(iter(a)) for a in env.allowed]
    return SymbolVector.from_symbols(symbols, env.q)


def framing_check_assigned(cb, coalition: Coalition, mode: EnvelopeMode | str = EnvelopeMode.NARROW) -> int | None:
    """Lowest-indexed innocent user whose fingerprint lies in the coalition's envelope."""
    coalition.check(len(cb))
    members = set(coalition.members)
    env = build_envelope(coalition.fingerprints(cb), mode)
    ref, mask = env.reference.packed, env.fixed_mask
    simple = env.mode is EnvelopeMode.WIDE or env.q == 2
    for idx, v in enumerate(cb.packed):
        if (v ^ ref) & mask or idx in members:
            continue
        if simple or envelope_contains(env, cb[idx]):
            return idx
    return None


def framing_check_linear_full(code, fps: Sequence[SymbolVector], mode: EnvelopeMode | str = EnvelopeMode.NARROW) -> SymbolVector | None:
    """A codeword of the full solution set lying in the envelope of ``fps`` but
    outside ``fps``, or None.

    Binary only: the envelope is then the affine set obtained by pinning the
    undetectable coordinates, so a constrained solve decides it exactly.
    """
    mode = EnvelopeMode(mode)
    n, q = _check_shapes(fps)
    if q != 2 or code.q != 2:
        raise UnsupportedModeError("exact full-code framing check needs a binary code")
    if n != code.n:
        raise ValueError("fingerprint length does not match the code")
    env = build_envelope(fps, mode)
    count, w = solve_masked(
        code.parity.rows, n, env.fixed_mask, env.reference.packed & env.fixed_mask, (fp.packed for fp in fps)
    )
    return None if w is None else SymbolVector(n, 2, w)


def xor_attack(fps: Sequence[SymbolVector]) -> SymbolVector:
    """Sum of q+1 distinct fingerprints over GF(q)."""
    n, q = _check_shapes(fps)
    if len(fps) != q + 1:
        raise ValueError(f"the sum attack needs exactly q+1 = {q + 1} fingerprints, got {len(fps)}")
    if len({fp.packed for fp in fps}) != len(fps):
        raise ValueError("fingerprints must be pairwise distinct")
    acc = 0
    for fp in fps:
        acc ^= fp.packed
    return SymbolVector(n, q, acc)


def affine_attack(x1: SymbolVector, x2: SymbolVector, alpha: int, tbl: FieldTable | None = None) -> SymbolVector:
    """``alpha x1 + (1 - alpha) x2`` for a field element alpha outside {0, 1}."""
    n, q = _check_shapes([x1, x2])
    if q <= 2:
        raise ValueError("the affine attack needs an alphabet with q > 2")
    if tbl is None:
        tbl = field_table(q)
    if tbl.q != q:
        raise ValueError("field table does not match the alphabet")
    if alpha in (0, 1) or not 0 <= alpha < q:
        raise ValueError(f"alpha must be a field element outside {{0, 1}}, got {alpha}")
    if x1 == x2:
        raise ValueError("fingerprints must differ")
    beta = 1 ^ alpha
    return SymbolVector.from_symbols([gfq_mul(alpha, a, tbl) ^ gfq_mul(beta, b, tbl) for a, b in zip(x1, x2)], q)


def column_counts(fps: Sequence[SymbolVector]) -> tuple[int, int]:
    """Number of all-ones and all-zeros columns of the binary matrix with rows ``fps``."""
    n, q = _check_shapes(fps)
    if q != 2:
        raise ValueError("column counts are defined for binary fingerprints")
    all_and = (1 << n) - 1
    any_or = 0
    for fp in fps:
        all_and &= fp.packed
        any_or |= fp.packed
    return all_and.bit_count(), n - any_or.bit_count()


def typicality_t1(fps: Sequence[SymbolVector], p: float, gamma: float) -> bool:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = fps[0].n
    t = len(fps)
    s1, s0 = column_counts(fps)
    ones, zeros = p**t, (1.0 - p) ** t
    return n * (ones - gamma) <= s1 <= n * (ones + gamma) and n * (zeros - gamma) <= s0 <= n * (zeros + gamma)


def pair_counts(x1: SymbolVector, x2: SymbolVector) -> dict[str, int]:
    n, q = _check_shapes([x1, x2])
    if q != 2:
        raise ValueError("pair counts are defined for binary fingerprints")
    full = (1 << n) - 1
    a, b = x1.packed, x2.packed
    return {
        "00": (~a & ~b & full).bit_count(),
        "01": (~a & b & full).bit_count(),
        "10": (a & ~b & full).bit_count(),
        "11": (a & b).bit_count(),
    }


def typicality_pairs(x1: SymbolVector, x2: SymbolVector, gamma: float) -> bool:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = x1.n
    lo, hi = n * (0.25 - gamma), n * (0.25 + gamma)
    return all(lo <= c <= hi for c in pair_counts(x1, x2).values())


def attack_record(coalition: Coalition, mode: EnvelopeMode | str, forgery: SymbolVector, valid: bool, framed: int | None) -> dict:
    """One JSON-ready attack transcript line."""
    return {
        "coalition": list(coalition.members),
        "mode": EnvelopeMode(mode).value,
        "forgery": forgery.to_hex(),
        "valid": bool(valid),
        "framed": framed,
    }


def outer_symbol_options(inst, fps: Sequence[SymbolVector], mode: EnvelopeMode | str = EnvelopeMode.NARROW) -> list[list[int]]:
    """For each outer coordinate, the inner symbols whose codeword fits the
    coalition's (binary) envelope restricted to that block."""
    n, q = _check_shapes(fps)
    if q != 2 or n != inst.n:
        raise ValueError("fingerprints do not fit the concatenated code")
    env = build_envelope(fps, mode)
    m = inst.m
    low = (1 << m) - 1
    options = []
    for i, rows in enumerate(inst.inner_rows):
        ref = (env.reference.packed >> (i * m)) & low
        mask = (env.fixed_mask >> (i * m)) & low
        options.append([a for a, r in enumerate(rows) if not (r ^ ref) & mask])
    return options


def framing_check_concatenated(
    inst, fps: Sequence[SymbolVector], mode: EnvelopeMode | str = EnvelopeMode.NARROW, cap: int = 1 << 20
) -> SymbolVector | None:
    """A codeword of the full concatenated code inside the envelope of ``fps``
    and outside ``fps``, or None.

    Exact: the outer code is MDS, so enumerating the allowed symbols on the K
    most constrained coordinates and interpolating covers every candidate.
    """
    options = outer_symbol_options(inst, fps, mode)
    if any(not opts for opts in options):
        return None
    info = sorted(range(inst.N), key=lambda i: (len(options[i]), i))[: inst.K]
    info.sort()
    work = math.prod(len(options[i]) for i in info)
    if work > cap:
        raise ValueError(f"{work} candidate outer words exceed the enumeration cap of {cap}")
    own = {fp.packed for fp in fps}
    allowed = [set(opts) for opts in options]
    for values in itertools.product(*(options[i] for i in info)):
        word = rs_interpolate(inst.field, inst.N, inst.K, info, values)
        if all(sym in allowed[j] for j, sym in enumerate(word)):
            y = inst.blocks_to_vector(word)
            if y.packed not in own:
                return y
    return None
