"""Validators the distributor runs on every content access."""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass

import numpy as np

from .ensembles import Codebook, ConcatenatedCodeInstance, LinearCodeInstance
from .field_linalg import rs_syndrome_check
from .vectors import SymbolVector


class Detail(str, enum.Enum):
    ACCEPTED_ASSIGNED = "accepted-assigned"
    ACCEPTED_PARITY_CHECK = "accepted-parity-check"
    ACCEPTED_CONCAT = "accepted-concat"
    REJECTED_INNER = "rejected-inner"
    REJECTED_OUTER = "rejected-outer"
    REJECTED_LOOKUP = "rejected-lookup"
    REJECTED_PARITY_CHECK = "rejected-parity-check"


_ACCEPTING = {Detail.ACCEPTED_ASSIGNED, Detail.ACCEPTED_PARITY_CHECK, Detail.ACCEPTED_CONCAT}


@dataclass(frozen=True)
class ValidationVerdict:
    valid: bool
    detail: Detail
    coordinate: int | None = None

    def __post_init__(self) -> None:
        if self.valid != (self.detail in _ACCEPTING):
            raise ValueError(f"verdict detail {self.detail.value} inconsistent with valid={self.valid}")

    def __bool__(self) -> bool:
        return self.valid

    def to_dict(self) -> dict:
        out = {"valid": self.valid, "detail": self.detail.value}
        if self.coordinate is not None:
            out["coordinate"] = self.coordinate
        return out


def _length_check(expected: int, y: SymbolVector) -> None:
    if y.n != expected:
        raise ValueError(f"fingerprint length {y.n} != code length {expected}")


def validate_lookup(cb: Codebook, y: SymbolVector) -> ValidationVerdict:
    """Binary search of ``y`` in the sorted index of assigned fingerprints."""
    _length_check(cb.n, y)
    index = cb.sorted_index
    k = bisect.bisect_left(index, y.packed)
    if y.q == cb.q and k < len(index) and index[k] == y.packed:
        return ValidationVerdict(True, Detail.ACCEPTED_ASSIGNED)
    return ValidationVerdict(False, Detail.REJECTED_LOOKUP)


def validate_linear(code: LinearCodeInstance, y: SymbolVector) -> ValidationVerdict:
    """Accept iff every parity check is satisfied (unassigned codewords included)."""
    _length_check(code.n, y)
    if code.contains(y):
        return ValidationVerdict(True, Detail.ACCEPTED_PARITY_CHECK)
    return ValidationVerdict(False, Detail.REJECTED_PARITY_CHECK)


def validate_concatenated(inst: ConcatenatedCodeInstance, y: SymbolVector) -> ValidationVerdict:
    """Exact-match each block against its q inner codewords, then check the
    recovered outer word against the RS parity checks."""
    _length_check(inst.n, y)
    if y.q != 2:
        raise ValueError("concatenated fingerprints are binary")
    m = inst.m
    low = (1 << m) - 1
    v = y.packed
    outer = []
    for i, rows in enumerate(inst.inner_rows):
        block = (v >> (i * m)) & low
        try:
            outer.append(rows.index(block))
        except ValueError:
            return ValidationVerdict(False, Detail.REJECTED_INNER, i)
    if rs_syndrome_check(inst.field, inst.N, inst.K, outer):
        return ValidationVerdict(True, Detail.ACCEPTED_CONCAT)
    return ValidationVerdict(False, Detail.REJECTED_OUTER)


def validate_concatenated_many(inst: ConcatenatedCodeInstance, blocks: np.ndarray) -> np.ndarray:
    """Vectorised two-step validation of a batch of words given as inner blocks
    (shape (B, N), uint64).  Returns a boolean acceptance array."""
    blocks = np.asarray(blocks, dtype=np.uint64)
    B, N = blocks.shape
    if N != inst.N:
        raise ValueError(f"expected {inst.N} blocks per word, got {N}")
    tbl = inst.field
    rows = np.array(inst.inner_rows, dtype=np.uint64)  # (N, q)
    outer = np.zeros((B, N), dtype=np.int64)
    ok = np.ones(B, dtype=bool)
    for i in range(N):
        match = blocks[:, i][:, None] == rows[i][None, :]
        found = match.any(axis=1)
        ok &= found
        outer[:, i] = match.argmax(axis=1)
    exp = np.array(tbl.exp[: tbl.order], dtype=np.int64)
    log = np.array(tbl.log, dtype=np.int64)
    nonzero = outer != 0
    logs = log[outer]
    j = np.arange(N, dtype=np.int64)
    for s in range(1, N - inst.K + 1):
        terms = np.where(nonzero, exp[(logs + s * j[None, :]) % tbl.order], 0)
        ok &= np.bitwise_xor.reduce(terms, axis=1) == 0
    return ok
