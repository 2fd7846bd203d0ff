"""Brute-force oracles shared by the test suite.

None of these touch the package's elimination, table or envelope code: they
work on plain tuples and enumerate.
"""

from __future__ import annotations

import itertools
import sys

import numpy as np
import pytest

from frameproof.vectors import SymbolVector


def clmul_mod(a: int, b: int, poly: int, s: int) -> int:
    """Carry-less product reduced modulo ``poly`` (schoolbook GF(2^s) multiply)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> s & 1:
            a ^= poly
    return out


def brute_kernel(h_rows: list[list[int]], n: int, q: int = 2, mul=None) -> list[tuple[int, ...]]:
    """Every length-n vector over the alphabet killed by every row."""
    out = []
    for y in itertools.product(range(q), repeat=n):
        ok = True
        for row in h_rows:
            acc = 0
            for a, b in zip(row, y):
                acc ^= (a & b) if q == 2 else mul(a, b)
            if acc:
                ok = False
                break
        if ok:
            out.append(y)
    return out


def brute_envelope(fps: list[tuple[int, ...]], q: int, wide: bool) -> set[tuple[int, ...]]:
    """Envelope straight from the definition, over all q^n vectors."""
    n = len(fps[0])
    members = set()
    for y in itertools.product(range(q), repeat=n):
        ok = True
        for i in range(n):
            column = {fp[i] for fp in fps}
            if len(column) == 1:
                ok = y[i] in column
            elif not wide:
                ok = y[i] in column
            if not ok:
                break
        if ok:
            members.add(y)
    return members


def vec(text: str, q: int = 2) -> SymbolVector:
    return SymbolVector.parse(text, q)


def bits(v: SymbolVector) -> str:
    return str(v)


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter) -> None:
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[name])
