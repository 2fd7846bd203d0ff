"""Rate bounds, divergence, concatenated-code design, and minimal codewords."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .field_linalg import field_table, gf2_rank_rows, gfq_inv, gfq_mul, gfq_rank
from .keys import ConcatParams, Key, LinearParams
from .vectors import SymbolVector

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Reference columns of the rate comparison table (taken from external works;
# printed for comparison only, never recomputed).
DETERMINISTIC_FRAMEPROOF_RATES = {2: 0.2075, 3: 0.0693, 4: 0.04, 5: 0.026}
FINGERPRINTING_RATES = {2: 0.25, 3: 0.0833, 4: 0.0158, 5: 0.0006}


def _xlog2(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log2(x)


def rate_bound(p: float, t: int) -> float:
    """Achievable rate ``-p^t log2 p - (1-p)^t log2 (1-p)`` of the Bernoulli(p) ensemble."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bias p={p} outside [0, 1]")
    if t < 1:
        raise ValueError("coalition size t must be >= 1")
    out = 0.0
    if 0.0 < p:
        out -= p**t * math.log2(p)
    if p < 1.0:
        out -= (1.0 - p) ** t * math.log2(1.0 - p)
    return out


@dataclass(frozen=True)
class RateResult:
    t: int
    p_star: float
    rate: float


@lru_cache(maxsize=None)
def optimal_rate(t: int, grid_step: float = 1e-3, tol: float = 1e-6) -> RateResult:
    """Maximise :func:`rate_bound` over p: grid search then golden-section refinement."""
    if t < 1:
        raise ValueError("coalition size t must be >= 1")
    steps = round(1.0 / grid_step)
    grid = [i / steps for i in range(steps + 1)]
    values = [rate_bound(p, t) for p in grid]
    best = max(range(len(grid)), key=lambda i: (values[i], -abs(grid[i] - 0.5)))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, steps)]
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = rate_bound(c, t), rate_bound(d, t)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = rate_bound(c, t)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = rate_bound(d, t)
    p_ref = (a + b) / 2.0
    candidates = [(values[best], grid[best]), (rate_bound(p_ref, t), p_ref)]
    rate, p_star = max(candidates)
    return RateResult(t, p_star, rate)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    return -_xlog2(p) - _xlog2(1.0 - p)


def divergence(a: float, b: float) -> float:
    """Binary divergence D(a||b) in bits; ``math.inf`` when a is not absolutely
    continuous with respect to b."""
    if not 0.0 <= a <= 1.0 or not 0.0 <= b <= 1.0:
        raise ValueError("arguments must lie in [0, 1]")
    out = 0.0
    for x, y in ((a, b), (1.0 - a, 1.0 - b)):
        if x == 0.0:
            continue
        if y == 0.0:
            return math.inf
        out += x * math.log2(x / y)
    return max(out, 0.0)


def concat_error_bound(N: int, xi: float, eps: float) -> float:
    """Framing-probability bound ``2^(-N D(xi||eps))`` of the concatenated code."""
    if not 0.0 < eps < xi < 1.0:
        raise ValueError(f"need 0 < eps < xi < 1 (inner error below the slack), got eps={eps}, xi={xi}")
    if N < 0:
        raise ValueError("N must be non-negative")
    return 2.0 ** (-N * divergence(xi, eps))


def default_inner_length(N: int, c: float = 4.0) -> int:
    """Inner code length ``ceil(c log2 N)``."""
    return max(1, math.ceil(c * math.log2(max(N, 2))))


def outer_distance_ok(N: int, K: int, t: int, xi: float) -> bool:
    """Relative distance condition ``(N-K+1)/N >= 1 - (1-xi)/t``."""
    return (N - K + 1) / N >= 1.0 - (1.0 - xi) / t - 1e-12


@dataclass(frozen=True)
class ConcatDesign:
    t: int
    q: int
    xi: float
    N: int
    K: int
    distance: int
    outer_rate: float
    m: int
    rate: float
    target_rate: float
    satisfies_distance: bool

    def params(self, **overrides) -> ConcatParams:
        kw = dict(q=self.q, K=self.K, t=self.t, xi=self.xi, m=self.m)
        kw.update(overrides)
        return ConcatParams(**kw)


def concat_design(t: int, q: int, xi: float, m: int | None = None) -> ConcatDesign:
    """Largest RS dimension meeting the distance condition, and the resulting rates.

    ``target_rate`` is the limit ``R_t / t`` approached as xi -> 0 and m -> infinity.
    """
    if t < 2:
        raise ValueError("coalition size t must be >= 2")
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    N = q - 1
    field_table(q)  # validates q
    K = math.floor(N * (1.0 - xi) / t + 1e-9)
    if K < 1:
        raise ValueError(f"parameters too small: outer dimension K={K} for N={N}, t={t}, xi={xi}")
    if m is None:
        m = default_inner_length(N)
    return ConcatDesign(
        t=t,
        q=q,
        xi=xi,
        N=N,
        K=K,
        distance=N - K + 1,
        outer_rate=K / N,
        m=m,
        rate=K * math.log2(q) / (N * m),
        target_rate=optimal_rate(t).rate / t,
        satisfies_distance=outer_distance_ok(N, K, t, xi),
    )


# ------------------------------------------------------ minimal vectors --


def _supported_subcode_dim(code, c: SymbolVector) -> int:
    """Dimension of the subcode of codewords supported inside supp(c)."""
    support = c.support()
    if code.q == 2:
        return len(support) - gf2_rank_rows((r & c.packed for r in code.parity.rows), code.n)
    cols = sorted(support)
    restricted = [[row[j] for j in cols] for row in code.parity_rows]
    return len(cols) - gfq_rank(restricted, code.field)


def _scalar_multiple(a: SymbolVector, b: SymbolVector) -> bool:
    if a.q == 2:
        return a == b
    tbl = field_table(a.q)
    i = min(b.support())
    ratio = gfq_mul(a[i], gfq_inv(b[i], tbl), tbl)
    return all(x == gfq_mul(ratio, y, tbl) for x, y in zip(a, b))


def is_minimal(code, c: SymbolVector) -> bool:
    """Whether nonzero codeword ``c`` is minimal.

    ``code`` is a :class:`~frameproof.ensembles.LinearCodeInstance` (decided by
    a rank computation on the columns in supp(c)) or an explicit collection
    of codewords (decided by scanning supports).
    """
    if c.packed == 0:
        raise ValueError("the zero vector is never minimal")
    if hasattr(code, "parity"):
        if not code.contains(c):
            raise ValueError("vector is not a codeword")
        return _supported_subcode_dim(code, c) == 1
    words = set(code)
    if c not in words:
        raise ValueError("vector is not a codeword")
    mask = c.support_mask()
    for w in words:
        if w.packed and w.support_mask() & ~mask == 0 and not _scalar_multiple(w, c):
            return False
    return True


def minimality_framing_equivalence(code, x1: SymbolVector, x2: SymbolVector) -> tuple[bool, bool]:
    """(is x2-x1 minimal, is the narrow framing set of {x1, x2} empty)."""
    from .coalition import framing_check_linear_full

    if x1 == x2:
        raise ValueError("fingerprints must differ")
    minimal = is_minimal(code, x2 - x1)
    framing_empty = framing_check_linear_full(code, [x1, x2]) is None
    return minimal, framing_empty


@dataclass(frozen=True)
class MinimalityReport:
    code_size: int
    minimal_count: int
    fraction: float
    fraction_nonzero: float


@dataclass(frozen=True)
class MinimalityEstimate:
    instances: int
    mean: float
    stderr: float
    mean_nonzero: float
    stderr_nonzero: float
    reports: tuple[MinimalityReport, ...]


def _minimal_flags_enumerated(words: np.ndarray) -> np.ndarray:
    """For binary codewords packed into int64, flag the minimal ones."""
    flags = np.zeros(len(words), dtype=bool)
    chunk = max(1, (1 << 22) // max(len(words), 1))
    for start in range(0, len(words), chunk):
        block = words[start:start + chunk]
        inside = (words[None, :] & ~block[:, None]) == 0
        flags[start:start + chunk] = inside.sum(axis=1) == 2
    flags[words == 0] = False
    return flags


def minimality_report(code, samples: int | None = None, rng: np.random.Generator | None = None) -> MinimalityReport:
    """Count minimal codewords, exhaustively or over ``samples`` random nonzero codewords."""
    size = code.size
    if samples is None:
        if code.dimension > 24:
            raise ValueError(f"code dimension {code.dimension} too large to enumerate; pass samples")
        if code.q == 2 and code.n <= 62:
            words = np.array([w.packed for w in code.codewords()], dtype=np.int64)
            minimal = int(_minimal_flags_enumerated(words).sum())
        else:
            minimal = sum(1 for w in code.codewords() if w.packed and is_minimal(code, w))
        return MinimalityReport(size, minimal, minimal / size, minimal / (size - 1) if size > 1 else 0.0)
    if rng is None:
        raise ValueError("sampling needs a generator")
    if size == 1:
        return MinimalityReport(1, 0, 0.0, 0.0)
    hits = 0
    for _ in range(samples):
        idx = int(rng.integers(1, size)) if size < 2**63 else 1 + int(rng.integers(0, 2**62))
        hits += is_minimal(code, code.codeword(idx))
    frac_nz = hits / samples
    return MinimalityReport(size, round(frac_nz * (size - 1)), frac_nz * (size - 1) / size, frac_nz)


def minimal_fraction_estimate(
    params: LinearParams, instances: int, key: Key, samples: int | None = None
) -> MinimalityEstimate:
    """Average minimal-codeword fraction over independent random linear codes."""
    from .ensembles import sample_linear

    reports = []
    for i in range(instances):
        child = key.child(i, params)
        code = sample_linear(child)
        rng = child.stream("minimal-sample") if samples is not None else None
        reports.append(minimality_report(code, samples, rng))
    fr = np.array([r.fraction for r in reports])
    fz = np.array([r.fraction_nonzero for r in reports])

    def _se(a: np.ndarray) -> float:
        return float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0

    return MinimalityEstimate(
        instances=instances,
        mean=float(fr.mean()),
        stderr=_se(fr),
        mean_nonzero=float(fz.mean()),
        stderr_nonzero=_se(fz),
        reports=tuple(reports),
    )


def minimal_codewords(words: Iterable[SymbolVector]) -> list[SymbolVector]:
    """Brute-force minimal codewords of an explicit code (for small codes)."""
    words = list(words)
    return [w for w in words if w.packed and is_minimal(words, w)]
