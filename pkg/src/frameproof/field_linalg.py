"""Arithmetic over GF(2) and GF(2^s): bit-packed matrices, log/antilog field
tables, and Reed-Solomon membership checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .vectors import SymbolVector, symbol_width

# Default primitive polynomials, indexed by extension degree s.
PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


# ---------------------------------------------------------------- GF(2) --


@dataclass(frozen=True)
class BitMatrix:
    """Binary matrix; row ``r`` is an int whose bit ``j`` is entry ``(r, j)``."""

    n_rows: int
    n_cols: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.n_rows:
            raise ValueError(f"expected {self.n_rows} rows, got {len(self.rows)}")
        for r in self.rows:
            if r < 0 or r >> self.n_cols:
                raise ValueError("row has bits beyond the column count")

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> "BitMatrix":
        """Build from bit strings, column 0 first: ``["1100", "0110"]``."""
        n_cols = len(rows[0]) if rows else 0
        packed = []
        for text in rows:
            if len(text) != n_cols:
                raise ValueError("ragged rows")
            packed.append(sum(1 << j for j, ch in enumerate(text) if ch == "1"))
        return cls(len(rows), n_cols, tuple(packed))

    @classmethod
    def from_array(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(a.shape[0], a.shape[1], tuple(pack_bit_rows(a)))

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "BitMatrix":
        return cls(n_rows, n_cols, (0,) * n_rows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for r, row in enumerate(self.rows):
            for j in range(self.n_cols):
                out[r, j] = (row >> j) & 1
        return out

    def syndrome(self, v: int) -> int:
        """``H v`` packed as an int (bit ``r`` = parity of row ``r``)."""
        out = 0
        for r, row in enumerate(self.rows):
            if (row & v).bit_count() & 1:
                out |= 1 << r
        return out

    def to_text(self) -> str:
        """Hex-row text: one row per line, MSB = column 0."""
        lines = [f"{self.n_rows} {self.n_cols}"]
        lines += [SymbolVector(self.n_cols, 2, r).to_hex() for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n_rows, n_cols = (int(x) for x in lines[0].split())
        rows = tuple(SymbolVector.from_hex(ln, n_cols).packed for ln in lines[1:])
        return cls(n_rows, n_cols, rows)


def pack_bit_rows(bits: np.ndarray) -> list[int]:
    """Pack each row of a 0/1 array into an int, column ``j`` at bit ``j``."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if bits.shape[1] == 0:
        return [0] * bits.shape[0]
    by = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in by]


def _eliminate(rows: list[int], cols: Iterable[int]) -> list[int]:
    """Reduce ``rows`` in place to reduced row-echelon form over the given
    columns; returns the pivot columns (pivot ``k`` lives in ``rows[k]``)."""
    pivots = []
    r = 0
    for c in cols:
        bit = 1 << c
        for p in range(r, len(rows)):
            if rows[p] & bit:
                break
        else:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pivot_row = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= pivot_row
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def gf2_rank(m: BitMatrix) -> int:
    return len(_eliminate(list(m.rows), range(m.n_cols)))


def gf2_rank_rows(rows: Iterable[int], n_cols: int) -> int:
    return len(_eliminate(list(rows), range(n_cols)))


def _nullspace_from_reduced(rows: list[int], pivots: list[int], free: Iterable[int]) -> list[int]:
    basis = []
    for f in free:
        v = 1 << f
        for k, c in enumerate(pivots):
            if (rows[k] >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return basis


def gf2_nullspace_basis(h: BitMatrix) -> list[SymbolVector]:
    if h.n_cols < 1:
        raise ValueError("matrix must have at least one column")
    rows = list(h.rows)
    pivots = _eliminate(rows, range(h.n_cols))
    pivot_set = set(pivots)
    free = [c for c in range(h.n_cols) if c not in pivot_set]
    return [SymbolVector(h.n_cols, 2, v) for v in _nullspace_from_reduced(rows, pivots, free)]


def solve_masked(
    rows: Sequence[int],
    n_cols: int,
    fixed_mask: int,
    fixed_bits: int,
    exclude: Iterable[int] = (),
) -> tuple[int, int | None]:
    """Count ``y`` with ``H y = 0`` and ``y & fixed_mask == fixed_bits``.

    Returns ``(count, witness)`` where the witness is any such ``y`` (packed)
    not in ``exclude``, or None.
    """
    free_mask = ((1 << n_cols) - 1) & ~fixed_mask
    rhs_bit = 1 << n_cols
    aug = []
    for r in rows:
        a = r & free_mask
        if (r & fixed_bits).bit_count() & 1:
            a |= rhs_bit
        aug.append(a)
    free_cols = [c for c in range(n_cols) if (free_mask >> c) & 1]
    pivots = _eliminate(aug, free_cols)
    for a in aug[len(pivots):]:
        if a == rhs_bit:
            return 0, None
    pivot_set = set(pivots)
    unpinned = [c for c in free_cols if c not in pivot_set]
    count = 1 << len(unpinned)

    particular = fixed_bits
    for k, c in enumerate(pivots):
        if aug[k] & rhs_bit:
            particular |= 1 << c
    directions = _nullspace_from_reduced(aug, pivots, unpinned)

    excluded = set(exclude)
    # at most len(excluded) solutions can be excluded, so the first
    # len(excluded) + 1 solutions in index order decide the witness
    for idx in range(min(count, len(excluded) + 1)):
        y = particular
        j = 0
        while idx:
            if idx & 1:
                y ^= directions[j]
            idx >>= 1
            j += 1
        if y not in excluded:
            return count, y
    return count, None


def gf2_solve_constrained(
    h: BitMatrix,
    fixed: Mapping[int, int],
    exclude: Iterable[SymbolVector] = (),
) -> tuple[int, SymbolVector | None]:
    """Solutions of ``h y = 0`` agreeing with ``fixed`` (coordinate -> bit).

    Returns the exact solution count and a witness outside ``exclude``.
    """
    fixed_mask = 0
    fixed_bits = 0
    for i, b in fixed.items():
        if not 0 <= i < h.n_cols:
            raise IndexError(f"fixed coordinate {i} out of range")
        fixed_mask |= 1 << i
        if b & 1:
            fixed_bits |= 1 << i
    count, w = solve_masked(h.rows, h.n_cols, fixed_mask, fixed_bits, (v.packed for v in exclude))
    return count, None if w is None else SymbolVector(h.n_cols, 2, w)


# ------------------------------------------------------------- GF(2^s) --


@dataclass(frozen=True)
class FieldTable:
    """Log/antilog tables for GF(2^s).

    ``exp`` is doubled in length so products index it without a modulo.
    """

    s: int
    poly: int
    exp: tuple[int, ...]
    log: tuple[int, ...]

    @property
    def q(self) -> int:
        return 1 << self.s

    @property
    def order(self) -> int:
        return self.q - 1

    def elements(self) -> range:
        return range(self.q)

    def primitive_power(self, k: int) -> int:
        return self.exp[k % self.order]


_TABLES: dict[tuple[int, int], FieldTable] = {}


def field_table(q: int, poly: int | None = None) -> FieldTable:
    """Build (or fetch cached) tables for GF(q); raises if ``poly`` is not primitive."""
    s = symbol_width(q)
    if poly is None:
        if s not in PRIMITIVE_POLYS:
            raise ValueError(f"no default primitive polynomial for q=2^{s}")
        poly = PRIMITIVE_POLYS[s]
    if poly.bit_length() != s + 1:
        raise ValueError(f"polynomial {poly:#x} does not have degree {s}")
    cached = _TABLES.get((s, poly))
    if cached is not None:
        return cached
    order = q - 1
    exp = [0] * (2 * order)
    log = [0] * q
    x = 1
    for k in range(order):
        if k and x == 1:
            raise ValueError(f"polynomial {poly:#x} is not primitive over GF(2)")
        exp[k] = x
        log[x] = k
        x <<= 1
        if x & q:
            x ^= poly
    if x != 1:
        raise ValueError(f"polynomial {poly:#x} is not primitive over GF(2)")
    for k in range(order, 2 * order):
        exp[k] = exp[k - order]
    tbl = FieldTable(s, poly, tuple(exp), tuple(log))
    _TABLES[(s, poly)] = tbl
    return tbl


def gfq_add(a: int, b: int, tbl: FieldTable | None = None) -> int:
    return a ^ b


def gfq_mul(a: int, b: int, tbl: FieldTable) -> int:
    if a == 0 or b == 0:
        return 0
    return tbl.exp[tbl.log[a] + tbl.log[b]]


def gfq_inv(a: int, tbl: FieldTable) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return tbl.exp[(tbl.order - tbl.log[a]) % tbl.order]


def gfq_div(a: int, b: int, tbl: FieldTable) -> int:
    return gfq_mul(a, gfq_inv(b, tbl), tbl)


def gfq_scale(v: SymbolVector, alpha: int, tbl: FieldTable) -> SymbolVector:
    if v.q != tbl.q:
        raise ValueError("vector alphabet does not match the field")
    return SymbolVector.from_symbols([gfq_mul(alpha, a, tbl) for a in v], v.q)


def gfq_row_reduce(rows: list[list[int]], tbl: FieldTable) -> list[int]:
    """Reduced row-echelon form in place over GF(q); returns pivot columns."""
    if not rows:
        return []
    n_cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = gfq_inv(rows[r][c], tbl)
        rows[r] = [gfq_mul(inv, a, tbl) for a in rows[r]]
        for i in range(len(rows)):
            f = rows[i][c]
            if i != r and f:
                rows[i] = [a ^ gfq_mul(f, b, tbl) for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def gfq_rank(rows: Sequence[Sequence[int]], tbl: FieldTable) -> int:
    return len(gfq_row_reduce([list(r) for r in rows], tbl))


def gfq_nullspace_basis(rows: Sequence[Sequence[int]], n_cols: int, tbl: FieldTable) -> list[SymbolVector]:
    work = [list(r) for r in rows]
    pivots = gfq_row_reduce(work, tbl)
    pivot_set = set(pivots)
    basis = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        v = [0] * n_cols
        v[f] = 1
        for k, c in enumerate(pivots):
            # -a == a in characteristic 2
            v[c] = work[k][f]
        basis.append(SymbolVector.from_symbols(v, tbl.q))
    return basis


def gfq_syndrome_is_zero(rows: Sequence[Sequence[int]], y: SymbolVector, tbl: FieldTable) -> bool:
    ys = y.symbols()
    for row in rows:
        acc = 0
        for a, b in zip(row, ys):
            if a and b:
                acc ^= tbl.exp[tbl.log[a] + tbl.log[b]]
        if acc:
            return False
    return True


# -------------------------------------------------------- Reed-Solomon --
#
# Evaluation code: message (m_0..m_{K-1}) are coefficients of f, and the
# codeword is (f(alpha^0), ..., f(alpha^{N-1})) with N = q - 1.


def _check_rs(tbl: FieldTable, n_out: int, k_out: int) -> None:
    if n_out != tbl.order:
        raise ValueError(f"outer length must be q-1 = {tbl.order}, got {n_out}")
    if not 0 <= k_out <= n_out:
        raise ValueError(f"outer dimension {k_out} outside [0, {n_out}]")


def rs_encode(tbl: FieldTable, n_out: int, k_out: int, message: Sequence[int]) -> tuple[int, ...]:
    _check_rs(tbl, n_out, k_out)
    msg = list(message)
    if len(msg) != k_out:
        raise ValueError(f"message length {len(msg)} != K = {k_out}")
    out = []
    for j in range(n_out):
        # Horner at alpha^j
        x = tbl.exp[j]
        acc = 0
        for c in reversed(msg):
            acc = gfq_mul(acc, x, tbl) ^ c
        out.append(acc)
    return tuple(out)


def rs_syndromes(tbl: FieldTable, n_out: int, k_out: int, word: Sequence[int]) -> list[int]:
    """``S_i = sum_j c_j alpha^{ij}`` for ``i = 1..N-K``; all zero iff codeword."""
    _check_rs(tbl, n_out, k_out)
    w = list(word)
    if len(w) != n_out:
        raise ValueError(f"word length {len(w)} != outer length {n_out}")
    exp, log, order = tbl.exp, tbl.log, tbl.order
    nz = [(j, log[c]) for j, c in enumerate(w) if c]
    out = []
    for i in range(1, n_out - k_out + 1):
        acc = 0
        for j, lc in nz:
            acc ^= exp[(lc + i * j) % order]
        out.append(acc)
    return out


def rs_syndrome_check(tbl: FieldTable, n_out: int, k_out: int, word: Sequence[int]) -> bool:
    return not any(rs_syndromes(tbl, n_out, k_out, word))


def rs_interpolate(
    tbl: FieldTable, n_out: int, k_out: int, positions: Sequence[int], values: Sequence[int]
) -> tuple[int, ...]:
    """The unique codeword taking ``values`` at ``k_out`` distinct ``positions``."""
    _check_rs(tbl, n_out, k_out)
    if len(positions) != k_out or len(values) != k_out or len(set(positions)) != k_out:
        raise ValueError("need exactly K distinct positions")
    xs = [tbl.exp[p] for p in positions]
    # Lagrange weights w_l = y_l / prod_{m != l} (x_l - x_m)
    weights = []
    for l, (xl, yl) in enumerate(zip(xs, values)):
        den = 1
        for m, xm in enumerate(xs):
            if m != l:
                den = gfq_mul(den, xl ^ xm, tbl)
        weights.append(gfq_div(yl, den, tbl))
    out = []
    for j in range(n_out):
        x = tbl.exp[j]
        acc = 0
        for l, xl in enumerate(xs):
            if not weights[l]:
                continue
            term = weights[l]
            for m, xm in enumerate(xs):
                if m != l:
                    term = gfq_mul(term, x ^ xm, tbl)
            acc ^= term
        out.append(acc)
    return tuple(out)


def rs_message(tbl: FieldTable, n_out: int, k_out: int, word: Sequence[int]) -> tuple[int, ...]:
    """Recover the message of a codeword: ``m_l = sum_j c_j alpha^{-jl}``.

    The usual 1/N factor vanishes because N = 2^s - 1 is odd.
    """
    if not rs_syndrome_check(tbl, n_out, k_out, word):
        raise ValueError("word is not a codeword")
    exp, log, order = tbl.exp, tbl.log, tbl.order
    out = []
    for l in range(k_out):
        acc = 0
        for j, c in enumerate(word):
            if c:
                acc ^= exp[(log[c] - j * l) % order]
        out.append(acc)
    return tuple(out)
