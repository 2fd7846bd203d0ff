"""Randomized code constructions expanded deterministically from a :class:`Key`."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .analysis import default_inner_length, optimal_rate, outer_distance_ok
from .field_linalg import (
    BitMatrix,
    FieldTable,
    field_table,
    gf2_nullspace_basis,
    gf2_rank,
    gfq_mul,
    gfq_nullspace_basis,
    gfq_rank,
    gfq_syndrome_is_zero,
    pack_bit_rows,
    rs_encode,
)
from .keys import BernoulliParams, ConcatParams, Ensemble, Key, LinearParams, params_from_dict, seed_from_hex
from .vectors import SymbolVector, symbol_width


class CodeSizeError(ValueError):
    """More users requested than the realized code can hold."""


@dataclass(frozen=True)
class Codebook:
    fingerprints: tuple[SymbolVector, ...]
    n: int
    q: int = 2
    key: Key | None = None

    def __post_init__(self) -> None:
        for fp in self.fingerprints:
            if fp.n != self.n or fp.q != self.q:
                raise ValueError("all fingerprints must share the codebook's length and alphabet")

    def __len__(self) -> int:
        return len(self.fingerprints)

    def __getitem__(self, i: int) -> SymbolVector:
        return self.fingerprints[i]

    def __iter__(self) -> Iterator[SymbolVector]:
        return iter(self.fingerprints)

    @property
    def M(self) -> int:
        return len(self.fingerprints)

    @cached_property
    def packed(self) -> tuple[int, ...]:
        return tuple(fp.packed for fp in self.fingerprints)

    @cached_property
    def sorted_index(self) -> list[int]:
        return sorted(self.packed)

    def has_duplicates(self) -> bool:
        return len(set(self.packed)) != len(self.packed)


def _resample_duplicates(rows: list[int], draw) -> None:
    seen: set[int] = set()
    for i, r in enumerate(rows):
        while r in seen:
            r = draw()
        rows[i] = r
        seen.add(r)


def sample_bernoulli(key: Key) -> Codebook:
    """M x n matrix of i.i.d. Bernoulli(p) bits, one fingerprint per row."""
    params = key.params
    if not isinstance(params, BernoulliParams):
        raise TypeError("sample_bernoulli needs a Bernoulli key")
    n, M, p = params.n, params.M, params.p
    rng = key.stream("bernoulli")
    rows = pack_bit_rows(rng.random((M, n)) < p)
    if params.distinct and M > 1:
        if p in (0.0, 1.0) or M > 2**n:
            raise CodeSizeError(f"cannot draw {M} distinct rows of length {n} with p={p}")
        _resample_duplicates(rows, lambda: pack_bit_rows(rng.random((1, n)) < p)[0])
    return Codebook(tuple(SymbolVector(n, 2, r) for r in rows), n, 2, key)


@dataclass(frozen=True)
class LinearCodeInstance:
    """Kernel of a random parity-check matrix over GF(q).

    For q = 2 the matrix is a :class:`BitMatrix`; otherwise ``parity_rows``
    holds symbol rows and ``field`` the arithmetic tables.
    """

    n: int
    q: int
    rank: int
    basis: tuple[SymbolVector, ...]
    parity: BitMatrix | None = None
    parity_rows: tuple[tuple[int, ...], ...] = ()
    key: Key | None = None

    @property
    def field(self) -> FieldTable:
        return field_table(self.q)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return self.q ** self.dimension

    @property
    def check_rows(self) -> int:
        return self.parity.n_rows if self.q == 2 else len(self.parity_rows)

    def contains(self, y: SymbolVector) -> bool:
        if y.n != self.n or y.q != self.q:
            raise ValueError(f"vector of length {y.n} over q={y.q} does not fit code of length {self.n} over q={self.q}")
        if self.q == 2:
            return all(not (r & y.packed).bit_count() & 1 for r in self.parity.rows)
        return gfq_syndrome_is_zero(self.parity_rows, y, self.field)

    def codeword(self, index: int) -> SymbolVector:
        """Codeword with base-q digits of ``index`` as coefficients on the basis."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        if self.q == 2:
            v = 0
            j = 0
            while index:
                if index & 1:
                    v ^= self.basis[j].packed
                index >>= 1
                j += 1
            return SymbolVector(self.n, 2, v)
        tbl = self.field
        acc = [0] * self.n
        j = 0
        while index:
            index, coef = divmod(index, self.q)
            if coef:
                for i, a in enumerate(self.basis[j]):
                    if a:
                        acc[i] ^= gfq_mul(coef, a, tbl)
            j += 1
        return SymbolVector.from_symbols(acc, self.q)

    def codewords_at(self, indices: Sequence[int]) -> list[SymbolVector]:
        """Batch form of :meth:`codeword`, vectorised when words fit in 63 bits."""
        k, n, q = self.dimension, self.n, self.q
        s = symbol_width(q)
        if n * s > 63 or self.size >= 2**63 or k == 0:
            return [self.codeword(int(i)) for i in indices]
        idx = np.asarray(indices, dtype=np.int64)
        if np.any((idx < 0) | (idx >= self.size)):
            raise IndexError("codeword index out of range")
        if q == 2:
            basis = np.array([b.packed for b in self.basis], dtype=np.int64)
            bits = (idx[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1
            words = np.bitwise_xor.reduce(np.where(bits == 1, basis[None, :], 0), axis=1)
        else:
            mul = _mul_table(self.field)
            digits = (idx[:, None] // q ** np.arange(k, dtype=np.int64)[None, :]) % q
            acc = np.zeros((len(idx), n), dtype=np.int64)
            for j, b in enumerate(self.basis):
                acc ^= mul[digits[:, j][:, None], np.array(b.symbols(), dtype=np.int64)[None, :]]
            words = (acc << (s * np.arange(n, dtype=np.int64))[None, :]).sum(axis=1)
        return [SymbolVector(n, q, int(w)) for w in words]

    def codewords(self) -> Iterator[SymbolVector]:
        if self.q == 2:
            words = [0]
            for b in self.basis:
                words += [w ^ b.packed for w in words]
            return (SymbolVector(self.n, 2, w) for w in words)
        return (self.codeword(i) for i in range(self.size))


def _binary_instance(h: BitMatrix, key: Key | None) -> LinearCodeInstance:
    basis = tuple(gf2_nullspace_basis(h))
    return LinearCodeInstance(h.n_cols, 2, gf2_rank(h), basis, parity=h, key=key)


def _qary_instance(rows: Sequence[Sequence[int]], n: int, q: int, key: Key | None) -> LinearCodeInstance:
    tbl = field_table(q)
    rows = tuple(tuple(int(a) for a in r) for r in rows)
    basis = tuple(gfq_nullspace_basis(rows, n, tbl))
    return LinearCodeInstance(n, q, gfq_rank(rows, tbl), basis, parity_rows=rows, key=key)


def linear_code_from_parity(rows: Sequence[Sequence[int]], q: int = 2) -> LinearCodeInstance:
    n = len(rows[0])
    if q == 2:
        return _binary_instance(BitMatrix(len(rows), n, tuple(pack_bit_rows(np.asarray(rows, dtype=np.uint8)))), None)
    return _qary_instance(rows, n, q, None)


def linear_code_from_generator(rows: Sequence[Sequence[int]], q: int = 2) -> LinearCodeInstance:
    """The code spanned by ``rows``; its parity-check matrix is the dual basis."""
    n = len(rows[0])
    if q == 2:
        g = BitMatrix(len(rows), n, tuple(pack_bit_rows(np.asarray(rows, dtype=np.uint8))))
        dual = gf2_nullspace_basis(g)
        h = BitMatrix(len(dual), n, tuple(v.packed for v in dual))
        return _binary_instance(h, None)
    tbl = field_table(q)
    dual = gfq_nullspace_basis(rows, n, tbl)
    return _qary_instance([d.symbols() for d in dual], n, q, None)


def sample_linear(key: Key) -> LinearCodeInstance:
    """Random ceil(n(1-R)) x n parity-check matrix with uniform entries."""
    params = key.params
    if not isinstance(params, LinearParams):
        raise TypeError("sample_linear needs a linear key")
    n, q = params.n, params.q
    rng = key.stream("parity")
    entries = rng.integers(0, q, size=(params.check_rows, n), dtype=np.int64)
    if q == 2:
        h = BitMatrix(params.check_rows, n, tuple(pack_bit_rows(entries.astype(np.uint8))))
        return _binary_instance(h, key)
    return _qary_instance(entries.tolist(), n, q, key)


def assign_linear_fingerprints(code: LinearCodeInstance, M: int, key: Key) -> Codebook:
    """M distinct codewords drawn uniformly without replacement."""
    if M > code.size:
        raise CodeSizeError(f"requested {M} users but the realized code has only {code.size} codewords")
    if M < 0:
        raise ValueError("M must be non-negative")
    rng = key.stream("assign")
    if code.size < 2**63:
        picks = rng.choice(code.size, size=M, replace=False).tolist()
    else:
        # rejection keeps the draw uniform without replacement when M << size
        draw = random.Random(int(rng.integers(0, 2**63)))
        chosen: dict[int, None] = {}
        while len(chosen) < M:
            chosen.setdefault(draw.randrange(code.size))
        picks = list(chosen)
    return Codebook(tuple(code.codewords_at(picks)), code.n, code.q, key)


def sample_linear_codebook(key: Key) -> tuple[LinearCodeInstance, Codebook]:
    code = sample_linear(key)
    return code, assign_linear_fingerprints(code, key.params.users, key)


# ----------------------------------------------------------- concatenated --


def resolve_concat(params: ConcatParams) -> ConcatParams:
    """Fill in default inner length and bias."""
    m = params.m if params.m is not None else default_inner_length(params.N)
    p = params.p if params.p is not None else optimal_rate(params.t).p_star
    return ConcatParams(params.q, params.K, params.t, params.xi, m, p, params.distinct)


@dataclass(frozen=True)
class ConcatenatedCodeInstance:
    params: ConcatParams
    field: FieldTable
    inner: tuple[Codebook, ...]
    key: Key | None = None
    inner_rows: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inner_rows", tuple(cb.packed for cb in self.inner))

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def K(self) -> int:
        return self.params.K

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n(self) -> int:
        return self.N * self.m

    @property
    def size(self) -> int:
        return self.q**self.K

    @property
    def distance(self) -> int:
        return self.params.distance

    def message_for_user(self, user: int) -> tuple[int, ...]:
        """Base-q digits of the user index, least significant first."""
        if not 0 <= user < self.size:
            raise IndexError(user)
        digits = []
        for _ in range(self.K):
            user, d = divmod(user, self.q)
            digits.append(d)
        return tuple(digits)

    def outer_word(self, message: Sequence[int]) -> tuple[int, ...]:
        return rs_encode(self.field, self.N, self.K, message)

    def blocks_to_vector(self, outer: Sequence[int]) -> SymbolVector:
        m = self.m
        packed = 0
        for i, sym in enumerate(outer):
            packed |= self.inner_rows[i][sym] << (i * m)
        return SymbolVector(self.n, 2, packed)

    def codebook(self, M: int | None = None) -> Codebook:
        """Fingerprints of users 0..M-1 (all q^K users by default)."""
        M = self.size if M is None else M
        if M > self.size:
            raise CodeSizeError(f"requested {M} users but the code has {self.size} codewords")
        fps = tuple(concat_encode(self, self.message_for_user(u)) for u in range(M))
        return Codebook(fps, self.n, 2, self.key)


def build_concatenated(key: Key) -> ConcatenatedCodeInstance:
    params = key.params
    if not isinstance(params, ConcatParams):
        raise TypeError("build_concatenated needs a concatenated key")
    params = resolve_concat(params)
    tbl = field_table(params.q)
    if not 1 <= params.K <= params.N:
        raise ValueError(f"outer dimension K={params.K} outside [1, {params.N}]")
    if not outer_distance_ok(params.N, params.K, params.t, params.xi):
        raise ValueError(
            f"outer code violates the distance condition: "
            f"Delta/N = {params.distance}/{params.N} < 1 - (1 - {params.xi})/{params.t}"
        )
    inner_params = BernoulliParams(params.m, params.q, params.p, params.distinct)
    inner = tuple(sample_bernoulli(key.child(i, inner_params)) for i in range(params.N))
    return ConcatenatedCodeInstance(params, tbl, inner, key.with_params(params))


def concat_encode(inst: ConcatenatedCodeInstance, message: SymbolVector | Sequence[int]) -> SymbolVector:
    """RS-encode ``message`` and substitute each outer symbol by its inner codeword."""
    if isinstance(message, SymbolVector) and message.q != inst.q:
        raise ValueError("message alphabet does not match the outer field")
    msg = list(message)
    if len(msg) != inst.K:
        raise ValueError(f"message length {len(msg)} != K = {inst.K}")
    return inst.blocks_to_vector(inst.outer_word(msg))


def encode_many(inst: ConcatenatedCodeInstance, messages: np.ndarray) -> np.ndarray:
    """Vectorised encoding: ``messages`` (B, K) -> inner blocks (B, N) as uint64.

    Requires ``m <= 64``.
    """
    if inst.m > 64:
        raise ValueError("batch encoding packs blocks into 64-bit words; m must be <= 64")
    tbl = inst.field
    q, N = inst.q, inst.N
    mul = _mul_table(tbl)
    messages = np.asarray(messages, dtype=np.int64)
    outer = np.zeros((messages.shape[0], N), dtype=np.int64)
    for k in range(inst.K):
        # column j multiplies m_k by alpha^(j k)
        powers = np.array([tbl.exp[(j * k) % tbl.order] for j in range(N)], dtype=np.int64)
        outer ^= mul[messages[:, k][:, None], powers[None, :]]
    rows = np.array(inst.inner_rows, dtype=np.uint64)  # (N, q)
    return rows[np.arange(N)[None, :], outer]


def _mul_table(tbl: FieldTable) -> np.ndarray:
    q = tbl.q
    out = np.zeros((q, q), dtype=np.int64)
    for a in range(1, q):
        for b in range(1, q):
            out[a, b] = tbl.exp[tbl.log[a] + tbl.log[b]]
    return out


# --------------------------------------------------------------- file I/O --


def expand_key(key: Key):
    """The code object a key stands for: Codebook, (LinearCodeInstance, Codebook) or ConcatenatedCodeInstance."""
    if key.ensemble is Ensemble.BERNOULLI:
        return sample_bernoulli(key)
    if key.ensemble is Ensemble.LINEAR:
        return sample_linear_codebook(key)
    return build_concatenated(key)


def codebook_to_text(cb: Codebook, key: Key) -> str:
    lines = [f"# {ln}" if i else f"# seed={ln}" for i, ln in enumerate(key.to_text().splitlines())]
    lines.append(f"# users={cb.M}")
    lines += [fp.to_hex() for fp in cb]
    return "\n".join(lines) + "\n"


def codebook_from_text(text: str) -> tuple[Codebook, Key]:
    header: dict[str, str] = {}
    body = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            k, _, v = ln[1:].strip().partition("=")
            header[k] = v
        else:
            body.append(ln)
    seed = seed_from_hex(header.pop("seed"))
    ens = Ensemble(header.pop("ensemble"))
    header.pop("users", None)
    key = Key(seed, params_from_dict(ens, header))
    n, q = _fingerprint_shape(key)
    fps = tuple(SymbolVector.from_hex(ln, n, q) for ln in body)
    return Codebook(fps, n, q, key), key


def _fingerprint_shape(key: Key) -> tuple[int, int]:
    params = key.params
    if isinstance(params, BernoulliParams):
        return params.n, 2
    if isinstance(params, LinearParams):
        return params.n, params.q
    params = resolve_concat(params)
    return params.N * params.m, 2
