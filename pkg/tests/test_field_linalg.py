import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frameproof.field_linalg import (
    PRIMITIVE_POLYS,
    BitMatrix,
    field_table,
    gf2_nullspace_basis,
    gf2_rank,
    gf2_solve_constrained,
    gfq_add,
    gfq_inv,
    gfq_mul,
    gfq_nullspace_basis,
    gfq_rank,
    rs_encode,
    rs_interpolate,
    rs_message,
    rs_syndrome_check,
)
from frameproof.vectors import SymbolVector

from conftest import brute_kernel, clmul_mod


def span(vectors):
    out = {0}
    for v in vectors:
        out |= {w ^ v.packed for w in out}
    return out


# ---------------------------------------------------------------- rank --


def test_rank_identity():
    assert gf2_rank(BitMatrix.identity(3)) == 3


def test_rank_zero():
    assert gf2_rank(BitMatrix.zeros(4, 6)) == 0


def test_rank_dependent_rows():
    m = BitMatrix.from_strings(["1100", "0110", "1010"])
    assert gf2_rank(m) == 2
    assert m.rows == BitMatrix.from_strings(["1100", "0110", "1010"]).rows  # not mutated


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 64), st.integers(1, 64), st.integers(0, 2**32 - 1))
def test_rank_nullity(r, c, seed):
    a = np.random.default_rng(seed).integers(0, 2, size=(r, c))
    h = BitMatrix.from_array(a)
    basis = gf2_nullspace_basis(h)
    assert len(basis) + gf2_rank(h) == c
    for v in basis:
        assert h.syndrome(v.packed) == 0
    # independence: rank of the basis itself
    if basis:
        assert gf2_rank(BitMatrix(len(basis), c, tuple(v.packed for v in basis))) == len(basis)


# ----------------------------------------------------------- nullspace --


def test_nullspace_parity_row():
    basis = gf2_nullspace_basis(BitMatrix.from_strings(["111"]))
    assert len(basis) == 2
    expected = {SymbolVector.parse(s).packed for s in ("000", "110", "101", "011")}
    assert span(basis) == expected


def test_nullspace_full_rank_is_empty():
    assert gf2_nullspace_basis(BitMatrix.identity(3)) == []


def test_nullspace_unconstrained():
    basis = gf2_nullspace_basis(BitMatrix.zeros(1, 4))
    assert len(basis) == 4
    assert len(span(basis)) == 16


def test_hex_row_roundtrip():
    m = BitMatrix.from_strings(["10110", "01101", "00000"])
    assert BitMatrix.from_text(m.to_text()) == m
    assert m.to_text().splitlines()[1] == "b0"


# ---------------------------------------------------- constrained solve --


def test_solve_constrained_examples():
    h = BitMatrix.from_strings(["111"])
    count, w = gf2_solve_constrained(h, {0: 1})
    assert count == 2
    assert str(w) in {"110", "101"}
    count, w = gf2_solve_constrained(h, {0: 1}, exclude=[SymbolVector.parse("110")])
    assert str(w) == "101"
    count, w = gf2_solve_constrained(h, {0: 1}, exclude=[SymbolVector.parse("110"), SymbolVector.parse("101")])
    assert count == 2 and w is None
    assert gf2_solve_constrained(h, {0: 1, 1: 1, 2: 1}) == (0, None)
    assert gf2_solve_constrained(BitMatrix.zeros(1, 3), {})[0] == 8


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_solve_constrained_matches_enumeration(data):
    c = data.draw(st.integers(1, 12))
    r = data.draw(st.integers(1, 8))
    rows = [[data.draw(st.integers(0, 1)) for _ in range(c)] for _ in range(r)]
    coords = data.draw(st.lists(st.integers(0, c - 1), unique=True, max_size=c))
    fixed = {i: data.draw(st.integers(0, 1)) for i in coords}
    h = BitMatrix.from_array(np.array(rows))
    sols = [y for y in brute_kernel(rows, c) if all(y[i] == b for i, b in fixed.items())]
    sol_vecs = [SymbolVector.from_symbols(y) for y in sols]
    excl = sol_vecs[:2]
    count, w = gf2_solve_constrained(h, fixed, exclude=excl)
    assert count == len(sols)
    if len(sols) > len(excl):
        assert w is not None and w in sol_vecs and w not in excl
    else:
        assert w is None


def test_solve_constrained_exhaustive_width_16():
    rng = np.random.default_rng(7)
    for _ in range(5):
        rows = rng.integers(0, 2, size=(6, 16)).tolist()
        fixed = {0: 1, 5: 0, 9: 1}
        brute = sum(1 for y in brute_kernel(rows, 16) if y[0] == 1 and y[5] == 0 and y[9] == 1)
        assert gf2_solve_constrained(BitMatrix.from_array(np.array(rows)), fixed)[0] == brute


# ------------------------------------------------------------ GF(2^s) --


def test_gf4_examples():
    tbl = field_table(4)
    assert tbl.poly == 0b111
    assert gfq_mul(2, 2, tbl) == 3
    assert all(gfq_mul(1, x, tbl) == x for x in range(4))
    assert gfq_inv(3, tbl) == 2
    with pytest.raises(ZeroDivisionError):
        gfq_inv(0, tbl)


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_field_axioms_exhaustive(s):
    q = 1 << s
    tbl = field_table(q)
    els = range(q)
    for a, b in itertools.product(els, els):
        assert gfq_mul(a, b, tbl) == gfq_mul(b, a, tbl)
        assert gfq_mul(a, b, tbl) == clmul_mod(a, b, tbl.poly, s)
        for c in els:
            assert gfq_mul(gfq_mul(a, b, tbl), c, tbl) == gfq_mul(a, gfq_mul(b, c, tbl), tbl)
            assert gfq_mul(a, gfq_add(b, c), tbl) == gfq_add(gfq_mul(a, b, tbl), gfq_mul(a, c, tbl))
    for a in range(1, q):
        assert tbl.exp[tbl.log[a]] == a
        assert gfq_mul(a, gfq_inv(a, tbl), tbl) == 1


@pytest.mark.parametrize("s", sorted(PRIMITIVE_POLYS))
def test_default_polynomials_are_primitive(s):
    tbl = field_table(1 << s)
    assert len(set(tbl.exp[: tbl.order])) == tbl.order


def test_non_primitive_polynomial_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but has order 5
    with pytest.raises(ValueError):
        field_table(16, 0b11111)


def test_gfq_nullspace_matches_enumeration():
    tbl = field_table(4)
    mul = lambda a, b: gfq_mul(a, b, tbl)  # noqa: E731
    rng = np.random.default_rng(3)
    for _ in range(10):
        rows = rng.integers(0, 4, size=(2, 5)).tolist()
        basis = gfq_nullspace_basis(rows, 5, tbl)
        assert len(basis) == 5 - gfq_rank(rows, tbl)
        brute = brute_kernel(rows, 5, 4, mul)
        assert len(brute) == 4 ** len(basis)


# ------------------------------------------------------------ RS codes --


def _naive_rs(q, k, msg):
    tbl = field_table(q)
    s = tbl.s
    out = []
    x = 1
    for _ in range(q - 1):
        acc, xp = 0, 1
        for c in msg:
            acc ^= clmul_mod(c, xp, tbl.poly, s)
            xp = clmul_mod(xp, x, tbl.poly, s)
        out.append(acc)
        x = clmul_mod(x, 2, tbl.poly, s)
    return tuple(out)


def test_rs_trivial_words():
    tbl = field_table(16)
    assert rs_syndrome_check(tbl, 15, 6, [0] * 15)
    assert rs_syndrome_check(tbl, 15, 6, [9] * 15)
    assert not rs_syndrome_check(tbl, 15, 6, [9] * 14 + [8])


def test_rs_flip_one_symbol(np_rng):
    tbl = field_table(16)
    for _ in range(50):
        msg = np_rng.integers(0, 16, size=6).tolist()
        word = list(rs_encode(tbl, 15, 6, msg))
        assert rs_syndrome_check(tbl, 15, 6, word)
        i = int(np_rng.integers(15))
        word[i] ^= int(np_rng.integers(1, 16))
        assert not rs_syndrome_check(tbl, 15, 6, word)


def test_rs_length_mismatch():
    with pytest.raises(ValueError):
        rs_syndrome_check(field_table(4), 3, 1, [0, 0])
    with pytest.raises(ValueError):
        rs_syndrome_check(field_table(4), 4, 1, [0, 0, 0, 0])


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_rs_accepted_set_exhaustive_gf4(k):
    tbl = field_table(4)
    accepted = {w for w in itertools.product(range(4), repeat=3) if rs_syndrome_check(tbl, 3, k, w)}
    assert len(accepted) == 4**k
    encoded = {rs_encode(tbl, 3, k, m) for m in itertools.product(range(4), repeat=k)}
    assert accepted == encoded
    assert encoded == {_naive_rs(4, k, m) for m in itertools.product(range(4), repeat=k)}
    for a, b in itertools.combinations(accepted, 2):
        assert sum(x != y for x, y in zip(a, b)) >= 3 - k + 1


def test_rs_gf16_sampled_distance(np_rng):
    tbl = field_table(16)
    for k in (2, 6, 10):
        for _ in range(200):
            m1 = tuple(np_rng.integers(0, 16, size=k).tolist())
            m2 = tuple(np_rng.integers(0, 16, size=k).tolist())
            a, b = rs_encode(tbl, 15, k, m1), rs_encode(tbl, 15, k, m2)
            assert a == _naive_rs(16, k, m1)
            if m1 != m2:
                assert sum(x != y for x, y in zip(a, b)) >= 15 - k + 1


def test_rs_gf16_accepted_count_for_small_k():
    # q^K members among all words: check via the map message -> codeword
    tbl = field_table(16)
    words = {rs_encode(tbl, 15, 2, m) for m in itertools.product(range(16), repeat=2)}
    assert len(words) == 256
    assert all(rs_syndrome_check(tbl, 15, 2, w) for w in words)


def test_rs_interpolate_and_message(np_rng):
    tbl = field_table(16)
    for _ in range(30):
        msg = np_rng.integers(0, 16, size=5).tolist()
        word = rs_encode(tbl, 15, 5, msg)
        pos = sorted(np_rng.choice(15, size=5, replace=False).tolist())
        assert rs_interpolate(tbl, 15, 5, pos, [word[p] for p in pos]) == word
        assert list(rs_message(tbl, 15, 5, word)) == msg
