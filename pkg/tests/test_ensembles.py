import itertools
from pathlib import Path

import numpy as np
import pytest

from frameproof.ensembles import (
    Codebook,
    CodeSizeError,
    assign_linear_fingerprints,
    build_concatenated,
    codebook_from_text,
    codebook_to_text,
    concat_encode,
    encode_many,
    linear_code_from_generator,
    sample_bernoulli,
    sample_linear,
    sample_linear_codebook,
)
from frameproof.field_linalg import gf2_rank
from frameproof.keys import BernoulliParams, ConcatParams, Key, LinearParams
from frameproof.validation import validate_concatenated, validate_linear
from frameproof.vectors import SymbolVector

DATA = Path(__file__).parent / "data"


def bkey(seed, n, M, p=0.5, distinct=False):
    return Key.from_int(seed, BernoulliParams(n, M, p, distinct))


# ------------------------------------------------------------ Bernoulli --


def test_bernoulli_degenerate_bias():
    assert all(fp.packed == 0 for fp in sample_bernoulli(bkey(1, 20, 30, 0.0)))
    assert all(fp.weight() == 20 for fp in sample_bernoulli(bkey(1, 20, 30, 1.0)))


def test_bernoulli_row_weights_concentrate():
    cb = sample_bernoulli(bkey(2, 10_000, 100))
    assert all(4700 <= fp.weight() <= 5300 for fp in cb)


def test_bernoulli_overall_frequency_within_3_sigma():
    n, M, p = 500, 400, 0.3
    cb = sample_bernoulli(bkey(3, n, M, p))
    ones = sum(fp.weight() for fp in cb)
    sigma = (n * M * p * (1 - p)) ** 0.5
    assert abs(ones - n * M * p) <= 3 * sigma


def test_bernoulli_deterministic_and_seed_sensitive():
    a = sample_bernoulli(bkey(4, 64, 50))
    assert a.packed == sample_bernoulli(bkey(4, 64, 50)).packed
    assert a.packed != sample_bernoulli(bkey(5, 64, 50)).packed


def test_bernoulli_distinct_flag():
    cb = sample_bernoulli(bkey(6, 4, 16, distinct=True))
    assert not cb.has_duplicates()
    assert sorted(cb.packed) == list(range(16))
    with pytest.raises(CodeSizeError):
        sample_bernoulli(bkey(6, 4, 17, distinct=True))


def test_bernoulli_golden_file():
    key = bkey(0xC0FFEE, 24, 8, 0.5)
    text = codebook_to_text(sample_bernoulli(key), key)
    assert text == (DATA / "bernoulli_golden.txt").read_text()


# --------------------------------------------------------------- linear --


def test_linear_small_shape():
    for seed in range(20):
        code = sample_linear(Key.from_int(seed, LinearParams(4, 0.5)))
        assert code.parity.n_rows == 2
        assert code.size in {4, 8, 16}
        assert code.size == 2 ** (4 - code.rank)


def test_linear_deterministic():
    k = Key.from_int(9, LinearParams(30, 0.4))
    assert sample_linear(k).parity == sample_linear(k).parity


def test_linear_full_rank_fraction():
    full = sum(gf2_rank(sample_linear(Key.from_int(s, LinearParams(30, 0.4))).parity) == 18 for s in range(100))
    assert full >= 95


def test_linear_codewords_satisfy_checks():
    code, cb = sample_linear_codebook(Key.from_int(11, LinearParams(16, 0.5)))
    assert cb.M == 256
    assert not cb.has_duplicates()
    assert all(code.parity.syndrome(fp.packed) == 0 for fp in cb)
    assert all(validate_linear(code, fp).valid for fp in cb)


def test_assign_full_code_is_permutation():
    code = sample_linear(Key.from_int(12, LinearParams(10, 0.5)))
    cb = assign_linear_fingerprints(code, code.size, Key.from_int(12, LinearParams(10, 0.5)))
    assert sorted(cb.packed) == sorted(w.packed for w in code.codewords())


def test_assign_from_even_weight_code():
    code = linear_code_from_generator([[1, 1, 0], [0, 1, 1]])
    cb = assign_linear_fingerprints(code, 2, Key.from_int(1, LinearParams(3, 0.5)))
    assert cb[0] != cb[1]
    assert all(fp.weight() % 2 == 0 for fp in cb)


def test_assign_too_many_reports_both_numbers():
    code = linear_code_from_generator([[1, 1, 0], [0, 1, 1]])
    with pytest.raises(CodeSizeError, match=r"5.*4"):
        assign_linear_fingerprints(code, 5, Key.from_int(1, LinearParams(3, 0.5)))


def test_qary_linear_code():
    code, cb = sample_linear_codebook(Key.from_int(13, LinearParams(6, 0.5, q=4)))
    assert code.size == 4 ** (6 - code.rank)
    assert all(code.contains(fp) for fp in cb)
    assert len(set(cb.packed)) == cb.M


# --------------------------------------------------------- concatenated --


def ckey(seed, q=4, K=1, t=2, xi=0.5, m=None):
    return Key.from_int(seed, ConcatParams(q, K, t, xi, m))


def test_concat_distance_condition():
    inst = build_concatenated(ckey(1, K=1))
    assert inst.N == 3 and inst.distance == 3
    with pytest.raises(ValueError, match="distance condition"):
        build_concatenated(ckey(1, K=3))


def test_concat_inner_codebooks_distinct():
    inst = build_concatenated(ckey(2, q=16, K=6, xi=0.2))
    assert len(set(inst.inner_rows)) == inst.N
    assert all(len(set(rows)) == 16 for rows in inst.inner_rows)


def test_concat_zero_message():
    inst = build_concatenated(ckey(3, q=16, K=6, xi=0.2))
    y = concat_encode(inst, [0] * 6)
    m = inst.m
    for i in range(inst.N):
        assert (y.packed >> (i * m)) & ((1 << m) - 1) == inst.inner_rows[i][0]


def test_concat_length_and_roundtrip():
    inst = build_concatenated(ckey(4, q=16, K=6, xi=0.2))
    assert inst.n == inst.N * inst.m
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = concat_encode(inst, rng.integers(0, 16, size=6).tolist())
        assert y.n == inst.n
        assert validate_concatenated(inst, y).valid


def test_concat_distinct_messages_differ_in_many_blocks():
    inst = build_concatenated(ckey(5, q=16, K=6, xi=0.2))
    m = inst.m
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = rng.integers(0, 16, size=(2, 6)).tolist()
        if a == b:
            continue
        x, y = concat_encode(inst, a), concat_encode(inst, b)
        blocks = sum(((x.packed ^ y.packed) >> (i * m)) & ((1 << m) - 1) != 0 for i in range(inst.N))
        assert blocks >= inst.distance


def test_concat_full_codebook_small():
    inst = build_concatenated(ckey(6, q=4, K=1))
    cb = inst.codebook()
    assert cb.M == 4 and not cb.has_duplicates()


def test_encode_many_matches_scalar():
    inst = build_concatenated(ckey(7, q=16, K=6, xi=0.2))
    msgs = np.random.default_rng(2).integers(0, 16, size=(40, 6))
    blocks = encode_many(inst, msgs)
    for msg, row in zip(msgs, blocks):
        y = concat_encode(inst, msg.tolist())
        packed = sum(int(b) << (i * inst.m) for i, b in enumerate(row))
        assert packed == y.packed


# --------------------------------------------------------------- files --


@pytest.mark.parametrize(
    "key",
    [
        Key.from_int(21, BernoulliParams(13, 9, 0.3)),
        Key.from_int(22, LinearParams(12, 0.5)),
        Key.from_int(23, LinearParams(5, 0.4, q=4)),
    ],
)
def test_codebook_file_roundtrip(key):
    from frameproof.ensembles import expand_key

    code = expand_key(key)
    cb = code[1] if isinstance(code, tuple) else code
    text = codebook_to_text(cb, key)
    cb2, key2 = codebook_from_text(text)
    assert key2 == key
    assert cb2.packed == cb.packed
    assert codebook_to_text(cb2, key2) == text


def test_codebook_rejects_mixed_lengths():
    with pytest.raises(ValueError):
        Codebook((SymbolVector.parse("01"), SymbolVector.parse("011")), 2)


def test_key_file_roundtrip():
    key = Key.from_int(99, ConcatParams(16, 6, 2, 0.2))
    assert Key.from_text(key.to_text()) == key
    assert key.child(3, BernoulliParams(4, 4, 0.5)).seed != key.child(4, BernoulliParams(4, 4, 0.5)).seed


def test_exhaustive_gf4_concat_words():
    # every word whose blocks are inner codewords: exactly the q^K encodings validate
    inst = build_concatenated(ckey(8, q=4, K=1))
    enc = {concat_encode(inst, [a]).packed for a in range(4)}
    accepted = set()
    for outer in itertools.product(range(4), repeat=3):
        y = inst.blocks_to_vector(outer)
        if validate_concatenated(inst, y).valid:
            accepted.add(y.packed)
    assert accepted == enc


@pytest.mark.parametrize("n,R,q", [(20, 0.5, 2), (12, 0.5, 4), (8, 0.5, 16), (80, 0.2, 2)])
def test_batch_codewords_match_scalar(n, R, q):
    code = sample_linear(Key.from_int(31, LinearParams(n, R, q=q)))
    idx = np.random.default_rng(0).integers(0, min(code.size, 2**62), size=50).tolist() + [0, code.size - 1]
    assert code.codewords_at(idx) == [code.codeword(i) for i in idx]


def test_assign_from_huge_code():
    key = Key.from_int(32, LinearParams(300, 0.5, M=5))
    code, cb = sample_linear_codebook(key)
    assert code.size >= 2**150
    assert len(set(cb.packed)) == 5 and all(code.contains(fp) for fp in cb)
    assert cb.packed == sample_linear_codebook(key)[1].packed
