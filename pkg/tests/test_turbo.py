from fractions import Fraction

import numpy as np
import pytest

from src.crc24 import crc_attach, crc_check
from src.gf2 import vec_mul
from src.turbo import (
    QPP_TABLE,
    TAIL_BITS,
    CodeConfig,
    build_generators,
    build_parity_matrix,
    impulse_sequence,
    qpp_permutation,
    rsc_encode,
    rsc_step,
    rsc_tail,
    trellis_encode,
)


def test_rates():
    assert CodeConfig.for_size(40).rate == Fraction(4, 33)
    assert CodeConfig.for_size(96).rate == Fraction(6, 25)
    assert CodeConfig.for_size(40).n_coded == 132


def test_table_size():
    assert len(QPP_TABLE) == 188
    assert min(QPP_TABLE) == 40 and max(QPP_TABLE) == 6144


@pytest.mark.parametrize("k", [39, 41, 0, 6152])
def test_invalid_sizes(k):
    with pytest.raises(ValueError, match="not an LTE"):
        CodeConfig.for_size(k)


def test_mismatched_qpp_parameters():
    with pytest.raises(ValueError):
        qpp_permutation(CodeConfig(k=40, qpp_f1=5, qpp_f2=10))


def test_qpp_bijection_all_sizes():
    for k in QPP_TABLE:
        pi = qpp_permutation(CodeConfig.for_size(k))
        assert pi[0] == 0
        assert np.array_equal(np.sort(pi), np.arange(k))


def test_qpp_k40_values():
    pi = CodeConfig.for_size(40).interleaver
    i = np.arange(40)
    assert np.array_equal(pi, (3 * i + 10 * i * i) % 40)


@pytest.mark.parametrize("k, expected", [
    (8, [1, 1, 1, 1, 0, 0, 1, 0]),
    (1, [1]),
    (15, [1] + [1, 1, 1, 0, 0, 1, 0] * 2),
])
def test_impulse_sequence(k, expected):
    assert impulse_sequence(k).tolist() == expected


def test_parity_matrix_shift():
    p = build_parity_matrix(8)
    assert p[1].tolist() == [0, 1, 1, 1, 1, 0, 0, 1]
    assert p[0, 0] == 1
    assert not np.tril(p, -1).any()


def test_impulse_matches_trellis():
    parity, _ = rsc_encode(np.eye(8, dtype=np.uint8)[0])
    assert parity.tolist() == impulse_sequence(8).tolist()


def test_all_zero_codeword(code):
    assert not trellis_encode(np.zeros(code.k, dtype=np.uint8), code).any()
    assert len(trellis_encode(np.zeros(code.k, dtype=np.uint8))) == 3 * code.k + TAIL_BITS


def test_length_mismatch(code40):
    with pytest.raises(ValueError):
        trellis_encode(np.zeros(39, dtype=np.uint8), code40)


def test_termination_returns_to_zero(rng):
    for _ in range(20):
        _, state = rsc_encode(rng.integers(0, 2, size=40, dtype=np.uint8))
        tail_sys, tail_par = rsc_tail(state)
        for u, z in zip(tail_sys, tail_par):
            state, p = rsc_step(state, int(u))
            assert p == z
        assert state == 0


def test_generator_structure(code):
    gens = build_generators(code)
    k = code.k
    assert gens.g_turbo.shape == (k, 3 * k)
    assert gens.g_concat.shape == (code.m, 3 * k)
    assert np.array_equal(gens.g_turbo[:, :k], np.eye(k, dtype=np.uint8))
    assert all(crc_check(row[:k]) for row in gens.g_concat)


def test_generator_rows_are_impulse_responses(code40):
    g = build_generators(code40).g_turbo
    k = code40.k
    for i in range(k):
        e = np.zeros(k, dtype=np.uint8)
        e[i] = 1
        parity1, _ = rsc_encode(e)
        parity2, _ = rsc_encode(e[code40.interleaver])
        assert np.array_equal(g[i, k:2 * k], parity1)
        assert np.array_equal(g[i, 2 * k:], parity2)


def test_matrix_trellis_equivalence(rng, code):
    g = build_generators(code).g_turbo
    k = code.k
    cbs = rng.integers(0, 2, size=(200, k), dtype=np.uint8)
    for cb, row in zip(cbs, vec_mul(cbs, g)):
        assert np.array_equal(row, trellis_encode(cb, code)[:3 * k])


def test_concat_encodes_crc(rng, code):
    gens = build_generators(code)
    for msg in rng.integers(0, 2, size=(20, code.m), dtype=np.uint8):
        word = vec_mul(msg, gens.g_concat)
        cb = crc_attach(msg)
        assert np.array_equal(word[:code.k], cb)
        assert np.array_equal(word, trellis_encode(cb, code)[:3 * code.k])
