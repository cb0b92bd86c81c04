import numpy as np
import pytest

from src.crc24 import (
    CRC24A_POLY,
    CRC_LENGTH,
    build_crc_generators,
    crc_attach,
    crc_check,
    crc_check_many,
    crc_encode,
)
from src.gf2 import vec_mul


def test_polynomial_coefficients():
    assert "".join(map(str, CRC24A_POLY)) == "1100001100100110011111011"
    assert CRC24A_POLY[0] == 1 and CRC24A_POLY[-1] == 1


@pytest.mark.parametrize("m", [1, 16, 72])
def test_zero_message(m):
    assert not crc_encode(np.zeros(m, dtype=np.uint8)).any()


def test_single_one():
    assert np.array_equal(crc_encode([1]), CRC24A_POLY[1:])


def test_empty_message_rejected():
    with pytest.raises(ValueError):
        crc_encode([])


def test_self_consistency(rng):
    for _ in range(1000):
        msg = rng.integers(0, 2, size=int(rng.integers(1, 80)), dtype=np.uint8)
        assert crc_check(crc_attach(msg))


def test_check_all_zero():
    assert crc_check(np.zeros(40, dtype=np.uint8))


def test_check_too_short():
    with pytest.raises(ValueError):
        crc_check(np.zeros(CRC_LENGTH, dtype=np.uint8))


def test_single_bit_flips_detected(rng):
    cb = crc_attach(rng.integers(0, 2, size=16, dtype=np.uint8))
    assert crc_check(cb)
    for i in range(len(cb)):
        flipped = cb.copy()
        flipped[i] ^= 1
        assert not crc_check(flipped)


def test_linearity(rng):
    for _ in range(50):
        a, b = rng.integers(0, 2, size=(2, 30), dtype=np.uint8)
        assert np.array_equal(crc_encode(a ^ b), crc_encode(a) ^ crc_encode(b))


def test_check_many_matches_check(rng):
    valid = np.array([crc_attach(m) for m in rng.integers(0, 2, size=(20, 16), dtype=np.uint8)])
    noisy = valid ^ (rng.random(valid.shape) < 0.05).astype(np.uint8)
    blocks = np.vstack([valid, noisy])
    assert np.array_equal(crc_check_many(blocks), [crc_check(b) for b in blocks])


def test_nonsys_banded_rows():
    nonsys, _ = build_crc_generators(16)
    assert nonsys.shape == (16, 40)
    assert np.array_equal(nonsys[0, :25], CRC24A_POLY)
    assert not nonsys[0, 25:].any()
    for i in range(16):
        assert np.array_equal(nonsys[i, i:i + 25], CRC24A_POLY)
        assert nonsys[i].sum() == CRC24A_POLY.sum()


def test_m1_systematic_row():
    _, systematic = build_crc_generators(1)
    assert np.array_equal(systematic[0], np.concatenate([[1], crc_encode([1])]))


def test_systematic_rows_pass_check():
    _, systematic = build_crc_generators(16)
    assert np.array_equal(systematic[:, :16], np.eye(16, dtype=np.uint8))
    assert all(crc_check(row) for row in systematic)


def test_generators_read_only():
    nonsys, systematic = build_crc_generators(16)
    with pytest.raises(ValueError):
        systematic[0, 0] = 0


@pytest.mark.parametrize("m", [16, 72])
def test_matrix_division_equivalence(rng, m):
    _, systematic = build_crc_generators(m)
    msgs = rng.integers(0, 2, size=(1000, m), dtype=np.uint8)
    encoded = vec_mul(msgs, systematic)
    for msg, row in zip(msgs, encoded):
        assert np.array_equal(row, crc_attach(msg))


def test_invalid_m():
    with pytest.raises(ValueError):
        build_crc_generators(0)
