"""CRC24a encoding, checking and generator matrices.

Bit order: index 0 of a message or code block is the highest-degree
coefficient, as in the LTE bit stream.
"""

from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .gf2 import BinaryMatrix, identity_perm, systematize

CRC_LENGTH = 24

# g24 ... g0 of D^24 + D^23 + D^18 + D^17 + D^14 + D^11 + D^10 + D^7 + D^6 + D^5 + D^4 + D^3 + D + 1
CRC24A_POLY = np.array(
    [int(c) for c in "1100001100100110011111011"], dtype=np.uint8
)


def _bits(values: ArrayLike, name: str) -> NDArray[np.uint8]:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D bit sequence")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1")
    return arr.astype(np.uint8)


def _remainder(reg: NDArray[np.uint8], steps: int) -> NDArray[np.uint8]:
    """Long division in place over the first `steps` positions."""
    for i in range(steps):
        if reg[i]:
            reg[i:i + CRC_LENGTH + 1] ^= CRC24A_POLY
    return reg[steps:]


def crc_encode(msg: ArrayLike) -> NDArray[np.uint8]:
    """24 parity bits: remainder of msg(D) * D^24 modulo g(D)."""
    bits = _bits(msg, "message")
    if bits.size == 0:
        raise ValueError("Cannot CRC-encode an empty message")
    reg = np.concatenate([bits, np.zeros(CRC_LENGTH, dtype=np.uint8)])
    return _remainder(reg, bits.size).copy()


def crc_attach(msg: ArrayLike) -> NDArray[np.uint8]:
    """Code block = msg followed by its CRC."""
    bits = _bits(msg, "message")
    return np.concatenate([bits, crc_encode(bits)])


def crc_check(cb: ArrayLike) -> bool:
    bits = _bits(cb, "code block")
    if bits.size < CRC_LENGTH + 1:
        raise ValueError(f"Code block needs at least {CRC_LENGTH + 1} bits, got {bits.size}")
    reg = bits.copy()
    return not _remainder(reg, bits.size - CRC_LENGTH).any()


@lru_cache(maxsize=None)
def crc_syndrome_matrix(k: int) -> BinaryMatrix:
    """k x 24 matrix S with cb passing crc_check iff cb @ S == 0 (mod 2).

    Row j is the remainder of the single-bit block e_j; used to check many
    candidate blocks at once.
    """
    if k < CRC_LENGTH + 1:
        raise ValueError(f"Code block needs at least {CRC_LENGTH + 1} bits, got {k}")
    s = np.zeros((k, CRC_LENGTH), dtype=np.uint8)
    for j in range(k):
        reg = np.zeros(k, dtype=np.uint8)
        reg[j] = 1
        s[j] = _remainder(reg, k - CRC_LENGTH)
    s.flags.writeable = False
    return s


def crc_check_many(blocks: NDArray[np.uint8]) -> NDArray[np.bool_]:
    """Vectorised crc_check over the rows of a (count x k) array."""
    s = crc_syndrome_matrix(blocks.shape[1]).astype(np.int64)
    return ~((blocks.astype(np.int64) @ s) & 1).any(axis=1)


@lru_cache(maxsize=None)
def build_crc_generators(m: int) -> tuple[BinaryMatrix, BinaryMatrix]:
    """Non-systematic banded generator and its systematic form [I_m | Q].

    Row i of the banded matrix carries the polynomial coefficients from
    column i onward, highest degree first, so each row is D^(m-1-i) g(D).
    """
    if m < 1:
        raise ValueError(f"Message length must be >= 1, got {m}")
    k = m + CRC_LENGTH
    nonsys = np.zeros((m, k), dtype=np.uint8)
    for i in range(m):
        # g24..g0 left to right: bit 0 of a code block is its highest-degree term
        nonsys[i, i:i + CRC_LENGTH + 1] = CRC24A_POLY

    systematic, perm, rank = systematize(nonsys, allow_column_swaps=False)
    if rank != m or not np.array_equal(perm, identity_perm(k)):
        raise RuntimeError(f"CRC generator elimination failed for m={m}")
    nonsys.flags.writeable = False
    systematic.flags.writeable = False
    return nonsys, systematic
