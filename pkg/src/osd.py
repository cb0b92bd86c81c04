"""Ordered statistics decoding over a turbo or turbo-CRC generator.

Positions are sorted by reliability, the permuted generator is reduced to
systematic form on the most reliable basis (MRB), and up to order-2 flip
patterns of the basis bits are re-encoded. The candidate with the smallest
channel discrepancy wins.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import comb

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .crc24 import CRC_LENGTH, crc_check_many
from .gf2 import BinaryMatrix, ColumnPermutation, inverse_perm, systematize, vec_mul

MAX_OSD_ORDER = 2


class CrcMode(str, Enum):
    AIDED = "aided"
    FILTER = "filter"
    NONE = "none"


@dataclass
class OsdInput:
    reliabilities: NDArray[np.float64]
    hard_ref: NDArray[np.uint8]
    magnitudes: NDArray[np.float64]
    generator: BinaryMatrix

    @classmethod
    def from_received(
        cls, reliabilities: ArrayLike, received: ArrayLike, generator: BinaryMatrix,
    ) -> "OsdInput":
        """Hard reference and magnitudes from channel samples y (first 3k used)."""
        n = generator.shape[1]
        y = np.asarray(received, dtype=np.float64)[:n]
        return cls(
            reliabilities=np.asarray(reliabilities, dtype=np.float64)[:n],
            hard_ref=(y < 0).astype(np.uint8),
            magnitudes=np.abs(y),
            generator=generator,
        )


@dataclass
class OsdResult:
    best_codeword: NDArray[np.uint8]
    best_distance: float
    ned: float
    candidates_evaluated: int
    crc_filtered_empty: bool = False


def candidate_count(rows: int, order: int) -> int:
    """Phi(N): number of flip patterns of weight <= order over `rows` basis bits."""
    return sum(comb(rows, i) for i in range(order + 1))


def sort_by_reliability(reliabilities: ArrayLike) -> ColumnPermutation:
    """Positions by |R| descending, lower index first on ties."""
    r = np.abs(np.asarray(reliabilities, dtype=np.float64))
    return np.argsort(-r, kind="stable").astype(np.intp)


def build_mrb(generator: BinaryMatrix, perm: ColumnPermutation) -> tuple[BinaryMatrix, ColumnPermutation]:
    """Systematic generator on the permuted columns and the composed permutation."""
    gsys, swaps, rank = systematize(generator[:, perm])
    if rank < generator.shape[0]:
        raise RuntimeError(f"Generator is rank deficient ({rank} < {generator.shape[0]})")
    return gsys, perm[swaps]


def flip_patterns(rows: int, order: int) -> Iterator[tuple[int, ...]]:
    """Order-0, then single flips ascending, then pairs lexicographically."""
    if not 0 <= order <= MAX_OSD_ORDER:
        raise ValueError(f"OSD order must be in 0..{MAX_OSD_ORDER}, got {order}")
    for w in range(order + 1):
        yield from combinations(range(rows), w)


def reencode_order_n(
    gsys_permuted: BinaryMatrix,
    basis_bits: ArrayLike,
    order: int,
    effective_perm: ColumnPermutation,
) -> Iterator[NDArray[np.uint8]]:
    """Stream candidate codewords in natural order, one per flip pattern."""
    inv = inverse_perm(effective_perm)
    base = np.asarray(basis_bits, dtype=np.uint8).copy()
    for pattern in flip_patterns(gsys_permuted.shape[0], order):
        bits = base.copy()
        bits[list(pattern)] ^= 1
        yield vec_mul(bits, gsys_permuted)[inv]


def discrepancy(candidate: ArrayLike, osd_input: OsdInput) -> float:
    """Sum of |y_i| over positions where the candidate disagrees with z."""
    c = np.asarray(candidate, dtype=np.uint8)
    if c.shape != osd_input.hard_ref.shape:
        raise ValueError(f"Candidate length {c.size} != {osd_input.hard_ref.size}")
    return float(osd_input.magnitudes[c != osd_input.hard_ref].sum())


def ned(d_star: float, magnitudes: ArrayLike) -> float:
    """Normalised Euclidean distance d* / sum |y_i|."""
    total = float(np.sum(magnitudes))
    if total <= 0:
        raise ValueError("NED undefined: all channel magnitudes are zero")
    return d_star / total


def _check_generator(osd_input: OsdInput, crc_mode: CrcMode) -> int:
    rows, n = osd_input.generator.shape
    if n % 3:
        raise ValueError(f"Generator width {n} is not 3k")
    k = n // 3
    expected = k - CRC_LENGTH if crc_mode is CrcMode.AIDED else k
    if rows != expected:
        raise ValueError(f"crc_mode={crc_mode.value} needs a {expected}x{n} generator, got {rows}x{n}")
    if not (len(osd_input.reliabilities) == len(osd_input.hard_ref) == len(osd_input.magnitudes) == n):
        raise ValueError("OSD input vectors must all have length 3k")
    return k


def _chunks(diff0: NDArray[np.uint8], gsys: BinaryMatrix, order: int) -> Iterator[NDArray[np.uint8]]:
    """Disagreement patterns (candidate XOR z, permuted domain) in generation order."""
    yield diff0[None, :]
    if order >= 1:
        single = diff0 ^ gsys
        yield single
        if order >= 2:
            for i in range(gsys.shape[0] - 1):
                yield single[i] ^ gsys[i + 1:]


def osd_decode(osd_input: OsdInput, order: int, crc_mode: CrcMode | str = CrcMode.AIDED) -> OsdResult:
    crc_mode = CrcMode(crc_mode)
    if not 0 <= order <= MAX_OSD_ORDER:
        raise ValueError(f"OSD order must be in 0..{MAX_OSD_ORDER}, got {order}")
    k = _check_generator(osd_input, crc_mode)
    g = osd_input.generator

    gsys, eff = build_mrb(g, sort_by_reliability(osd_input.reliabilities))
    rows = g.shape[0]
    basis_bits = (osd_input.reliabilities[eff[:rows]] < 0).astype(np.uint8)
    z = osd_input.hard_ref[eff]
    mag = osd_input.magnitudes[eff]
    inv = inverse_perm(eff)
    # natural positions 0..k-1 as seen in the permuted domain
    block_cols = inv[:k]

    diff0 = vec_mul(basis_bits, gsys) ^ z
    best = (np.inf, None)
    best_pass = (np.inf, None)
    evaluated = 0
    for diffs in _chunks(diff0, gsys, order):
        dist = diffs.astype(np.float64) @ mag
        evaluated += len(diffs)
        j = int(np.argmin(dist))
        if dist[j] < best[0]:
            best = (float(dist[j]), diffs[j])
        if crc_mode is CrcMode.FILTER:
            ok = crc_check_many((diffs ^ z)[:, block_cols])
            if ok.any():
                masked = np.where(ok, dist, np.inf)
                j = int(np.argmin(masked))
                if masked[j] < best_pass[0]:
                    best_pass = (float(masked[j]), diffs[j])

    filtered_empty = False
    if crc_mode is CrcMode.FILTER:
        if best_pass[1] is None:
            filtered_empty = True
        else:
            best = best_pass

    d_star, diff = best
    codeword = (diff ^ z)[inv]
    return OsdResult(
        best_codeword=codeword,
        best_distance=d_star,
        ned=ned(d_star, osd_input.magnitudes),
        candidates_evaluated=evaluated,
        crc_filtered_empty=filtered_empty,
    )
