"""LTE turbo code construction: QPP interleaver, RSC trellis encoder with
termination, and the generator matrices built from the impulse sequence."""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .crc24 import CRC_LENGTH, build_crc_generators
from .gf2 import BinaryMatrix, mat_mul

TAIL_BITS = 12
NUM_STATES = 8

# Code block size -> (f1, f2)
QPP_TABLE: dict[int, tuple[int, int]] = {
    40: (3, 10), 48: (7, 12), 56: (19, 42), 64: (7, 16), 72: (7, 18), 80: (11, 20),
    88: (5, 22), 96: (11, 24), 104: (7, 26), 112: (41, 84), 120: (103, 90), 128: (15, 32),
    136: (9, 34), 144: (17, 108), 152: (9, 38), 160: (21, 120), 168: (101, 84), 176: (21, 44),
    184: (57, 46), 192: (23, 48), 200: (13, 50), 208: (27, 52), 216: (11, 36), 224: (27, 56),
    232: (85, 58), 240: (29, 60), 248: (33, 62), 256: (15, 32), 264: (17, 198), 272: (33, 68),
    280: (103, 210), 288: (19, 36), 296: (19, 74), 304: (37, 76), 312: (19, 78), 320: (21, 120),
    328: (21, 82), 336: (115, 84), 344: (193, 86), 352: (21, 44), 360: (133, 90), 368: (81, 46),
    376: (45, 94), 384: (23, 48), 392: (243, 98), 400: (151, 40), 408: (155, 102), 416: (25, 52),
    424: (51, 106), 432: (47, 72), 440: (91, 110), 448: (29, 168), 456: (29, 114), 464: (247, 58),
    472: (29, 118), 480: (89, 180), 488: (91, 122), 496: (157, 62), 504: (55, 84), 512: (31, 64),
    528: (17, 66), 544: (35, 68), 560: (227, 420), 576: (65, 96), 592: (19, 74), 608: (37, 76),
    624: (41, 234), 640: (39, 80), 656: (185, 82), 672: (43, 252), 688: (21, 86), 704: (155, 44),
    720: (79, 120), 736: (139, 92), 752: (23, 94), 768: (217, 48), 784: (25, 98), 800: (17, 80),
    816: (127, 102), 832: (25, 52), 848: (239, 106), 864: (17, 48), 880: (137, 110), 896: (215, 112),
    912: (29, 114), 928: (15, 58), 944: (147, 118), 960: (29, 60), 976: (59, 122), 992: (65, 124),
    1008: (55, 84), 1024: (31, 64), 1056: (17, 66), 1088: (171, 204), 1120: (67, 140), 1152: (35, 72),
    1184: (19, 74), 1216: (39, 76), 1248: (19, 78), 1280: (199, 240), 1312: (21, 82), 1344: (211, 252),
    1376: (21, 86), 1408: (43, 88), 1440: (149, 60), 1472: (45, 92), 1504: (49, 846), 1536: (71, 48),
    1568: (13, 28), 1600: (17, 80), 1632: (25, 102), 1664: (183, 104), 1696: (55, 954), 1728: (127, 96),
    1760: (27, 110), 1792: (29, 112), 1824: (29, 114), 1856: (57, 116), 1888: (45, 354), 1920: (31, 120),
    1952: (59, 610), 1984: (185, 124), 2016: (113, 420), 2048: (31, 64), 2112: (17, 66), 2176: (171, 136),
    2240: (209, 420), 2304: (253, 216), 2368: (367, 444), 2432: (265, 456), 2496: (181, 468), 2560: (39, 80),
    2624: (27, 164), 2688: (127, 504), 2752: (143, 172), 2816: (43, 88), 2880: (29, 300), 2944: (45, 92),
    3008: (157, 188), 3072: (47, 96), 3136: (13, 28), 3200: (111, 240), 3264: (443, 204), 3328: (51, 104),
    3392: (51, 212), 3456: (451, 192), 3520: (257, 220), 3584: (57, 336), 3648: (313, 228), 3712: (271, 232),
    3776: (179, 236), 3840: (331, 120), 3904: (363, 244), 3968: (375, 248), 4032: (127, 168), 4096: (31, 64),
    4160: (33, 130), 4224: (43, 264), 4288: (33, 134), 4352: (477, 408), 4416: (35, 138), 4480: (233, 280),
    4544: (357, 142), 4608: (337, 480), 4672: (37, 146), 4736: (71, 444), 4800: (71, 120), 4864: (37, 152),
    4928: (39, 462), 4992: (127, 234), 5056: (39, 158), 5120: (39, 80), 5184: (31, 96), 5248: (113, 902),
    5312: (41, 166), 5376: (251, 336), 5440: (43, 170), 5504: (21, 86), 5568: (43, 174), 5632: (45, 176),
    5696: (45, 178), 5760: (161, 120), 5824: (89, 182), 5888: (323, 184), 5952: (47, 186), 6016: (23, 94),
    6080: (47, 190), 6144: (263, 480)
}

# Period of the parity impulse response 1 + D + D^3 over 1 + D^2 + D^3, after its leading 1.
IMPULSE_PERIOD = np.array([1, 1, 1, 0, 0, 1, 0], dtype=np.uint8)


def rsc_step(state: int, u: int) -> tuple[int, int]:
    """One RSC transition; state bit 0 is the newest register. Returns (next, parity)."""
    s1 = state & 1
    s2 = (state >> 1) & 1
    s3 = (state >> 2) & 1
    r = u ^ s2 ^ s3
    p = r ^ s1 ^ s3
    return (s2 << 2) | (s1 << 1) | r, p


def _trellis_tables() -> tuple[NDArray[np.intp], NDArray[np.uint8], NDArray[np.uint8]]:
    next_state = np.zeros((NUM_STATES, 2), dtype=np.intp)
    parity = np.zeros((NUM_STATES, 2), dtype=np.uint8)
    for s in range(NUM_STATES):
        for u in (0, 1):
            next_state[s, u], parity[s, u] = rsc_step(s, u)
    # input that zeroes the feedback, driving the register towards state 0
    tail_input = np.array([((s >> 1) ^ (s >> 2)) & 1 for s in range(NUM_STATES)], dtype=np.uint8)
    return next_state, parity, tail_input


NEXT_STATE, PARITY, TAIL_INPUT = _trellis_tables()


@dataclass(frozen=True)
class CodeConfig:
    k: int
    qpp_f1: int
    qpp_f2: int

    def __post_init__(self):
        if self.k not in QPP_TABLE:
            raise ValueError(f"k={self.k} is not an LTE turbo code block size")

    @classmethod
    def for_size(cls, k: int) -> "CodeConfig":
        if k not in QPP_TABLE:
            raise ValueError(f"k={k} is not an LTE turbo code block size")
        f1, f2 = QPP_TABLE[k]
        return cls(k=k, qpp_f1=f1, qpp_f2=f2)

    @property
    def m(self) -> int:
        return self.k - CRC_LENGTH

    @property
    def n_coded(self) -> int:
        return 3 * self.k + TAIL_BITS

    @property
    def rate(self) -> Fraction:
        return Fraction(self.m, self.n_coded)

    @cached_property
    def interleaver(self) -> NDArray[np.intp]:
        return qpp_permutation(self)


@dataclass(frozen=True)
class TurboGenerator:
    g_turbo: BinaryMatrix
    g_concat: BinaryMatrix


def qpp_permutation(cfg: CodeConfig) -> NDArray[np.intp]:
    """pi(i) = (f1 i + f2 i^2) mod k; the interleaved stream is cb[pi]."""
    if QPP_TABLE.get(cfg.k) != (cfg.qpp_f1, cfg.qpp_f2):
        raise ValueError(f"QPP parameters for k={cfg.k} do not match the LTE table")
    i = np.arange(cfg.k, dtype=np.int64)
    pi = (cfg.qpp_f1 * i + cfg.qpp_f2 * i * i) % cfg.k
    return pi.astype(np.intp)


def impulse_sequence(k: int) -> NDArray[np.uint8]:
    """First k terms of A = {1, a, a, a, ...}: the parity response to e_0."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    reps = -(-(k - 1) // len(IMPULSE_PERIOD))
    seq = np.concatenate([[1], np.tile(IMPULSE_PERIOD, reps)]).astype(np.uint8)
    return seq[:k]


def build_parity_matrix(k: int) -> BinaryMatrix:
    """P_k with row i = p_i, the impulse sequence delayed by i positions."""
    p0 = impulse_sequence(k)
    p = np.zeros((k, k), dtype=np.uint8)
    for i in range(k):
        p[i, i:] = p0[:k - i]
    return p


@lru_cache(maxsize=32)
def build_generators(cfg: CodeConfig) -> TurboGenerator:
    """G_turbo = [I_k | P_k | P~_k] and G = G_crc_sys x G_turbo."""
    k = cfg.k
    p = build_parity_matrix(k)
    # parity-2 step j sees cb[pi[j]], so input bit pi[j] drives response row j
    p_tilde = np.empty_like(p)
    p_tilde[cfg.interleaver] = p
    g_turbo = np.hstack([np.eye(k, dtype=np.uint8), p, p_tilde])
    _, crc_sys = build_crc_generators(cfg.m)
    g_concat = mat_mul(crc_sys, g_turbo)
    g_turbo.flags.writeable = False
    g_concat.flags.writeable = False
    return TurboGenerator(g_turbo=g_turbo, g_concat=g_concat)


def rsc_encode(bits: ArrayLike, state: int = 0) -> tuple[NDArray[np.uint8], int]:
    parity = np.zeros(len(bits), dtype=np.uint8)
    for i, u in enumerate(np.asarray(bits, dtype=np.uint8)):
        state, parity[i] = rsc_step(state, int(u))
    return parity, state


def rsc_tail(state: int) -> tuple[NDArray[np.uint8], NDArray[np.uint8]]:
    """Three termination steps from `state`; returns (systematic, parity) tail bits."""
    tail_sys = np.zeros(3, dtype=np.uint8)
    tail_par = np.zeros(3, dtype=np.uint8)
    for t in range(3):
        u = int(TAIL_INPUT[state])
        tail_sys[t] = u
        state, tail_par[t] = rsc_step(state, u)
    return tail_sys, tail_par


def trellis_encode(cb: ArrayLike, cfg: CodeConfig | None = None) -> NDArray[np.uint8]:
    """Encode a code block to sys | par1 | par2 | 12 tail bits.

    Tail layout: x_K z_K x_K+1 z_K+1 x_K+2 z_K+2 for encoder 1, then the same
    six for encoder 2.
    """
    bits = np.asarray(cb)
    if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
        raise ValueError("Code block must be a 1-D 0/1 sequence")
    bits = bits.astype(np.uint8)
    if cfg is None:
        cfg = CodeConfig.for_size(len(bits))
    if len(bits) != cfg.k:
        raise ValueError(f"Code block has {len(bits)} bits, expected k={cfg.k}")

    par1, state1 = rsc_encode(bits)
    par2, state2 = rsc_encode(bits[cfg.interleaver])
    tails = []
    for state in (state1, state2):
        tail_sys, tail_par = rsc_tail(state)
        tails.append(np.column_stack([tail_sys, tail_par]).ravel())
    return np.concatenate([bits, par1, par2, *tails]).astype(np.uint8)
