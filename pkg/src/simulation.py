"""BPSK / AWGN Monte Carlo link simulation with a brute-force ML oracle."""

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .crc24 import crc_attach
from .hybrid import MLD_SCHEME, DecodeOutcome, DecodeStatus, HybridConfig, HybridDecoder, parse_scheme
from .maxlogmap import LlrFrame, channel_llrs
from .turbo import CodeConfig, trellis_encode

ML_MAX_MESSAGE_BITS = 20
# codebooks up to this size are kept in memory as +/-1 float32 rows
ML_CACHE_LIMIT = 1 << 16
ML_CHUNK = 1 << 13


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    noise_var: float

    def __post_init__(self):
        if not self.noise_var > 0:
            raise ValueError(f"Noise variance must be positive, got {self.noise_var}")

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelParams":
        """sigma^2 = 1 / (2 R Eb/N0) with unit symbol energy."""
        return cls(ebn0_db, 1.0 / (2.0 * float(rate) * 10.0 ** (ebn0_db / 10.0)))


@dataclass(frozen=True)
class StopRule:
    max_frames: int = 1_000_000
    min_frame_errors: int = 100

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError(f"max_frames must be >= 1, got {self.max_frames}")
        if self.min_frame_errors < 1:
            raise ValueError(f"min_frame_errors must be >= 1, got {self.min_frame_errors}")


@dataclass
class SweepPoint:
    ebn0_db: float
    frames_run: int = 0
    frame_errors: int = 0
    undetected_errors: int = 0
    detected_errors: int = 0
    iterations_total: int = 0
    osd_invocations: int = 0
    seed: int = 0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames_run if self.frames_run else 0.0

    @property
    def uer(self) -> float:
        return self.undetected_errors / self.frames_run if self.frames_run else 0.0

    @property
    def mean_iterations(self) -> float:
        return self.iterations_total / self.frames_run if self.frames_run else 0.0

    def record(self, outcome: DecodeOutcome, message: NDArray[np.uint8]):
        self.frames_run += 1
        self.iterations_total += outcome.iterations_used
        self.osd_invocations += outcome.osd_invocations
        if outcome.status is DecodeStatus.DETECTED_ERROR:
            self.frame_errors += 1
            self.detected_errors += 1
        elif not np.array_equal(outcome.message, message):
            self.frame_errors += 1
            self.undetected_errors += 1

    def merge(self, other: "SweepPoint") -> "SweepPoint":
        """Sum the counts of two runs at the same Eb/N0."""
        if other.ebn0_db != self.ebn0_db:
            raise ValueError(f"Cannot merge points at {self.ebn0_db} and {other.ebn0_db} dB")
        return SweepPoint(
            ebn0_db=self.ebn0_db,
            frames_run=self.frames_run + other.frames_run,
            frame_errors=self.frame_errors + other.frame_errors,
            undetected_errors=self.undetected_errors + other.undetected_errors,
            detected_errors=self.detected_errors + other.detected_errors,
            iterations_total=self.iterations_total + other.iterations_total,
            osd_invocations=self.osd_invocations + other.osd_invocations,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fer"] = self.fer
        d["uer"] = self.uer
        d["mean_iterations"] = self.mean_iterations
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPoint":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in fields})


def modulate(bits: ArrayLike) -> NDArray[np.float64]:
    """BPSK: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def add_noise(symbols: NDArray[np.float64], noise_var: float, rng: np.random.Generator) -> NDArray[np.float64]:
    return symbols + rng.normal(0.0, np.sqrt(noise_var), size=symbols.shape)


def derive_seed(master_seed: int, index: int) -> int:
    """Per-point seed from (master seed, Eb/N0 index)."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _message_bits(indices: NDArray[np.int64], m: int) -> NDArray[np.uint8]:
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.uint8)


class MlOracle:
    """Exhaustive maximum-likelihood decoder over all 2^m messages."""

    def __init__(self, code: CodeConfig):
        if code.m > ML_MAX_MESSAGE_BITS:
            raise ValueError(f"ML enumeration needs m <= {ML_MAX_MESSAGE_BITS}, got m={code.m}")
        self.code = code
        # full 3k + 12 bit codewords are linear in the message, tails included
        self.generator = np.array(
            [trellis_encode(crc_attach(e), code) for e in np.eye(code.m, dtype=np.uint8)],
            dtype=np.int64,
        )
        self.size = 1 << code.m
        self._codebook: list[NDArray[np.float32]] | None = None

    def _chunks(self):
        for start in range(0, self.size, ML_CHUNK):
            idx = np.arange(start, min(start + ML_CHUNK, self.size), dtype=np.int64)
            words = (_message_bits(idx, self.code.m).astype(np.int64) @ self.generator) & 1
            yield (1.0 - 2.0 * words).astype(np.float32)

    def _signs(self):
        if self.size > ML_CACHE_LIMIT:
            return self._chunks()
        if self._codebook is None:
            self._codebook = list(self._chunks())
        return self._codebook

    def decode_index(self, y: ArrayLike) -> int:
        """Index of the message whose codeword maximises sum y_i s_i."""
        y = np.asarray(y, dtype=np.float64)
        if len(y) != self.code.n_coded:
            raise ValueError(f"Received length {len(y)} != {self.code.n_coded}")
        best_corr, best_idx, offset = -np.inf, 0, 0
        for signs in self._signs():
            corr = signs.astype(np.float64) @ y
            j = int(np.argmax(corr))
            if corr[j] > best_corr:
                best_corr, best_idx = float(corr[j]), offset + j
            offset += len(signs)
        return best_idx

    def decode(self, y: ArrayLike) -> NDArray[np.uint8]:
        msg = _message_bits(np.array([self.decode_index(y)]), self.code.m)[0]
        return trellis_encode(crc_attach(msg), self.code)


@lru_cache(maxsize=4)
def _oracle(code: CodeConfig) -> MlOracle:
    return MlOracle(code)


def ml_oracle(y: ArrayLike, code: CodeConfig) -> NDArray[np.uint8]:
    return _oracle(code).decode(y)


class MlDecoder:
    def __init__(self, code: CodeConfig):
        self.code = code
        self.oracle = _oracle(code)

    def decode(self, frame: LlrFrame, genie_truth: NDArray[np.uint8] | None = None) -> DecodeOutcome:
        codeword = self.oracle.decode(frame.received())
        cb = codeword[:self.code.k]
        return DecodeOutcome(
            message=cb[:self.code.m].copy(),
            status=DecodeStatus.ML_ACCEPTED,
            iterations_used=0,
            codeword=cb,
        )


def build_decoder(scheme: str | HybridConfig, code: CodeConfig, **overrides):
    if isinstance(scheme, str):
        if scheme.strip().upper() == MLD_SCHEME:
            return MlDecoder(code)
        scheme = parse_scheme(scheme, **overrides)
    return HybridDecoder(code, scheme)


def transmit(
    message: NDArray[np.uint8], code: CodeConfig, channel: ChannelParams, rng: np.random.Generator,
) -> tuple[NDArray[np.uint8], LlrFrame]:
    """CRC-attach, turbo-encode, modulate and send one message; returns (cb, frame)."""
    cb = crc_attach(message)
    y = add_noise(modulate(trellis_encode(cb, code)), channel.noise_var, rng)
    return cb, channel_llrs(y, channel.noise_var)


def run_point(
    scheme: str | HybridConfig,
    code: CodeConfig,
    ebn0_db: float,
    stop: StopRule = StopRule(),
    seed: int = 0,
    noise_var: float | None = None,
) -> SweepPoint:
    """Simulate one Eb/N0 point until min_frame_errors or max_frames.

    `noise_var` overrides the Eb/N0-derived variance (used for noiseless
    proxies).
    """
    decoder = build_decoder(scheme, code)
    if noise_var is None:
        channel = ChannelParams.from_ebn0(ebn0_db, code.rate)
    else:
        channel = ChannelParams(ebn0_db, noise_var)
    rng = np.random.default_rng(seed)

    point = SweepPoint(ebn0_db=ebn0_db, seed=seed)
    while point.frames_run < stop.max_frames and point.frame_errors < stop.min_frame_errors:
        message = rng.integers(0, 2, size=code.m, dtype=np.uint8)
        cb, frame = transmit(message, code, channel, rng)
        point.record(decoder.decode(frame, genie_truth=cb), message)
    return point

