"""Standard turbo decoding: two Max-Log-MAP constituent decoders exchanging
scaled extrinsic LLRs, with a posteriori LLRs for systematic and parity bits.

LLR convention: L > 0 means bit 0.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .crc24 import crc_check
from .turbo import NEXT_STATE, NUM_STATES, PARITY, TAIL_BITS, TAIL_INPUT, CodeConfig

DEFAULT_MAX_ITERS = 8
DEFAULT_EXTRINSIC_SCALE = 0.75

_NEG = -np.inf
_INPUT_SIGN = np.array([1.0, -1.0])
_PARITY_SIGN = 1.0 - 2.0 * PARITY.astype(np.float64)
_TAIL_NEXT = NEXT_STATE[np.arange(NUM_STATES), TAIL_INPUT]
_TAIL_SYS_SIGN = 1.0 - 2.0 * TAIL_INPUT.astype(np.float64)
_TAIL_PAR_SIGN = 1.0 - 2.0 * PARITY[np.arange(NUM_STATES), TAIL_INPUT].astype(np.float64)


def _predecessors() -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    prev_state = np.zeros((NUM_STATES, 2), dtype=np.intp)
    prev_input = np.zeros((NUM_STATES, 2), dtype=np.intp)
    filled = np.zeros(NUM_STATES, dtype=np.intp)
    for s in range(NUM_STATES):
        for u in (0, 1):
            ns = NEXT_STATE[s, u]
            prev_state[ns, filled[ns]] = s
            prev_input[ns, filled[ns]] = u
            filled[ns] += 1
    return prev_state, prev_input


_PREV_STATE, _PREV_INPUT = _predecessors()


@dataclass
class LlrFrame:
    sys: NDArray[np.float64]
    par1: NDArray[np.float64]
    par2: NDArray[np.float64]
    tails: NDArray[np.float64]
    noise_var: float

    @property
    def k(self) -> int:
        return len(self.sys)

    @property
    def channel(self) -> NDArray[np.float64]:
        """The 3k matrix-encodable LLRs in sys, par1, par2 order."""
        return np.concatenate([self.sys, self.par1, self.par2])

    def received(self) -> NDArray[np.float64]:
        """Channel samples y recovered from the LLRs (all 3k + 12)."""
        return np.concatenate([self.channel, self.tails]) * (self.noise_var / 2.0)


@dataclass
class IterationOutput:
    full_llrs: NDArray[np.float64]
    hard_cb: NDArray[np.uint8]
    crc_pass: bool
    iteration: int


@dataclass
class DecoderState:
    """A priori input of decoder 1, i.e. the scaled, de-interleaved extrinsic of decoder 2."""
    apriori: NDArray[np.float64]
    iteration: int = 0

    @classmethod
    def fresh(cls, k: int) -> "DecoderState":
        return cls(apriori=np.zeros(k))


def channel_llrs(y: ArrayLike, noise_var: float) -> LlrFrame:
    """BPSK (0 -> +1) channel LLRs 2y/sigma^2, split into the decoder streams."""
    if noise_var <= 0:
        raise ValueError(f"Noise variance must be positive, got {noise_var}")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or (len(y) - TAIL_BITS) % 3 or len(y) <= TAIL_BITS:
        raise ValueError(f"Received length {len(y)} is not 3k + {TAIL_BITS}")
    if not np.isfinite(y).all():
        raise ValueError("Received samples must be finite")
    k = (len(y) - TAIL_BITS) // 3
    llr = 2.0 * y / noise_var
    return LlrFrame(
        sys=llr[:k],
        par1=llr[k:2 * k],
        par2=llr[2 * k:3 * k],
        tails=llr[3 * k:],
        noise_var=float(noise_var),
    )


def component_decode(
    sys_llr: NDArray[np.float64],
    par_llr: NDArray[np.float64],
    apriori: NDArray[np.float64],
    tails: NDArray[np.float64] | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Max-Log-MAP over the 8-state RSC trellis.

    `tails` holds the six tail LLRs (x, z interleaved) of this constituent
    encoder; they fix the end of the trellis to state 0. Without them the
    trellis end is left open.

    Returns (extrinsic, sys_full, par_full).
    """
    k = len(sys_llr)
    gamma = 0.5 * (
        (sys_llr + apriori)[:, None, None] * _INPUT_SIGN[None, None, :]
        + par_llr[:, None, None] * _PARITY_SIGN[None, :, :]
    )

    alpha = np.full((k + 1, NUM_STATES), _NEG)
    alpha[0, 0] = 0.0
    for i in range(k):
        cand = alpha[i, _PREV_STATE] + gamma[i, _PREV_STATE, _PREV_INPUT]
        a = cand.max(axis=1)
        alpha[i + 1] = a - a.max()

    beta = np.full((k + 1, NUM_STATES), _NEG)
    if tails is None:
        beta[k] = 0.0
    else:
        end = np.full(NUM_STATES, _NEG)
        end[0] = 0.0
        for t in (2, 1, 0):
            g = 0.5 * (tails[2 * t] * _TAIL_SYS_SIGN + tails[2 * t + 1] * _TAIL_PAR_SIGN)
            end = g + end[_TAIL_NEXT]
        beta[k] = end - end.max()
    for i in range(k - 1, -1, -1):
        b = (gamma[i] + beta[i + 1, NEXT_STATE]).max(axis=1)
        beta[i] = b - b.max()

    metric = alpha[:-1, :, None] + gamma + beta[1:][:, NEXT_STATE]
    sys_full = metric[:, :, 0].max(axis=1) - metric[:, :, 1].max(axis=1)
    par_zero = np.where(PARITY == 0, metric, _NEG).max(axis=(1, 2))
    par_one = np.where(PARITY == 1, metric, _NEG).max(axis=(1, 2))
    par_full = par_zero - par_one
    extrinsic = sys_full - sys_llr - apriori
    return extrinsic, sys_full, par_full


def hard_decision(llrs: NDArray[np.float64]) -> NDArray[np.uint8]:
    return (llrs < 0).astype(np.uint8)


@dataclass
class TurboDecoder:
    code: CodeConfig
    extrinsic_scale: float = DEFAULT_EXTRINSIC_SCALE
    _pi: NDArray[np.intp] = field(init=False, repr=False)

    def __post_init__(self):
        self._pi = self.code.interleaver

    def iterate(self, frame: LlrFrame, state: DecoderState) -> IterationOutput:
        """One full iteration: decoder 1, interleave, decoder 2, de-interleave."""
        k = self.code.k
        if frame.k != k:
            raise ValueError(f"Frame has k={frame.k}, decoder expects k={k}")
        pi = self._pi

        ext1, _, par1_full = component_decode(frame.sys, frame.par1, state.apriori, frame.tails[:6])
        apriori2 = self.extrinsic_scale * ext1[pi]
        ext2, sys2, par2_full = component_decode(frame.sys[pi], frame.par2, apriori2, frame.tails[6:])

        state.apriori = np.empty(k)
        state.apriori[pi] = self.extrinsic_scale * ext2
        state.iteration += 1

        sys_full = np.empty(k)
        sys_full[pi] = sys2
        hard = hard_decision(sys_full)
        return IterationOutput(
            full_llrs=np.concatenate([sys_full, par1_full, par2_full]),
            hard_cb=hard,
            crc_pass=crc_check(hard),
            iteration=state.iteration,
        )

    def iterations(self, frame: LlrFrame, t_max: int = DEFAULT_MAX_ITERS) -> Iterator[IterationOutput]:
        """Yield iteration outputs until the CRC passes or t_max is reached."""
        if t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {t_max}")
        state = DecoderState.fresh(self.code.k)
        for _ in range(t_max):
            out = self.iterate(frame, state)
            yield out
            if out.crc_pass:
                return

    def decode(
        self, frame: LlrFrame, t_max: int = DEFAULT_MAX_ITERS,
    ) -> tuple[IterationOutput, list[IterationOutput]]:
        per_iteration = list(self.iterations(frame, t_max))
        return per_iteration[-1], per_iteration


def std_iterate(
    frame: LlrFrame,
    state: DecoderState,
    code: CodeConfig,
    extrinsic_scale: float = DEFAULT_EXTRINSIC_SCALE,
) -> IterationOutput:
    return TurboDecoder(code, extrinsic_scale).iterate(frame, state)


def std_decode(
    frame: LlrFrame,
    code: CodeConfig,
    t_max: int = DEFAULT_MAX_ITERS,
    extrinsic_scale: float = DEFAULT_EXTRINSIC_SCALE,
) -> tuple[IterationOutput, list[IterationOutput]]:
    return TurboDecoder(code, extrinsic_scale).decode(frame, t_max)
