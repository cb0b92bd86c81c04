"""Hybrid STD + OSD(N, f, alpha) scheduling, LLR accumulation and the final
accept / detect decision, plus the scheme naming used on the command line."""

import re
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .crc24 import crc_check
from .maxlogmap import DEFAULT_EXTRINSIC_SCALE, DEFAULT_MAX_ITERS, LlrFrame, TurboDecoder
from .osd import MAX_OSD_ORDER, CrcMode, OsdInput, OsdResult, osd_decode
from .turbo import CodeConfig, build_generators

# NED threshold per code block size; other sizes use the fallback
DEFAULT_ETA = {40: 0.2, 96: 0.15}
FALLBACK_ETA = 0.15


class Detection(str, Enum):
    CRC = "crc"
    NED = "ned"
    GENIE = "genie"


class DecodeStatus(str, Enum):
    STD_SUCCESS = "std_success"
    OSD_ACCEPTED = "osd_accepted"
    ML_ACCEPTED = "ml_accepted"
    DETECTED_ERROR = "detected_error"


def default_eta(k: int) -> float:
    return DEFAULT_ETA.get(k, FALLBACK_ETA)


@dataclass(frozen=True)
class HybridConfig:
    """osd_order None means plain STD. eta None means the per-k default."""
    osd_order: int | None = None
    start_iteration: int = 1
    accum_alpha: float = 0.0
    t_max: int = DEFAULT_MAX_ITERS
    eta: float | None = None
    crc_mode: CrcMode = CrcMode.FILTER
    detection: Detection = Detection.CRC
    extrinsic_scale: float = DEFAULT_EXTRINSIC_SCALE

    def __post_init__(self):
        object.__setattr__(self, "crc_mode", CrcMode(self.crc_mode))
        object.__setattr__(self, "detection", Detection(self.detection))
        if self.t_max < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.t_max}")
        if self.extrinsic_scale <= 0:
            raise ValueError(f"extrinsic_scale must be positive, got {self.extrinsic_scale}")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if self.osd_order is None:
            if self.detection is not Detection.CRC or self.crc_mode is not CrcMode.FILTER:
                raise ValueError("STD without OSD only supports CRC detection")
            return
        if not 0 <= self.osd_order <= MAX_OSD_ORDER:
            raise ValueError(f"osd_order must be in 0..{MAX_OSD_ORDER}, got {self.osd_order}")
        if not 1 <= self.start_iteration <= self.t_max:
            raise ValueError(f"osd_start_iter must be in 1..{self.t_max}, got {self.start_iteration}")
        if self.accum_alpha < 0:
            raise ValueError(f"accum_alpha must be >= 0, got {self.accum_alpha}")
        if self.crc_mode is CrcMode.NONE:
            raise ValueError("crc_mode must be aided or filter")
        if self.detection is Detection.CRC and self.crc_mode is not CrcMode.FILTER:
            raise ValueError("CRC detection needs crc_mode=filter; CRC-aided OSD consumes the CRC bits")

    @property
    def uses_osd(self) -> bool:
        return self.osd_order is not None

    def resolved_eta(self, k: int) -> float:
        return default_eta(k) if self.eta is None else self.eta


@dataclass
class DecodeOutcome:
    message: NDArray[np.uint8]
    status: DecodeStatus
    iterations_used: int
    ned_value: float | None = None
    best_distance: float | None = None
    codeword: NDArray[np.uint8] | None = None
    osd_invocations: int = 0
    crc_filtered_empty: bool = False

    @property
    def accepted(self) -> bool:
        return self.status is not DecodeStatus.DETECTED_ERROR


def accumulate(current: NDArray[np.float64], previous_acc: NDArray[np.float64], alpha: float) -> NDArray[np.float64]:
    """R^t = L^t + alpha R^(t-1)."""
    return current + alpha * previous_acc


def detect_ned(ned_value: float, eta: float) -> bool:
    """True when the frame is accepted (NED not above eta)."""
    return not ned_value > eta


def _better(candidate: OsdResult, best: OsdResult | None) -> bool:
    if best is None:
        return True
    # CRC-passing results rank ahead of unfiltered fallbacks
    return (candidate.crc_filtered_empty, candidate.best_distance) < (best.crc_filtered_empty, best.best_distance)


@dataclass
class HybridDecoder:
    code: CodeConfig
    config: HybridConfig = field(default_factory=HybridConfig)

    def __post_init__(self):
        self.turbo = TurboDecoder(self.code, self.config.extrinsic_scale)
        gens = build_generators(self.code)
        self.generator = gens.g_concat if self.config.crc_mode is CrcMode.AIDED else gens.g_turbo
        self.eta = self.config.resolved_eta(self.code.k)

    def decode(self, frame: LlrFrame, genie_truth: NDArray[np.uint8] | None = None) -> DecodeOutcome:
        cfg = self.config
        if cfg.uses_osd and cfg.detection is Detection.GENIE and genie_truth is None:
            raise ValueError("Genie detection needs the transmitted code block")
        k, m = self.code.k, self.code.m

        received = frame.received() if cfg.uses_osd else None
        acc = np.zeros(3 * k)
        best: OsdResult | None = None
        osd_runs = 0
        last = None
        for it in self.turbo.iterations(frame, cfg.t_max):
            last = it
            if it.crc_pass:
                return DecodeOutcome(
                    message=it.hard_cb[:m].copy(),
                    status=DecodeStatus.STD_SUCCESS,
                    iterations_used=it.iteration,
                    codeword=it.hard_cb,
                    osd_invocations=osd_runs,
                )
            acc = accumulate(it.full_llrs, acc, cfg.accum_alpha)
            if cfg.uses_osd and it.iteration >= cfg.start_iteration:
                result = osd_decode(
                    OsdInput.from_received(acc, received, self.generator),
                    cfg.osd_order,
                    cfg.crc_mode,
                )
                osd_runs += 1
                if _better(result, best):
                    best = result

        if best is None:
            return DecodeOutcome(
                message=last.hard_cb[:m].copy(),
                status=DecodeStatus.DETECTED_ERROR,
                iterations_used=last.iteration,
                codeword=last.hard_cb,
            )

        cb = best.best_codeword[:k].copy()
        if cfg.detection is Detection.NED:
            rejected = not detect_ned(best.ned, self.eta)
        elif cfg.detection is Detection.CRC:
            rejected = best.crc_filtered_empty or not crc_check(cb)
        else:
            rejected = not np.array_equal(cb, genie_truth)
        return DecodeOutcome(
            message=cb[:m].copy(),
            status=DecodeStatus.DETECTED_ERROR if rejected else DecodeStatus.OSD_ACCEPTED,
            iterations_used=last.iteration,
            ned_value=best.ned,
            best_distance=best.best_distance,
            codeword=cb,
            osd_invocations=osd_runs,
            crc_filtered_empty=best.crc_filtered_empty,
        )


def hybrid_decode(
    frame: LlrFrame,
    code: CodeConfig,
    config: HybridConfig,
    genie_truth: NDArray[np.uint8] | None = None,
) -> DecodeOutcome:
    return HybridDecoder(code, config).decode(frame, genie_truth)


# --- scheme names -----------------------------------------------------------

MLD_SCHEME = "MLD"

_OSD_RE = re.compile(r"^OSD\((\d+),(\d+|T),(\d+(?:\.\d+)?)\)$", re.IGNORECASE)
_NED_RE = re.compile(r"^NED\((\d*\.?\d+)\)$", re.IGNORECASE)
# decoder settings that are only named when they differ from the defaults
_ITERS_RE = re.compile(r"^T\((\d+)\)$", re.IGNORECASE)
_SCALE_RE = re.compile(r"^SCALE\((\d*\.?\d+)\)$", re.IGNORECASE)

# Canonical names of the commonly compared schemes
NAMED_SCHEMES = [
    "STD",
    "STD+OSD(2,1,0)",
    "STD+OSD(2,1,0)+CRC-aided",
    "STD+OSD(2,T,0)+CRC-aided",
    "STD+OSD(1,T,0)+CRC-aided",
    "STD+OSD(2,1,0)+CRC-aided+NED(0.2)",
    "STD+OSD(2,1,0)+CRC-aided+Genie",
    "STD+OSD(1,T,1)+CRC-aided+NED(0.15)",
    "STD+OSD(1,T,1)+CRC-aided+Genie",
    "MLD",
]


def _fmt_number(x: float) -> str:
    return f"{x:g}"


def scheme_name(config: HybridConfig) -> str:
    """Canonical name; parse_scheme(scheme_name(c)) == c.

    A non-default iteration count or extrinsic scaling is appended as
    '+T(n)' / '+scale(c)', so two different decoders never share a name.
    """
    parts = ["STD"]
    if config.uses_osd:
        f = "T" if config.start_iteration == config.t_max else str(config.start_iteration)
        parts.append(f"OSD({config.osd_order},{f},{_fmt_number(config.accum_alpha)})")
        aided = config.crc_mode is CrcMode.AIDED
        if aided:
            parts.append("CRC-aided")
        if config.detection is Detection.GENIE:
            parts.append("Genie")
        elif config.detection is Detection.NED:
            if config.eta is not None:
                parts.append(f"NED({_fmt_number(config.eta)})")
            elif not aided:
                parts.append("NED")
    if config.t_max != DEFAULT_MAX_ITERS:
        parts.append(f"T({config.t_max})")
    if config.extrinsic_scale != DEFAULT_EXTRINSIC_SCALE:
        parts.append(f"scale({_fmt_number(config.extrinsic_scale)})")
    return "+".join(parts)


def parse_scheme(
    name: str,
    t_max: int = DEFAULT_MAX_ITERS,
    extrinsic_scale: float = DEFAULT_EXTRINSIC_SCALE,
    **overrides,
) -> HybridConfig:
    """Parse a legend such as 'STD+OSD(1,T,1)+CRC-aided+NED(0.15)'.

    Also accepts the comma-separated legend style ('STD+OSD(2, 1, 0), CRC')
    and 'CRC aided'. 'MLD' is not a hybrid scheme and is rejected here.
    'T(n)' and 'scale(c)' components take precedence over the t_max and
    extrinsic_scale arguments.
    """
    compact = re.sub(r"\s+", "", name).replace("CRCaided", "CRC-aided")
    # commas inside OSD(...) are argument separators, not legend separators
    tokens = [t for t in re.split(r"[+,](?![^(]*\))", compact) if t]
    if not tokens or tokens[0].upper() != "STD":
        raise ValueError(f"Unknown scheme '{name}'")

    # pulled out first: OSD(N,T,alpha) resolves T against the iteration count
    decoder_tokens = []
    for tok in tokens[1:]:
        if iters := _ITERS_RE.match(tok):
            t_max = int(iters.group(1))
        elif scale := _SCALE_RE.match(tok):
            extrinsic_scale = float(scale.group(1))
        else:
            decoder_tokens.append(tok)
    tokens = tokens[:1] + decoder_tokens

    osd_order = None
    start = 1
    alpha = 0.0
    aided = False
    detection: Detection | None = None
    eta = None
    for tok in tokens[1:]:
        upper = tok.upper()
        osd = _OSD_RE.match(tok)
        ned_match = _NED_RE.match(tok)
        if osd and osd_order is None:
            osd_order = int(osd.group(1))
            start = t_max if osd.group(2).upper() == "T" else int(osd.group(2))
            alpha = float(osd.group(3))
        elif upper == "CRC-AIDED":
            aided = True
        elif upper == "GENIE":
            detection = Detection.GENIE
        elif upper == "CRC":
            detection = Detection.CRC
        elif upper == "NED":
            detection = Detection.NED
        elif ned_match:
            detection = Detection.NED
            eta = float(ned_match.group(1))
        else:
            raise ValueError(f"Unknown scheme component '{tok}' in '{name}'")

    if osd_order is None:
        if aided or detection not in (None, Detection.CRC):
            raise ValueError(f"Scheme '{name}' has detection options but no OSD stage")
        return replace(HybridConfig(t_max=t_max, extrinsic_scale=extrinsic_scale), **overrides)
    if detection is None:
        detection = Detection.NED if aided else Detection.CRC
    cfg = HybridConfig(
        osd_order=osd_order,
        start_iteration=start,
        accum_alpha=alpha,
        t_max=t_max,
        extrinsic_scale=extrinsic_scale,
        eta=eta,
        crc_mode=CrcMode.AIDED if aided else CrcMode.FILTER,
        detection=detection,
    )
    return replace(cfg, **overrides)
