import numpy as np
import pytest

from src.crc24 import crc_attach, crc_check
from src.hybrid import (
    NAMED_SCHEMES,
    DecodeStatus,
    Detection,
    HybridConfig,
    HybridDecoder,
    accumulate,
    default_eta,
    detect_ned,
    hybrid_decode,
    parse_scheme,
    scheme_name,
)
from src.maxlogmap import channel_llrs, std_decode
from src.osd import CrcMode
from src.simulation import ChannelParams, add_noise, modulate
from src.turbo import trellis_encode


def _frame(rng, code, ebn0_db):
    noise_var = ChannelParams.from_ebn0(ebn0_db, code.rate).noise_var
    cb = crc_attach(rng.integers(0, 2, size=code.m, dtype=np.uint8))
    y = add_noise(modulate(trellis_encode(cb, code)), noise_var, rng)
    return cb, channel_llrs(y, noise_var)


def _std_failure(rng, code):
    """A frame on which plain STD never passes the CRC."""
    while True:
        cb, frame = _frame(rng, code, -2.0)
        last, _ = std_decode(frame, code)
        if not last.crc_pass:
            return cb, frame


def test_accumulate():
    current = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(accumulate(current, np.array([3.0, 3.0, 3.0]), 0.0), current)
    assert np.array_equal(accumulate(current, np.zeros(3), 0.7), current)
    acc = np.zeros(3)
    for _ in range(3):
        acc = accumulate(current, acc, 1.0)
    assert np.allclose(acc, 3 * current)


@pytest.mark.parametrize("value, eta, accepted", [(0.0, 0.2, True), (0.21, 0.2, False), (0.2, 0.2, True)])
def test_detect_ned(value, eta, accepted):
    assert detect_ned(value, eta) is accepted


def test_default_eta():
    assert default_eta(40) == 0.2
    assert default_eta(96) == 0.15


def test_parse_std():
    cfg = parse_scheme("STD")
    assert not cfg.uses_osd
    assert cfg.t_max == 8
    assert cfg.extrinsic_scale == 0.75


def test_parse_hybrid_crc():
    cfg = parse_scheme("STD+OSD(2,1,0)")
    assert (cfg.osd_order, cfg.start_iteration, cfg.accum_alpha) == (2, 1, 0.0)
    assert cfg.crc_mode is CrcMode.FILTER
    assert cfg.detection is Detection.CRC


def test_parse_crc_aided():
    cfg = parse_scheme("STD+OSD(2,1,0)+CRC-aided")
    assert (cfg.osd_order, cfg.start_iteration, cfg.accum_alpha) == (2, 1, 0.0)
    assert cfg.crc_mode is CrcMode.AIDED
    assert cfg.detection is Detection.NED


def test_parse_last_iteration_ned():
    cfg = parse_scheme("STD+OSD(1,T,1)+CRC-aided+NED(0.15)")
    assert cfg == HybridConfig(
        osd_order=1, start_iteration=8, accum_alpha=1.0, t_max=8, eta=0.15,
        crc_mode=CrcMode.AIDED, detection=Detection.NED,
    )


def test_parse_legend_variants():
    assert parse_scheme("STD+OSD(2, 1, 0), CRC") == parse_scheme("STD+OSD(2,1,0)")
    assert parse_scheme("STD+OSD(2,1,0)+CRC aided") == parse_scheme("STD+OSD(2,1,0)+CRC-aided")


@pytest.mark.parametrize("name", [n for n in NAMED_SCHEMES if n != "MLD"])
def test_named_schemes_round_trip(name):
    cfg = parse_scheme(name)
    assert scheme_name(cfg) == name
    assert parse_scheme(scheme_name(cfg)) == cfg


@pytest.mark.parametrize("name", ["MLD", "BP", "STD+OSD(3,1,0)", "STD+CRC-aided", "STD+OSD(2,1,0)+Foo",
                                  "STD+OSD(2,9,0)", "STD+OSD(2,1,0)+CRC-aided+CRC"])
def test_invalid_schemes(name):
    with pytest.raises(ValueError):
        parse_scheme(name)


def test_t_placeholder_follows_t_max():
    assert parse_scheme("STD+OSD(2,T,0)+CRC-aided", t_max=5).start_iteration == 5


@pytest.mark.parametrize("t_max,scale,name", [
    (2, 0.75, "STD+OSD(1,T,0)+CRC-aided+T(2)"),
    (8, 1.0, "STD+OSD(1,T,0)+CRC-aided+scale(1)"),
    (4, 0.5, "STD+OSD(1,T,0)+CRC-aided+T(4)+scale(0.5)"),
])
def test_non_default_decoder_settings_are_named(t_max, scale, name):
    cfg = parse_scheme("STD+OSD(1,T,0)+CRC-aided", t_max=t_max, extrinsic_scale=scale)
    assert scheme_name(cfg) == name
    assert parse_scheme(name) == cfg
    assert cfg.start_iteration == t_max


def test_plain_std_names_iterations():
    cfg = parse_scheme("STD", t_max=3)
    assert scheme_name(cfg) == "STD+T(3)"
    assert parse_scheme("STD+T(3)") == cfg
    assert scheme_name(parse_scheme("STD")) == "STD"


def test_named_iterations_win_over_argument():
    cfg = parse_scheme("STD+OSD(2,T,0)+T(3)", t_max=8)
    assert (cfg.t_max, cfg.start_iteration) == (3, 3)


def test_config_validation():
    with pytest.raises(ValueError):
        HybridConfig(osd_order=2, crc_mode=CrcMode.AIDED, detection=Detection.CRC)
    with pytest.raises(ValueError):
        HybridConfig(osd_order=1, eta=1.5)
    with pytest.raises(ValueError):
        HybridConfig(osd_order=1, accum_alpha=-1.0)
    with pytest.raises(ValueError):
        HybridConfig(detection=Detection.NED)


def test_noiseless_std_success(rng, code):
    cfg = parse_scheme("STD+OSD(2,1,0)+CRC-aided+Genie")
    for _ in range(10):
        cb, frame = _frame(rng, code, 60.0)
        outcome = hybrid_decode(frame, code, cfg, genie_truth=cb)
        assert outcome.status is DecodeStatus.STD_SUCCESS
        assert outcome.iterations_used == 1
        assert outcome.osd_invocations == 0
        assert outcome.ned_value is None
        assert np.array_equal(outcome.message, cb[:code.m])


def test_osd_every_iteration_from_f1(rng, code40):
    cb, frame = _std_failure(rng, code40)
    outcome = hybrid_decode(frame, code40, parse_scheme("STD+OSD(1,1,0)+CRC-aided+Genie"), cb)
    assert outcome.iterations_used == 8
    assert outcome.osd_invocations == 8


def test_osd_once_at_last_iteration(rng, code40):
    cb, frame = _std_failure(rng, code40)
    outcome = hybrid_decode(frame, code40, parse_scheme("STD+OSD(1,T,0)+CRC-aided+Genie"), cb)
    assert outcome.osd_invocations == 1


def test_genie_requires_truth(rng, code40):
    _, frame = _frame(rng, code40, 0.0)
    with pytest.raises(ValueError):
        hybrid_decode(frame, code40, parse_scheme("STD+OSD(1,1,0)+CRC-aided+Genie"))


def test_genie_detection(rng, code40):
    cfg = parse_scheme("STD+OSD(2,1,0)+CRC-aided+Genie")
    for _ in range(10):
        cb, frame = _std_failure(rng, code40)
        outcome = hybrid_decode(frame, code40, cfg, cb)
        assert outcome.accepted == np.array_equal(outcome.codeword, cb)
        assert crc_check(outcome.codeword)
        assert np.array_equal(outcome.message, outcome.codeword[:16])


def test_ned_threshold_extremes(rng, code40):
    cb, frame = _std_failure(rng, code40)
    always = hybrid_decode(frame, code40, parse_scheme("STD+OSD(1,1,0)+CRC-aided+NED(1)"))
    never = hybrid_decode(frame, code40, parse_scheme("STD+OSD(1,1,0)+CRC-aided+NED(0)"))
    assert always.status is DecodeStatus.OSD_ACCEPTED
    assert never.status is DecodeStatus.DETECTED_ERROR
    assert 0.0 < always.ned_value <= 1.0
    assert always.ned_value == never.ned_value


def test_crc_detection(rng, code40):
    cfg = parse_scheme("STD+OSD(2,1,0)")
    for _ in range(10):
        _, frame = _std_failure(rng, code40)
        outcome = hybrid_decode(frame, code40, cfg)
        assert outcome.accepted == (not outcome.crc_filtered_empty)
        if outcome.accepted:
            assert crc_check(outcome.codeword)


def test_std_without_osd_declares_failure(rng, code40):
    _, frame = _std_failure(rng, code40)
    outcome = hybrid_decode(frame, code40, parse_scheme("STD"))
    assert outcome.status is DecodeStatus.DETECTED_ERROR
    assert outcome.iterations_used == 8


def test_dominance_over_std(rng, code40):
    cfg = parse_scheme("STD+OSD(2,1,1)+CRC-aided+NED(0.2)")
    for _ in range(30):
        _, frame = _frame(rng, code40, 2.0)
        last, per_iteration = std_decode(frame, code40)
        outcome = hybrid_decode(frame, code40, cfg)
        if last.crc_pass:
            assert outcome.status is DecodeStatus.STD_SUCCESS
            assert np.array_equal(outcome.message, last.hard_cb[:16])
            assert outcome.iterations_used == len(per_iteration)


def test_deterministic(rng, code40):
    cb, frame = _std_failure(rng, code40)
    decoder = HybridDecoder(code40, parse_scheme("STD+OSD(2,1,1)+CRC-aided+NED(0.2)"))
    a = decoder.decode(frame)
    b = decoder.decode(frame)
    assert a.status is b.status
    assert np.array_equal(a.codeword, b.codeword)
    assert a.ned_value == b.ned_value
    assert a.best_distance == b.best_distance
