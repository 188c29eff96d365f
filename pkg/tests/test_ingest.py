"""Landmark ingest: decoding, normalization, and the latest-wins gate."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from chirono.ingest import (FrameDecoder, FrameGate, NonMonotonicTimestamp,
                            TraceFormatError)

from conftest import hand


def _frame(t, hands):
    return {"t_ms": t, "hands": hands}


def test_decode_basic_frame():
    dec = FrameDecoder()
    fr = dec.decode(_frame(10, [hand("Right", 0.4, 0.5)]))
    assert fr.t_ms == 10
    obs = fr.hand("Right")
    assert obs.index == (0.4, 0.5)
    assert fr.hand("Left") is None


def test_hands_ordered_right_then_left():
    dec = FrameDecoder()
    fr = dec.decode(_frame(0, [hand("Left", 0.2, 0.2), hand("Right", 0.8, 0.8)]))
    assert [o.handedness for o in fr.hands] == ["Right", "Left"]


@pytest.mark.parametrize("point, expected", [
    ([-0.2, 0.5], (0.0, 0.5)),
    ([0.5, 1.7], (0.5, 1.0)),
    ([-3.0, -3.0], (0.0, 0.0)),
    ([2.0, 2.0], (1.0, 1.0)),
])
def test_coordinates_clamped_to_unit_square(point, expected):
    dec = FrameDecoder()
    raw = hand("Right", 0.5, 0.5)
    raw["index"] = point
    fr = dec.decode(_frame(0, [raw]))
    assert fr.hand("Right").index == expected


@given(x=st.floats(-5, 5), y=st.floats(-5, 5))
def test_clamp_is_idempotent_and_in_range(x, y):
    dec = FrameDecoder()
    raw = hand("Right", 0.5, 0.5)
    raw["index"] = [x, y]
    fr = dec.decode(_frame(0, [raw]))
    cx, cy = fr.hand("Right").index
    assert 0.0 <= cx <= 1.0 and 0.0 <= cy <= 1.0
    dec2 = FrameDecoder()
    raw2 = hand("Right", 0.5, 0.5)
    raw2["index"] = [cx, cy]
    fr2 = dec2.decode(_frame(0, [raw2]))
    assert fr2.hand("Right").index == (cx, cy)


def test_mirror_flips_x_only():
    dec = FrameDecoder(mirror=True)
    fr = dec.decode(_frame(0, [hand("Right", 0.2, 0.7)]))
    obs = fr.hand("Right")
    assert obs.index == (0.8, 0.7)


def test_low_confidence_hand_dropped():
    dec = FrameDecoder(confidence_min=0.5)
    fr = dec.decode(_frame(0, [hand("Right", 0.5, 0.5, conf=0.49)]))
    assert fr.hands == ()


def test_confidence_threshold_inclusive():
    dec = FrameDecoder(confidence_min=0.5)
    fr = dec.decode(_frame(0, [hand("Right", 0.5, 0.5, conf=0.5)]))
    assert fr.hand("Right") is not None


def test_duplicate_handedness_keeps_higher_confidence():
    dec = FrameDecoder()
    a = hand("Right", 0.3, 0.3, conf=0.6)
    b = hand("Right", 0.7, 0.7, conf=0.9)
    fr = dec.decode(_frame(0, [a, b]))
    assert len(fr.hands) == 1
    assert fr.hand("Right").index == (0.7, 0.7)


def test_timestamp_regression_rejected():
    dec = FrameDecoder()
    dec.decode(_frame(100, []))
    with pytest.raises(NonMonotonicTimestamp):
        dec.decode(_frame(99, []))


def test_equal_timestamp_deduplicated_to_none():
    dec = FrameDecoder()
    assert dec.decode(_frame(100, [])) is not None
    assert dec.decode(_frame(100, [hand("Right", 0.5, 0.5)])) is None
    assert dec.decode(_frame(101, [])) is not None


@pytest.mark.parametrize("mutate", [
    lambda r: r.pop("t_ms"),
    lambda r: r.update(t_ms=1.5),
    lambda r: r.update(t_ms=True),
    lambda r: r.update(hands="nope"),
    lambda r: r["hands"].append({"handedness": "Middle", "index": [0, 0],
                                 "thumb": [0, 0], "palm": [0, 0], "conf": 1}),
    lambda r: r["hands"][0].pop("index"),
    lambda r: r["hands"][0].update(index=[0.1]),
    lambda r: r["hands"][0].update(index=[0.1, float("nan")]),
    lambda r: r["hands"][0].update(conf="high"),
])
def test_malformed_frames_rejected(mutate):
    dec = FrameDecoder()
    raw = _frame(5, [hand("Right", 0.5, 0.5)])
    mutate(raw)
    with pytest.raises(TraceFormatError):
        dec.decode(raw)


# ---------- single-slot gate ----------


def _decoded(t):
    return FrameDecoder().decode(_frame(t, [hand("Right", 0.5, 0.5)]))


def test_gate_offer_take_done_cycle():
    gate = FrameGate()
    assert gate.offer(_decoded(1)) is True
    assert not gate.busy
    fr = gate.take()
    assert fr.t_ms == 1
    assert gate.busy
    assert gate.take() is None  # one in flight at a time
    gate.done()
    assert not gate.busy


def test_gate_displacement_reported():
    gate = FrameGate()
    assert gate.offer(_decoded(1)) is True
    assert gate.offer(_decoded(2)) is False  # displaced the pending frame
    assert gate.take().t_ms == 2


def test_gate_burst_keeps_only_latest():
    """The oracle for a burst of n offers during one in-flight interval:
    exactly the last offered frame is processed next, the rest vanish."""
    gate = FrameGate()
    gate.offer(_decoded(0))
    processing = gate.take()
    assert processing.t_ms == 0
    for t in range(1, 9):
        gate.offer(_decoded(t))
    assert gate.take() is None  # still busy with frame 0
    gate.done()
    nxt = gate.take()
    assert nxt.t_ms == 8
    gate.done()
    assert gate.take() is None  # slot drained
