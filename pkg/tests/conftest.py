"""Shared fixtures: miniature decks and a landmark trace synthesizer."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from chirono.charts import parse_deck
from chirono.gestures import DWELL_DEFAULT_MS

ROOT = Path(__file__).resolve().parent.parent
STUDY_DECK = ROOT / "scenes" / "study_deck.json"
TRACE_DIR = Path(__file__).resolve().parent / "traces"
GOLDEN_DIR = Path(__file__).resolve().parent / "goldens"

FRAME_STEP_MS = 33  # ~30 fps capture cadence
PINCH_GAP = 0.004   # thumb-index distance while pinching
OPEN_GAP = 0.15     # thumb-index distance while open


def simple_table(name="t1", years=range(2000, 2004), series=("a",)):
    """Inline numeric table: one x column plus the requested series."""
    cols = [{"name": "year", "type": "number"}]
    cols += [{"name": s, "type": "number"} for s in series]
    rows = []
    for i, y in enumerate(years):
        rows.append([y] + [10 + 7 * i + 3 * j for j in range(len(series))])
    return {name: {"columns": cols, "rows": rows}}


def line_deck(series=("a",), frame=(0.0, 0.0, 1.0, 1.0), years=range(2000, 2004),
              regions=None, kind="Line"):
    """One-scene deck with a single rectilinear chart over the unit frame."""
    chart = {"kind": kind, "table": "t1", "x_field": "year",
             "y_fields": list(series)}
    if regions:
        chart["interval_regions"] = regions
    doc = {
        "tables": simple_table(years=years, series=series),
        "scenes": [{"id": "s1", "overlays": [
            {"id": "ov1", "frame": list(frame), "chart": chart}]}],
    }
    return parse_deck(doc)


def hand(handedness, x, y, pinch=False, conf=0.9, palm=None):
    """Observation dict with the thumb offset pointing toward frame center,
    so an open hand never clamps its way back under the pinch threshold."""
    gap = PINCH_GAP if pinch else OPEN_GAP
    dx = gap if x < 0.5 else -gap
    px, py = palm if palm is not None else (x, y)
    return {"handedness": handedness, "index": [round(x, 4), round(y, 4)],
            "thumb": [round(x + dx, 4), round(y, 4)],
            "palm": [round(px, 4), round(py, 4)], "conf": conf}


class TraceBuilder:
    """Composes frame/key records on a 30 fps virtual clock."""

    def __init__(self, t0=0, step_ms=FRAME_STEP_MS):
        self.records = []
        self.t = t0
        self.step_ms = step_ms

    def frame(self, hands, t=None):
        if t is not None:
            self.t = t
        self.records.append({"t_ms": self.t, "hands": hands})
        self.t += self.step_ms
        return self

    def hold(self, duration_ms, hands_fn):
        """Repeat frames for duration_ms; hands_fn(t) -> list of hands."""
        end = self.t + duration_ms
        while self.t < end:
            self.records.append({"t_ms": self.t, "hands": hands_fn(self.t)})
            self.t += self.step_ms
        return self

    def still(self, duration_ms, hands):
        return self.hold(duration_ms, lambda _t: hands)

    def dwell(self, hands, extra_ms=100):
        """Hold long enough for Enter/Start to fire, plus slack."""
        return self.still(DWELL_DEFAULT_MS + extra_ms, hands)

    def empty(self, duration_ms):
        return self.still(duration_ms, [])

    def key(self, command, t=None):
        if t is not None:
            self.t = t
        self.records.append({"t_ms": self.t, "key": command})
        self.t += self.step_ms
        return self

    def gap(self, duration_ms):
        """Advance the clock without emitting frames (signal loss)."""
        self.t += duration_ms
        return self


@pytest.fixture(scope="session")
def study_deck():
    from chirono.charts import load_deck
    return load_deck(STUDY_DECK)


@pytest.fixture
def builder():
    return TraceBuilder()


def drive(engine, decoder, records):
    """Feed trace records through an engine; returns all gesture events."""
    events = []
    for rec in records:
        if "hands" in rec:
            frame = decoder.decode(rec)
            if frame is not None:
                events += engine.on_frame(frame)
        else:
            engine.on_key(rec["t_ms"], rec["key"])
    return events
