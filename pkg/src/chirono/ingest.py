"""Landmark frame intake.

Responsibilities:
  - validate raw landmark payloads (shape, handedness, coordinate range)
  - clamp coordinates to the unit square and optionally mirror for selfie view
  - filter low-confidence observations and collapse duplicate handedness
  - enforce monotonic timestamps (the virtual clock never runs backwards)
  - single-slot handoff between the producer thread and the engine
    (latest frame wins, at most one frame pending while one is in flight)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point2 = tuple[float, float]

HANDS = ("Right", "Left")  # canonical order everywhere


class NonMonotonicTimestamp(ValueError):
    """Frame timestamp earlier than one already accepted."""


class TraceFormatError(ValueError):
    """Raw frame or trace record does not match the wire shape."""


@dataclass(frozen=True)
class HandObservation:
    handedness: str  # "Right" | "Left"
    index: Point2
    thumb: Point2
    palm: Point2
    conf: float


@dataclass(frozen=True)
class LandmarkFrame:
    t_ms: int
    hands: tuple[HandObservation, ...]  # ordered Right, Left; each handedness at most once

    def hand(self, handedness: str) -> HandObservation | None:
        for h in self.hands:
            if h.handedness == handedness:
                return h
        return None


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def _read_point(raw: object, where: str) -> Point2:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise TraceFormatError(f"{where}: expected [x, y]")
    x, y = raw
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise TraceFormatError(f"{where}: x is not a number")
    if not isinstance(y, (int, float)) or isinstance(y, bool):
        raise TraceFormatError(f"{where}: y is not a number")
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise TraceFormatError(f"{where}: non-finite coordinate")
    return (_clamp01(x), _clamp01(y))


def _mirror_point(p: Point2) -> Point2:
    return (1.0 - p[0], p[1])


def parse_hand(raw: object, *, mirror: bool = False) -> HandObservation:
    """Validate one raw hand object and normalize its control points."""
    if not isinstance(raw, dict):
        raise TraceFormatError("hand: expected an object")
    handedness = raw.get("handedness")
    if handedness not in HANDS:
        raise TraceFormatError(f"hand: handedness must be one of {HANDS}")
    conf = raw.get("conf")
    if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not math.isfinite(float(conf)):
        raise TraceFormatError("hand: conf is not a finite number")
    index = _read_point(raw.get("index"), "hand.index")
    thumb = _read_point(raw.get("thumb"), "hand.thumb")
    palm = _read_point(raw.get("palm"), "hand.palm")
    if mirror:
        index, thumb, palm = _mirror_point(index), _mirror_point(thumb), _mirror_point(palm)
    return HandObservation(handedness, index, thumb, palm, float(conf))


class FrameDecoder:
    """Turns raw frame payloads into validated LandmarkFrames.

    Frames with a timestamp equal to the last accepted one are collapsed
    (decode returns None); earlier timestamps raise NonMonotonicTimestamp.
    """

    def __init__(self, confidence_min: float = 0.5, mirror: bool = False):
        self.confidence_min = confidence_min
        self.mirror = mirror
        self._last_t: int | None = None

    def decode(self, raw: object) -> LandmarkFrame | None:
        if not isinstance(raw, dict):
            raise TraceFormatError("frame: expected an object")
        t_ms = raw.get("t_ms")
        if not isinstance(t_ms, int) or isinstance(t_ms, bool):
            raise TraceFormatError("frame: t_ms must be an integer")
        if self._last_t is not None:
            if t_ms < self._last_t:
                raise NonMonotonicTimestamp(f"frame t_ms {t_ms} earlier than {self._last_t}")
            if t_ms == self._last_t:
                return None  # duplicate tick, collapse silently
        raw_hands = raw.get("hands")
        if not isinstance(raw_hands, list):
            raise TraceFormatError("frame: hands must be a list")
        best: dict[str, HandObservation] = {}
        for item in raw_hands:
            obs = parse_hand(item, mirror=self.mirror)
            if obs.conf < self.confidence_min:
                continue
            prev = best.get(obs.handedness)
            if prev is None or obs.conf > prev.conf:
                best[obs.handedness] = obs
        self._last_t = t_ms
        hands = tuple(best[h] for h in HANDS if h in best)
        return LandmarkFrame(t_ms=t_ms, hands=hands)


class FrameGate:
    """Single-slot mailbox between the landmark producer and the engine.

    The producer offers frames at capture rate; the engine takes at most one
    at a time. While a frame is in flight, newer offers replace the pending
    slot and the displaced frame is dropped (offer reports it).
    """

    def __init__(self) -> None:
        self._pending: LandmarkFrame | None = None
        self._in_flight = False

    def offer(self, frame: LandmarkFrame) -> bool:
        """Queue a frame for the engine. Returns False when a pending frame
        was displaced (the caller's previous offer got dropped)."""
        displaced = self._pending is not None
        self._pending = frame
        return not displaced

    def take(self) -> LandmarkFrame | None:
        """Engine side: claim the newest pending frame, or None while one is
        still in flight or nothing arrived."""
        if self._in_flight or self._pending is None:
            return None
        frame, self._pending = self._pending, None
        self._in_flight = True
        return frame

    def done(self) -> None:
        """Engine side: processing of the taken frame finished."""
        self._in_flight = False

    @property
    def busy(self) -> bool:
        return self._in_flight
