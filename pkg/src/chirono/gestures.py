"""Debounced gesture event protocol.

Raw landmark frames go in, semantic lifecycle events come out:

    PointEnter/PointMove/PointLeave   index fingertip presence
    PalmEnter/PalmMove/PalmLeave      palm centroid presence
    PinchStart/PinchMove/PinchEnd     thumb-index pinch with hysteresis

All timing derives from frame timestamps (virtual clock). A control point
must persist for dwell_ms before Enter/Start fires; a signal loss shorter
than timeout_ms is bridged silently, a longer one emits Leave/End stamped
at the frame where the timeout is detected. Event order within a frame is
fixed (terminations, then initiations, then moves; Right before Left) so
logs are canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .ingest import HANDS, HandObservation, LandmarkFrame, Point2

DWELL_DEFAULT_MS = 200
TIMEOUT_DEFAULT_MS = 400
DWELL_RANGE_MS = (100, 1000)
PINCH_ON_DEFAULT = 0.05
PINCH_OFF_DEFAULT = 0.08

POINT_KINDS = ("PointEnter", "PointMove", "PointLeave")
PALM_KINDS = ("PalmEnter", "PalmMove", "PalmLeave")
PINCH_KINDS = ("PinchStart", "PinchMove", "PinchEnd")

_TERMINATIONS = ("PointLeave", "PalmLeave", "PinchEnd")
_INITIATIONS = ("PointEnter", "PalmEnter", "PinchStart")
_MOVES = ("PointMove", "PalmMove", "PinchMove")


class ConfigRangeError(ValueError):
    """Gesture config field outside its permitted range."""


class EmptyHandSet(ValueError):
    """dominant() asked to pick from no hands."""


@dataclass(frozen=True)
class GestureConfig:
    dwell_ms: int = DWELL_DEFAULT_MS
    timeout_ms: int = TIMEOUT_DEFAULT_MS
    pinch_on_dist: float = PINCH_ON_DEFAULT
    pinch_off_dist: float = PINCH_OFF_DEFAULT
    dominant_hand: str = "Right"
    confidence_min: float = 0.5
    mirror: bool = False

    def __post_init__(self) -> None:
        lo, hi = DWELL_RANGE_MS
        for name in ("dwell_ms", "timeout_ms"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigRangeError(f"{name} must be an integer")
            if not lo <= v <= hi:
                raise ConfigRangeError(f"{name}={v} outside [{lo}, {hi}]")
        if not (isinstance(self.pinch_on_dist, (int, float)) and isinstance(self.pinch_off_dist, (int, float))):
            raise ConfigRangeError("pinch thresholds must be numbers")
        if not 0.0 < self.pinch_on_dist < self.pinch_off_dist:
            raise ConfigRangeError("require 0 < pinch_on_dist < pinch_off_dist")
        if self.dominant_hand not in HANDS:
            raise ConfigRangeError(f"dominant_hand must be one of {HANDS}")
        if not 0.0 <= self.confidence_min <= 1.0:
            raise ConfigRangeError("confidence_min outside [0, 1]")
        if not isinstance(self.mirror, bool):
            raise ConfigRangeError("mirror must be a boolean")

    _FIELDS = ("dwell_ms", "timeout_ms", "pinch_on_dist", "pinch_off_dist",
               "dominant_hand", "confidence_min", "mirror")

    @classmethod
    def from_json(cls, data: object) -> "GestureConfig":
        return cls().patched(data)

    def patched(self, data: object) -> "GestureConfig":
        """Return a copy with fields from a JSON object applied, validated."""
        if not isinstance(data, dict):
            raise ConfigRangeError("config must be an object")
        unknown = set(data) - set(self._FIELDS)
        if unknown:
            raise ConfigRangeError(f"unknown config fields: {sorted(unknown)}")
        return replace(self, **data)

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in self._FIELDS}

    def dominant(self, hand_set: set[str] | frozenset[str]) -> str:
        """Pick the hand that takes precedence when both compete."""
        if not hand_set:
            raise EmptyHandSet("no hands to choose from")
        bad = set(hand_set) - set(HANDS)
        if bad:
            raise ValueError(f"unknown handedness: {sorted(bad)}")
        if self.dominant_hand in hand_set:
            return self.dominant_hand
        return next(h for h in HANDS if h in hand_set)


@dataclass(frozen=True)
class GestureEvent:
    t_ms: int
    hand: str
    kind: str
    pos: Point2

    def to_json(self) -> dict:
        return {"t_ms": self.t_ms, "hand": self.hand, "kind": self.kind,
                "pos": [self.pos[0], self.pos[1]]}


def pinch_distance(obs: HandObservation) -> float:
    dx = obs.index[0] - obs.thumb[0]
    dy = obs.index[1] - obs.thumb[1]
    return math.hypot(dx, dy)


Emission = tuple[str, Point2]  # (suffix, position at emission time)


class _PresenceTracker:
    """Dwell/timeout machine for one control point of one hand."""

    __slots__ = ("phase", "since_ms", "last_seen_ms", "last_pos")

    def __init__(self) -> None:
        self.phase = "absent"  # absent | candidate | present | lapsed
        self.since_ms = 0
        self.last_seen_ms = 0
        self.last_pos: Point2 = (0.0, 0.0)

    def step(self, pos: Point2 | None, t_ms: int, cfg: GestureConfig) -> list[Emission]:
        out: list[Emission] = []
        if self.phase == "lapsed" and t_ms - self.last_seen_ms >= cfg.timeout_ms:
            out.append(("Leave", self.last_pos))
            self.phase = "absent"
        if pos is None:
            if self.phase == "candidate":
                self.phase = "absent"  # continuity broken before Enter
            elif self.phase == "present":
                self.phase = "lapsed"
            return out
        if self.phase == "absent":
            self.phase = "candidate"
            self.since_ms = t_ms
        elif self.phase == "candidate":
            if t_ms - self.since_ms >= cfg.dwell_ms:
                self.phase = "present"
                out.append(("Enter", pos))
        elif self.phase == "present":
            out.append(("Move", pos))
        elif self.phase == "lapsed":
            self.phase = "present"  # gap shorter than timeout, bridge it
            out.append(("Move", pos))
        self.last_seen_ms = t_ms
        self.last_pos = pos
        return out


class _PinchTracker:
    """Hysteresis pinch machine for one hand.

    Activation needs dist < on_dist held for dwell_ms; release needs
    dist > off_dist held for dwell_ms. Between the thresholds the committed
    phase is retained. Signal loss follows the shared timeout rule.
    """

    __slots__ = ("phase", "since_ms", "release_since_ms", "last_seen_ms", "last_pos")

    def __init__(self) -> None:
        self.phase = "idle"  # idle | candidate | active | lapsed
        self.since_ms = 0
        self.release_since_ms: int | None = None
        self.last_seen_ms = 0
        self.last_pos: Point2 = (0.0, 0.0)

    @property
    def active(self) -> bool:
        # a lapsed pinch stays active until its timeout resolves
        return self.phase in ("active", "lapsed")

    def step(self, obs: HandObservation | None, t_ms: int, cfg: GestureConfig) -> list[Emission]:
        out: list[Emission] = []
        if self.phase == "lapsed" and t_ms - self.last_seen_ms >= cfg.timeout_ms:
            out.append(("End", self.last_pos))
            self.phase = "idle"
            self.release_since_ms = None
        if obs is None:
            if self.phase == "candidate":
                self.phase = "idle"
            elif self.phase == "active":
                self.phase = "lapsed"
            return out
        dist = pinch_distance(obs)
        pos = obs.index
        if self.phase == "idle":
            if dist < cfg.pinch_on_dist:
                self.phase = "candidate"
                self.since_ms = t_ms
        elif self.phase == "candidate":
            if dist < cfg.pinch_on_dist:
                if t_ms - self.since_ms >= cfg.dwell_ms:
                    self.phase = "active"
                    self.release_since_ms = None
                    out.append(("Start", pos))
            else:
                self.phase = "idle"  # wobbled above on-threshold before dwell
        elif self.phase == "active":
            if dist > cfg.pinch_off_dist:
                if self.release_since_ms is None:
                    self.release_since_ms = t_ms
                if t_ms - self.release_since_ms >= cfg.dwell_ms:
                    self.phase = "idle"
                    self.release_since_ms = None
                    out.append(("End", pos))
                else:
                    out.append(("Move", pos))
            else:
                self.release_since_ms = None
                out.append(("Move", pos))
        elif self.phase == "lapsed":
            self.phase = "active"  # bridged gap; sustain clocks start over
            self.release_since_ms = None
            out.append(("Move", pos))
        self.last_seen_ms = t_ms
        self.last_pos = pos
        return out


class GestureRuntime:
    """Per-hand machines plus canonical per-frame event ordering."""

    def __init__(self, config: GestureConfig | None = None):
        self.config = config or GestureConfig()
        self._point = {h: _PresenceTracker() for h in HANDS}
        self._palm = {h: _PresenceTracker() for h in HANDS}
        self._pinch = {h: _PinchTracker() for h in HANDS}

    def configure(self, config: GestureConfig) -> None:
        self.config = config

    def pinch_active(self, hand: str) -> bool:
        return self._pinch[hand].active

    def step(self, frame: LandmarkFrame) -> list[GestureEvent]:
        """Advance every machine by one frame; events come back in canonical
        order: terminations, initiations, moves; Right before Left within
        each class; point before palm before pinch within each hand."""
        cfg = self.config
        t = frame.t_ms
        per_hand: dict[str, dict[str, GestureEvent]] = {}
        for hand in HANDS:
            obs = frame.hand(hand)
            found: dict[str, GestureEvent] = {}
            for fam, emitted in (
                ("Point", self._point[hand].step(obs.index if obs else None, t, cfg)),
                ("Palm", self._palm[hand].step(obs.palm if obs else None, t, cfg)),
                ("Pinch", self._pinch[hand].step(obs, t, cfg)),
            ):
                for suffix, pos in emitted:
                    kind = fam + suffix
                    found[kind] = GestureEvent(t, hand, kind, pos)
            per_hand[hand] = found
        ordered: list[GestureEvent] = []
        for kinds in (_TERMINATIONS, _INITIATIONS, _MOVES):
            for hand in HANDS:
                for kind in kinds:
                    ev = per_hand[hand].get(kind)
                    if ev is not None:
                        ordered.append(ev)
        return ordered
