"""Scene deck navigation and transition planning.

A transition plan lists which overlays leave, which arrive, and which morph
between frames; the three sets are disjoint by overlay id. Progress is a
pure function of the virtual clock, so replaying a trace reproduces every
intermediate picture.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .charts import SceneSpec

TRANSITION_DEFAULT_MS = 500

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionPlan:
    exits: tuple[dict, ...]
    enters: tuple[dict, ...]
    morphs: tuple[dict, ...]
    duration_ms: int = TRANSITION_DEFAULT_MS

    @property
    def empty(self) -> bool:
        return not (self.exits or self.enters or self.morphs)

    def to_json(self) -> dict:
        return {
            "exits": [dict(e) for e in self.exits],
            "enters": [dict(e) for e in self.enters],
            "morphs": [dict(m) for m in self.morphs],
            "duration_ms": self.duration_ms,
        }


def plan_transition(from_scene: SceneSpec | None, to_scene: SceneSpec,
                    duration_ms: int = TRANSITION_DEFAULT_MS) -> TransitionPlan:
    """Exits for overlays only in the source scene, enters for overlays only
    in the target, morphs for overlays in both whose frames differ. An
    overlay present in both scenes with an identical frame needs nothing,
    so planning a scene against itself comes back empty."""
    from_ids = {ov.id: ov for ov in (from_scene.overlays if from_scene else ())}
    to_ids = {ov.id: ov for ov in to_scene.overlays}
    exits = tuple({"overlay": oid, "style": ov.exit}
                  for oid, ov in from_ids.items() if oid not in to_ids)
    enters = tuple({"overlay": oid, "style": ov.enter}
                   for oid, ov in to_ids.items() if oid not in from_ids)
    morphs = []
    for oid, ov in to_ids.items():
        if oid in from_ids and from_ids[oid].frame != ov.frame:
            morphs.append({"overlay": oid,
                           "from_frame": list(from_ids[oid].frame),
                           "to_frame": list(ov.frame)})
    return TransitionPlan(exits, enters, tuple(morphs), duration_ms)


def navigate(deck_size: int, current: int, command: str) -> int:
    """New scene index for a keyboard command.

    next/prev clamp at the deck edges; a goto beyond the deck clamps too,
    with a warning. Commands that don't parse raise ValueError.
    """
    if command == "next":
        return min(deck_size - 1, current + 1)
    if command == "prev":
        return max(0, current - 1)
    if command.startswith("goto:"):
        try:
            n = int(command[5:])
        except ValueError as exc:
            raise ValueError(f"bad goto index {command[5:]!r}") from exc
        if not 0 <= n < deck_size:
            clamped = min(deck_size - 1, max(0, n))
            logger.warning("goto %d outside deck of %d, clamping to %d",
                           n, deck_size, clamped)
            return clamped
        return n
    raise ValueError(f"unknown navigation command {command!r}")
