"""Deterministic gesture-driven chart presentation engine.

Landmark frames from a hand tracker come in, debounced gesture events drive
chart overlay interactions, and a canonical render state goes out — to a
live WYSIWIS session over WebSocket, to SVG snapshots, or to byte-stable
replay streams for regression testing. All timing derives from frame
timestamps, so any session can be replayed exactly.
"""

from .charts import (ChartData, DegenerateDomain, NonInvertibleScale, SceneDeck,
                     SceneFormatError, load_deck, parse_deck)
from .engine import Engine
from .gestures import (ConfigRangeError, GestureConfig, GestureEvent,
                       GestureRuntime)
from .ingest import (FrameDecoder, FrameGate, LandmarkFrame,
                     NonMonotonicTimestamp, TraceFormatError)
from .scenes import TransitionPlan, navigate, plan_transition
from .server import SessionHub, build_app
from .state import canonical_json, diff_states, fold_diff, fold_stream, state_hash
from .svg import render_svg
from .trace import (MissingGolden, ReplayResult, SceneHashMismatch,
                    TimestampOutOfRange, Trace, load_trace, replay,
                    snapshot_svgs, write_trace)

__version__ = "0.1.0"

__all__ = [
    "ChartData", "ConfigRangeError", "DegenerateDomain", "Engine",
    "FrameDecoder", "FrameGate", "GestureConfig", "GestureEvent",
    "GestureRuntime", "LandmarkFrame", "MissingGolden",
    "NonInvertibleScale", "NonMonotonicTimestamp", "ReplayResult",
    "SceneDeck", "SceneFormatError", "SceneHashMismatch", "SessionHub",
    "TimestampOutOfRange", "Trace", "TraceFormatError", "TransitionPlan",
    "build_app", "canonical_json", "diff_states", "fold_diff", "fold_stream",
    "load_deck", "load_trace", "navigate", "parse_deck", "plan_transition",
    "render_svg", "replay", "snapshot_svgs", "state_hash", "write_trace",
]
