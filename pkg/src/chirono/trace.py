"""Deterministic session traces: record format, replay, snapshots, goldens.

A trace is JSON Lines. The first line is a header carrying the format
version, the gesture config, and the sha256 of the scene file the session
ran against. Every following line is either a landmark frame record
{"t_ms", "hands": [...]} or a key record {"t_ms", "key": "..."}, sorted by
t_ms. Replay is a pure function of (trace, scenes): it rebuilds the whole
pipeline and emits an event log plus a render-state stream (one render_full
snapshot, then render_diff envelopes), byte-identical run to run whether or
not wall-clock pacing is enabled.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .charts import SceneDeck
from .engine import Engine
from .gestures import GestureConfig
from .ingest import FrameDecoder, TraceFormatError
from .state import canonical_json, diff_states
from .svg import render_svg

TRACE_VERSION = 1


class SceneHashMismatch(ValueError):
    """Trace was recorded against a different scene file."""


class TimestampOutOfRange(ValueError):
    """Snapshot time outside the trace span."""


class MissingGolden(FileNotFoundError):
    """Golden fixture absent for this trace."""


@dataclass(frozen=True)
class Trace:
    config: GestureConfig
    scene_hash: str
    records: tuple[dict, ...]

    @property
    def last_t(self) -> int:
        return self.records[-1]["t_ms"] if self.records else 0


def _check_record(rec: object, line_no: int) -> dict:
    if not isinstance(rec, dict):
        raise TraceFormatError(f"trace line {line_no}: expected an object")
    t = rec.get("t_ms")
    if not isinstance(t, int) or isinstance(t, bool):
        raise TraceFormatError(f"trace line {line_no}: t_ms must be an integer")
    if ("hands" in rec) == ("key" in rec):
        raise TraceFormatError(f"trace line {line_no}: need exactly one of hands/key")
    return rec


def load_trace(path: str | Path) -> Trace:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty trace file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path} line 1: {exc}") from exc
    if not isinstance(header, dict) or header.get("version") != TRACE_VERSION:
        raise TraceFormatError(f"{path}: unsupported trace header")
    scene_hash = header.get("scene_hash")
    if not isinstance(scene_hash, str):
        raise TraceFormatError(f"{path}: header needs scene_hash")
    config = GestureConfig.from_json(header.get("config", {}))
    records = []
    last_t = None
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = _check_record(json.loads(line), i)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path} line {i}: {exc}") from exc
        if last_t is not None and rec["t_ms"] < last_t:
            raise TraceFormatError(f"{path} line {i}: records must be sorted by t_ms")
        last_t = rec["t_ms"]
        records.append(rec)
    return Trace(config=config, scene_hash=scene_hash, records=tuple(records))


def write_trace(path: str | Path, config: GestureConfig, scene_hash: str,
                records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"version": TRACE_VERSION, "config": config.to_json(),
                             "scene_hash": scene_hash}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


@dataclass
class ReplayResult:
    event_lines: list[str]
    render_lines: list[str]
    final_state: dict
    frames: int


def _check_hash(trace: Trace, deck: SceneDeck) -> None:
    if deck.file_hash != trace.scene_hash:
        raise SceneHashMismatch(
            f"trace recorded against scene hash {trace.scene_hash[:12]}…, "
            f"supplied file hashes to {str(deck.file_hash)[:12]}…")


def replay(trace: Trace, deck: SceneDeck, realtime: bool = False,
           until_ms: int | None = None) -> ReplayResult:
    """Drive the pipeline with every record (or those with t_ms <= until_ms).

    realtime paces wall-clock sleeps between records; the outputs do not
    depend on it because all behavior keys off record timestamps.
    """
    _check_hash(trace, deck)
    engine = Engine(deck, trace.config)
    decoder = FrameDecoder(confidence_min=trace.config.confidence_min,
                           mirror=trace.config.mirror)
    event_lines: list[str] = []
    render_lines: list[str] = []
    seq = 1
    render_lines.append(canonical_json({
        "type": "render_full", "seq": seq, "t_ms": 0,
        "payload": {"state": engine.snapshot(), "config": trace.config.to_json()}}))
    last_state = engine.snapshot()
    prev_t = None
    frames = 0
    for rec in trace.records:
        t = rec["t_ms"]
        if until_ms is not None and t > until_ms:
            break
        if realtime and prev_t is not None and t > prev_t:
            time.sleep((t - prev_t) / 1000.0)
        prev_t = t
        if "hands" in rec:
            frame = decoder.decode(rec)
            if frame is None:
                continue
            frames += 1
            for ev in engine.on_frame(frame):
                event_lines.append(canonical_json(ev.to_json()))
        else:
            engine.on_key(t, rec["key"])
        new = engine.snapshot()
        diff = diff_states(last_state, new)
        if diff is not None:
            seq += 1
            render_lines.append(canonical_json(
                {"type": "render_diff", "seq": seq, "t_ms": t, "payload": {"diff": diff}}))
            last_state = new
    return ReplayResult(event_lines=event_lines, render_lines=render_lines,
                        final_state=engine.snapshot(), frames=frames)


def snapshot_svgs(trace: Trace, deck: SceneDeck, at_ts: list[int]) -> dict[int, str]:
    """Render the state at each requested timestamp to SVG markup."""
    _check_hash(trace, deck)
    for t in at_ts:
        if t < 0 or t > trace.last_t:
            raise TimestampOutOfRange(
                f"t={t} outside trace span [0, {trace.last_t}]")
    out: dict[int, str] = {}
    for t in at_ts:
        result = replay(trace, deck, until_ms=t)
        out[t] = render_svg(result.final_state, t_ms=t)
    return out


# ---------- golden comparison ----------


def _json_pointer(a, b, path: str = "") -> str:
    """Pointer to the first difference between two JSON values."""
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                return f"{path}/{k}"
            if a[k] != b[k]:
                return _json_pointer(a[k], b[k], f"{path}/{k}")
    if isinstance(a, list) and isinstance(b, list):
        for i in range(max(len(a), len(b))):
            if i >= len(a) or i >= len(b) or a[i] != b[i]:
                if i < len(a) and i < len(b):
                    return _json_pointer(a[i], b[i], f"{path}/{i}")
                return f"{path}/{i}"
    return path or "/"


@dataclass(frozen=True)
class Divergence:
    stream: str  # "events" | "render"
    line_no: int  # 1-based line in the stream
    t_ms: int | None
    pointer: str

    def describe(self) -> str:
        at = f" t_ms={self.t_ms}" if self.t_ms is not None else ""
        return f"{self.stream} line {self.line_no}{at}: differs at {self.pointer}"


def _compare_stream(stream: str, got: list[str], want: list[str]) -> Divergence | None:
    for i, (g, w) in enumerate(zip(got, want), start=1):
        if g != w:
            gj, wj = json.loads(g), json.loads(w)
            t = gj.get("t_ms") if isinstance(gj, dict) else None
            return Divergence(stream, i, t, _json_pointer(gj, wj))
    if len(got) != len(want):
        n = min(len(got), len(want)) + 1
        longer = got if len(got) > len(want) else want
        extra = json.loads(longer[n - 1])
        t = extra.get("t_ms") if isinstance(extra, dict) else None
        return Divergence(stream, n, t, "/")
    return None


def golden_paths(golden_dir: str | Path, trace_path: str | Path) -> tuple[Path, Path]:
    stem = Path(trace_path).stem
    d = Path(golden_dir)
    return d / f"{stem}.events.jsonl", d / f"{stem}.render.jsonl"


def diff_golden(trace_path: str | Path, deck: SceneDeck,
                golden_dir: str | Path) -> Divergence | None:
    """Replay and compare against committed goldens; None means match."""
    trace = load_trace(trace_path)
    ev_path, rd_path = golden_paths(golden_dir, trace_path)
    if not ev_path.exists() or not rd_path.exists():
        raise MissingGolden(f"missing golden fixtures for {Path(trace_path).stem}")
    result = replay(trace, deck)
    want_ev = ev_path.read_text(encoding="utf-8").splitlines()
    want_rd = rd_path.read_text(encoding="utf-8").splitlines()
    div = _compare_stream("events", result.event_lines, want_ev)
    if div is not None:
        return div
    return _compare_stream("render", result.render_lines, want_rd)


def write_golden(trace_path: str | Path, deck: SceneDeck,
                 golden_dir: str | Path) -> None:
    """Regenerate golden fixtures for one trace (review the diff before
    committing; goldens define expected behavior)."""
    trace = load_trace(trace_path)
    ev_path, rd_path = golden_paths(golden_dir, trace_path)
    ev_path.parent.mkdir(parents=True, exist_ok=True)
    result = replay(trace, deck)
    ev_path.write_text("".join(line + "\n" for line in result.event_lines),
                       encoding="utf-8")
    rd_path.write_text("".join(line + "\n" for line in result.render_lines),
                       encoding="utf-8")
