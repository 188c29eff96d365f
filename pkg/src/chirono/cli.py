"""Command-line harness: replay, snapshot, diff-golden, record-proxy.

Exit codes: 0 pass, 1 divergence against goldens, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .charts import SceneFormatError, load_deck
from .gestures import ConfigRangeError
from .ingest import TraceFormatError
from .trace import (MissingGolden, SceneHashMismatch, TimestampOutOfRange,
                    diff_golden, load_trace, replay, snapshot_svgs)

USAGE_ERROR = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenes", required=True, help="scene deck JSON file")
    p.add_argument("--trace", required=True, help="trace JSONL file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chirono",
                                     description="deterministic session harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a trace, emit event/render streams")
    _add_common(p)
    p.add_argument("--mode", choices=("fast", "realtime"), default="fast")
    p.add_argument("--events", help="write the event log here (JSONL)")
    p.add_argument("--render", help="write the render stream here (JSONL)")

    p = sub.add_parser("snapshot", help="render SVG snapshots at timestamps")
    _add_common(p)
    p.add_argument("--at", type=int, action="append", required=True,
                   metavar="T_MS", help="snapshot time (repeatable)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("diff-golden", help="compare a replay against goldens")
    _add_common(p)
    p.add_argument("--golden", required=True, help="golden fixture directory")

    p = sub.add_parser("record-proxy", help="headless session server, optionally recording")
    p.add_argument("--scenes", required=True)
    p.add_argument("--listen", default=os.environ.get("CHIRONO_LISTEN", "127.0.0.1:8787"),
                   help="host:port (env CHIRONO_LISTEN)")
    p.add_argument("--config", help="gesture config JSON file")
    p.add_argument("--record", help="write the inbound trace here")
    p.add_argument("--debug-events", action="store_true",
                   help="broadcast gesture events to clients")
    return parser


def _cmd_replay(args) -> int:
    deck = load_deck(args.scenes)
    trace = load_trace(args.trace)
    result = replay(trace, deck, realtime=args.mode == "realtime")
    if args.events:
        Path(args.events).write_text(
            "".join(line + "\n" for line in result.event_lines), encoding="utf-8")
    if args.render:
        Path(args.render).write_text(
            "".join(line + "\n" for line in result.render_lines), encoding="utf-8")
    print(f"replayed {len(trace.records)} records: {result.frames} frames, "
          f"{len(result.event_lines)} events, {len(result.render_lines)} render messages")
    return 0


def _cmd_snapshot(args) -> int:
    deck = load_deck(args.scenes)
    trace = load_trace(args.trace)
    svgs = snapshot_svgs(trace, deck, args.at)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t, text in sorted(svgs.items()):
        path = out / f"snap_{t}.svg"
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
    return 0


def _cmd_diff_golden(args) -> int:
    deck = load_deck(args.scenes)
    div = diff_golden(args.trace, deck, args.golden)
    if div is None:
        print(f"{Path(args.trace).stem}: pass")
        return 0
    print(f"{Path(args.trace).stem}: FAIL — {div.describe()}")
    return 1


def _cmd_record_proxy(args) -> int:
    from .server import serve

    serve(args.scenes, args.listen, config_path=args.config,
          record_path=args.record, debug_events=args.debug_events)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "replay": _cmd_replay,
        "snapshot": _cmd_snapshot,
        "diff-golden": _cmd_diff_golden,
        "record-proxy": _cmd_record_proxy,
    }[args.command]
    try:
        return handler(args)
    except (SceneHashMismatch, TimestampOutOfRange, MissingGolden, TraceFormatError,
            SceneFormatError, ConfigRangeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
