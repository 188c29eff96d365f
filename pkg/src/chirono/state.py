"""Canonical state serialization, key-path diffs, and folding.

The render state is a plain JSON tree. Mutations replace whole subtrees
(copy-on-write), never edit nested values in place, so an old snapshot and
a new one share unchanged branches by reference and diffing can skip them
with an identity check.

A diff is a flat map of dot-joined key paths to replacement values plus a
list of deleted paths. Folding a diff stream over a snapshot reproduces the
source state exactly; canonical JSON makes the equality byte-checkable.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(value: Any) -> str:
    """Stable text form: sorted keys, no whitespace, no NaN/Infinity."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def state_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def set_path(root: dict, path: str, value: Any) -> dict:
    """Return a copy of root with value placed at the dot-joined path.
    Intermediate objects are created as needed; siblings are shared."""
    keys = path.split(".")
    return _set(root, keys, value)


def _set(node: dict, keys: list[str], value: Any) -> dict:
    out = dict(node)
    if len(keys) == 1:
        out[keys[0]] = value
    else:
        child = node.get(keys[0])
        out[keys[0]] = _set(child if isinstance(child, dict) else {}, keys[1:], value)
    return out


def delete_path(root: dict, path: str) -> dict:
    """Return a copy of root with the dot-joined path removed (no-op when absent)."""
    keys = path.split(".")
    return _delete(root, keys)


def _delete(node: dict, keys: list[str]) -> dict:
    if keys[0] not in node:
        return node
    if len(keys) == 1:
        out = dict(node)
        del out[keys[0]]
        return out
    child = node[keys[0]]
    if not isinstance(child, dict):
        return node
    pruned = _delete(child, keys[1:])
    if pruned is child:
        return node
    out = dict(node)
    out[keys[0]] = pruned
    return out


def diff_states(old: dict, new: dict) -> dict | None:
    """Key-path replacements turning old into new, or None when equal.

    Only dict nodes are descended into; lists and scalars are replaced as
    whole values. Branches shared by reference are skipped outright.
    """
    sets: dict[str, Any] = {}
    dels: list[str] = []
    _walk(old, new, "", sets, dels)
    if not sets and not dels:
        return None
    diff: dict[str, Any] = {}
    if sets:
        diff["set"] = sets
    if dels:
        diff["delete"] = sorted(dels)
    return diff


def _walk(old: dict, new: dict, prefix: str, sets: dict, dels: list) -> None:
    if old is new:
        return
    for key, n in new.items():
        path = prefix + key if not prefix else f"{prefix}.{key}"
        if key not in old:
            sets[path] = n
            continue
        o = old[key]
        if o is n:
            continue
        if isinstance(o, dict) and isinstance(n, dict):
            _walk(o, n, path, sets, dels)
        elif o != n:
            sets[path] = n
    for key in old:
        if key not in new:
            dels.append(prefix + key if not prefix else f"{prefix}.{key}")


def fold_diff(state: dict, diff: dict) -> dict:
    """Apply one diff payload, returning a new state (input untouched)."""
    out = state
    for path in diff.get("delete", ()):
        out = delete_path(out, path)
    for path in sorted(diff.get("set", {})):
        out = set_path(out, path, diff["set"][path])
    return out


def fold_stream(snapshot: dict, diffs: list[dict]) -> dict:
    out = snapshot
    for d in diffs:
        out = fold_diff(out, d)
    return out
