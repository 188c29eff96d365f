"""Transition planning and deck navigation."""

from __future__ import annotations

import logging

import pytest

from chirono.charts import parse_deck
from chirono.scenes import TransitionPlan, navigate, plan_transition

from conftest import simple_table


def _deck():
    chart = {"kind": "Line", "table": "t1", "x_field": "year", "y_fields": ["a"]}
    return parse_deck({
        "tables": simple_table(),
        "scenes": [
            {"id": "one", "overlays": [
                {"id": "stays", "frame": [0, 0, 0.5, 0.5], "chart": chart},
                {"id": "goes", "frame": [0.5, 0.5, 0.5, 0.5], "exit": "fade",
                 "chart": chart}]},
            {"id": "two", "overlays": [
                {"id": "stays", "frame": [0.1, 0.1, 0.8, 0.8], "chart": chart},
                {"id": "arrives", "frame": [0, 0.6, 0.4, 0.4], "enter": "bottom",
                 "chart": chart}]},
            {"id": "three", "overlays": [
                {"id": "stays", "frame": [0.1, 0.1, 0.8, 0.8], "chart": chart}]},
        ]})


def test_plan_splits_exits_enters_morphs():
    deck = _deck()
    plan = plan_transition(deck.scenes[0], deck.scenes[1])
    assert plan.exits == ({"overlay": "goes", "style": "fade"},)
    assert plan.enters == ({"overlay": "arrives", "style": "bottom"},)
    assert plan.morphs == ({"overlay": "stays",
                            "from_frame": [0, 0, 0.5, 0.5],
                            "to_frame": [0.1, 0.1, 0.8, 0.8]},)
    assert not plan.empty


def test_plan_sets_are_disjoint_by_overlay():
    plan = plan_transition(_deck().scenes[0], _deck().scenes[1])
    ids = ([e["overlay"] for e in plan.exits]
           + [e["overlay"] for e in plan.enters]
           + [m["overlay"] for m in plan.morphs])
    assert len(ids) == len(set(ids))


def test_plan_same_scene_is_empty():
    deck = _deck()
    for scene in deck.scenes:
        assert plan_transition(scene, scene).empty


def test_plan_same_frame_needs_no_morph():
    deck = _deck()
    plan = plan_transition(deck.scenes[1], deck.scenes[2])
    assert plan.morphs == ()
    assert plan.exits == ({"overlay": "arrives", "style": "left"},)
    assert plan.enters == ()


def test_plan_from_nothing_enters_everything():
    deck = _deck()
    plan = plan_transition(None, deck.scenes[0])
    assert [e["overlay"] for e in plan.enters] == ["stays", "goes"]
    assert plan.exits == () and plan.morphs == ()


def test_plan_to_json_round_trips_shape():
    plan = plan_transition(_deck().scenes[0], _deck().scenes[1], duration_ms=250)
    j = plan.to_json()
    assert set(j) == {"exits", "enters", "morphs", "duration_ms"}
    assert j["duration_ms"] == 250
    assert TransitionPlan(
        tuple(j["exits"]), tuple(j["enters"]), tuple(j["morphs"]),
        j["duration_ms"]) == plan


# ---------- navigation ----------


@pytest.mark.parametrize("current, command, expected", [
    (0, "next", 1),
    (3, "next", 3),       # clamped at the last scene
    (2, "prev", 1),
    (0, "prev", 0),       # clamped at the first scene
    (0, "goto:2", 2),
    (3, "goto:0", 0),
])
def test_navigate_basic(current, command, expected):
    assert navigate(4, current, command) == expected


@pytest.mark.parametrize("command, expected", [
    ("goto:9", 3),
    ("goto:4", 3),
    ("goto:-1", 0),
])
def test_navigate_goto_out_of_range_clamps_with_warning(command, expected, caplog):
    with caplog.at_level(logging.WARNING, logger="chirono.scenes"):
        assert navigate(4, 1, command) == expected
    assert any("clamping" in r.message for r in caplog.records)


def test_navigate_in_range_goto_is_silent(caplog):
    with caplog.at_level(logging.WARNING, logger="chirono.scenes"):
        assert navigate(4, 1, "goto:3") == 3
    assert not caplog.records


@pytest.mark.parametrize("command", ["goto:abc", "goto:", "jump", "NEXT", "goto:1.5"])
def test_navigate_rejects_unparseable_commands(command):
    with pytest.raises(ValueError):
        navigate(4, 0, command)
