#!/usr/bin/env python3
"""Generate scenes/study_deck.json, the eight-scene demo deck.

Synthesized higher-education data, closed-form so regeneration is
byte-stable. Run from the repository root:

    python3 scripts/make_deck.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

SECTORS = ["All institutions", "Public 4-year", "Private 4-year"]
FUNDING = ["Tuition", "State", "Federal", "Gifts", "Endowment", "Other"]
SECTOR_COLORS = {
    "All institutions": "#4e79a7",
    "Public 4-year": "#59a14f",
    "Private 4-year": "#e15759",
}
FUNDING_COLORS = {
    "Tuition": "#4e79a7", "State": "#f28e2c", "Federal": "#e15759",
    "Gifts": "#76b7b2", "Endowment": "#59a14f", "Other": "#edc949",
}
GENERATIONS = [
    {"label": "Boomers", "lo": 1964, "hi": 1982},
    {"label": "GenX", "lo": 1983, "hi": 1999},
    {"label": "Millennials", "lo": 2000, "hi": 2015},
]


def tuition_all(year: int) -> int:
    base = 320 * (1.067 ** (year - 1960))
    wiggle = 120 * math.sin((year - 1960) / 4.7)
    return int(round(base + wiggle + 2 * (year - 1960)))


def tuition_rows() -> list[list]:
    rows = []
    for y in range(1960, 2016):
        a = tuition_all(y)
        pub = int(round(a * 0.58 + 60 * math.sin((y - 1960) / 3.1)))
        priv = int(round(a * 2.55 + 180 * math.sin((y - 1960) / 5.3)))
        rows.append([y, a, pub, priv])
    return rows


def tuition_long_rows() -> list[list]:
    rows = []
    for y, a, pub, priv in tuition_rows():
        rows.append([y, "All institutions", a])
        rows.append([y, "Public 4-year", pub])
        rows.append([y, "Private 4-year", priv])
    return rows


def enrollcost_rows() -> list[list]:
    rows = []
    for y in range(1970, 2016):
        t = y - 1970
        enroll = round(8.6 + 0.22 * t - 0.0018 * t * t, 2)
        cost = round(9.0 + 0.38 * t + 0.6 * math.sin(t / 3.9), 1)
        rows.append([y, enroll, cost])
    return rows


def degrees_rows() -> list[list]:
    rows = []
    for y in range(1995, 2016):
        t = y - 1995
        rows.append([
            y,
            int(540 + 9.5 * t),      # associate
            int(1160 + 28 * t),      # bachelor
            int(400 + 17 * t),       # master
            int(45 + 1.8 * t),       # doctorate
            int(300 + 6 * t),        # certificate
        ])
    return rows


def funding_by_decade_rows() -> list[list]:
    base = {"Tuition": 25, "State": 31, "Federal": 16,
            "Gifts": 10, "Endowment": 8, "Other": 10}
    drift = {"Tuition": 3.2, "State": -2.8, "Federal": 0.4,
             "Gifts": 0.4, "Endowment": -0.6, "Other": -0.6}
    rows = []
    for i, decade in enumerate(["1980s", "1990s", "2000s", "2010s"]):
        for src in FUNDING:
            rows.append([decade, src, round(base[src] + drift[src] * i, 1)])
    return rows


def deck() -> dict:
    tables = {
        "tuition": {
            "columns": [{"name": "year", "type": "number"},
                        {"name": "all", "type": "number"},
                        {"name": "public4", "type": "number"},
                        {"name": "private4", "type": "number"}],
            "rows": tuition_rows(),
        },
        "tuition_long": {
            "columns": [{"name": "year", "type": "number"},
                        {"name": "sector", "type": "category"},
                        {"name": "usd", "type": "number"}],
            "rows": tuition_long_rows(),
        },
        "sectors": {
            "columns": [{"name": "sector", "type": "category"}],
            "rows": [[s] for s in SECTORS],
        },
        "funding": {
            "columns": [{"name": "source", "type": "category"},
                        {"name": "share", "type": "number"}],
            "rows": [["Tuition", 34], ["State", 23], ["Federal", 16],
                     ["Gifts", 12], ["Endowment", 8], ["Other", 7]],
        },
        "funding_by_decade": {
            "columns": [{"name": "decade", "type": "category"},
                        {"name": "source", "type": "category"},
                        {"name": "share", "type": "number"}],
            "rows": funding_by_decade_rows(),
        },
        "enrollcost": {
            "columns": [{"name": "year", "type": "number"},
                        {"name": "enrollment_m", "type": "number"},
                        {"name": "cost_k", "type": "number"}],
            "rows": enrollcost_rows(),
        },
        "degrees": {
            "columns": [{"name": "year", "type": "number"},
                        {"name": "associate", "type": "number"},
                        {"name": "bachelor", "type": "number"},
                        {"name": "master", "type": "number"},
                        {"name": "doctorate", "type": "number"},
                        {"name": "certificate", "type": "number"}],
            "rows": degrees_rows(),
        },
        "spend_items": {
            "columns": [{"name": "item", "type": "category"},
                        {"name": "amount", "type": "number"}],
            "rows": [["Instruction", 27], ["Research", 12], ["Services", 9],
                     ["Academic", 10], ["Admin", 9], ["Auxiliary", 11]],
        },
        "decade_growth": {
            "columns": [{"name": "decade", "type": "category"},
                        {"name": "pct", "type": "number"}],
            "rows": [["1960s", 21], ["1970s", 38], ["1980s", 74],
                     ["1990s", 61], ["2000s", 72], ["2010s", 29]],
        },
    }

    tuition_line_full = {
        "id": "tuition_line",
        "frame": [0.05, 0.08, 0.9, 0.84],
        "chart": {
            "kind": "Line", "table": "tuition", "x_field": "year",
            "x_scale": "Temporal", "y_fields": ["all"],
            "colors": {"all": "#4e79a7"},
            "interval_regions": GENERATIONS,
        },
    }

    scenes = [
        {
            "id": "tuition-trend",
            "overlays": [tuition_line_full],
        },
        {
            "id": "tuition-sectors",
            "overlays": [
                {
                    "id": "sector_lines",
                    "frame": [0.05, 0.08, 0.6, 0.84],
                    "chart": {
                        "kind": "Line", "table": "tuition_long",
                        "x_field": "year", "x_scale": "Temporal",
                        "category_field": "sector", "y_field": "usd",
                        "colors": SECTOR_COLORS,
                        "category_domain_id": "sector",
                    },
                },
                {
                    "id": "sector_legend",
                    "frame": [0.68, 0.3, 0.27, 0.35],
                    "enter": "bottom",
                    "chart": {
                        "kind": "Legend", "table": "sectors",
                        "category_field": "sector",
                        "colors": SECTOR_COLORS,
                        "category_domain_id": "sector",
                        "margins": [0.08, 0.08, 0.08, 0.08],
                    },
                },
            ],
        },
        {
            "id": "funding-mix",
            "background": {"darken": True},
            "overlays": [
                {
                    "id": "funding_pie",
                    "frame": [0.05, 0.15, 0.38, 0.7],
                    "chart": {
                        "kind": "Pie", "table": "funding",
                        "category_field": "source", "y_field": "share",
                        "colors": FUNDING_COLORS,
                        "category_domain_id": "funding",
                    },
                },
                {
                    "id": "funding_bars",
                    "frame": [0.5, 0.1, 0.45, 0.8],
                    "chart": {
                        "kind": "StackedBar", "table": "funding_by_decade",
                        "x_field": "decade",
                        "category_field": "source", "y_field": "share",
                        "colors": FUNDING_COLORS,
                        "category_domain_id": "funding",
                    },
                },
            ],
        },
        {
            "id": "enrollment-cost",
            "overlays": [
                {
                    "id": "enroll_area",
                    "frame": [0.04, 0.1, 0.44, 0.8],
                    "chart": {
                        "kind": "Area", "table": "enrollcost",
                        "x_field": "year", "x_scale": "Temporal",
                        "y_fields": ["enrollment_m"],
                        "colors": {"enrollment_m": "#59a14f"},
                        "shared_domain_id": "years",
                    },
                },
                {
                    "id": "cost_bars",
                    "frame": [0.52, 0.1, 0.44, 0.8],
                    "chart": {
                        "kind": "Bar", "table": "enrollcost",
                        "x_field": "year", "x_scale": "Temporal",
                        "y_fields": ["cost_k"],
                        "colors": {"cost_k": "#f28e2c"},
                        "shared_domain_id": "years",
                    },
                },
            ],
            "bindings": [
                {"kind": "multiply", "source": "enroll_area", "target": "cost_bars"},
            ],
        },
        {
            "id": "degrees",
            "overlays": [
                {
                    "id": "degrees_stack",
                    "frame": [0.05, 0.08, 0.9, 0.84],
                    "chart": {
                        "kind": "StackedArea", "table": "degrees",
                        "x_field": "year", "x_scale": "Temporal",
                        "y_fields": ["associate", "bachelor", "master",
                                     "doctorate", "certificate"],
                        "colors": {"associate": "#76b7b2", "bachelor": "#4e79a7",
                                   "master": "#f28e2c", "doctorate": "#e15759",
                                   "certificate": "#b07aa1"},
                        "hidden_series": ["certificate"],
                    },
                },
            ],
        },
        {
            "id": "compare",
            "overlays": [
                {
                    "id": "spend_bars",
                    "frame": [0.04, 0.12, 0.44, 0.76],
                    "chart": {
                        "kind": "Bar", "table": "spend_items",
                        "x_field": "item", "y_fields": ["amount"],
                        "colors": {"amount": "#4e79a7"},
                    },
                },
                {
                    "id": "funding_pie_cmp",
                    "frame": [0.54, 0.15, 0.4, 0.7],
                    "chart": {
                        "kind": "Pie", "table": "funding",
                        "category_field": "source", "y_field": "share",
                        "colors": FUNDING_COLORS,
                    },
                },
            ],
        },
        {
            "id": "tuition-revisit",
            "overlays": [
                {
                    "id": "tuition_line",
                    "frame": [0.05, 0.3, 0.42, 0.6],
                    "chart": tuition_line_full["chart"],
                },
                {
                    "id": "growth_bars",
                    "frame": [0.53, 0.15, 0.42, 0.7],
                    "exit": "fade",
                    "chart": {
                        "kind": "Bar", "table": "decade_growth",
                        "x_field": "decade", "y_fields": ["pct"],
                        "colors": {"pct": "#e15759"},
                    },
                },
            ],
        },
        {
            "id": "closing",
            "overlays": [tuition_line_full],
        },
    ]
    return {"tables": tables, "scenes": scenes}


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    out = root / "scenes" / "study_deck.json"
    out.write_text(json.dumps(deck(), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
