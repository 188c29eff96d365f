"""Chart model: scene files, data tables, scales, and hit-testing.

Everything lives in normalized screen coordinates ([0,1] x [0,1], origin
top-left). An overlay owns a frame rectangle; margins inside the frame
carve out the plot rectangle. Every point of the canvas classifies to
exactly one region of the topmost interactive overlay under it (interior,
one of four margins, the two bottom corners, a legend swatch or pie wedge)
or to Outside.

Scales are invertible affine maps between data domain and plot position,
except band scales which only resolve to the nearest band center. Pie
wedges live on angles measured clockwise from 12 o'clock in plot-local
units, so membership does not depend on the rendered aspect ratio.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ingest import Point2

CHART_KINDS = ("Bar", "StackedBar", "Line", "Area", "StackedArea", "Pie", "Legend")
STACKED_KINDS = ("StackedBar", "StackedArea")
RECTILINEAR_KINDS = ("Bar", "StackedBar", "Line", "Area", "StackedArea")
COLUMN_TYPES = ("temporal", "number", "category")
SCALE_KINDS = ("Linear", "Temporal", "Band")
ENTER_EXIT_STYLES = ("fade", "left", "right", "top", "bottom")

DEFAULT_MARGINS = (0.1, 0.1, 0.1, 0.1)  # left, right, top, bottom fractions
PIE_RADIUS_LOCAL = 0.45  # in plot-local units where the plot spans [-0.5, 0.5]
BAR_FILL_RATIO = 0.8

PALETTE = ("#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b",
           "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac")


class SceneFormatError(ValueError):
    """Scene file fails structural validation."""


class DegenerateDomain(ValueError):
    """A resolved scale domain has zero extent."""


class NonInvertibleScale(TypeError):
    """Position-to-domain inversion asked of a band scale."""


# ---------- data tables ----------


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    type: str  # temporal | number | category


@dataclass(frozen=True)
class DataTable:
    id: str
    columns: tuple[ColumnSpec, ...]
    rows: tuple[tuple, ...]

    def column_index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise SceneFormatError(f"table {self.id!r}: no column {name!r}")

    def column_type(self, name: str) -> str:
        return self.columns[self.column_index(name)].type

    def column(self, name: str) -> list:
        i = self.column_index(name)
        return [row[i] for row in self.rows]


def _check_cell(value: object, col: ColumnSpec, table_id: str) -> object:
    if col.type == "category":
        if not isinstance(value, str):
            raise SceneFormatError(f"table {table_id!r}: column {col.name!r} expects strings")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneFormatError(f"table {table_id!r}: column {col.name!r} expects numbers")
    if not math.isfinite(float(value)):
        raise SceneFormatError(f"table {table_id!r}: non-finite value in {col.name!r}")
    return value


def parse_table(table_id: str, raw: object, base_dir: Path | None = None) -> DataTable:
    if not isinstance(raw, dict):
        raise SceneFormatError(f"table {table_id!r}: expected an object")
    raw_cols = raw.get("columns")
    if not isinstance(raw_cols, list) or not raw_cols:
        raise SceneFormatError(f"table {table_id!r}: columns required")
    cols = []
    for rc in raw_cols:
        if not isinstance(rc, dict) or not isinstance(rc.get("name"), str):
            raise SceneFormatError(f"table {table_id!r}: bad column spec")
        if rc.get("type") not in COLUMN_TYPES:
            raise SceneFormatError(f"table {table_id!r}: column type must be one of {COLUMN_TYPES}")
        cols.append(ColumnSpec(rc["name"], rc["type"]))
    names = [c.name for c in cols]
    if len(set(names)) != len(names):
        raise SceneFormatError(f"table {table_id!r}: duplicate column names")
    if "csv" in raw:
        if "rows" in raw:
            raise SceneFormatError(f"table {table_id!r}: give rows or csv, not both")
        if base_dir is None:
            raise SceneFormatError(f"table {table_id!r}: csv reference needs a file context")
        csv_path = base_dir / raw["csv"]
        raw_rows = _read_csv_rows(csv_path, cols, table_id)
    else:
        raw_rows = raw.get("rows")
        if not isinstance(raw_rows, list):
            raise SceneFormatError(f"table {table_id!r}: rows required")
    rows = []
    for r in raw_rows:
        if not isinstance(r, (list, tuple)) or len(r) != len(cols):
            raise SceneFormatError(f"table {table_id!r}: row arity mismatch")
        rows.append(tuple(_check_cell(v, c, table_id) for v, c in zip(r, cols)))
    return DataTable(table_id, tuple(cols), tuple(rows))


def _read_csv_rows(path: Path, cols: list[ColumnSpec], table_id: str) -> list[list]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneFormatError(f"table {table_id!r}: cannot read csv {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header != [c.name for c in cols]:
        raise SceneFormatError(f"table {table_id!r}: csv header does not match declared columns")
    rows = []
    for line in reader:
        if not line:
            continue
        row = []
        for cell, col in zip(line, cols):
            if col.type == "category":
                row.append(cell)
            else:
                try:
                    num = float(cell)
                except ValueError as exc:
                    raise SceneFormatError(f"table {table_id!r}: bad number {cell!r}") from exc
                row.append(int(num) if num.is_integer() else num)
        rows.append(row)
    return rows


# ---------- scene specs ----------


@dataclass(frozen=True)
class IntervalRegion:
    label: str
    lo: float
    hi: float


@dataclass(frozen=True)
class ChartSpec:
    kind: str
    table: str
    x_field: str | None = None
    x_scale: str | None = None  # Linear | Temporal | Band (defaults from column type)
    y_fields: tuple[str, ...] = ()
    category_field: str | None = None
    y_field: str | None = None
    colors: dict[str, str] = field(default_factory=dict)
    margins: tuple[float, float, float, float] = DEFAULT_MARGINS
    hidden_series: tuple[str, ...] = ()
    interval_regions: tuple[IntervalRegion, ...] = ()
    shared_domain_id: str | None = None
    category_domain_id: str | None = None


@dataclass(frozen=True)
class OverlaySpec:
    id: str
    frame: tuple[float, float, float, float]  # x, y, w, h
    chart: ChartSpec
    z: int = 0
    interactive: bool = True
    enter: str = "right"
    exit: str = "left"


@dataclass(frozen=True)
class Binding:
    kind: str  # only "multiply" for now
    source: str
    target: str


@dataclass(frozen=True)
class SceneSpec:
    id: str
    overlays: tuple[OverlaySpec, ...]
    background: dict = field(default_factory=lambda: {"darken": False, "grayscale": False})
    bindings: tuple[Binding, ...] = ()

    def overlay(self, overlay_id: str) -> OverlaySpec:
        for ov in self.overlays:
            if ov.id == overlay_id:
                return ov
        raise KeyError(overlay_id)


@dataclass(frozen=True)
class SceneDeck:
    scenes: tuple[SceneSpec, ...]
    tables: dict[str, DataTable]
    file_hash: str | None = None  # sha256 of the scene file bytes when loaded from disk


def _ident(value: object, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise SceneFormatError(f"{what}: id must be a non-empty string")
    if not all(c.isalnum() or c in "_-" for c in value):
        raise SceneFormatError(f"{what}: id {value!r} may only use letters, digits, _ and -")
    return value


def _parse_chart(raw: object, where: str) -> ChartSpec:
    if not isinstance(raw, dict):
        raise SceneFormatError(f"{where}: chart must be an object")
    kind = raw.get("kind")
    if kind not in CHART_KINDS:
        raise SceneFormatError(f"{where}: chart kind must be one of {CHART_KINDS}")
    table = raw.get("table")
    if not isinstance(table, str):
        raise SceneFormatError(f"{where}: chart.table required")
    y_fields = raw.get("y_fields", [])
    if not isinstance(y_fields, list) or not all(isinstance(s, str) for s in y_fields):
        raise SceneFormatError(f"{where}: y_fields must be a list of strings")
    margins = raw.get("margins", list(DEFAULT_MARGINS))
    if (not isinstance(margins, list) or len(margins) != 4
            or not all(isinstance(m, (int, float)) and 0 <= m <= 0.45 for m in margins)):
        raise SceneFormatError(f"{where}: margins must be four fractions in [0, 0.45]")
    regions = []
    for rr in raw.get("interval_regions", []):
        if (not isinstance(rr, dict) or not isinstance(rr.get("label"), str)
                or not isinstance(rr.get("lo"), (int, float)) or not isinstance(rr.get("hi"), (int, float))
                or not rr["lo"] < rr["hi"]):
            raise SceneFormatError(f"{where}: interval region needs label and lo < hi")
        regions.append(IntervalRegion(rr["label"], rr["lo"], rr["hi"]))
    colors = raw.get("colors", {})
    if not isinstance(colors, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in colors.items()):
        raise SceneFormatError(f"{where}: colors must map names to strings")
    hidden = raw.get("hidden_series", [])
    if not isinstance(hidden, list) or not all(isinstance(s, str) for s in hidden):
        raise SceneFormatError(f"{where}: hidden_series must be a list of strings")
    x_scale = raw.get("x_scale")
    if x_scale is not None and x_scale not in SCALE_KINDS:
        raise SceneFormatError(f"{where}: x_scale must be one of {SCALE_KINDS}")
    spec = ChartSpec(
        kind=kind, table=table,
        x_field=raw.get("x_field"), x_scale=x_scale,
        y_fields=tuple(y_fields),
        category_field=raw.get("category_field"), y_field=raw.get("y_field"),
        colors=dict(colors), margins=tuple(margins),
        hidden_series=tuple(hidden), interval_regions=tuple(regions),
        shared_domain_id=raw.get("shared_domain_id"),
        category_domain_id=raw.get("category_domain_id"),
    )
    if kind in RECTILINEAR_KINDS:
        if spec.x_field is None:
            raise SceneFormatError(f"{where}: {kind} chart needs x_field")
        wide, long = bool(spec.y_fields), spec.category_field is not None
        if wide == long:
            raise SceneFormatError(f"{where}: give either y_fields or category_field + y_field")
        if long and spec.y_field is None:
            raise SceneFormatError(f"{where}: category_field needs y_field")
    elif kind == "Pie":
        if spec.category_field is None or spec.y_field is None:
            raise SceneFormatError(f"{where}: Pie needs category_field and y_field")
    elif kind == "Legend":
        if spec.category_field is None:
            raise SceneFormatError(f"{where}: Legend needs category_field")
    return spec


def _parse_overlay(raw: object, where: str) -> OverlaySpec:
    if not isinstance(raw, dict):
        raise SceneFormatError(f"{where}: overlay must be an object")
    oid = _ident(raw.get("id"), where)
    frame = raw.get("frame")
    if (not isinstance(frame, list) or len(frame) != 4
            or not all(isinstance(v, (int, float)) for v in frame)):
        raise SceneFormatError(f"{where}: frame must be [x, y, w, h]")
    x, y, w, h = (float(v) for v in frame)
    if not (0 <= x and 0 <= y and w > 0 and h > 0 and x + w <= 1 + 1e-9 and y + h <= 1 + 1e-9):
        raise SceneFormatError(f"{where}: frame must sit inside the unit square")
    z = raw.get("z", 0)
    if not isinstance(z, int) or isinstance(z, bool):
        raise SceneFormatError(f"{where}: z must be an integer")
    enter = raw.get("enter", "right")
    exit_ = raw.get("exit", "left")
    if enter not in ENTER_EXIT_STYLES or exit_ not in ENTER_EXIT_STYLES:
        raise SceneFormatError(f"{where}: enter/exit must be one of {ENTER_EXIT_STYLES}")
    interactive = raw.get("interactive", True)
    if not isinstance(interactive, bool):
        raise SceneFormatError(f"{where}: interactive must be a boolean")
    chart = _parse_chart(raw.get("chart"), f"{where}.chart")
    return OverlaySpec(id=oid, frame=(x, y, w, h), chart=chart, z=z,
                       interactive=interactive, enter=enter, exit=exit_)


def parse_deck(raw: object, base_dir: Path | None = None, file_hash: str | None = None) -> SceneDeck:
    if not isinstance(raw, dict):
        raise SceneFormatError("deck: expected a top-level object")
    raw_tables = raw.get("tables", {})
    if not isinstance(raw_tables, dict):
        raise SceneFormatError("deck: tables must be an object")
    tables = {}
    for tid, rt in raw_tables.items():
        _ident(tid, "table")
        tables[tid] = parse_table(tid, rt, base_dir)
    raw_scenes = raw.get("scenes")
    if not isinstance(raw_scenes, list) or not raw_scenes:
        raise SceneFormatError("deck: at least one scene required")
    scenes = []
    seen_scene_ids = set()
    for i, rs in enumerate(raw_scenes):
        if not isinstance(rs, dict):
            raise SceneFormatError(f"scene[{i}]: expected an object")
        sid = _ident(rs.get("id"), f"scene[{i}]")
        if sid in seen_scene_ids:
            raise SceneFormatError(f"scene[{i}]: duplicate scene id {sid!r}")
        seen_scene_ids.add(sid)
        overlays = []
        seen = set()
        for j, ro in enumerate(rs.get("overlays", [])):
            ov = _parse_overlay(ro, f"scene {sid!r} overlay[{j}]")
            if ov.id in seen:
                raise SceneFormatError(f"scene {sid!r}: duplicate overlay id {ov.id!r}")
            seen.add(ov.id)
            if ov.chart.table not in tables:
                raise SceneFormatError(f"scene {sid!r}: unknown table {ov.chart.table!r}")
            overlays.append(ov)
        background = {"darken": False, "grayscale": False}
        raw_bg = rs.get("background", {})
        if not isinstance(raw_bg, dict):
            raise SceneFormatError(f"scene {sid!r}: background must be an object")
        for key in ("darken", "grayscale"):
            v = raw_bg.get(key, False)
            if not isinstance(v, bool):
                raise SceneFormatError(f"scene {sid!r}: background.{key} must be a boolean")
            background[key] = v
        bindings = []
        for rb in rs.get("bindings", []):
            if not isinstance(rb, dict) or rb.get("kind") != "multiply":
                raise SceneFormatError(f"scene {sid!r}: binding kind must be 'multiply'")
            src, tgt = rb.get("source"), rb.get("target")
            if src not in seen or tgt not in seen:
                raise SceneFormatError(f"scene {sid!r}: binding endpoints must name overlays in this scene")
            if src == tgt:
                raise SceneFormatError(f"scene {sid!r}: binding source and target must differ")
            bindings.append(Binding("multiply", src, tgt))
        scenes.append(SceneSpec(id=sid, overlays=tuple(overlays),
                                background=background, bindings=tuple(bindings)))
    deck = SceneDeck(scenes=tuple(scenes), tables=tables, file_hash=file_hash)
    # resolving every chart validates data shape and rejects degenerate domains
    for scene in deck.scenes:
        for ov in scene.overlays:
            data = chart_data(ov.chart, tables[ov.chart.table])
            resolve_geometry(ov, data)
    return deck


def load_deck(path: str | Path) -> SceneDeck:
    path = Path(path)
    blob = path.read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    try:
        raw = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SceneFormatError(f"deck {path}: {exc}") from exc
    return parse_deck(raw, base_dir=path.parent, file_hash=digest)


# ---------- normalized chart data ----------


@dataclass(frozen=True)
class ChartData:
    """Working data for one chart, normalized from its table.

    Rectilinear charts: x_values is the sorted union of per-series x keys
    (or the category list for band scales) and series_xy holds per-series
    sorted (x, y) pairs. Pie charts use pie_values; legends only series.
    """
    kind: str
    x_values: tuple
    series: tuple[str, ...]
    series_xy: dict[str, tuple[tuple, ...]] = field(default_factory=dict)
    pie_values: dict[str, float] = field(default_factory=dict)

    def value_at(self, series: str, x: object) -> float | None:
        for px, py in self.series_xy.get(series, ()):
            if px == x:
                return py
        return None

    def interp_at(self, series: str, x: float) -> float | None:
        """Linear interpolation between data points; None outside the series span."""
        pts = self.series_xy.get(series, ())
        if not pts or x < pts[0][0] or x > pts[-1][0]:
            return None
        xs = [p[0] for p in pts]
        j = bisect.bisect_left(xs, x)
        if j < len(pts) and pts[j][0] == x:
            return pts[j][1]
        x0, y0 = pts[j - 1]
        x1, y1 = pts[j]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def to_json(self) -> dict:
        if self.kind == "Pie":
            return {"values": {k: self.pie_values[k] for k in self.series}}
        if self.kind == "Legend":
            return {"categories": list(self.series)}
        cols: dict[str, list] = {}
        for s in self.series:
            lookup = dict(self.series_xy[s])
            cols[s] = [lookup.get(x) for x in self.x_values]
        return {"x": list(self.x_values), "series": cols}

    def with_series_values(self, series: str, mapping: dict) -> "ChartData":
        pts = tuple((x, mapping.get(x, y)) for x, y in self.series_xy[series])
        series_xy = dict(self.series_xy)
        series_xy[series] = pts
        return replace(self, series_xy=series_xy)


def _series_from_long(table: DataTable, spec: ChartSpec, where: str):
    cats: list[str] = []
    grouped: dict[str, list[tuple]] = {}
    xi = table.column_index(spec.x_field)
    ci = table.column_index(spec.category_field)
    yi = table.column_index(spec.y_field)
    if table.column_type(spec.category_field) != "category":
        raise SceneFormatError(f"{where}: category_field must be a category column")
    for row in table.rows:
        cat = row[ci]
        if cat not in grouped:
            grouped[cat] = []
            cats.append(cat)
        grouped[cat].append((row[xi], row[yi]))
    return cats, grouped


def chart_data(spec: ChartSpec, table: DataTable) -> ChartData:
    where = f"chart over table {table.id!r}"
    if spec.kind == "Pie":
        cats, grouped = [], {}
        ci = table.column_index(spec.category_field)
        yi = table.column_index(spec.y_field)
        if table.column_type(spec.category_field) != "category":
            raise SceneFormatError(f"{where}: category_field must be a category column")
        if table.column_type(spec.y_field) == "category":
            raise SceneFormatError(f"{where}: y column must be numeric")
        for row in table.rows:
            if row[ci] in grouped:
                raise SceneFormatError(f"{where}: duplicate pie category {row[ci]!r}")
            if row[yi] < 0:
                raise SceneFormatError(f"{where}: pie values must be non-negative")
            grouped[row[ci]] = float(row[yi])
            cats.append(row[ci])
        return ChartData(kind="Pie", x_values=(), series=tuple(cats), pie_values=grouped)
    if spec.kind == "Legend":
        cats = []
        for v in table.column(spec.category_field):
            if v not in cats:
                cats.append(v)
        return ChartData(kind="Legend", x_values=(), series=tuple(cats))

    band = _x_scale_kind(spec, table) == "Band"
    if spec.y_fields:
        xs = table.column(spec.x_field)
        series = list(spec.y_fields)
        for s in series:
            if table.column_type(s) == "category":
                raise SceneFormatError(f"{where}: y column {s!r} must be numeric")
        grouped = {s: list(zip(xs, table.column(s))) for s in series}
    else:
        if table.column_type(spec.y_field) == "category":
            raise SceneFormatError(f"{where}: y column {spec.y_field!r} must be numeric")
        series, grouped = _series_from_long(table, spec, where)

    for s in series:
        pts = grouped[s]
        seen_x = set()
        for px, _ in pts:
            if px in seen_x:
                raise SceneFormatError(f"{where}: duplicate x {px!r} in series {s!r}")
            seen_x.add(px)
        if not band:
            xs_only = [p[0] for p in pts]
            if any(b <= a for a, b in zip(xs_only, xs_only[1:])):
                raise SceneFormatError(f"{where}: series {s!r} x values must be strictly increasing")

    if band:
        x_values: list = []
        for s in series:
            for px, _ in grouped[s]:
                if not isinstance(px, str):
                    raise SceneFormatError(f"{where}: band x values must be categories")
                if px not in x_values:
                    x_values.append(px)
    else:
        merged: set = set()
        for s in series:
            merged.update(p[0] for p in grouped[s])
        x_values = sorted(merged)

    if spec.kind in STACKED_KINDS:
        for s in series:
            if len(grouped[s]) != len(x_values):
                raise SceneFormatError(f"{where}: stacked charts need every series on every x")
            if any(p[1] < 0 for p in grouped[s]):
                raise SceneFormatError(f"{where}: stacked charts need non-negative values")
    if spec.kind == "Bar" and len(series) > 1:
        raise SceneFormatError(f"{where}: Bar supports a single series (use StackedBar)")

    series_xy = {s: tuple(grouped[s]) for s in series}
    unknown_hidden = set(spec.hidden_series) - set(series)
    if unknown_hidden:
        raise SceneFormatError(f"{where}: hidden_series not in data: {sorted(unknown_hidden)}")
    return ChartData(kind=spec.kind, x_values=tuple(x_values),
                     series=tuple(series), series_xy=series_xy)


def _x_scale_kind(spec: ChartSpec, table: DataTable) -> str:
    if spec.kind not in RECTILINEAR_KINDS:
        return "None"
    if spec.x_scale is not None:
        declared = spec.x_scale
    else:
        ctype = table.column_type(spec.x_field)
        declared = {"temporal": "Temporal", "number": "Linear", "category": "Band"}[ctype]
    ctype = table.column_type(spec.x_field)
    if declared == "Band" and ctype != "category":
        raise SceneFormatError(f"chart over table {table.id!r}: Band x_scale needs a category column")
    if declared in ("Linear", "Temporal") and ctype == "category":
        raise SceneFormatError(f"chart over table {table.id!r}: {declared} x_scale needs a numeric column")
    return declared


def palette_colors(spec: ChartSpec, series: tuple[str, ...]) -> dict[str, str]:
    out = {}
    for i, s in enumerate(series):
        out[s] = spec.colors.get(s, PALETTE[i % len(PALETTE)])
    return out


# ---------- scales ----------


@dataclass(frozen=True)
class LinearScale:
    d0: float
    d1: float
    r0: float
    r1: float

    def apply(self, v: float) -> float:
        return self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)

    def invert(self, pos: float) -> float:
        return self.d0 + (pos - self.r0) / (self.r1 - self.r0) * (self.d1 - self.d0)

    @property
    def span(self) -> float:
        return self.d1 - self.d0


@dataclass(frozen=True)
class BandScale:
    categories: tuple[str, ...]
    r0: float
    r1: float

    @property
    def band_width(self) -> float:
        return (self.r1 - self.r0) / len(self.categories)

    def center(self, i: int) -> float:
        return self.r0 + (i + 0.5) * self.band_width

    def apply(self, category: str) -> float:
        return self.center(self.categories.index(category))

    def invert(self, pos: float) -> float:
        raise NonInvertibleScale("band scales resolve to the nearest band, not a value")

    def nearest(self, pos: float) -> int:
        i = int(math.floor((pos - self.r0) / self.band_width))
        return min(len(self.categories) - 1, max(0, i))


# ---------- resolved geometry ----------


@dataclass(frozen=True)
class OverlayGeometry:
    overlay_id: str
    kind: str
    frame: tuple[float, float, float, float]
    plot: tuple[float, float, float, float]  # x0, y0, x1, y1
    data: ChartData
    hidden: frozenset[str]
    x_scale: LinearScale | BandScale | None
    y_scale: LinearScale | None
    full_x_domain: tuple[float, float] | None
    visible_x_domain: tuple[float, float] | None
    y_domain: tuple[float, float] | None
    wedges: tuple[tuple[str, float, float], ...] = ()  # (category, start_deg, end_deg)

    @property
    def visible_series(self) -> tuple[str, ...]:
        return tuple(s for s in self.data.series if s not in self.hidden)

    def visible_x_indices(self) -> list[int]:
        if self.visible_x_domain is None or isinstance(self.x_scale, BandScale):
            return list(range(len(self.data.x_values)))
        lo, hi = self.visible_x_domain
        return [i for i, x in enumerate(self.data.x_values) if lo <= x <= hi]


def _plot_rect(frame, margins):
    x, y, w, h = frame
    ml, mr, mt, mb = margins
    return (x + ml * w, y + mt * h, x + w - mr * w, y + h - mb * h)


def resolve_geometry(overlay: OverlaySpec, data: ChartData,
                     visible_domain: tuple[float, float] | None = None,
                     hidden: frozenset[str] | None = None) -> OverlayGeometry:
    """Build the scale/plot picture for one overlay from its working data.

    visible_domain narrows the x window (zoom); hidden removes series from
    stacking and hit-testing but not from the y domain, which covers the
    full data so reveals never rescale the chart.
    """
    spec = overlay.chart
    plot = _plot_rect(overlay.frame, spec.margins)
    x0, y0, x1, y1 = plot
    if hidden is None:
        hidden = frozenset(spec.hidden_series)
    kind = spec.kind

    if kind == "Pie":
        total = sum(data.pie_values.values())
        if total <= 0:
            raise DegenerateDomain(f"overlay {overlay.id!r}: pie values sum to zero")
        wedges = []
        start = 0.0
        for cat in data.series:
            extent = data.pie_values[cat] / total * 360.0
            wedges.append((cat, start, start + extent))
            start += extent
        # close the ring exactly despite float accumulation
        last = wedges[-1]
        wedges[-1] = (last[0], last[1], 360.0)
        return OverlayGeometry(overlay.id, kind, overlay.frame, plot, data, hidden,
                               None, None, None, None, None, tuple(wedges))

    if kind == "Legend":
        if not data.series:
            raise DegenerateDomain(f"overlay {overlay.id!r}: legend with no categories")
        return OverlayGeometry(overlay.id, kind, overlay.frame, plot, data, hidden,
                               None, None, None, None, None)

    # rectilinear
    if not data.x_values:
        raise DegenerateDomain(f"overlay {overlay.id!r}: no data points")
    band = isinstance(data.x_values[0], str)
    if band:
        x_scale: LinearScale | BandScale = BandScale(tuple(data.x_values), x0, x1)
        full_domain = None
        visible = None
    else:
        full_domain = (float(data.x_values[0]), float(data.x_values[-1]))
        if full_domain[0] == full_domain[1]:
            raise DegenerateDomain(f"overlay {overlay.id!r}: x domain has zero extent")
        visible = visible_domain if visible_domain is not None else full_domain
        x_scale = LinearScale(visible[0], visible[1], x0, x1)

    lo, hi = _y_extent(kind, data)
    if lo == hi:
        raise DegenerateDomain(f"overlay {overlay.id!r}: y domain has zero extent")
    # screen y grows downward: domain max maps to plot top
    y_scale = LinearScale(lo, hi, y1, y0)
    return OverlayGeometry(overlay.id, kind, overlay.frame, plot, data, hidden,
                           x_scale, y_scale, full_domain, visible, (lo, hi))


def _y_extent(kind: str, data: ChartData) -> tuple[float, float]:
    # covers all series, hidden included, so reveals keep the scale stable
    if kind in STACKED_KINDS:
        sums = []
        for x in data.x_values:
            sums.append(sum(data.value_at(s, x) or 0.0 for s in data.series))
        top = max(sums) if sums else 0.0
        return (0.0, top)
    values = [y for s in data.series for _, y in data.series_xy[s]]
    if not values:
        return (0.0, 0.0)
    lo = min(0.0, min(values))
    return (float(lo), float(max(values)))


# ---------- region classification ----------


@dataclass(frozen=True)
class RegionHit:
    overlay_id: str | None
    tag: str
    payload: str | None = None


OUTSIDE = RegionHit(None, "Outside", None)


def classify_overlay(geom: OverlayGeometry, p: Point2) -> RegionHit | None:
    """Region of p within this overlay, or None when p is outside its frame."""
    fx, fy, fw, fh = geom.frame
    px, py = p
    if not (fx <= px <= fx + fw and fy <= py <= fy + fh):
        return None
    x0, y0, x1, y1 = geom.plot
    if py > y1:
        if px < x0:
            return RegionHit(geom.overlay_id, "BottomLeftCorner")
        if px > x1:
            return RegionHit(geom.overlay_id, "BottomRightCorner")
        return RegionHit(geom.overlay_id, "BottomMargin")
    if px < x0:
        return RegionHit(geom.overlay_id, "LeftMargin")
    if px > x1:
        return RegionHit(geom.overlay_id, "RightMargin")
    if py < y0:
        return RegionHit(geom.overlay_id, "TopMargin")
    if geom.kind == "Pie":
        return RegionHit(geom.overlay_id, "PieWedge", wedge_at(geom, p))
    if geom.kind == "Legend":
        return RegionHit(geom.overlay_id, "LegendSwatch", swatch_at(geom, p))
    return RegionHit(geom.overlay_id, "Interior")


def classify_point(geoms: list[OverlayGeometry], p: Point2) -> RegionHit:
    """Region of p against a scene. geoms come in draw order (back to front,
    non-interactive overlays already excluded); the topmost hit wins."""
    hit = OUTSIDE
    for geom in geoms:
        r = classify_overlay(geom, p)
        if r is not None:
            hit = r
    return hit


def _local_units(geom: OverlayGeometry, p: Point2) -> tuple[float, float]:
    x0, y0, x1, y1 = geom.plot
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    return ((p[0] - cx) / (x1 - x0), (p[1] - cy) / (y1 - y0))


def pointer_angle_deg(geom: OverlayGeometry, p: Point2) -> float:
    """Angle of p around the plot center, degrees clockwise from 12 o'clock."""
    u, v = _local_units(geom, p)
    theta = math.degrees(math.atan2(u, -v))
    return theta + 360.0 if theta < 0 else theta


def wedge_at(geom: OverlayGeometry, p: Point2) -> str:
    """Nearest wedge by angle; boundary angles resolve to the lower index."""
    theta = pointer_angle_deg(geom, p)
    for cat, _start, end in geom.wedges:
        if theta <= end:
            return cat
    return geom.wedges[-1][0]


def swatch_at(geom: OverlayGeometry, p: Point2) -> str:
    x0, y0, x1, y1 = geom.plot
    n = len(geom.data.series)
    row_h = (y1 - y0) / n
    i = min(n - 1, max(0, int((p[1] - y0) / row_h)))
    return geom.data.series[i]


# ---------- inversion and snapping ----------


def invert_x(geom: OverlayGeometry, pos: float) -> float:
    if not isinstance(geom.x_scale, LinearScale):
        raise NonInvertibleScale(f"overlay {geom.overlay_id!r}: x scale is not continuous")
    return geom.x_scale.invert(pos)


def invert_y(geom: OverlayGeometry, pos: float) -> float:
    if not isinstance(geom.y_scale, LinearScale):
        raise NonInvertibleScale(f"overlay {geom.overlay_id!r}: no continuous y scale")
    return geom.y_scale.invert(pos)


def snap_value(geom: OverlayGeometry, v: float) -> int | None:
    """Index of the data x nearest to domain value v, restricted to the
    visible window; equidistant neighbors snap to the larger x."""
    candidates = geom.visible_x_indices()
    if not candidates:
        return None
    xs = [geom.data.x_values[i] for i in candidates]
    j = bisect.bisect_left(xs, v)
    if j == 0:
        return candidates[0]
    if j == len(xs):
        return candidates[-1]
    left, right = xs[j - 1], xs[j]
    # ties go to the larger x
    if v - left < right - v:
        return candidates[j - 1]
    return candidates[j]


def snap_index(geom: OverlayGeometry, pos_x: float) -> int | None:
    """Data index nearest to a plot x position.

    Continuous scales invert then bisect over the x values inside the
    visible window; band scales resolve to the nearest band center.
    """
    if isinstance(geom.x_scale, BandScale):
        return geom.x_scale.nearest(pos_x)
    if not isinstance(geom.x_scale, LinearScale):
        return None
    return snap_value(geom, geom.x_scale.invert(pos_x))


# ---------- element hit-testing ----------


def bar_layout(geom: OverlayGeometry) -> list[tuple[int, float, float]]:
    """(index, center, width) of each bar currently on the plot."""
    data = geom.data
    if isinstance(geom.x_scale, BandScale):
        bw = geom.x_scale.band_width
        return [(i, geom.x_scale.center(i), bw * BAR_FILL_RATIO)
                for i in range(len(data.x_values))]
    idxs = geom.visible_x_indices()
    if not idxs:
        return []
    centers = [geom.x_scale.apply(data.x_values[i]) for i in idxs]
    if len(centers) > 1:
        step = min(b - a for a, b in zip(centers, centers[1:]))
    else:
        step = (geom.plot[2] - geom.plot[0])
    w = step * BAR_FILL_RATIO
    return [(i, c, w) for i, c in zip(idxs, centers)]


def stack_extent(geom: OverlayGeometry, series: str, x: object,
                 include_hidden_candidate: str | None = None) -> tuple[float, float] | None:
    """Value-space [base, top] of one band/segment at x, stacking the visible
    series in declaration order. include_hidden_candidate stacks one hidden
    series as if it were already revealed (used for reveal hit-testing)."""
    data = geom.data
    base = 0.0
    for s in data.series:
        live = s not in geom.hidden or s == include_hidden_candidate
        if not live:
            continue
        v = data.value_at(s, x)
        if v is None:
            v = 0.0
        if s == series:
            return (base, base + v)
        base += v
    return None


def stack_extent_interp(geom: OverlayGeometry, series: str, x: float,
                        include_hidden_candidate: str | None = None) -> tuple[float, float] | None:
    """Interpolated stacked [base, top] at a continuous x (stacked areas)."""
    data = geom.data
    base = 0.0
    for s in data.series:
        live = s not in geom.hidden or s == include_hidden_candidate
        if not live:
            continue
        v = data.interp_at(s, x)
        if v is None:
            return None
        if s == series:
            return (base, base + v)
        base += v
    return None


def element_at(geom: OverlayGeometry, p: Point2) -> dict | None:
    """Cloneable element under p: a bar segment, a series area, or a wedge.

    Returns {"series": name, "index": int | None} or None. Line charts own
    no solid elements; stacked areas reserve their interior for band
    interactions and are not cloneable.
    """
    kind = geom.kind
    px, py = p
    if kind == "Pie":
        u, v = _local_units(geom, p)
        if math.hypot(u, v) > PIE_RADIUS_LOCAL:
            return None
        return {"series": wedge_at(geom, p), "index": None}
    if kind in ("Bar", "StackedBar"):
        y_dom = invert_y(geom, py)
        for i, cx, w in bar_layout(geom):
            if not (cx - w / 2 <= px <= cx + w / 2):
                continue
            x = geom.data.x_values[i]
            if kind == "Bar":
                s = geom.data.series[0]
                if s in geom.hidden:
                    return None
                v = geom.data.value_at(s, x)
                if v is None:
                    return None
                lo, hi = min(0.0, v), max(0.0, v)
                if lo <= y_dom <= hi:
                    return {"series": s, "index": i}
                return None
            for s in geom.data.series:
                if s in geom.hidden:
                    continue
                ext = stack_extent(geom, s, x)
                if ext and ext[0] <= y_dom <= ext[1]:
                    return {"series": s, "index": i}
            return None
        return None
    if kind == "Area":
        if not isinstance(geom.x_scale, LinearScale):
            return None
        x_dom = geom.x_scale.invert(px)
        y_dom = invert_y(geom, py)
        if y_dom < 0:
            return None
        best: tuple[float, str] | None = None
        for s in geom.visible_series:
            v = geom.data.interp_at(s, x_dom)
            if v is not None and y_dom <= v and (best is None or v < best[0]):
                best = (v, s)
        if best is None:
            return None
        return {"series": best[1], "index": None}
    return None


def hidden_band_at(geom: OverlayGeometry, p: Point2) -> str | None:
    """Hidden series whose would-be contour contains p (reveal target)."""
    if geom.kind not in ("Area", "StackedArea") or not geom.hidden:
        return None
    if not isinstance(geom.x_scale, LinearScale):
        return None
    x_dom = geom.x_scale.invert(p[0])
    y_dom = invert_y(geom, p[1])
    for s in geom.data.series:
        if s not in geom.hidden:
            continue
        if geom.kind == "Area":
            v = geom.data.interp_at(s, x_dom)
            if v is not None and 0.0 <= y_dom <= v:
                return s
        else:
            ext = stack_extent_interp(geom, s, x_dom, include_hidden_candidate=s)
            if ext and ext[0] <= y_dom <= ext[1]:
                return s
    return None


def interval_region_for(spec: ChartSpec, v1: float, v2: float) -> IntervalRegion | None:
    """First declared interval region containing both domain values."""
    for r in spec.interval_regions:
        if r.lo <= v1 <= r.hi and r.lo <= v2 <= r.hi:
            return r
    return None
