"""Scene parsing, scales, region classification, and hit-testing."""

from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from chirono.charts import (BAR_FILL_RATIO, ChartSpec, DegenerateDomain,
                            IntervalRegion, LinearScale, NonInvertibleScale,
                            SceneFormatError, bar_layout, chart_data,
                            classify_overlay, classify_point, element_at,
                            hidden_band_at, interval_region_for, parse_deck,
                            parse_table, pointer_angle_deg, resolve_geometry,
                            snap_index, snap_value, wedge_at)

from conftest import simple_table


def valued_deck(series, years=(2000, 2001, 2002), kind="Line",
                frame=(0.0, 0.0, 1.0, 1.0), margins=None):
    """One-chart deck with explicit values: series maps name -> column."""
    x_type = "category" if isinstance(years[0], str) else "number"
    cols = [{"name": "year", "type": x_type}]
    cols += [{"name": s, "type": "number"} for s in series]
    rows = [[y] + [series[s][i] for s in series] for i, y in enumerate(years)]
    chart = {"kind": kind, "table": "t1", "x_field": "year",
             "y_fields": list(series)}
    if margins is not None:
        chart["margins"] = margins
    return parse_deck({
        "tables": {"t1": {"columns": cols, "rows": rows}},
        "scenes": [{"id": "s1", "overlays": [
            {"id": "ov1", "frame": list(frame), "chart": chart}]}]})


def geom_for(deck, visible=None, hidden=None):
    ov = deck.scenes[0].overlays[0]
    data = chart_data(ov.chart, deck.tables[ov.chart.table])
    return resolve_geometry(ov, data, visible_domain=visible,
                            hidden=frozenset(hidden) if hidden else None)


def pie_deck(values, frame=(0.0, 0.0, 1.0, 1.0)):
    rows = [[k, v] for k, v in values]
    return parse_deck({
        "tables": {"t": {"columns": [
            {"name": "part", "type": "category"},
            {"name": "amount", "type": "number"}], "rows": rows}},
        "scenes": [{"id": "s1", "overlays": [{
            "id": "ov1", "frame": list(frame),
            "chart": {"kind": "Pie", "table": "t",
                      "category_field": "part", "y_field": "amount"}}]}],
    })


def _line_spec(**kw):
    return ChartSpec(kind="Line", table="t", x_field="year",
                     y_fields=("a",), **kw)


# ---------- parsing ----------


def test_parse_minimal_deck():
    deck = valued_deck({"a": [1.0, 2.0, 3.0]})
    assert [s.id for s in deck.scenes] == ["s1"]
    assert deck.tables["t1"].column("year") == [2000, 2001, 2002]
    assert deck.tables["t1"].column("a") == [1.0, 2.0, 3.0]


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.update(tables=[]), "tables must be an object"),
    (lambda d: d.update(scenes=[]), "at least one scene"),
    (lambda d: d["scenes"][0].update(id="has space"), "letters, digits"),
    (lambda d: d["scenes"][0]["overlays"][0].update(frame=[0, 0, 1, 1.5]), "unit square"),
    (lambda d: d["scenes"][0]["overlays"][0].update(frame=[0, 0, 0, 1]), "unit square"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(kind="Donut"), "chart kind"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(table="ghost"), "unknown table"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(margins=[0.5, 0.1, 0.1, 0.1]), "margins"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(hidden_series=["nope"]), "hidden_series"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(x_scale="Band"), "category column"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].pop("x_field"), "needs x_field"),
    (lambda d: d["scenes"][0]["overlays"][0]["chart"].update(
        interval_regions=[{"label": "r", "lo": 3, "hi": 3}]), "lo < hi"),
    (lambda d: d["scenes"][0].update(bindings=[
        {"kind": "multiply", "source": "ov1", "target": "ov1"}]), "must differ"),
    (lambda d: d["scenes"][0].update(bindings=[
        {"kind": "multiply", "source": "ov1", "target": "ghost"}]), "must name overlays"),
])
def test_parse_rejections(mutate, fragment):
    base = {
        "tables": {"t": {
            "columns": [{"name": "year", "type": "number"},
                        {"name": "a", "type": "number"}],
            "rows": [[2000, 1.0], [2001, 2.0], [2002, 3.0]]}},
        "scenes": [{"id": "s1", "overlays": [{
            "id": "ov1", "frame": [0, 0, 1, 1],
            "chart": {"kind": "Line", "table": "t",
                      "x_field": "year", "y_fields": ["a"]}}]}],
    }
    mutate(base)
    with pytest.raises(SceneFormatError, match=fragment):
        parse_deck(base)


@pytest.mark.parametrize("rows, fragment", [
    ([[2000, 1.0], [2000, 2.0]], "duplicate x"),
    ([[2001, 1.0], [2000, 2.0]], "strictly increasing"),
    ([[2000, 1.0, 5.0]], "row arity"),
    ([[2000, True]], "expects numbers"),
    ([[2000, "high"]], "expects numbers"),
    ([[2000, float("inf")]], "non-finite"),
])
def test_table_cell_rejections(rows, fragment):
    raw = {"columns": [{"name": "year", "type": "number"},
                       {"name": "a", "type": "number"}], "rows": rows}
    with pytest.raises(SceneFormatError, match=fragment):
        tbl = parse_table("t", raw)
        chart_data(_line_spec(), tbl)


def test_duplicate_overlay_id_rejected():
    ov = {"id": "ov1", "frame": [0, 0, 0.4, 0.4],
          "chart": {"kind": "Line", "table": "t1", "x_field": "year", "y_fields": ["a"]}}
    with pytest.raises(SceneFormatError, match="duplicate overlay"):
        parse_deck({"tables": simple_table(),
                    "scenes": [{"id": "s1", "overlays": [ov, dict(ov)]}]})


def test_csv_and_rows_exclusive(tmp_path):
    raw = {"columns": [{"name": "year", "type": "number"}],
           "rows": [[1]], "csv": "x.csv"}
    with pytest.raises(SceneFormatError, match="not both"):
        parse_table("t", raw, base_dir=tmp_path)


def test_csv_loading(tmp_path):
    (tmp_path / "d.csv").write_text("year,a\n2000,1.5\n2001,2\n")
    raw = {"columns": [{"name": "year", "type": "number"},
                       {"name": "a", "type": "number"}], "csv": "d.csv"}
    tbl = parse_table("t", raw, base_dir=tmp_path)
    assert tbl.rows == ((2000, 1.5), (2001, 2))


def test_stacked_requires_dense_non_negative():
    cols = [{"name": "year", "type": "number"},
            {"name": "a", "type": "number"}, {"name": "b", "type": "number"}]
    spec = ChartSpec(kind="StackedArea", table="t", x_field="year", y_fields=("a", "b"))
    bad = parse_table("t", {"columns": cols, "rows": [[2000, 1, -2], [2001, 1, 2]]})
    with pytest.raises(SceneFormatError, match="non-negative"):
        chart_data(spec, bad)


def test_bar_is_single_series():
    tbl = parse_table("t1", simple_table(series=("a", "b"))["t1"])
    spec = ChartSpec(kind="Bar", table="t1", x_field="year", y_fields=("a", "b"))
    with pytest.raises(SceneFormatError, match="single series"):
        chart_data(spec, tbl)


def test_zero_extent_domain_rejected():
    with pytest.raises(DegenerateDomain, match="zero extent"):
        valued_deck({"a": [5.0]}, years=[2000])


def test_long_form_category_order_is_first_appearance():
    tbl = parse_table("t", {
        "columns": [{"name": "year", "type": "number"},
                    {"name": "kind", "type": "category"},
                    {"name": "v", "type": "number"}],
        "rows": [[2000, "beta", 1], [2000, "alpha", 2],
                 [2001, "beta", 3], [2001, "alpha", 4]]})
    spec = ChartSpec(kind="Line", table="t", x_field="year",
                     category_field="kind", y_field="v")
    data = chart_data(spec, tbl)
    assert data.series == ("beta", "alpha")
    assert data.value_at("alpha", 2001) == 4


# ---------- scales ----------


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(0, 1), st.floats(0, 1),
       st.floats(0, 1))
@settings(max_examples=300)
def test_linear_scale_round_trip(d0, d1, r0, r1, t):
    assume(abs(d1 - d0) > 1e-6 and abs(r1 - r0) > 1e-6)
    sc = LinearScale(d0, d1, r0, r1)
    v = d0 + t * (d1 - d0)
    assert sc.invert(sc.apply(v)) == pytest.approx(v, abs=1e-9 * abs(sc.span))


def test_linear_scale_endpoints_exact():
    sc = LinearScale(1960.0, 2020.0, 0.1, 0.9)
    assert sc.apply(1960.0) == 0.1
    assert sc.apply(2020.0) == 0.9
    assert sc.invert(0.5) == pytest.approx(1990.0)


def test_band_scale_not_invertible():
    deck = valued_deck({"a": [1, 2, 3]}, kind="Bar", years=["x", "y", "z"])
    g = geom_for(deck)
    with pytest.raises(NonInvertibleScale):
        g.x_scale.invert(0.5)


def test_band_nearest_boundary_goes_to_higher_index():
    # zero margins make the band edges exact binary fractions
    deck = valued_deck({"a": [1, 2, 3, 4]}, kind="Bar",
                       years=["p", "q", "r", "s"], margins=[0, 0, 0, 0])
    sc = geom_for(deck).x_scale
    assert sc.band_width == 0.25
    assert sc.nearest(0.5) == 2          # edge between bands 1 and 2
    assert sc.nearest(0.5 - 1e-9) == 1
    assert sc.nearest(-0.2) == 0
    assert sc.nearest(1.2) == 3


def test_band_centers_partition_plot():
    deck = valued_deck({"a": [1, 2, 3]}, kind="Bar", years=["x", "y", "z"])
    sc = geom_for(deck).x_scale
    assert sc.apply("x") == pytest.approx(sc.r0 + sc.band_width / 2)
    assert sc.apply("z") == pytest.approx(sc.r1 - sc.band_width / 2)


# ---------- snapping ----------


def test_snap_value_midpoint_tie_takes_larger_x():
    deck = valued_deck({"a": [1.0, 2.0, 3.0]})  # years 2000..2002
    g = geom_for(deck)
    assert snap_value(g, 2000.5) == 1
    assert snap_value(g, 2000.4999) == 0
    assert snap_value(g, 1990.0) == 0
    assert snap_value(g, 2050.0) == 2


def test_snap_respects_visible_window():
    years = list(range(2000, 2011))
    deck = valued_deck({"a": [float(i) for i in range(11)]}, years=years)
    g = geom_for(deck, visible=(2003.0, 2007.0))
    assert g.visible_x_indices() == [3, 4, 5, 6, 7]
    assert snap_value(g, 2000.0) == 3   # clamped into the window
    assert snap_value(g, 2010.0) == 7


def test_snap_index_continuous_matches_invert_then_snap():
    deck = valued_deck({"a": [1.0, 2.0, 3.0]})
    g = geom_for(deck)
    pos = g.x_scale.apply(2001.2)
    assert snap_index(g, pos) == snap_value(g, 2001.2) == 1


@given(st.lists(st.integers(1900, 2100), min_size=2, max_size=12, unique=True),
       st.floats(1890, 2110))
@settings(max_examples=300)
def test_snap_value_matches_argmin_oracle(years, probe):
    years = sorted(years)
    deck = valued_deck({"a": [float(i) for i in range(len(years))]}, years=years)
    g = geom_for(deck)
    got = snap_value(g, probe)
    best = min(range(len(years)),
               key=lambda i: (abs(years[i] - probe), -years[i]))
    assert got == best


# ---------- region classification ----------


def _partition_deck():
    return valued_deck({"a": [1.0, 2.0, 3.0]}, frame=(0.1, 0.2, 0.6, 0.5))


def test_classify_outside_frame_is_none():
    g = geom_for(_partition_deck())
    assert classify_overlay(g, (0.05, 0.5)) is None
    assert classify_overlay(g, (0.75, 0.5)) is None


def test_classify_margins_and_corners():
    g = geom_for(_partition_deck())
    fx, fy, fw, fh = g.frame
    x0, y0, x1, y1 = g.plot
    mid_x, mid_y = (x0 + x1) / 2, (y0 + y1) / 2
    cases = {
        (mid_x, mid_y): "Interior",
        (fx + 0.001, mid_y): "LeftMargin",
        (fx + fw - 0.001, mid_y): "RightMargin",
        (mid_x, fy + 0.001): "TopMargin",
        (mid_x, fy + fh - 0.001): "BottomMargin",
        (fx + 0.001, fy + fh - 0.001): "BottomLeftCorner",
        (fx + fw - 0.001, fy + fh - 0.001): "BottomRightCorner",
    }
    for p, tag in cases.items():
        assert classify_overlay(g, p).tag == tag, p


@given(st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=300)
def test_every_point_classifies_to_exactly_one_region(px, py):
    g = geom_for(_partition_deck())
    hit = classify_overlay(g, (px, py))
    fx, fy, fw, fh = g.frame
    inside = fx <= px <= fx + fw and fy <= py <= fy + fh
    assert (hit is not None) == inside
    if hit is not None:
        assert hit.tag in ("Interior", "LeftMargin", "RightMargin", "TopMargin",
                           "BottomMargin", "BottomLeftCorner", "BottomRightCorner")


def test_topmost_interactive_overlay_wins():
    deck = parse_deck({
        "tables": simple_table(),
        "scenes": [{"id": "s1", "overlays": [
            {"id": "under", "frame": [0, 0, 1, 1], "z": 0,
             "chart": {"kind": "Line", "table": "t1", "x_field": "year", "y_fields": ["a"]}},
            {"id": "over", "frame": [0.3, 0.3, 0.4, 0.4], "z": 5,
             "chart": {"kind": "Line", "table": "t1", "x_field": "year", "y_fields": ["a"]}},
        ]}]})
    sc = deck.scenes[0]
    geoms = []
    for ov in sorted(sc.overlays, key=lambda o: o.z):
        geoms.append(resolve_geometry(ov, chart_data(ov.chart, deck.tables["t1"])))
    assert classify_point(geoms, (0.5, 0.5)).overlay_id == "over"
    assert classify_point(geoms, (0.1, 0.5)).overlay_id == "under"
    assert classify_point(geoms, (1.5, 0.5)).tag == "Outside"


# ---------- pie wedges ----------


def expected_wedge(values, theta):
    """Brute-force oracle: cumulative fractions, boundary to lower index."""
    total = sum(v for _, v in values)
    acc = 0.0
    for name, v in values:
        acc += v / total * 360.0
        if theta <= acc:
            return name
    return values[-1][0]


def test_wedge_angles_clockwise_from_noon():
    deck = pie_deck([("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)])
    g = geom_for(deck)
    cx = (g.plot[0] + g.plot[2]) / 2
    cy = (g.plot[1] + g.plot[3]) / 2
    assert pointer_angle_deg(g, (cx, cy - 0.1)) == pytest.approx(0.0)
    assert pointer_angle_deg(g, (cx + 0.1, cy)) == pytest.approx(90.0)
    assert pointer_angle_deg(g, (cx, cy + 0.1)) == pytest.approx(180.0)
    assert pointer_angle_deg(g, (cx - 0.1, cy)) == pytest.approx(270.0)
    assert wedge_at(g, (cx + 0.01, cy - 0.1)) == "a"
    assert wedge_at(g, (cx + 0.1, cy + 0.01)) == "b"


def test_wedge_boundary_resolves_to_lower_index():
    deck = pie_deck([("a", 1.0), ("b", 1.0)])
    g = geom_for(deck)
    cx = (g.plot[0] + g.plot[2]) / 2
    cy = (g.plot[1] + g.plot[3]) / 2
    # 180 degrees exactly: boundary between a (0..180) and b (180..360)
    assert wedge_at(g, (cx, cy + 0.2)) == "a"


def test_wedge_ring_closes_despite_float_accumulation():
    deck = pie_deck([("a", 1 / 3), ("b", 1 / 3), ("c", 1 / 3)])
    g = geom_for(deck)
    assert g.wedges[-1][2] == 360.0


@given(st.lists(st.floats(0.1, 50), min_size=2, max_size=8),
       st.floats(0, 360))
@settings(max_examples=300)
def test_wedge_lookup_matches_fraction_oracle(vals, theta):
    values = [(f"w{i}", v) for i, v in enumerate(vals)]
    deck = pie_deck(values)
    g = geom_for(deck)
    # place a probe point at the given angle, just inside the rim
    cx = (g.plot[0] + g.plot[2]) / 2
    cy = (g.plot[1] + g.plot[3]) / 2
    r = 0.2
    rad = math.radians(theta)
    p = (cx + r * math.sin(rad), cy - r * math.cos(rad))
    back = pointer_angle_deg(g, p)
    assert wedge_at(g, p) == expected_wedge(values, back)


def test_pie_rejects_zero_total():
    with pytest.raises(DegenerateDomain, match="sum to zero"):
        pie_deck([("a", 0.0), ("b", 0.0)])


def test_pie_rejects_negative_and_duplicates():
    with pytest.raises(SceneFormatError, match="non-negative"):
        pie_deck([("a", -1.0), ("b", 1.0)])
    with pytest.raises(SceneFormatError, match="duplicate pie category"):
        pie_deck([("a", 1.0), ("a", 2.0)])


# ---------- bar layout and element hit-testing ----------


def test_bar_layout_band_widths():
    deck = valued_deck({"a": [1, 2, 3]}, kind="Bar", years=["x", "y", "z"])
    g = geom_for(deck)
    rows = bar_layout(g)
    bw = g.x_scale.band_width
    assert [i for i, _, _ in rows] == [0, 1, 2]
    assert all(w == pytest.approx(bw * BAR_FILL_RATIO) for _, _, w in rows)


def test_bar_layout_continuous_uses_min_step():
    deck = valued_deck({"a": [1.0, 2.0, 3.0]}, kind="Bar", years=[2000, 2001, 2003])
    g = geom_for(deck)
    rows = bar_layout(g)
    step = g.x_scale.apply(2001) - g.x_scale.apply(2000)
    assert all(w == pytest.approx(step * BAR_FILL_RATIO) for _, _, w in rows)


def test_bar_layout_single_visible_bar_spans_plot():
    deck = valued_deck({"a": [1.0, 2.0, 3.0]}, kind="Bar")
    g = geom_for(deck, visible=(2000.9, 2001.1))
    rows = bar_layout(g)
    assert [i for i, _, _ in rows] == [1]
    assert rows[0][2] == pytest.approx((g.plot[2] - g.plot[0]) * BAR_FILL_RATIO)


def test_element_at_bar_respects_height():
    deck = valued_deck({"a": [4.0, 8.0, 2.0]}, kind="Bar")
    g = geom_for(deck)
    cx = g.x_scale.apply(2001)
    inside_y = g.y_scale.apply(4.0)    # below the 8.0 top
    above_y = g.y_scale.apply(9.0)     # over the bar
    assert element_at(g, (cx, inside_y)) == {"series": "a", "index": 1}
    assert element_at(g, (cx, above_y)) is None
    gap_x = (g.x_scale.apply(2000) + g.x_scale.apply(2001)) / 2
    assert element_at(g, (gap_x + 0.001, g.y_scale.apply(1.0))) is None


def test_element_at_stacked_bar_picks_segment():
    deck = valued_deck({"a": [4.0, 4.0], "b": [3.0, 3.0]},
                       kind="StackedBar", years=[2000, 2001])
    g = geom_for(deck)
    cx = g.x_scale.apply(2000)
    assert element_at(g, (cx, g.y_scale.apply(2.0)))["series"] == "a"
    assert element_at(g, (cx, g.y_scale.apply(5.0)))["series"] == "b"
    assert element_at(g, (cx, g.y_scale.apply(8.0))) is None


def test_element_at_area_prefers_smallest_containing_series():
    deck = valued_deck({"low": [2.0, 2.0], "high": [6.0, 6.0]},
                       kind="Area", years=[2000, 2001])
    g = geom_for(deck)
    x = g.x_scale.apply(2000.5)
    assert element_at(g, (x, g.y_scale.apply(1.0)))["series"] == "low"
    assert element_at(g, (x, g.y_scale.apply(4.0)))["series"] == "high"
    assert element_at(g, (x, g.y_scale.apply(7.0))) is None


def test_element_at_line_and_stacked_area_have_no_elements():
    for kind in ("Line", "StackedArea"):
        deck = valued_deck({"a": [1.0, 2.0]}, kind=kind, years=[2000, 2001])
        g = geom_for(deck)
        x = g.x_scale.apply(2000.5)
        assert element_at(g, (x, g.y_scale.apply(0.5))) is None


def test_element_at_pie_uses_radius():
    deck = pie_deck([("a", 3.0), ("b", 1.0)])
    g = geom_for(deck)
    cx = (g.plot[0] + g.plot[2]) / 2
    cy = (g.plot[1] + g.plot[3]) / 2
    inside = element_at(g, (cx + 0.05, cy - 0.05))
    assert inside == {"series": "a", "index": None}
    # corner of the plot: angle valid but radius exceeds the disc
    assert element_at(g, (g.plot[0] + 0.001, g.plot[1] + 0.001)) is None


# ---------- hidden bands and interval regions ----------


def test_hidden_band_at_area():
    deck = valued_deck({"vis": [5.0, 5.0], "hid": [2.0, 2.0]},
                       kind="Area", years=[2000, 2001])
    g = geom_for(deck, hidden={"hid"})
    x = g.x_scale.apply(2000.5)
    assert hidden_band_at(g, (x, g.y_scale.apply(1.0))) == "hid"
    assert hidden_band_at(g, (x, g.y_scale.apply(3.0))) is None


def test_hidden_band_at_stacked_area_uses_candidate_stacking():
    deck = valued_deck({"base": [4.0, 4.0], "hid": [3.0, 3.0]},
                       kind="StackedArea", years=[2000, 2001])
    g = geom_for(deck, hidden={"hid"})
    x = g.x_scale.apply(2000.5)
    # hid would stack on top of base: band spans [4, 7]
    assert hidden_band_at(g, (x, g.y_scale.apply(5.0))) == "hid"
    assert hidden_band_at(g, (x, g.y_scale.apply(3.0))) is None
    assert hidden_band_at(g, (x, g.y_scale.apply(7.5))) is None


def test_y_domain_covers_hidden_series():
    deck = valued_deck({"vis": [2.0, 2.0], "hid": [9.0, 9.0]},
                       kind="Area", years=[2000, 2001])
    g = geom_for(deck, hidden={"hid"})
    assert g.y_domain == (0.0, 9.0)


def test_y_domain_includes_negative_floor():
    deck = valued_deck({"a": [-3.0, 5.0]}, years=[2000, 2001])
    assert geom_for(deck).y_domain == (-3.0, 5.0)


def test_interval_region_first_declared_wins():
    spec = _line_spec(interval_regions=(
        IntervalRegion("early", 0.0, 10.0), IntervalRegion("wide", 0.0, 20.0)))
    assert interval_region_for(spec, 2.0, 8.0).label == "early"
    assert interval_region_for(spec, 2.0, 15.0).label == "wide"
    assert interval_region_for(spec, 2.0, 25.0) is None
    assert interval_region_for(spec, 10.0, 0.0).label == "early"  # inclusive ends
