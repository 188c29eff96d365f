"""Interaction engine: gesture events drive the render state.

The engine owns the single authoritative RenderState tree (plain JSON
values only). Ephemeral visuals (index highlights, value labels, margin
reference lines, category emphasis, palm gradients) are recomputed every
frame from the current pointer/palm contexts, so they vanish the moment
the driving gesture ends. Persistent effects (zoom windows, pans, reveals,
data transforms, clones, the aggregate band) mutate working overlay state
when a pinch recognition fires.

State writes are copy-on-write: a changed subtree is replaced, unchanged
branches keep their identity, and a frame that changes nothing leaves the
whole tree identical so no diff is emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import charts
from .charts import (ChartData, OverlayGeometry, OverlaySpec, SceneDeck, SceneSpec,
                     RECTILINEAR_KINDS, chart_data, classify_overlay, classify_point,
                     element_at, hidden_band_at, interval_region_for, invert_x, invert_y,
                     palette_colors, resolve_geometry, snap_index, snap_value)
from .gestures import GestureConfig, GestureEvent, GestureRuntime
from .ingest import HANDS, LandmarkFrame, Point2
from .scenes import TRANSITION_DEFAULT_MS, plan_transition, navigate

PAIR_WINDOW_MS = 500
PAN_STEP_FRAC = 0.5
MIN_ZOOM_SPAN_FRAC = 0.02
GRADIENT_RADIUS_FRAC = 0.25
DOMAIN_SHIFT_MS = 500
MAX_CLONES = 2


@dataclass
class _Working:
    """Mutable per-overlay working state for the active scene."""
    spec: OverlaySpec
    base_data: ChartData
    data: ChartData
    hidden: frozenset
    visible_domain: tuple | None
    geom: OverlayGeometry
    order: int

    def rebuild(self) -> None:
        self.geom = resolve_geometry(self.spec, self.data, self.visible_domain, self.hidden)


@dataclass
class _PointerCtx:
    overlay_id: str | None
    tag: str
    payload: str | None
    pos: Point2


@dataclass
class _PinchCtx:
    hand: str
    start_ms: int
    start_overlay: str | None
    start_tag: str
    pos: Point2
    consumed: bool = False
    ended: bool = False
    clone_id: str | None = None
    clone_overlay: str | None = None


class Engine:
    def __init__(self, deck: SceneDeck, config: GestureConfig | None = None,
                 transition_ms: int = TRANSITION_DEFAULT_MS):
        self.deck = deck
        self.config = config or GestureConfig()
        self.runtime = GestureRuntime(self.config)
        self.transition_ms = transition_ms
        self.t_ms = 0
        self.scene_index = 0
        self._working: dict[str, _Working] = {}
        self._pointer: dict[str, _PointerCtx | None] = {h: None for h in HANDS}
        self._palm: dict[str, _PointerCtx | None] = {h: None for h in HANDS}
        self._pinch: dict[str, _PinchCtx | None] = {h: None for h in HANDS}
        self._aggregate: dict[str, list[_PinchCtx]] = {}
        self._clone_seq = 0
        self._transition_until: int | None = None
        self._shift_until: dict[str, int] = {}
        self.state: dict = {}
        self._enter_scene(0, from_scene=None)

    # ---------- public surface ----------

    def configure(self, config: GestureConfig) -> None:
        self.config = config
        self.runtime.configure(config)

    def snapshot(self) -> dict:
        return self.state

    def on_frame(self, frame: LandmarkFrame) -> list[GestureEvent]:
        """Advance the virtual clock by one landmark frame."""
        self.t_ms = max(self.t_ms, frame.t_ms)
        self._expire_clocks()
        events = self.runtime.step(frame)
        if not self._in_transition():
            for ev in events:
                self._apply_event(ev)
        self._update_markers(frame)
        self._project()
        return events

    def on_key(self, t_ms: int, command: str) -> None:
        """Keyboard navigation; unknown commands raise ValueError."""
        self.t_ms = max(self.t_ms, t_ms)
        self._expire_clocks()
        target = navigate(len(self.deck.scenes), self.scene_index, command)
        if target == self.scene_index:
            return
        self._enter_scene(target, from_scene=self.deck.scenes[self.scene_index])
        self._project()

    # ---------- clocks and scene lifecycle ----------

    def _in_transition(self) -> bool:
        return self._transition_until is not None and self.t_ms < self._transition_until

    def _expire_clocks(self) -> None:
        if self._transition_until is not None and self.t_ms >= self._transition_until:
            self._transition_until = None
            self._set_root("transition", None)
        for oid, until in list(self._shift_until.items()):
            if self.t_ms >= until:
                del self._shift_until[oid]
                if oid in self._working:
                    self._set_overlay(oid, "domain_shift", None)

    def _enter_scene(self, index: int, from_scene: SceneSpec | None) -> None:
        scene = self.deck.scenes[index]
        self.scene_index = index
        # cancel anything in flight: clones die, pinches stop meaning things
        self._pointer = {h: None for h in HANDS}
        self._palm = {h: None for h in HANDS}
        self._pinch = {h: None for h in HANDS}
        self._aggregate = {}
        self._clone_seq = 0
        self._shift_until = {}
        self._working = {}
        overlays_state: dict[str, dict] = {}
        for order, ov in enumerate(scene.overlays):
            data = chart_data(ov.chart, self.deck.tables[ov.chart.table])
            w = _Working(spec=ov, base_data=data, data=data,
                         hidden=frozenset(ov.chart.hidden_series),
                         visible_domain=None, geom=None, order=order)  # type: ignore[arg-type]
            w.rebuild()
            self._working[ov.id] = w
            overlays_state[ov.id] = self._overlay_state(w)
        plan = plan_transition(from_scene, scene, self.transition_ms) if from_scene else None
        transition = None
        self._transition_until = None
        if plan is not None and not plan.empty:
            transition = {"from": from_scene.id, "to": scene.id, "start_ms": self.t_ms}
            transition.update(plan.to_json())
            self._transition_until = self.t_ms + plan.duration_ms
        self.state = {
            "scene_id": scene.id,
            "scene_index": index,
            "background": dict(scene.background),
            "markers": self.state.get("markers", {}),
            "overlays": overlays_state,
            "transition": transition,
        }

    def _overlay_state(self, w: _Working) -> dict:
        spec, geom = w.spec, w.geom
        chart = spec.chart
        return {
            "kind": chart.kind,
            "frame": list(spec.frame),
            "z": spec.z,
            "order": w.order,
            "interactive": spec.interactive,
            "enter": spec.enter,
            "exit": spec.exit,
            "margins": list(chart.margins),
            "series": list(w.data.series),
            "colors": palette_colors(chart, w.data.series),
            "data": w.data.to_json(),
            "hidden_series": [s for s in w.data.series if s in w.hidden],
            "full_domain": list(geom.full_x_domain) if geom.full_x_domain else None,
            "visible_domain": list(geom.visible_x_domain) if geom.visible_x_domain else None,
            "y_domain": list(geom.y_domain) if geom.y_domain else None,
            "interval_regions": [{"label": r.label, "lo": r.lo, "hi": r.hi}
                                 for r in chart.interval_regions],
            "shared_domain_id": chart.shared_domain_id,
            "category_domain_id": chart.category_domain_id,
            "geometry_version": 0,
            "highlight": None,
            "labels": None,
            "margin_line": None,
            "emphasis": None,
            "palm_gradient": None,
            "clones": [],
            "clone_sources": [],
            "aggregate_band": False,
            "domain_shift": None,
        }

    # ---------- state writes (copy-on-write) ----------

    def _set_root(self, key: str, value) -> None:
        if self.state.get(key) == value:
            return
        root = dict(self.state)
        root[key] = value
        self.state = root

    def _set_overlay(self, oid: str, key: str, value) -> None:
        ov = self.state["overlays"][oid]
        if ov.get(key) == value:
            return
        new_ov = dict(ov)
        new_ov[key] = value
        overlays = dict(self.state["overlays"])
        overlays[oid] = new_ov
        root = dict(self.state)
        root["overlays"] = overlays
        self.state = root

    # ---------- per-frame bookkeeping ----------

    def _update_markers(self, frame: LandmarkFrame) -> None:
        markers: dict[str, dict] = {}
        for hand in HANDS:
            obs = frame.hand(hand)
            if obs is None:
                continue
            markers[hand] = {
                "index": [obs.index[0], obs.index[1]],
                "thumb": [obs.thumb[0], obs.thumb[1]],
                "pinching": self.runtime.pinch_active(hand),
            }
        self._set_root("markers", markers)

    def _draw_geoms(self) -> list[OverlayGeometry]:
        ws = sorted(self._working.values(), key=lambda w: (w.spec.z, w.order))
        return [w.geom for w in ws if w.spec.interactive]

    def _classify(self, pos: Point2) -> charts.RegionHit:
        return classify_point(self._draw_geoms(), pos)

    # ---------- event application ----------

    def _apply_event(self, ev: GestureEvent) -> None:
        kind = ev.kind
        if kind.startswith("Point"):
            if kind == "PointLeave":
                self._pointer[ev.hand] = None
            else:
                hit = self._classify(ev.pos)
                self._pointer[ev.hand] = _PointerCtx(hit.overlay_id, hit.tag, hit.payload, ev.pos)
        elif kind.startswith("Palm"):
            if kind == "PalmLeave":
                self._palm[ev.hand] = None
            else:
                hit = self._classify(ev.pos)
                self._palm[ev.hand] = _PointerCtx(hit.overlay_id, hit.tag, hit.payload, ev.pos)
        elif kind == "PinchStart":
            hit = self._classify(ev.pos)
            ctx = _PinchCtx(hand=ev.hand, start_ms=ev.t_ms, start_overlay=hit.overlay_id,
                            start_tag=hit.tag, pos=ev.pos)
            self._pinch[ev.hand] = ctx
            self._route_pinch_start(ctx, hit)
        elif kind == "PinchMove":
            ctx = self._pinch[ev.hand]
            if ctx is not None:
                ctx.pos = ev.pos
                if ctx.clone_id is not None:
                    self._move_clone(ctx)
        elif kind == "PinchEnd":
            ctx = self._pinch[ev.hand]
            if ctx is not None:
                ctx.ended = True
                ctx.pos = ev.pos
                if ctx.clone_id is not None:
                    self._release_clone(ctx)
                self._pinch[ev.hand] = None

    # ---------- pinch routing ----------

    def _other_pinch(self, hand: str) -> _PinchCtx | None:
        other = "Left" if hand == "Right" else "Right"
        return self._pinch[other]

    def _route_pinch_start(self, ctx: _PinchCtx, hit: charts.RegionHit) -> None:
        tag, oid = hit.tag, hit.overlay_id
        if oid is None:
            return
        w = self._working[oid]
        if tag == "BottomMargin":
            other = self._other_pinch(ctx.hand)
            if (other is not None and not other.ended and not other.consumed
                    and other.start_overlay == oid and other.start_tag == "BottomMargin"
                    and ctx.start_ms - other.start_ms <= PAIR_WINDOW_MS):
                ctx.consumed = other.consumed = True
                self._zoom_in(w, other.pos[0], ctx.pos[0])
            return
        if tag == "TopMargin":
            other = self._other_pinch(ctx.hand)
            if (other is not None and not other.ended and not other.consumed
                    and other.start_overlay == oid and other.start_tag == "TopMargin"
                    and ctx.start_ms - other.start_ms <= PAIR_WINDOW_MS):
                ctx.consumed = other.consumed = True
                self._zoom_out(w)
            return
        if tag in ("LeftMargin", "RightMargin"):
            opposite = "RightMargin" if tag == "LeftMargin" else "LeftMargin"
            other = self._other_pinch(ctx.hand)
            if (other is not None and not other.ended and not other.consumed
                    and other.start_overlay == oid and other.start_tag == opposite
                    and ctx.start_ms - other.start_ms <= PAIR_WINDOW_MS):
                ctx.consumed = other.consumed = True
                self._zoom_out(w)
            return
        if tag in ("BottomLeftCorner", "BottomRightCorner"):
            ctx.consumed = True  # one pan per pinch lifecycle
            self._pan(w, -1 if tag == "BottomLeftCorner" else +1)
            return
        if tag == "PieWedge" or tag == "Interior":
            if w.spec.chart.kind in ("Area", "StackedArea"):
                band = hidden_band_at(w.geom, ctx.pos)
                if band is not None:
                    ctx.consumed = True
                    self._reveal(w, band)
            if w.spec.chart.kind == "StackedArea":
                self._try_aggregate(w, ctx)
                return
            element = element_at(w.geom, ctx.pos)
            if element is not None and not ctx.consumed:
                self._grab_clone(w, ctx, element)
            return
        # LegendSwatch and anything else: pinches mean nothing there

    # ---------- zoom / pan ----------

    def _zoomable(self, w: _Working) -> bool:
        return (w.spec.chart.kind in RECTILINEAR_KINDS
                and w.geom.full_x_domain is not None)

    def _set_visible_domain(self, w: _Working, target: tuple[float, float]) -> None:
        before = w.geom.visible_x_domain
        w.visible_domain = target
        w.rebuild()
        oid = w.spec.id
        self._set_overlay(oid, "visible_domain", list(target))
        self._bump_geometry(oid)
        shift = {"from": list(before), "to": list(target),
                 "start_ms": self.t_ms, "duration_ms": DOMAIN_SHIFT_MS}
        self._set_overlay(oid, "domain_shift", shift)
        self._shift_until[oid] = self.t_ms + DOMAIN_SHIFT_MS

    def _bump_geometry(self, oid: str) -> None:
        self._set_overlay(oid, "geometry_version",
                          self.state["overlays"][oid]["geometry_version"] + 1)

    def _zoom_in(self, w: _Working, sx1: float, sx2: float) -> None:
        if not self._zoomable(w):
            return
        v1 = invert_x(w.geom, sx1)
        v2 = invert_x(w.geom, sx2)
        full = w.geom.full_x_domain
        region = interval_region_for(w.spec.chart, v1, v2)
        if region is not None:
            target = (max(full[0], region.lo), min(full[1], region.hi))
        else:
            lo, hi = min(v1, v2), max(v1, v2)
            if hi - lo < MIN_ZOOM_SPAN_FRAC * (full[1] - full[0]):
                return  # span too small, ignore
            target = (lo, hi)
        if target == w.geom.visible_x_domain:
            return
        self._set_visible_domain(w, target)

    def _zoom_out(self, w: _Working) -> None:
        if not self._zoomable(w):
            return
        full = w.geom.full_x_domain
        if w.geom.visible_x_domain == full:
            return  # already at full extent
        self._set_visible_domain(w, full)

    def _pan(self, w: _Working, direction: int) -> None:
        if not self._zoomable(w):
            return
        full = w.geom.full_x_domain
        lo, hi = w.geom.visible_x_domain
        if (lo, hi) == full:
            return  # nothing to pan at full extent
        span = hi - lo
        shift = direction * PAN_STEP_FRAC * span
        if direction > 0:
            new_hi = min(full[1], hi + shift)
            new_lo = new_hi - span
        else:
            new_lo = max(full[0], lo + shift)
            new_hi = new_lo + span
        target = (new_lo, new_hi)
        if target == (lo, hi):
            return  # already at that extent
        self._set_visible_domain(w, target)

    # ---------- reveal / aggregate ----------

    def _reveal(self, w: _Working, series: str) -> None:
        if series not in w.hidden:
            return
        w.hidden = w.hidden - {series}
        w.rebuild()
        oid = w.spec.id
        self._set_overlay(oid, "hidden_series", [s for s in w.data.series if s in w.hidden])

    def _try_aggregate(self, w: _Working, ctx: _PinchCtx) -> None:
        other = self._other_pinch(ctx.hand)
        if other is None or other.ended:
            return
        hit = classify_overlay(w.geom, other.pos)
        if hit is None or hit.tag not in ("Interior", "PieWedge"):
            return
        self._aggregate[w.spec.id] = [other, ctx]

    def _aggregate_live(self, w: _Working) -> bool:
        ctxs = self._aggregate.get(w.spec.id)
        if not ctxs:
            return False
        fx, fy, fw, fh = w.spec.frame
        for ctx in ctxs:
            if ctx.ended:
                continue
            px, py = ctx.pos
            if fx <= px <= fx + fw and fy <= py <= fy + fh:
                return True
        return False

    # ---------- clones ----------

    def _grab_clone(self, w: _Working, ctx: _PinchCtx, element: dict) -> None:
        oid = w.spec.id
        clones = self.state["overlays"][oid]["clones"]
        if len(clones) >= MAX_CLONES:
            return
        self._clone_seq += 1
        clone_id = f"c{self._clone_seq}"
        ctx.consumed = True
        ctx.clone_id = clone_id
        ctx.clone_overlay = oid
        entry = {"id": clone_id, "series": element["series"], "index": element["index"],
                 "hand": ctx.hand, "pos": [ctx.pos[0], ctx.pos[1]]}
        self._set_overlay(oid, "clones", clones + [entry])
        sources = self.state["overlays"][oid]["clone_sources"]
        src = {"series": element["series"], "index": element["index"]}
        if src not in sources:
            self._set_overlay(oid, "clone_sources", sources + [src])

    def _move_clone(self, ctx: _PinchCtx) -> None:
        oid = ctx.clone_overlay
        if oid not in self._working:
            return
        clones = self.state["overlays"][oid]["clones"]
        moved = [dict(c, pos=[ctx.pos[0], ctx.pos[1]]) if c["id"] == ctx.clone_id else c
                 for c in clones]
        self._set_overlay(oid, "clones", moved)

    def _release_clone(self, ctx: _PinchCtx) -> None:
        oid = ctx.clone_overlay
        if oid not in self._working:
            return
        overlays = self.state["overlays"][oid]
        entry = next((c for c in overlays["clones"] if c["id"] == ctx.clone_id), None)
        self._set_overlay(oid, "clones",
                          [c for c in overlays["clones"] if c["id"] != ctx.clone_id])
        if entry is not None:
            still_used = {(c["series"], c["index"])
                          for c in self.state["overlays"][oid]["clones"]}
            sources = [s for s in overlays["clone_sources"]
                       if (s["series"], s["index"]) in still_used]
            self._set_overlay(oid, "clone_sources", sources)
        if entry is None:
            return
        drop = self._classify(ctx.pos)
        if drop.overlay_id is None or drop.overlay_id == oid:
            return
        scene = self.deck.scenes[self.scene_index]
        bound = any(b.source == oid and b.target == drop.overlay_id and b.kind == "multiply"
                    for b in scene.bindings)
        src_w = self._working[oid]
        tgt_w = self._working[drop.overlay_id]
        same_domain = (src_w.spec.chart.shared_domain_id is not None
                       and src_w.spec.chart.shared_domain_id == tgt_w.spec.chart.shared_domain_id)
        if not bound or not same_domain:
            return  # plain destroy; mismatched drops change nothing
        self._multiply(src_w, entry["series"], tgt_w)

    def _multiply(self, src_w: _Working, src_series: str, tgt_w: _Working) -> None:
        factors = dict(src_w.data.series_xy[src_series])
        data = tgt_w.data
        for s in data.series:
            products = {x: y * factors[x] for x, y in data.series_xy[s] if x in factors}
            data = data.with_series_values(s, products)
        tgt_w.data = data
        tgt_w.rebuild()
        oid = tgt_w.spec.id
        self._set_overlay(oid, "data", data.to_json())
        self._set_overlay(oid, "y_domain", list(tgt_w.geom.y_domain))
        self._bump_geometry(oid)

    # ---------- per-frame projection of ephemeral visuals ----------

    def _project(self) -> None:
        # category emphasis sources: legend swatches and pie wedges under pointers
        active_by_domain: dict[str, list[str]] = {}
        for hand in HANDS:
            ctx = self._pointer[hand]
            if ctx is None or ctx.overlay_id is None or ctx.payload is None:
                continue
            if ctx.tag not in ("LegendSwatch", "PieWedge"):
                continue
            cd = self._working[ctx.overlay_id].spec.chart.category_domain_id
            if cd is None:
                continue
            cats = active_by_domain.setdefault(cd, [])
            if ctx.payload not in cats:
                cats.append(ctx.payload)

        # index-highlight sources per overlay (dominant hand wins inside one chart)
        interior: dict[str, list[str]] = {}
        margin: dict[str, list[str]] = {}
        wedge_ptr: dict[str, list[str]] = {}
        for hand in HANDS:
            ctx = self._pointer[hand]
            if ctx is None or ctx.overlay_id is None:
                continue
            if ctx.tag == "Interior":
                interior.setdefault(ctx.overlay_id, []).append(hand)
            elif ctx.tag in ("LeftMargin", "RightMargin"):
                margin.setdefault(ctx.overlay_id, []).append(hand)
            elif ctx.tag == "PieWedge":
                wedge_ptr.setdefault(ctx.overlay_id, []).append(hand)

        self_values: dict[str, float] = {}  # overlay -> pointed domain value (continuous x)
        self_band: dict[str, int] = {}      # overlay -> snapped band index
        for oid, hands in interior.items():
            w = self._working[oid]
            if w.spec.chart.kind not in RECTILINEAR_KINDS:
                continue
            hand = self.config.dominant(set(hands))
            pos = self._pointer[hand].pos
            if isinstance(w.geom.x_scale, charts.BandScale):
                self_band[oid] = w.geom.x_scale.nearest(pos[0])
            elif isinstance(w.geom.x_scale, charts.LinearScale):
                self_values[oid] = w.geom.x_scale.invert(pos[0])

        # shared-domain propagation; two sources on one domain suspend it
        linked_values: dict[str, float] = {}
        by_domain: dict[str, list[str]] = {}
        for oid in self_values:
            did = self._working[oid].spec.chart.shared_domain_id
            if did is not None:
                by_domain.setdefault(did, []).append(oid)
        for did, sources in by_domain.items():
            if len(sources) != 1:
                continue  # bimanual override: each chart follows its own hand
            v = self_values[sources[0]]
            for oid, w in self._working.items():
                if oid == sources[0] or w.spec.chart.shared_domain_id != did:
                    continue
                if isinstance(w.geom.x_scale, charts.LinearScale):
                    linked_values[oid] = v

        for oid, w in self._working.items():
            chart = w.spec.chart
            highlight = None
            labels = None
            if oid in wedge_ptr and chart.kind == "Pie":
                hand = self.config.dominant(set(wedge_ptr[oid]))
                cat = self._pointer[hand].payload
                highlight = {"wedge": cat}
            elif oid in self_band:
                i = self_band[oid]
                highlight = {"index": i, "x": w.data.x_values[i], "source": "self"}
            elif oid in self_values or oid in linked_values:
                source = "self" if oid in self_values else "linked"
                v = self_values.get(oid, linked_values.get(oid))
                i = snap_value(w.geom, v)
                if i is not None:
                    highlight = {"index": i, "x": w.data.x_values[i], "source": source}
            if highlight is not None and "index" in highlight:
                cats = active_by_domain.get(chart.category_domain_id or "", [])
                x = w.data.x_values[highlight["index"]]
                labels = []
                for s in w.data.series:
                    if s in w.hidden:
                        continue
                    if cats and s not in cats:
                        continue
                    v = w.data.value_at(s, x)
                    if v is not None:
                        labels.append({"series": s, "value": v})
                if not labels:
                    labels = None
            self._set_overlay(oid, "highlight", highlight)
            self._set_overlay(oid, "labels", labels)

            line = None
            if oid in margin and chart.kind in RECTILINEAR_KINDS:
                hand = self.config.dominant(set(margin[oid]))
                pos = self._pointer[hand].pos
                if w.geom.y_scale is not None:
                    line = {"value": invert_y(w.geom, pos[1])}
            self._set_overlay(oid, "margin_line", line)

            emphasis = None
            cd = chart.category_domain_id
            if cd is not None and cd in active_by_domain:
                on = [s for s in w.data.series if s in active_by_domain[cd]]
                if on:
                    off = [s for s in w.data.series if s not in active_by_domain[cd]]
                    emphasis = {"on": on, "off": off}
            self._set_overlay(oid, "emphasis", emphasis)

            self._set_overlay(oid, "aggregate_band",
                              chart.kind == "StackedArea" and self._aggregate_live(w))

        # palm gradients: one per overlay, dominant hand when both palms share it
        palms_by_overlay: dict[str, list[str]] = {}
        for hand in HANDS:
            ctx = self._palm[hand]
            if ctx is not None and ctx.overlay_id is not None:
                palms_by_overlay.setdefault(ctx.overlay_id, []).append(hand)
        for oid, w in self._working.items():
            gradient = None
            if oid in palms_by_overlay:
                hand = self.config.dominant(set(palms_by_overlay[oid]))
                pos = self._palm[hand].pos
                fx, fy, fw, fh = w.spec.frame
                gradient = {"cx": pos[0], "cy": pos[1],
                            "radius": GRADIENT_RADIUS_FRAC * math.hypot(fw, fh)}
            self._set_overlay(oid, "palm_gradient", gradient)

        # dead aggregates drop their bookkeeping
        for oid in list(self._aggregate):
            if oid not in self._working or not self._aggregate_live(self._working[oid]):
                del self._aggregate[oid]
