"""Deterministic SVG snapshots of a render state.

The renderer is a pure function of the state tree plus the snapshot clock.
Element order, attribute order, and number formatting are all fixed, so two
identical states always serialize to byte-identical markup. Overlays mid
transition slide in from their declared edge and morph frames interpolate;
overlays that already exited are absent from the state and are simply not
drawn. Structural consumers can query by class:

    ref-vline         snapped highlight rule
    ref-hline         margin reference rule
    aggregate-band    stacked-area aggregate readout
    clone             grabbed element copies
    marker            fingertip markers
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

VIEW_W = 1000
VIEW_H = 1000

BACKDROP_FILL = "#1c1e22"
DIM_OPACITY = "0.25"
CLONE_OPACITY = "0.8"
MARKER_FILL = "#f5f5f5"
MARKER_PINCH_FILL = "#ff5252"
PIE_RADIUS_LOCAL = 0.45


def _f(v: float) -> str:
    """Fixed float format: three decimals, trailing zeros trimmed, no -0."""
    s = f"{float(v):.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _lerp(a: float, b: float, p: float) -> float:
    return a + (b - a) * p


def _progress(start_ms: object, duration_ms: object, t_ms: int | None) -> float:
    if t_ms is None or not isinstance(start_ms, (int, float)):
        return 1.0
    dur = duration_ms if isinstance(duration_ms, (int, float)) and duration_ms > 0 else 1
    return max(0.0, min(1.0, (t_ms - start_ms) / dur))


class _Px:
    """Pixel-space scales for one overlay, rebuilt from plain state."""

    def __init__(self, ov: dict, frame: tuple[float, float, float, float],
                 window: tuple[float, float] | None):
        fx, fy, fw, fh = frame
        ml, mt, mr, mb = ov["margins"]
        self.frame = (fx * VIEW_W, fy * VIEW_H, fw * VIEW_W, fh * VIEW_H)
        self.plot = (
            (fx + fw * ml) * VIEW_W,
            (fy + fh * mt) * VIEW_H,
            fw * (1 - ml - mr) * VIEW_W,
            fh * (1 - mt - mb) * VIEW_H,
        )
        self.kind = ov["kind"]
        data = ov["data"]
        self.x_values = list(data.get("x", []))
        self.window = window
        self.y_domain = ov.get("y_domain")
        self.band = bool(self.x_values) and isinstance(self.x_values[0], str)

    def x(self, v: float) -> float:
        px, _, pw, _ = self.plot
        lo, hi = self.window
        if hi == lo:
            return px
        return px + (v - lo) / (hi - lo) * pw

    def band_center(self, i: int) -> float:
        px, _, pw, _ = self.plot
        n = max(1, len(self.x_values))
        return px + pw * (i + 0.5) / n

    def band_width(self) -> float:
        _, _, pw, _ = self.plot
        return pw / max(1, len(self.x_values))

    def y(self, v: float) -> float:
        _, py, _, ph = self.plot
        lo, hi = self.y_domain
        if hi == lo:
            return py + ph
        return py + ph - (v - lo) / (hi - lo) * ph


def _wedge_path(cx: float, cy: float, r: float, a0: float, a1: float) -> str:
    """Pie wedge path, angles in degrees clockwise from 12 o'clock."""
    def pt(a: float) -> tuple[float, float]:
        rad = math.radians(a)
        return cx + r * math.sin(rad), cy - r * math.cos(rad)
    x0, y0 = pt(a0)
    x1, y1 = pt(a1)
    large = 1 if (a1 - a0) > 180 else 0
    return (f"M {_f(cx)} {_f(cy)} L {_f(x0)} {_f(y0)} "
            f"A {_f(r)} {_f(r)} 0 {large} 1 {_f(x1)} {_f(y1)} Z")


def _series_color(ov: dict, name: str) -> str:
    return ov["colors"].get(name, "#888888")


def _visible_series(ov: dict) -> list[str]:
    hidden = set(ov.get("hidden_series") or [])
    return [s for s in ov["series"] if s not in hidden]


def _points(ov: dict, name: str) -> list[tuple[float, float]]:
    xs = ov["data"]["x"]
    ys = ov["data"]["series"].get(name, [])
    return [(x, y) for x, y in zip(xs, ys) if y is not None]


def _window(ov: dict, t_ms: int | None) -> tuple[float, float] | None:
    vis = ov.get("visible_domain")
    if vis is None:
        return None
    shift = ov.get("domain_shift")
    if shift:
        p = _progress(shift["start_ms"], shift["duration_ms"], t_ms)
        if p < 1.0:
            return (_lerp(shift["from"][0], shift["to"][0], p),
                    _lerp(shift["from"][1], shift["to"][1], p))
    return (float(vis[0]), float(vis[1]))


def _rect_series_svg(oid: str, ov: dict, px: _Px, dim: set) -> list[str]:
    out = []
    kind = ov["kind"]
    visible = _visible_series(ov)
    _, py, _, ph = px.plot
    y0 = px.y(max(0.0, px.y_domain[0]))
    if kind == "Bar":
        name = visible[0] if visible else None
        if name is None:
            return out
        centers, width = _bar_centers(px)
        for i, cx in centers:
            y = ov["data"]["series"][name][i]
            if y is None:
                continue
            top = px.y(y)
            lo, hi = min(top, y0), max(top, y0)
            op = f' opacity="{DIM_OPACITY}"' if (name, i) in dim else ""
            out.append(f'<rect class="bar" data-series={quoteattr(name)} data-index="{i}" '
                       f'x="{_f(cx - width / 2)}" y="{_f(lo)}" width="{_f(width)}" '
                       f'height="{_f(hi - lo)}" fill="{_series_color(ov, name)}"{op}/>')
    elif kind == "StackedBar":
        centers, width = _bar_centers(px)
        for i, cx in centers:
            base = 0.0
            for name in visible:
                y = ov["data"]["series"][name][i]
                if y is None:
                    continue
                top = px.y(base + y)
                bot = px.y(base)
                op = f' opacity="{DIM_OPACITY}"' if (name, i) in dim else ""
                out.append(f'<rect class="bar" data-series={quoteattr(name)} data-index="{i}" '
                           f'x="{_f(cx - width / 2)}" y="{_f(top)}" width="{_f(width)}" '
                           f'height="{_f(bot - top)}" fill="{_series_color(ov, name)}"{op}/>')
                base += y
    elif kind == "Line":
        for name in visible:
            pts = " ".join(f"{_f(px.x(x))},{_f(px.y(y))}" for x, y in _points(ov, name))
            if not pts:
                continue
            op = f' opacity="{DIM_OPACITY}"' if (name, None) in dim else ""
            out.append(f'<polyline class="line" data-series={quoteattr(name)} '
                       f'points="{pts}" fill="none" '
                       f'stroke="{_series_color(ov, name)}" stroke-width="2.5"{op}/>')
    elif kind == "Area":
        for name in visible:
            pts = _points(ov, name)
            if not pts:
                continue
            d = "M " + " L ".join(f"{_f(px.x(x))} {_f(px.y(y))}" for x, y in pts)
            d += f" L {_f(px.x(pts[-1][0]))} {_f(y0)} L {_f(px.x(pts[0][0]))} {_f(y0)} Z"
            op = f' opacity="{DIM_OPACITY}"' if (name, None) in dim else ""
            out.append(f'<path class="area" data-series={quoteattr(name)} d="{d}" '
                       f'fill="{_series_color(ov, name)}" fill-opacity="0.7"{op}/>')
    elif kind == "StackedArea":
        xs = ov["data"]["x"]
        base = [0.0] * len(xs)
        for name in visible:
            ys = ov["data"]["series"][name]
            top = [b + (y or 0.0) for b, y in zip(base, ys)]
            fwd = [f"{_f(px.x(x))} {_f(px.y(v))}" for x, v in zip(xs, top)]
            rev = [f"{_f(px.x(x))} {_f(px.y(v))}" for x, v in zip(reversed(xs), reversed(base))]
            d = "M " + " L ".join(fwd + rev) + " Z"
            op = f' opacity="{DIM_OPACITY}"' if (name, None) in dim else ""
            out.append(f'<path class="area" data-series={quoteattr(name)} d="{d}" '
                       f'fill="{_series_color(ov, name)}" fill-opacity="0.85"{op}/>')
            base = top
    return out


def _bar_centers(px: _Px) -> tuple[list[tuple[int, float]], float]:
    """(index, center) pairs plus bar width, confined to the window."""
    if px.band:
        return [(i, px.band_center(i)) for i in range(len(px.x_values))], px.band_width() * 0.8
    lo, hi = px.window
    idx = [i for i, x in enumerate(px.x_values) if lo <= x <= hi]
    centers = [(i, px.x(px.x_values[i])) for i in idx]
    if len(centers) > 1:
        step = min(b[1] - a[1] for a, b in zip(centers, centers[1:]))
        width = step * 0.8
    else:
        width = px.plot[2] * 0.8
    return centers, width


def _pie_svg(oid: str, ov: dict, px: _Px, dim: set, highlight: dict | None) -> list[str]:
    out = []
    fx, fy, fw, fh = px.plot
    cx, cy = fx + fw / 2, fy + fh / 2
    r = PIE_RADIUS_LOCAL * min(fw, fh)
    values = ov["data"]["values"]
    total = sum(values.get(c, 0) for c in ov["series"])
    if total <= 0:
        return out
    hl = highlight.get("wedge") if highlight else None
    theta = 0.0
    for c in ov["series"]:
        extent = values.get(c, 0) / total * 360.0
        a0, a1 = theta, theta + extent
        theta = a1
        if extent <= 0:
            continue
        op = f' opacity="{DIM_OPACITY}"' if (c, None) in dim else ""
        stroke = ' stroke="#ffffff" stroke-width="3"' if c == hl else ""
        if extent >= 360.0 - 1e-9:
            out.append(f'<circle class="wedge" data-category={quoteattr(c)} cx="{_f(cx)}" '
                       f'cy="{_f(cy)}" r="{_f(r)}" fill="{_series_color(ov, c)}"{stroke}{op}/>')
        else:
            out.append(f'<path class="wedge" data-category={quoteattr(c)} '
                       f'd="{_wedge_path(cx, cy, r, a0, a1)}" '
                       f'fill="{_series_color(ov, c)}"{stroke}{op}/>')
    return out


def _legend_svg(oid: str, ov: dict, px: _Px, emphasis: dict | None) -> list[str]:
    out = []
    fx, fy, fw, fh = px.plot
    cats = ov["data"]["categories"]
    n = max(1, len(cats))
    row_h = fh / n
    off = set(emphasis["off"]) if emphasis else set()
    for i, c in enumerate(cats):
        y = fy + row_h * i
        sw = min(row_h * 0.6, fw * 0.2)
        op = f' opacity="{DIM_OPACITY}"' if c in off else ""
        out.append(f'<g class="legend-row" data-category={quoteattr(c)}{op}>'
                   f'<rect class="swatch" x="{_f(fx)}" y="{_f(y + (row_h - sw) / 2)}" '
                   f'width="{_f(sw)}" height="{_f(sw)}" fill="{_series_color(ov, c)}"/>'
                   f'<text class="legend-label" x="{_f(fx + sw * 1.4)}" '
                   f'y="{_f(y + row_h / 2)}" dominant-baseline="middle" '
                   f'font-size="{_f(min(28.0, sw))}" fill="#e8e8e8">{escape(c)}</text></g>')
    return out


def _overlay_svg(oid: str, ov: dict, t_ms: int | None, transition: dict | None) -> list[str]:
    frame = tuple(float(v) for v in ov["frame"])
    tx = ty = 0.0
    if transition:
        p = _progress(transition.get("start_ms"), transition.get("duration_ms", 500), t_ms)
        for m in transition.get("morphs", []):
            if m["overlay"] == oid and p < 1.0:
                frame = tuple(_lerp(a, b, p) for a, b in zip(m["from_frame"], m["to_frame"]))
        for e in transition.get("enters", []):
            if e["overlay"] == oid and p < 1.0:
                q = 1.0 - p
                tx = {"right": q * VIEW_W, "left": -q * VIEW_W}.get(e["style"], 0.0)
                ty = {"down": q * VIEW_H, "up": -q * VIEW_H}.get(e["style"], 0.0)
    window = _window(ov, t_ms)
    px = _Px(ov, frame, window)
    fx, fy, fw, fh = px.frame
    plx, ply, plw, plh = px.plot
    transform = f' transform="translate({_f(tx)} {_f(ty)})"' if tx or ty else ""
    out = [f'<g class="overlay overlay-{ov["kind"].lower()}" id="ov-{oid}"{transform}>']
    out.append(f'<clipPath id="clip-{oid}"><rect x="{_f(plx)}" y="{_f(ply)}" '
               f'width="{_f(plw)}" height="{_f(plh)}"/></clipPath>')
    out.append(f'<rect class="panel" x="{_f(fx)}" y="{_f(fy)}" width="{_f(fw)}" '
               f'height="{_f(fh)}" fill="#24262c" fill-opacity="0.85" rx="6"/>')

    dim = {(s["series"], s["index"]) for s in ov.get("clone_sources") or []}
    emphasis = ov.get("emphasis")
    if emphasis:
        dim |= {(s, None) for s in emphasis["off"]}
        dim |= {(s, i) for s in emphasis["off"] for i in range(len(ov["data"].get("x", [])))}

    if ov["kind"] == "Pie":
        out += _pie_svg(oid, ov, px, dim, ov.get("highlight"))
    elif ov["kind"] == "Legend":
        out += _legend_svg(oid, ov, px, emphasis)
    else:
        out.append(f'<g clip-path="url(#clip-{oid})">')
        for r in ov.get("interval_regions") or []:
            x0, x1 = px.x(r["lo"]), px.x(r["hi"])
            out.append(f'<rect class="interval-region" data-label={quoteattr(r["label"])} '
                       f'x="{_f(x0)}" y="{_f(ply)}" width="{_f(x1 - x0)}" '
                       f'height="{_f(plh)}" fill="#ffffff" fill-opacity="0.06"/>')
        out += _rect_series_svg(oid, ov, px, dim)
        band = ov.get("aggregate_band")
        if band:
            out.append(f'<rect class="aggregate-band" x="{_f(plx)}" y="{_f(ply)}" '
                       f'width="{_f(plw)}" height="{_f(plh)}" fill="#ffd54f" '
                       f'fill-opacity="0.18"/>')
        out.append("</g>")
        hl = ov.get("highlight")
        if hl and "x" in hl and not px.band:
            x = px.x(hl["x"])
            out.append(f'<line class="ref-vline" data-source={quoteattr(hl["source"])} '
                       f'x1="{_f(x)}" y1="{_f(ply)}" x2="{_f(x)}" y2="{_f(ply + plh)}" '
                       f'stroke="#ffffff" stroke-width="1.5" stroke-dasharray="5 4"/>')
            for name in _visible_series(ov):
                y = ov["data"]["series"][name][hl["index"]]
                if y is None:
                    continue
                if ov["kind"] == "StackedArea":
                    stack = 0.0
                    for s in _visible_series(ov):
                        v = ov["data"]["series"][s][hl["index"]] or 0.0
                        stack += v
                        if s == name:
                            break
                    y = stack
                out.append(f'<circle class="ref-dot" data-series={quoteattr(name)} '
                           f'cx="{_f(x)}" cy="{_f(px.y(y))}" r="5" '
                           f'fill="{_series_color(ov, name)}" stroke="#ffffff" '
                           f'stroke-width="1.5"/>')
        elif hl and "x" in hl and px.band:
            i = hl["index"]
            cx = px.band_center(i)
            out.append(f'<line class="ref-vline" data-source={quoteattr(hl["source"])} '
                       f'x1="{_f(cx)}" y1="{_f(ply)}" x2="{_f(cx)}" y2="{_f(ply + plh)}" '
                       f'stroke="#ffffff" stroke-width="1.5" stroke-dasharray="5 4"/>')
        ml = ov.get("margin_line")
        if ml is not None:
            y = px.y(ml["value"])
            out.append(f'<line class="ref-hline" x1="{_f(plx)}" y1="{_f(y)}" '
                       f'x2="{_f(plx + plw)}" y2="{_f(y)}" stroke="#80deea" '
                       f'stroke-width="1.5" stroke-dasharray="5 4"/>')
            out.append(f'<text class="ref-hline-label" x="{_f(plx + 6)}" y="{_f(y - 6)}" '
                       f'font-size="18" fill="#80deea">{escape(_f(ml["value"]))}</text>')
        for j, lab in enumerate(ov.get("labels") or []):
            out.append(f'<text class="value-label" data-series={quoteattr(lab["series"])} '
                       f'x="{_f(plx + plw - 8)}" y="{_f(ply + 22 + 24 * j)}" '
                       f'text-anchor="end" font-size="18" '
                       f'fill="{_series_color(ov, lab["series"])}">'
                       f'{escape(lab["series"])}: {escape(_f(lab["value"]))}</text>')

    grad = ov.get("palm_gradient")
    if grad is not None:
        gx, gy = grad["cx"] * VIEW_W, grad["cy"] * VIEW_H
        gr = grad["radius"] * VIEW_W
        out.append(f'<radialGradient id="grad-{oid}"><stop offset="0" stop-color="#ffffff" '
                   f'stop-opacity="0.35"/><stop offset="1" stop-color="#ffffff" '
                   f'stop-opacity="0"/></radialGradient>')
        out.append(f'<circle class="palm-gradient" cx="{_f(gx)}" cy="{_f(gy)}" '
                   f'r="{_f(gr)}" fill="url(#grad-{oid})"/>')

    for clone in ov.get("clones") or []:
        cxp, cyp = clone["pos"][0] * VIEW_W, clone["pos"][1] * VIEW_H
        color = _series_color(ov, clone["series"])
        shape = (f'<circle cx="{_f(cxp)}" cy="{_f(cyp)}" r="20" fill="{color}"/>'
                 if clone["index"] is None and ov["kind"] == "Pie" else
                 f'<rect x="{_f(cxp - 22)}" y="{_f(cyp - 14)}" width="44" height="28" '
                 f'fill="{color}"/>')
        out.append(f'<g class="clone" data-id="{clone["id"]}" '
                   f'data-series={quoteattr(clone["series"])} opacity="{CLONE_OPACITY}">'
                   f'{shape}</g>')
    out.append("</g>")
    return out


def render_svg(state: dict, t_ms: int | None = None,
               width: int = VIEW_W, height: int = VIEW_H) -> str:
    """Serialize one render state to SVG markup.

    t_ms positions transition slides and domain shift animations; omit it
    to draw everything settled at its final geometry.
    """
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {VIEW_W} {VIEW_H}" font-family="sans-serif">']
    bg = state.get("background") or {}
    out.append(f'<rect class="backdrop" x="0" y="0" width="{VIEW_W}" height="{VIEW_H}" '
               f'fill="{BACKDROP_FILL}"/>')
    if bg.get("grayscale"):
        out.append(f'<rect class="backdrop-grayscale" x="0" y="0" width="{VIEW_W}" '
                   f'height="{VIEW_H}" fill="#555555" fill-opacity="0.4"/>')
    if bg.get("darken"):
        out.append(f'<rect class="backdrop-dim" x="0" y="0" width="{VIEW_W}" '
                   f'height="{VIEW_H}" fill="#000000" fill-opacity="0.45"/>')
    overlays = state.get("overlays", {})
    order = sorted(overlays, key=lambda oid: (overlays[oid]["z"], overlays[oid]["order"]))
    transition = state.get("transition")
    for oid in order:
        out += _overlay_svg(oid, overlays[oid], t_ms, transition)
    for hand in ("Right", "Left"):
        m = state.get("markers", {}).get(hand)
        if not m:
            continue
        fill = MARKER_PINCH_FILL if m["pinching"] else MARKER_FILL
        ix, iy = m["index"][0] * VIEW_W, m["index"][1] * VIEW_H
        tx2, ty2 = m["thumb"][0] * VIEW_W, m["thumb"][1] * VIEW_H
        out.append(f'<circle class="marker marker-{hand.lower()}" cx="{_f(ix)}" '
                   f'cy="{_f(iy)}" r="9" fill="{fill}" stroke="#111111" stroke-width="1.5"/>')
        out.append(f'<circle class="marker-thumb marker-{hand.lower()}" cx="{_f(tx2)}" '
                   f'cy="{_f(ty2)}" r="5" fill="{fill}" fill-opacity="0.7"/>')
    out.append("</svg>")
    return "\n".join(out)
