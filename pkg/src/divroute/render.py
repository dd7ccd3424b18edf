"""Static SVG rendering of costmap, roadmap, routes and vehicle traces."""

from __future__ import annotations

from typing import Sequence

from divroute.costmap import TwoValueCostmap
from divroute.planner import Route
from divroute.roadmap import Roadmap

ROUTE_COLORS = ("red", "blue", "green", "orange", "purple", "teal")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(rm: Roadmap | None, cmap: TwoValueCostmap | None,
               routes: Sequence[Route] = (), traces: Sequence[Sequence] = (),
               colors: Sequence[str] | None = None, dashed: Sequence[bool] | None = None,
               trace_colors: Sequence[str] | None = None,
               size: int = 600, title: str | None = None) -> str:
    """Deterministic SVG document; map y axis points up."""
    if rm is not None:
        b = rm.bounds
        x0, y0, w, h = b.xmin, b.ymin, b.width, b.height
    elif cmap is not None:
        x0, y0, w, h = 0.0, 0.0, cmap.extent, cmap.extent
    else:
        raise ValueError("need a roadmap or a costmap to set the frame")
    scale = size / max(w, h)
    width, height = w * scale, h * scale
    colors = list(colors or ROUTE_COLORS)
    trace_colors = list(trace_colors or ROUTE_COLORS)
    dashed = list(dashed or [False] * len(routes))

    def X(x):
        return _fmt((x - x0) * scale)

    def Y(y):
        return _fmt(height - (y - y0) * scale)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
           f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">']
    if title:
        out.append(f"<title>{title}</title>")

    if cmap is not None:
        lo, hi = float(cmap.mean.min()), float(cmap.mean.max())
        span = hi - lo or 1.0
        cs = cmap.cell_size
        out.append('<g id="costmap" stroke="none">')
        for row in range(cmap.n_cells):
            for col in range(cmap.n_cells):
                level = int(round(245 - 150 * (cmap.mean[row, col] - lo) / span))
                out.append(f'<rect x="{X(col * cs)}" y="{Y((row + 1) * cs)}" '
                           f'width="{_fmt(cs * scale)}" height="{_fmt(cs * scale)}" '
                           f'fill="rgb({level},{level},{level})"/>')
        out.append("</g>")

    if rm is not None:
        out.append('<g id="roadmap" stroke="#8899aa" stroke-width="0.8">')
        for i, j in rm.edges():
            a, c = rm.vertices[i], rm.vertices[j]
            out.append(f'<line x1="{X(a[0])}" y1="{Y(a[1])}" x2="{X(c[0])}" y2="{Y(c[1])}"/>')
        out.append("</g>")

    for k, tr in enumerate(traces):
        pts = " ".join(f"{X(p[0])},{Y(p[1])}" for p in tr)
        out.append(f'<polyline class="trace" fill="none" stroke="{trace_colors[k % len(trace_colors)]}" '
                   f'stroke-width="1.5" stroke-opacity="0.6" points="{pts}"/>')

    for k, r in enumerate(routes):
        pts = " ".join(f"{X(p.x)},{Y(p.y)}" for p in r.points)
        dash = ' stroke-dasharray="8,5"' if k < len(dashed) and dashed[k] else ""
        out.append(f'<polyline class="route" fill="none" stroke="{colors[k % len(colors)]}" '
                   f'stroke-width="3"{dash} points="{pts}"/>')

    if rm is not None and rm.start_vertex is not None:
        s, g = rm.vertices[rm.start_vertex], rm.vertices[rm.end_vertex]
        out.append(f'<circle id="start" cx="{X(s[0])}" cy="{Y(s[1])}" r="6" fill="blue"/>')
        out.append(f'<circle id="goal" cx="{X(g[0])}" cy="{Y(g[1])}" r="6" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

