"""Deterministic SVG heatmaps of per-step node values on lattice runs."""

from __future__ import annotations

CELL = 22
GAP = 14
LABEL_H = 14
MARGIN = 10


def _shade(value: float) -> str:
    """Map a normalized value to a white-to-blue hex fill."""
    v = min(max(value, 0.0), 1.0)
    red = round(255 * (1.0 - 0.85 * v))
    green = round(255 * (1.0 - 0.65 * v))
    blue = round(255 * (1.0 - 0.15 * v))
    return f"#{red:02x}{green:02x}{blue:02x}"


def render_heatmap(grids, rows: int, cols: int, per_row: int = 4) -> str:
    """One shaded panel per step, laid out left to right then wrapped.

    Values are normalized per frame (an all-zero frame renders at the
    minimum shade). Identical input yields identical bytes.
    """
    grids = [list(g) for g in grids]
    if not grids:
        raise ValueError("no grids to render")
    for i, g in enumerate(grids):
        if len(g) != rows * cols:
            raise ValueError(f"grid {i} has {len(g)} cells, expected {rows * cols}")
    panel_w = cols * CELL
    panel_h = rows * CELL + LABEL_H
    across = min(per_row, len(grids))
    down = (len(grids) + per_row - 1) // per_row
    width = MARGIN * 2 + across * panel_w + (across - 1) * GAP
    height = MARGIN * 2 + down * panel_h + (down - 1) * GAP

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    for idx, grid in enumerate(grids):
        peak = max(grid)
        px = MARGIN + (idx % per_row) * (panel_w + GAP)
        py = MARGIN + (idx // per_row) * (panel_h + GAP)
        parts.append(
            f'<text x="{px}" y="{py + LABEL_H - 4}" font-family="monospace" '
            f'font-size="11" fill="#333333">step {idx}</text>'
        )
        for r in range(rows):
            for c in range(cols):
                value = grid[r * cols + c]
                norm = value / peak if peak > 0.0 else 0.0
                x = px + c * CELL
                y = py + LABEL_H + r * CELL
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                    f'fill="{_shade(norm)}" stroke="#cccccc" stroke-width="1"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_heatmap(grids, path, rows: int, cols: int, per_row: int = 4) -> None:
    """Write the multi-panel SVG; raises for non-lattice (unmappable) data."""
    svg = render_heatmap(grids, rows, cols, per_row=per_row)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
