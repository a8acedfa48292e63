"""Self-contained SVG rendering of run CSVs.

Charts are log-scale line plots built as plain SVG text with no external
assets: one polyline per series, axis frame, decade ticks, and a text legend.
"""

import math
from pathlib import Path

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 36
MARGIN_BOTTOM = 48
FLOOR = 1e-16
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class EmptySeries(Exception):
    pass


def read_csv(path):
    """Column dict of a run CSV; stops at an appended certificate section."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise EmptySeries(f"{path}: no content")
    header = lines[0].split(",")
    columns = {name: [] for name in header}
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            break  # certificate/constants section uses its own layout
        try:
            values = [float(p) for p in parts]
        except ValueError:
            break
        for name, value in zip(header, values):
            columns[name].append(value)
    return columns


def _log_points(xs, ys):
    pts = [(x, math.log10(max(y, FLOOR))) for x, y in zip(xs, ys)]
    if not pts:
        raise EmptySeries("series has no points")
    return pts


def _scale(value, lo, hi, out_lo, out_hi):
    if hi <= lo:
        return 0.5 * (out_lo + out_hi)
    return out_lo + (value - lo) / (hi - lo) * (out_hi - out_lo)


def render_line_chart(series, title, x_label, y_label):
    """SVG text for named series, y on a log10 scale.

    series is a list of (label, xs, ys) triples; nonpositive y values are
    clipped to a small floor before taking logs.
    """
    if not series:
        raise EmptySeries("no series given")
    logged = [(label, _log_points(xs, ys)) for label, xs, ys in series]

    all_x = [p[0] for _, pts in logged for p in pts]
    all_ly = [p[1] for _, pts in logged for p in pts]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = math.floor(min(all_ly)), math.ceil(max(all_ly))
    if y_hi == y_lo:
        y_hi = y_lo + 1

    px_left, px_right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    px_top, px_bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{px_left}" y="{px_top}" width="{px_right - px_left}" '
        f'height="{px_bottom - px_top}" fill="none" stroke="black"/>',
    ]

    # decade grid lines and tick labels on the y axis
    step = max(1, (y_hi - y_lo) // 8)
    for decade in range(y_lo, y_hi + 1, step):
        py = _scale(decade, y_lo, y_hi, px_bottom, px_top)
        parts.append(
            f'<line x1="{px_left}" y1="{py:.1f}" x2="{px_right}" y2="{py:.1f}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{px_left - 6}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">1e{decade}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        px = _scale(xv, x_lo, x_hi, px_left, px_right)
        parts.append(
            f'<text x="{px:.1f}" y="{px_bottom + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.6g}</text>'
        )
    parts.append(
        f'<text x="{(px_left + px_right) / 2:.1f}" y="{HEIGHT - 10}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(px_top + px_bottom) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(px_top + px_bottom) / 2:.1f})">{y_label}</text>'
    )

    for k, (label, pts) in enumerate(logged):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(
            f"{_scale(x, x_lo, x_hi, px_left, px_right):.1f},"
            f"{_scale(ly, y_lo, y_hi, px_bottom, px_top):.1f}"
            for x, ly in pts
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        ly_pos = px_top + 16 + 14 * k
        parts.append(
            f'<line x1="{px_right - 130}" y1="{ly_pos - 4}" x2="{px_right - 110}" '
            f'y2="{ly_pos - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{px_right - 104}" y="{ly_pos}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


_PLOT_COLUMNS = {
    "abs_f_resid": "absolute residual",
    "f_resid": "residual",
    "gap": "gap",
    "max_violation": "constraint violation",
    "rel_err": "relative error",
}


def emit_plots(csv_paths, out_dir):
    """One SVG per plottable metric, one series per CSV that carries it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    loaded = [(Path(p).stem, read_csv(p)) for p in csv_paths]
    written = []
    for column, label in _PLOT_COLUMNS.items():
        series = [
            (stem, cols["iter"], cols[column])
            for stem, cols in loaded
            if column in cols and cols[column]
        ]
        if not series:
            continue
        svg = render_line_chart(series, title=label, x_label="iteration", y_label=label)
        path = out_dir / f"{column}.svg"
        path.write_text(svg)
        written.append(str(path))
    if not written:
        raise EmptySeries("no plottable columns in the given CSVs")
    return written
