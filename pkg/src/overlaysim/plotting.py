"""Line-chart rendering of experiment tables to SVG files.

Output is byte-deterministic: fixed hash salt, no date metadata, text kept
as text elements rather than glyph paths.
"""

from __future__ import annotations

import csv
import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ParseError, UnknownColumn  # noqa: E402

_SVG_RC = {
    "svg.hashsalt": "overlaysim",
    "svg.fonttype": "none",
}


def emit_chart(csv_text: str, x_column: str, y_columns: list[str], path: str,
               title: str | None = None, y_label: str | None = None) -> None:
    """Render one polyline per y column against x_column and write SVG."""
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    if not rows:
        raise ParseError("cannot chart an empty table")
    header = rows[0].keys()
    for column in [x_column, *y_columns]:
        if column not in header:
            raise UnknownColumn(column)

    xs = [float(r[x_column]) for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for column in y_columns:
        ys = [math.nan if r[column] == "NA" else float(r[column]) for r in rows]
        ax.plot(xs, ys, marker="o", label=column)
    ax.set_xlabel(x_column)
    if y_label:
        ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    try:
        with plt.rc_context(_SVG_RC):
            fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
