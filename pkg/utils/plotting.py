"""
SVG line charts for the report directory.

Charts are convenience output next to the CSVs. The SVG id salt is fixed and
the date metadata dropped so re-running a report gives identical files.
"""
import io
import threading
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("agg")
import matplotlib.pyplot as plt  # noqa: E402

from utils.file_io import PathLike, write_text_atomic  # noqa: E402

SVG_HASH_SALT = "cascade-branch"

# pyplot keeps global state
_PLOT_LOCK = threading.Lock()


def line_chart_svg(title: str, x_label: str, y_label: str,
                   series: Mapping[str, Sequence[Sequence[float]]],
                   step: bool = False) -> str:
    """
    Render named (x, y) series as one SVG document.

    Args:
        title: Chart title
        x_label: Label of the x axis
        y_label: Label of the y axis
        series: Mapping from legend label to an (x values, y values) pair
        step: Draw step lines instead of straight segments

    Returns:
        The SVG text
    """
    with _PLOT_LOCK, matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig = plt.figure(figsize=(6.4, 4.8), dpi=100)
        try:
            ax = fig.add_subplot(1, 1, 1)
            ax.set_title(title)
            ax.set_xlabel(x_label)
            ax.set_ylabel(y_label)
            for label, (xs, ys) in series.items():
                if step:
                    ax.step(list(xs), list(ys), where="post", label=label)
                else:
                    ax.plot(list(xs), list(ys), marker="o", markersize=3, label=label)
            if len(series) > 1:
                ax.legend()
            ax.grid(True, linewidth=0.3)

            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue().decode("utf-8")


def write_line_chart(file_path: PathLike, title: str, x_label: str, y_label: str,
                     series: Mapping[str, Sequence[Sequence[float]]], step: bool = False):
    return write_text_atomic(file_path, line_chart_svg(title, x_label, y_label, series, step))
