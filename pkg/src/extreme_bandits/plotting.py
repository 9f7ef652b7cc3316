"""Regret-curve figures rendered from a results CSV.

Works purely from the CSV so it can run after the fact::

    python -m extreme_bandits.plotting results.csv results.png
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import read_regret_csv  # noqa: E402


def plot_regret_csv(csv_path, png_path=None, title: str | None = None, dpi: int = 120) -> Path:
    """Mean extreme regret per policy against time, log x axis, +-1 SE band.

    Writes ``png_path`` (default: the CSV path with a .png suffix) and
    returns it.
    """
    csv_path = Path(csv_path)
    png_path = Path(png_path) if png_path is not None else csv_path.with_suffix(".png")
    curves = read_regret_csv(csv_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, cols in curves.items():
        t, m, se = cols["checkpoint"], cols["regret_mean"], cols["regret_sem"]
        (line,) = ax.plot(t, m, label=label, lw=1.5)
        ax.fill_between(t, m - se, m + se, color=line.get_color(), alpha=0.2, lw=0)
    ax.set_xscale("log")
    ax.set_xlabel("time t")
    ax.set_ylabel("extreme regret")
    ax.set_title(title or csv_path.stem)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(png_path, dpi=dpi)
    plt.close(fig)
    return png_path


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) not in (1, 2):
        print("usage: python -m extreme_bandits.plotting RESULTS.csv [OUT.png]", file=sys.stderr)
        return 2
    print(plot_regret_csv(*argv))
    return 0


if __name__ == "__main__":
    sys.exit(main())
