"""Plot data in gnuplot layout plus matplotlib renderings of the same panels.

Each panel file holds one gnuplot index block per solver (blocks separated
by two blank lines) with columns ``k mean std``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import Aggregate

PANELS = {
    "objective": ("f_est", "estimated f(x_k)", True),
    "residual": ("resid_sq_est", "estimated ||G_s(x_k)||^2", True),
    "stepsize": ("t_k", "t_k", True),
}


def _positive(aggregates, metric) -> bool:
    """Log axes only when every finite mean is positive."""
    for agg in aggregates.values():
        v = agg.mean[metric]
        v = v[np.isfinite(v)]
        if v.size and v.min() <= 0:
            return False
    return True


def _fmt(v) -> str:
    return repr(float(v))


def emit_plot_data(aggregates: dict[str, Aggregate], out_dir) -> list[Path]:
    """Write ``<panel>.dat`` files and ``plot.gp``; returns the written paths."""
    if not aggregates:
        raise ValueError("no aggregates to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(aggregates)
    written = []
    for panel, (metric, _, _) in PANELS.items():
        blocks = []
        for name in names:
            agg = aggregates[name]
            lines = [f"# {name}", "# k mean std"]
            lines += [
                f"{int(k)} {_fmt(m)} {_fmt(s)}"
                for k, m, s in zip(agg.k, agg.mean[metric], agg.std[metric])
            ]
            blocks.append("\n".join(lines))
        path = out / f"{panel}.dat"
        path.write_text("\n\n\n".join(blocks) + "\n", encoding="utf-8")
        written.append(path)
    script = [
        "# gnuplot -p plot.gp",
        "set terminal pngcairo size 1500,450",
        "set output 'panels_gnuplot.png'",
        "set multiplot layout 1,3",
        "set xlabel 'k'",
    ]
    for panel, (metric, label, logy) in PANELS.items():
        logy = logy and _positive(aggregates, metric)
        script.append(f"set title '{label}'")
        script.append("set logscale y" if logy else "unset logscale y")
        parts = [
            f"'{panel}.dat' index {i} using 1:2 with lines title '{name}'" for i, name in enumerate(names)
        ]
        script.append("plot " + ", \\\n     ".join(parts))
    script.append("unset multiplot")
    gp = out / "plot.gp"
    gp.write_text("\n".join(script) + "\n", encoding="utf-8")
    written.append(gp)
    return written


def render_png(aggregates: dict[str, Aggregate], out_dir) -> list[Path]:
    """One PNG per panel with a mean +- std band for each solver."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for panel, (metric, label, logy) in PANELS.items():
        logy = logy and _positive(aggregates, metric)
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for name, agg in aggregates.items():
            m, s = agg.mean[metric], agg.std[metric]
            ax.plot(agg.k, m, label=name, lw=1.2)
            lo = m - s
            if logy:
                lo = lo.clip(min=m * 1e-3)
            ax.fill_between(agg.k, lo, m + s, alpha=0.2)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("k")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out / f"{panel}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written
