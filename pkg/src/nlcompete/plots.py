"""Figure rendering for the CLI report path.

Each helper writes one PNG next to the delimited output and returns the
path.  The CSV files remain the machine-readable contract; these figures
are the human-readable companion.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_profiles",
    "save_timeseries",
    "save_loglog_decay",
    "save_spectral_rows",
    "save_audit_margins",
    "save_phase_map",
]

_OUTCOME_COLORS = {
    "coexistence": "tab:green",
    "u_excludes_v": "tab:blue",
    "v_excludes_u": "tab:orange",
    "extinction": "tab:red",
    "undecided": "lightgray",
    "": "white",
}


def _finish(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_profiles(path, grid, named_values: dict, title: str, ylabel: str = "density") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, values in named_values.items():
        ax.plot(grid.nodes, values, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if named_values:
        ax.legend(fontsize=8)
    return _finish(fig, path)


def save_timeseries(path, rows, title: str) -> Path:
    """rows: (t, max|u|, max|v|, min u, min v, rhs norm)."""
    arr = np.asarray(rows, dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.plot(arr[:, 0], arr[:, 1], label="max |u|")
    ax1.plot(arr[:, 0], arr[:, 2], label="max |v|")
    ax1.plot(arr[:, 0], arr[:, 3], "--", label="min u")
    ax1.plot(arr[:, 0], arr[:, 4], "--", label="min v")
    ax1.set_xlabel("t")
    ax1.set_ylabel("density")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    positive = arr[:, 5] > 0
    ax2.semilogy(arr[positive, 0], arr[positive, 5])
    ax2.set_xlabel("t")
    ax2.set_ylabel("rhs max norm")
    ax2.grid(True, alpha=0.3)
    fig.suptitle(title)
    return _finish(fig, path)


def save_loglog_decay(path, d_values, named_series: dict, title: str,
                      ylabel: str = "gap") -> Path:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    d = np.asarray(d_values, dtype=float)
    for label, series in named_series.items():
        s = np.asarray(series, dtype=float)
        mask = np.isfinite(s) & (s > 0)
        if mask.any():
            ax.loglog(d[mask], s[mask], "o-", label=label)
    ax.set_xlabel("d")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_spectral_rows(path, rows, gamma_max: float) -> Path:
    d = [r.d for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.semilogx(d, [r.lambda1 for r in rows], "o-", label="lambda1(d)")
    ax1.axhline(gamma_max, color="k", ls="--", lw=1, label="max gamma")
    ax1.set_xlabel("d")
    ax1.set_ylabel("principal bound")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    ax2.loglog(d, [r.gap for r in rows], "o-", label="|lambda1 - max gamma|")
    ax2.loglog(d, [r.bound for r in rows], "--", label="2 d envelope")
    ax2.set_xlabel("d")
    ax2.legend(fontsize=8)
    ax2.grid(True, which="both", alpha=0.3)
    fig.suptitle("small-rate limit of the principal bound")
    return _finish(fig, path)


def save_audit_margins(path, audit) -> Path:
    rows = [(name, margin) for name, margin, _, _ in audit.rows() if np.isfinite(margin)]
    names = [r[0] for r in rows]
    margins = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = ["tab:green" if m > 0 else "tab:red" for m in margins]
    ax.bar(names, margins, color=colors)
    ax.axhline(0.0, color="k", lw=1)
    ax.set_ylabel("worst margin")
    ax.set_title("assumption audit margins")
    ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)


def save_phase_map(path, cells, x_axis: str, y_axis: str) -> Path:
    """Scatter phase diagram over two swept parameters, colored by prediction."""
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    seen = {}
    for cell in cells:
        x = getattr(cell, x_axis)
        y = getattr(cell, y_axis)
        kind = cell.predicted if not cell.error else "undecided"
        color = _OUTCOME_COLORS.get(kind, "black")
        label = kind if kind not in seen else None
        seen[kind] = True
        edge = "k"
        if cell.agreement is False:
            edge = "red"
        ax.scatter([x], [y], c=[color], s=80, edgecolors=edge, label=label)
    ax.set_xlabel(x_axis)
    ax.set_ylabel(y_axis)
    ax.set_title("predicted phase map (red edge = disagreement)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return _finish(fig, path)
