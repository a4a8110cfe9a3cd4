"""Figure rendering for the report paths.

Figures are written next to the delimited output they illustrate: the
empirical phase diagram with the closed-form region boundaries overlaid,
the martingale/variation traces of a single run, and the urn mean growth
against its analytic envelope.  PNG metadata is pinned so repeated runs
produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import PhaseCell  # noqa: E402
from .walk import DiagnosticsSeries  # noqa: E402

PNG_METADATA = {"Software": "errwlab"}

_CLASS_COLORS = {
    "recurrent": "#2e9e4f",
    "transient": "#2b6fb3",
    "localized": "#c23b3b",
}


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, metadata=PNG_METADATA)
    plt.close(fig)
    return path


def phase_diagram(cells: Sequence[PhaseCell], path: Union[str, Path]) -> Path:
    """Empirical phase fractions as RGB dots under the theory boundaries."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    alphas = np.array([c.alpha for c in cells])
    rhos = np.array([c.rho for c in cells])
    colors = [(c.frac_localized_like, c.frac_recurrent_like,
               c.frac_transient_like) for c in cells]
    ax.scatter(alphas, rhos, c=colors, s=240, marker="s", edgecolors="black",
               linewidths=0.4, zorder=3)

    a = np.linspace(0.5001, 1.0, 200)
    ax.plot(a, 1.0 - a, color=_CLASS_COLORS["recurrent"], lw=1.5,
            label="recurrent below: rho = 1 - alpha")
    ax.plot(a, (1.5 - a) / (2.5 - a), color=_CLASS_COLORS["transient"],
            lw=1.5, label="transient above: rho = (1.5-a)/(2.5-a)")
    ax.axhline(1.0, color=_CLASS_COLORS["localized"], lw=1.5,
               label="localizes above: rho = 1")

    ax.set_xlabel("alpha (initial weight exponent)")
    ax.set_ylabel("rho (reinforcement exponent)")
    ax.set_title("empirical phases: red=localized, green=recurrent, "
                 "blue=transient")
    ax.set_xlim(0.5, 1.02)
    ax.set_ylim(-0.02, max(2.0, float(rhos.max()) + 0.1) if len(rhos) else 2.0)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def diagnostics_figure(series: DiagnosticsSeries, path: Union[str, Path],
                       title: str = "") -> Path:
    """M/Theta traces and the running quadratic variation of one run."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(series.n, series.M, lw=0.8, label="M")
    ax1.plot(series.n, series.Theta, lw=0.8, ls="--", label="Theta")
    ax1.set_ylabel("height martingale")
    ax1.legend(loc="best", fontsize=8)
    if title:
        ax1.set_title(title)
    ax2.plot(series.n, series.S2, lw=0.8, color="#a04040")
    ax2.set_ylabel("quadratic variation")
    ax2.set_xlabel("step")
    fig.tight_layout()
    return _save(fig, path)


def urn_bound_figure(rows: Sequence[tuple], path: Union[str, Path]) -> Path:
    """Mean black count at white count n against the analytic envelope.

    ``rows`` are (gamma, rho, n, method, samples, mean, bound, within,
    censored) summary tuples.
    """
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    groups: dict[tuple[float, float, str], list[tuple[int, float, float]]] = {}
    for gamma, rho, n, method, _, mean, bound, _, _ in rows:
        groups.setdefault((gamma, rho, method), []).append((n, mean, bound))
    for (gamma, rho, method), pts in sorted(groups.items()):
        pts.sort()
        ns = [p[0] for p in pts]
        means = [p[1] for p in pts]
        bounds = [p[2] for p in pts]
        line, = ax.plot(ns, means, marker="o", ms=4, lw=1.0,
                        label=f"mean gamma={gamma} rho={rho} [{method}]")
        if method != "rubin":  # one bound curve per (gamma, rho)
            ax.plot(ns, bounds, ls=":", lw=1.0, color=line.get_color())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("target white count n")
    ax.set_ylabel("mean black count at hit time")
    ax.set_title("urn growth vs analytic envelope (dotted)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)
