"""Figure rendering for the CLI report paths.

Every figure is rendered straight to a file next to the delimited output;
nothing is ever shown interactively.  The CSVs stay the primary artifact,
the figures are the quick-look companions.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_CLASS_COLORS = {"negative-energy": "tab:red", "bound": "tab:blue",
                 "positive-continuum": "tab:green"}


def spectrum_figure(rows: List[Dict], path: Union[str, Path],
                    title: Optional[str] = None) -> None:
    """Per-channel eigenvalue ladders, colored by state class."""
    channels = sorted({r["channel"] for r in rows})
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for ic, ch in enumerate(channels):
        for cls, color in _CLASS_COLORS.items():
            e = [r["energy_au"] for r in rows
                 if r["channel"] == ch and r["class"] == cls]
            if not e:
                continue
            ax.plot(np.full(len(e), ic), e, marker="_", linestyle="none",
                    markersize=14, color=color,
                    label=cls if ic == 0 else None)
    ax.set_xticks(range(len(channels)))
    ax.set_xticklabels(channels)
    ax.set_yscale("symlog", linthresh=1.0)
    ax.set_xlabel("channel")
    ax.set_ylabel("energy (a.u.)")
    if title:
        ax.set_title(title)
    ax.legend(loc="center left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def populations_figure(checkpoints: List[Dict], path: Union[str, Path],
                       title: Optional[str] = None) -> None:
    """Class populations and norm over the pulse."""
    t = np.array([c["t"] for c in checkpoints])
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    names = sorted({k for c in checkpoints for k in c["populations"]})
    floor = 1e-30
    for name in names:
        p = np.array([c["populations"].get(name, 0.0) for c in checkpoints])
        ax.semilogy(t, np.maximum(p, floor), label=name,
                    color=_CLASS_COLORS.get(name))
    norm = np.array([c["norm"] for c in checkpoints])
    ax.semilogy(t, norm, "k--", linewidth=0.8, label="norm")
    ax.set_xlabel("t (a.u.)")
    ax.set_ylabel("population")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(rows: List[Dict], axis: str, path: Union[str, Path],
                 title: Optional[str] = None) -> None:
    """Ionization yield along the sweep axis (completed points only)."""
    ok = [r for r in rows if r.get("status") == "ok"]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if ok:
        x = np.array([float(r["value"]) for r in ok])
        y = np.array([float(r["ionization"]) for r in ok])
        ax.plot(x, y, "o-")
        if np.all(y > 0):
            ax.set_yscale("log")
    ax.set_xlabel(axis)
    ax.set_ylabel("ionization yield")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def rate_figure(curves: Dict[str, tuple], path: Union[str, Path],
                title: Optional[str] = None) -> None:
    """Rate curves Gamma(F0); curves maps label -> (f0 array, gamma array)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, (f0, gamma) in curves.items():
        ax.semilogy(f0, gamma, label=label)
    ax.set_xlabel("peak field (Z^3 a.u.)")
    ax.set_ylabel("rate (Z^2 a.u.)")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
