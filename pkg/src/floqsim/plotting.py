"""Figure rendering for run/sweep/stability outputs.

Every renderer writes PNG files next to the CSVs it visualizes. Imported
lazily by the experiment layer so `--no-figures` runs never touch
matplotlib.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .floquet import trimer_populations_fractional, trimer_populations_integer

plt.rcParams.update(
    {
        "figure.dpi": 150,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.2,
    }
)

_VARIANT_COLORS = {"integer": "tab:blue", "fractional": "tab:red"}


def _color(label: str):
    return _VARIANT_COLORS.get(label, None)


def _save(fig, path: Path):
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def _columns(family):
    headers, rows = family
    data = np.asarray(rows, dtype=float)
    return headers, data


def _is_trimer_bh(cfg) -> bool:
    return cfg.model == "bose_hubbard" and cfg.L == 3


def _trimer_overlay(ax, cfg, t_over_T):
    """Dashed closed-form trimer curves behind the measured points."""
    T = 2.0 * np.pi / cfg.resolved_omega()
    t_dense = np.linspace(0.0, t_over_T[-1] * T, 400)
    if cfg.drive == "integer":
        p0, p1, _ = trimer_populations_integer(t_dense, cfg.J0)
        ax.plot(t_dense / T, p0, "k--", lw=0.8, label="closed form P0")
        ax.plot(t_dense / T, p1, "k:", lw=0.8, label="closed form P1,P2")
    elif cfg.drive == "fractional":
        p0, p3 = trimer_populations_fractional(t_dense, cfg.J0, cfg.U)
        ax.plot(t_dense / T, p0, "k--", lw=0.8, label="closed form P0")
        ax.plot(t_dense / T, p3, "k:", lw=0.8, label="closed form P3")


def _plot_family(ax, name, headers, data, label_prefix="", color=None):
    t = data[:, 0]
    if name == "heating":
        ax.plot(t, data[:, 2], color=color, label=f"{label_prefix}heat rate")
        ax.set_ylabel("energy change per period")
    elif name == "autocorr":
        cmap = plt.get_cmap("viridis")
        n_sites = data.shape[1] - 1
        for j in range(n_sites):
            ax.plot(t, data[:, j + 1], color=cmap(j / max(1, n_sites - 1)),
                    label=headers[j + 1])
        ax.set_ylabel("density autocorrelation")
    else:
        for j, header in enumerate(headers[1:], start=1):
            ax.plot(t, data[:, j], color=color if len(headers) == 2 else None,
                    marker="o" if len(t) <= 150 else None, markersize=2.5,
                    label=f"{label_prefix}{header}")
        ax.set_ylabel({"populations": "population",
                       "localization": "spread",
                       "entropy": "entanglement entropy",
                       "echo": "return probability"}.get(name, name))
    ax.set_xlabel("t / T")
    ax.legend(fontsize=7, ncol=2 if data.shape[1] > 5 else 1)


def render_run(out_dir, cfg, families: dict):
    """One PNG per observable family written alongside the CSVs."""
    out = Path(out_dir)
    for name, family in families.items():
        headers, data = _columns(family)
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        if name == "populations" and _is_trimer_bh(cfg):
            _trimer_overlay(ax, cfg, data[:, 0])
        _plot_family(ax, name, headers, data)
        ax.set_title(f"{cfg.label}: {name}", fontsize=9)
        _save(fig, out / f"{name}.png")


def render_sweep(out_dir, cfg, rows):
    """Resonance-weight structure vs drive frequency (two panels)."""
    data = np.asarray(rows, dtype=float)
    x = data[:, 1]  # omega / U
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.2, 2.8))
    ax1.plot(x, data[:, 2], color="tab:blue", label="Re F")
    ax1.plot(x, data[:, 4], color="tab:blue", ls="--", lw=0.8, label="|F|")
    ax1.axvline(1.0, color="k", lw=0.6, ls=":")
    ax1.set_xlabel("drive frequency / U")
    ax1.set_ylabel("time-averaged weight")
    ax1.legend(fontsize=7)
    ax2.plot(x, data[:, 7], color="tab:red", label="|F1|")
    ax2.plot(x, data[:, 10], color="tab:orange", lw=0.8, label="|F2|")
    ax2.axvline(0.5, color="k", lw=0.6, ls=":")
    ax2.set_xlabel("drive frequency / U")
    ax2.set_ylabel("second-order weight")
    ax2.legend(fontsize=7)
    fig.suptitle(f"{cfg.label}: labels {cfg.sweep_m}", fontsize=9)
    _save(fig, Path(out_dir) / "sweep.png")


def render_stability(out_dir, cfg, deltas, rows, probe):
    """Entropy growth for each detuning, probe time marked."""
    data = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    for j, delta in enumerate(deltas):
        ax.plot(data[:, 0], data[:, j + 1], label=f"detuning {delta:g}")
    ax.axvline(probe, color="k", lw=0.6, ls=":")
    ax.set_xlabel("t / T")
    ax.set_ylabel(f"entanglement entropy (cut {cfg.cut})")
    ax.legend(fontsize=7)
    ax.set_title(f"{cfg.label}: drive-frequency stability", fontsize=9)
    _save(fig, Path(out_dir) / "stability.png")


def render_comparison(out_dir, header, results):
    """Variant overlay (e.g. integer vs fractional) per shared family."""
    shared = None
    loaded = []
    for cfg, sub in results:
        families = _read_families(Path(sub))
        loaded.append((cfg, families))
        names = set(families)
        shared = names if shared is None else shared & names
    for name in sorted(shared or ()):
        fig, ax = plt.subplots(figsize=(4.6, 3.2))
        for cfg, families in loaded:
            headers, data = _columns(families[name])
            _plot_family(ax, name, headers, data,
                         label_prefix=f"{cfg.label}: ", color=_color(cfg.label))
        ax.set_title(header.get("title", ""), fontsize=9)
        _save(fig, Path(out_dir) / f"compare_{name}.png")


def _read_families(sub: Path) -> dict:
    families = {}
    for csv_path in sub.glob("*.csv"):
        lines = csv_path.read_text().strip().splitlines()
        headers = lines[0].split(",")
        rows = [tuple(float(v) for v in line.split(",")) for line in lines[1:]]
        families[csv_path.stem] = (headers, rows)
    return families
