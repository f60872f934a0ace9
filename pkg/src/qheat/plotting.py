"""PNG figures rendered next to the CSV output (matplotlib, Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _col(table, name):
    i = table.header.index(name)
    return np.array([np.nan if r[i] is None else float(r[i]) for r in table.rows])


def _trajectory(table, ax):
    t = _col(table, "t")
    n = table.meta["n"]
    for i in range(n):
        ax.plot(t, _col(table, f"rho{i}{i}.re"), label=rf"$\rho_{{{i}{i}}}$")
    if n == 3:
        ax.plot(t, _col(table, "rho21.re"), "--", label=r"Re $\rho_{21}$")
    ax.set_xlabel("t")
    ax.set_ylabel("population")


def _machine(table, ax):
    om = _col(table, "omega")
    for name in ("J_c", "J_h", "W_dot"):
        ax.plot(om, _col(table, name), label=name)
    if "omega_crit" in table.meta:
        ax.axvline(table.meta["omega_crit"], color="k", lw=0.8, ls=":", label=r"$\Omega_{crit}$")
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel(r"$\Omega$")


def _curves(table, ax, key, label):
    x = _col(table, "beta_eff_omega0")
    g = _col(table, key)
    r = _col(table, "ratio")
    for val in dict.fromkeys(g):
        sel = g == val
        ax.plot(x[sel], r[sel], label=f"{label} = {int(val)}")
    ax.set_xlabel(r"$\beta_{eff}\omega_0$")
    ax.set_ylabel("current ratio")


def _surface(table, ax):
    nr, nc = table.meta["shape"]
    z = _col(table, "ratio").reshape(nr, nc)
    im = ax.imshow(z.T, origin="lower", extent=(0, 1, -0.5, 0.5), aspect="auto", vmin=0, vmax=2, cmap="viridis")
    ax.contour(np.linspace(0, 1, nr), np.linspace(-0.5, 0.5, nc), z.T, levels=[1.0], colors="w", linewidths=0.8)
    ax.figure.colorbar(im, ax=ax, label="power ratio")
    ax.set_xlabel(r"$\rho_{00}$")
    ax.set_ylabel(r"Re $\rho_{21}$")


def render(table, png_path) -> Path | None:
    """Draw the figure matching ``table.kind``; returns None for tabular-only results."""
    kinds = {
        "trajectory": _trajectory,
        "machine": _machine,
        "neff_ratio": lambda t, a: _curves(t, a, "n_eff", r"$N_{eff}$"),
        "dicke_ratio": lambda t, a: _curves(t, a, "n_atoms", "N"),
        "surface": _surface,
    }
    draw = kinds.get(table.kind)
    if draw is None:
        return None
    fig, ax = plt.subplots(figsize=(5.5, 4))
    draw(table, ax)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    png_path = Path(png_path)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(png_path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return png_path
