"""Matplotlib renderers for the CLI report path.

Kept out of the core modules so that library users never pay the
matplotlib import; the CLI writes one figure next to each CSV.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_iv(tables: dict, path) -> None:
    """Overlay |J|-V curves; keys label the traces (state / temperature)."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for label, (biases, densities) in tables.items():
        ax.semilogy(biases, np.abs(densities) + 1e-300, marker="o",
                    markersize=3, label=label)
    ax.set_xlabel("bias (V)")
    ax.set_ylabel(r"|J| (A/cm$^2$)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def render_transmission(energies, trans, path, mu: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogy(energies, np.maximum(trans, 1e-300))
    if mu is not None:
        ax.axvline(mu, color="k", ls="--", lw=0.8, label=r"$\mu$")
        ax.legend()
    ax.set_xlabel("energy (eV)")
    ax.set_ylabel("transmission")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def render_ldos(positions, energies, ldos, potential, path) -> None:
    """Heatmap of the LDOS with the potential profile overlaid in red."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(positions, energies, ldos.T, shading="auto",
                         cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="LDOS (1/eV/nm)")
    ax.plot(positions, potential, color="red", lw=1.5, label="potential")
    ax.set_xlabel("position (nm)")
    ax.set_ylabel("energy (eV)")
    ax.legend(loc="upper right")
    _save(fig, path)


def render_ratio(biases, ratios, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(biases, ratios, marker="s", markersize=4)
    ax.set_xlabel("bias (V)")
    ax.set_ylabel(r"switching ratio $R_{off}/R_{on}$")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def render_sweep(values, ratios, parameter, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    if all(isinstance(v, (int, float)) for v in values):
        ax.plot(values, ratios, marker="o", markersize=4)
    else:
        ax.bar(range(len(values)), ratios)
        ax.set_xticks(range(len(values)), [str(v) for v in values])
    ax.set_xlabel(parameter)
    ax.set_ylabel("switching ratio")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def render_calibration(table, best, path) -> None:
    """Scatter of the search grid colored by ratio, best point marked."""
    depths = sorted({row[0] for row in table})
    locs = sorted({row[1] for row in table})
    grid = np.full((len(depths), len(locs)), np.nan)
    for depth, loc, ratio in table:
        grid[depths.index(depth), locs.index(loc)] = ratio
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(locs, depths, grid, shading="auto", cmap="plasma")
    fig.colorbar(mesh, ax=ax, label="switching ratio")
    ax.plot(best[1], best[0], marker="*", markersize=14, color="white",
            markeredgecolor="black")
    ax.set_xlabel("well location (nm)")
    ax.set_ylabel("well depth (eV)")
    _save(fig, path)


def render_scf(positions, frozen, converged, residuals, path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(positions, frozen, label="frozen", lw=1)
    ax1.plot(positions, converged, label="converged", lw=1)
    ax1.set_xlabel("position (nm)")
    ax1.set_ylabel("potential (eV)")
    ax1.legend()
    ax2.semilogy(range(1, len(residuals) + 1), residuals, marker=".")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("max |dU| (eV)")
    ax2.grid(True, which="both", alpha=0.3)
    _save(fig, path)
