"""Figures written next to the CSV/JSON outputs of the command line tool."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import matplotlib.tri as mtri  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_m0_sweep(xs, values, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, values, ".", ms=2)
    ax.set_xlabel("x")
    ax.set_ylabel("m0(x)")
    ax.set_ylim(-0.01, 0.31)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_mesh_function(mf, path, title=None, cell_mask=None):
    """Shaded plot of a mesh function over the level-``L`` cells where it is defined."""
    mesh = mf.mesh
    xy = mesh.xy
    tris = mesh.cells[mesh.level]
    if cell_mask is not None:
        tris = tris[cell_mask]
    vals = mf.values
    tris = tris[np.isfinite(vals[tris]).all(axis=1)]
    fig, ax = plt.subplots(figsize=(6, 5.4))
    tri = mtri.Triangulation(xy[:, 0], xy[:, 1], triangles=tris)
    pc = ax.tripcolor(tri, np.nan_to_num(vals), shading="gouraud", cmap="viridis")
    fig.colorbar(pc, ax=ax, shrink=0.8)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_growth(Ns, energies, path, rate=5.0 / 3.0):
    Ns = np.asarray(Ns)
    energies = np.asarray(energies)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(Ns, energies, "o-", label="minimal extension energy")
    ref = energies[0] * rate ** (Ns - Ns[0])
    ax.semilogy(Ns, ref, "--", label=f"{rate:.3g}^N reference")
    ax.set_xlabel("N")
    ax.set_ylabel("energy")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)


def plot_boundary_flux(values, path, title=None):
    """Step plot of piecewise constant data on the ``2^K`` dyadic pieces of the cut."""
    values = np.asarray(values)
    edges = np.linspace(0, 1, len(values) + 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.stairs(values, edges)
    ax.set_xlabel("dyadic piece (measure coordinate)")
    ax.set_ylabel("normal derivative")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)
