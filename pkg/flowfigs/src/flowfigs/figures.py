"""The five figure kinds rendered from curveflow run directories.

Rendering is read-only over the inputs and deterministic: the SVG id salt
is pinned and date metadata is stripped, so re-rendering a fixed input
reproduces the output bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from .io import (
    DECAY_COLUMNS,
    SAWTOOTH_COLUMNS,
    SchemaError,
    find_snapshot,
    nodal_block,
    polyval,
    read_json,
    read_snapshot,
    read_table,
)

KINDS = ("curve", "trace", "sawtooth", "scaling", "gamma")

matplotlib.rcParams["svg.hashsalt"] = "flowfigs"


@dataclass(frozen=True)
class PlotSpec:
    run_dir: str
    kind: str
    out_path: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not os.path.isdir(self.run_dir):
            raise SchemaError(f"run directory not found: {self.run_dir}")


def _save(fig, out_path):
    kwargs = {}
    if out_path.endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(out_path, **kwargs)
    plt.close(fig)
    return out_path


def render(spec):
    """Render one figure; returns the output path."""
    return _RENDERERS[spec.kind](spec)


def _density_column(data, options):
    name = options.get("color_by")
    if name:
        if name not in data:
            raise SchemaError(f"requested color column {name!r} not present")
        return data[name], name
    for name in ("rho", "rho_m"):
        if np.all(np.isfinite(data[name])):
            return data[name], name
    return None, None


def _render_curve(spec):
    data = read_snapshot(find_snapshot(spec.run_dir, spec.options.get("file")))
    x = np.append(data["gamma_x"], data["gamma_x"][0])
    y = np.append(data["gamma_y"], data["gamma_y"][0])
    color, label = _density_column(data, spec.options)
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    if color is not None:
        pts = np.stack([x, y], axis=1)
        segs = np.stack([pts[:-1], pts[1:]], axis=1)
        cvals = np.append(color, color[0])
        lc = LineCollection(segs, cmap="viridis", linewidths=2.0)
        lc.set_array(0.5 * (cvals[:-1] + cvals[1:]))
        ax.add_collection(lc)
        fig.colorbar(lc, ax=ax, label=label, shrink=0.85)
    else:
        ax.plot(x, y, "k-", lw=1.5)
    ax.plot([x[0]], [y[0]], "o", ms=7, mfc="none", mec="black")  # gamma(0)
    ax.set_aspect("equal")
    ax.margins(0.08)
    ax.autoscale()
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    return _save(fig, spec.out_path)


def _render_trace(spec):
    data = read_snapshot(find_snapshot(spec.run_dir, spec.options.get("file")))
    nodal = nodal_block(spec.run_dir)
    if not np.all(np.isfinite(data["rho"])):
        raise SchemaError("trace figure needs the rho column populated")
    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    lo, hi = nodal.get("kappa_range", (-2.0, 3.0))
    kk = np.linspace(lo, hi, 400)
    ax.plot(polyval(nodal["rho_minus"], kk), kk, "r-", lw=1.2, label="density nodal lines")
    ax.plot(polyval(nodal["rho_plus"], kk), kk, "r-", lw=1.2)
    rr = np.linspace(-0.05, 1.05, 400)
    ax.plot(rr, polyval(nodal["kappa0"], rr), "b-", lw=1.2, label="curvature nodal line")
    ax.plot(data["rho"], data["kappa"], ".", color="k", ms=3, label="equilibrium trace")
    # double-nodal markers: crossings of the curvature line with each branch
    for branch in ("rho_minus", "rho_plus"):
        h = polyval(nodal["kappa0"], polyval(nodal[branch], kk)) - kk
        sign = np.sign(h)
        idx = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
        for i in idx:
            ax.plot([polyval(nodal[branch], kk[i])], [kk[i]], "o", ms=9,
                    mfc="none", mec="black")
    ax.set_xlabel("rho")
    ax.set_ylabel("kappa")
    ax.set_ylim(lo, hi)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec.out_path)


def _render_sawtooth(spec):
    path = os.path.join(spec.run_dir, spec.options.get("file") or "sawtooth.csv")
    data = read_table(path, SAWTOOTH_COLUMNS)
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(data["s"], data["z"], "k-", lw=1.4)
    crossing = np.nonzero(np.sign(data["z"][1:]) != np.sign(data["z"][:-1]))[0]
    ax.plot(data["s"][crossing], np.zeros(len(crossing)), "o", color="red", ms=6)
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("s")
    ax.set_ylabel("z")
    fig.tight_layout()
    return _save(fig, spec.out_path)


def _render_scaling(spec):
    summary = read_json(os.path.join(spec.run_dir, "summary.json"))
    if "epsilons" not in summary or "runs" not in summary:
        raise SchemaError("scaling figure needs an icm-scaling summary.json")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.2, 3.8))
    eps_list = summary["epsilons"]
    for eps in eps_list:
        tag = f"eps{eps:g}".replace(".", "p")
        decay = read_table(os.path.join(spec.run_dir, f"dm_decay_{tag}.csv"),
                           DECAY_COLUMNS)
        ax1.semilogy(decay["t"] / eps, decay["d_m"], lw=1.3, label=f"eps={eps:g}")
    ax1.set_xlabel("t / eps")
    ax1.set_ylabel("manifold distance")
    ax1.legend(fontsize=8)
    plateaus = [summary["runs"][str(e)]["plateau"] for e in eps_list]
    ax2.loglog(eps_list, plateaus, "o-", color="k")
    slope = summary.get("plateau_loglog_slope")
    if slope is not None:
        ax2.set_title(f"plateau ~ eps^{slope:.2f}")
    ax2.set_xlabel("eps")
    ax2.set_ylabel("plateau")
    fig.tight_layout()
    return _save(fig, spec.out_path)


def _render_gamma(spec):
    summary = read_json(os.path.join(spec.run_dir, "summary.json"))
    if "gap" not in summary:
        raise SchemaError("gamma figure needs a gamma-convergence summary.json")
    eps = np.array(sorted(float(k) for k in summary["gap"]))
    gaps = np.array([summary["gap"][f"{e:g}" if f"{e:g}" in summary["gap"] else str(e)]
                     for e in eps])
    fig, ax = plt.subplots(figsize=(4.8, 3.8))
    ax.loglog(eps, gaps, "o-", color="k")
    order = summary.get("fitted_order")
    if order is not None:
        ax.set_title(f"|F_eps - F0| ~ eps^{order:.2f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("energy gap")
    fig.tight_layout()
    return _save(fig, spec.out_path)


_RENDERERS = {
    "curve": _render_curve,
    "trace": _render_trace,
    "sawtooth": _render_sawtooth,
    "scaling": _render_scaling,
    "gamma": _render_gamma,
}
