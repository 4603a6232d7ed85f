"""Static SVG figures for scenario outputs.

Plotting is limited to 2-D projections: filled polygons for 2-D sets
(vertices enumerated with support LPs), radius-versus-step line charts for
any dimension, and axis-aligned interval-hull boxes for projected panes.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Polygon, Rectangle

from .lp import LpProblem, solve_lp
from .sets import ConstrainedZonotope

# Deterministic SVG output: fixed hash salt, no embedded creation date.
plt.rcParams["svg.hashsalt"] = "czest"
SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def set_vertices_2d(Z: ConstrainedZonotope, directions: int = 180) -> np.ndarray:
    """Vertices of a 2-D constrained zonotope, ordered counterclockwise.

    Solves one support LP per direction and keeps the distinct maximizers.
    Exact up to the angular resolution: every returned point is a boundary
    point, and all vertices are found once `directions` exceeds the vertex
    count of the (polytopic) set.
    """
    if Z.dim != 2:
        raise ValueError("vertex enumeration is limited to 2-D sets")
    points = []
    for theta in np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False):
        d = np.array([np.cos(theta), np.sin(theta)])
        cost = -(Z.G.T @ d)
        sol = solve_lp(
            LpProblem(cost, Z.A, Z.b, -np.ones(Z.n_gen), np.ones(Z.n_gen))
        )
        if not sol.optimal:
            raise ValueError("support LP failed; set may be empty")
        points.append(Z.c + Z.G @ sol.x)
    pts = np.asarray(points)
    # Deduplicate and order by angle around the centroid.
    center = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    order = np.argsort(ang, kind="stable")
    pts = pts[order]
    keep = [0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-9:
            keep.append(i)
    return pts[keep]


def plot_sets_2d(named_sets, path, samples=None, title=None):
    """Overlay filled 2-D set outlines, optionally with sample dots."""
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (label, Z) in enumerate(named_sets):
        verts = set_vertices_2d(Z)
        color = colors[i % len(colors)]
        ax.add_patch(
            Polygon(verts, closed=True, fill=False, edgecolor=color,
                    linewidth=1.4, label=label)
        )
    if samples is not None:
        ax.plot(samples[:, 0], samples[:, 1], ".", color="0.55",
                markersize=1.0, zorder=0, label="samples")
    ax.relim()
    ax.autoscale_view()
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **SAVE_KW)
    plt.close(fig)


def plot_radius_series(series, path, title=None):
    """Radius-versus-step line chart; series is a list of (label, radii)."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for label, radii in series:
        ax.plot(np.arange(len(radii)), radii, linewidth=1.2, label=label)
    ax.set_xlabel("step k")
    ax.set_ylabel("radius")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **SAVE_KW)
    plt.close(fig)


def plot_hull_panes(hulls, truth, pairs, labels, path, every=50, title=None):
    """Projected interval-hull boxes along a run, one subplot per axis pair.

    hulls: list of IntervalVector per step; truth: array of true states;
    pairs: list of (i, j) index pairs; labels: state names for axes.
    """
    fig, axes = plt.subplots(1, len(pairs), figsize=(4.2 * len(pairs), 4.0))
    if len(pairs) == 1:
        axes = [axes]
    steps = range(0, len(hulls), every)
    for ax, (i, j) in zip(axes, pairs):
        for k in steps:
            hull = hulls[k]
            ax.add_patch(
                Rectangle(
                    (hull.lo[i], hull.lo[j]),
                    hull.hi[i] - hull.lo[i],
                    hull.hi[j] - hull.lo[j],
                    fill=False,
                    edgecolor="tab:blue",
                    linewidth=0.7,
                    alpha=0.8,
                )
            )
        ax.plot(truth[:, i], truth[:, j], color="tab:red", linewidth=1.0,
                label="true trajectory")
        ax.set_xlabel(labels[i])
        ax.set_ylabel(labels[j])
        ax.relim()
        ax.autoscale_view()
    axes[0].legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, **SAVE_KW)
    plt.close(fig)
