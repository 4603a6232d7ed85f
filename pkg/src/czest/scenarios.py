"""Bundled experiment scenarios: the planar benchmark and the quadrotor.

Each scenario builds its model, bounds, and measurement structure, runs the
requested estimators on identical noise realizations, and (optionally)
exports CSV metrics, CG-rep JSON dumps, and SVG figures into an output
directory.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .estimator import (
    EstimatorConfig,
    EstimatorRun,
    LinearMeasurement,
    compute_arr,
    run_estimation,
)
from .models import PlanarGrowthModel, QuadrotorModel
from .propagation import first_order_taylor_extension, mean_value_extension
from .sets import ConstrainedZonotope, eliminate_constraints, reduce_generators

SCENARIO_NAMES = ("example1-reach", "example1-estimation", "quadrotor")


class ScenarioError(RuntimeError):
    """A scenario-level failure, e.g. a containment violation."""


def _map_seeds(seeds, fn):
    """Run fn(seed) for every seed, optionally in a thread pool.

    CZEST_THREADS (the only environment variable the package reads) sets the
    worker count; results are merged in seed order so the output is identical
    for any thread count.
    """
    seeds = list(seeds)
    workers = int(os.environ.get("CZEST_THREADS", "1"))
    if workers > 1 and len(seeds) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, seeds))
    else:
        results = [fn(s) for s in seeds]
    return dict(zip(seeds, results))


@dataclass
class MetricsRow:
    k: int
    method: str
    radius: float
    ng: int
    nc: int
    wall_micros: float


CSV_HEADER = "k,method,radius,ng,nc,wall_micros"


def metrics_rows(run: EstimatorRun) -> list[MetricsRow]:
    return [
        MetricsRow(r.k, run.method, r.radius, r.n_gen, r.n_con, r.wall_micros)
        for r in run.records
    ]


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.k},{r.method},{r.radius:.12g},{r.ng},{r.nc},{r.wall_micros:.0f}"
        )
    return "\n".join(lines) + "\n"


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def export_run_csv(rows, path: str):
    _write(path, rows_to_csv(rows))


def export_set_json(Z: ConstrainedZonotope, path: str):
    _write(path, Z.to_json() + "\n")


# ---------------------------------------------------------------------------
# Planar benchmark (two-state growth model).
# ---------------------------------------------------------------------------

# Initial set for the one-step reachability study: a constrained zonotope
# whose interval hull is [-1.5, -1.2] x [0.7, 1.3].
REACH_X0 = ConstrainedZonotope(
    G=np.array([[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]]),
    c=np.array([-1.0, 1.0]),
    A=np.array([[2.0, 2.0, 2.0]]),
    b=np.array([-3.0]),
)

# Initial set, measurement map, and bounds for the 100-step estimation study.
EST_X0 = ConstrainedZonotope.zonotope(
    np.array([[0.1, 0.2, -0.1], [0.1, 0.1, 0.0]]), np.array([0.5, 0.5])
)
EST_C = np.array([[1.0, 0.0], [-1.0, 1.0]])
EST_BOUND_W = 0.4
EST_BOUND_V = 0.4
EST_X0_TRUE = np.array([0.8, 0.65])
EST_H = {"CZMV": "C2", "CZFO": "C4", "ZMV": "C2", "ZFO": "C4"}


def example1_measurement() -> LinearMeasurement:
    V = ConstrainedZonotope.zonotope(EST_BOUND_V * np.eye(2), np.zeros(2))
    return LinearMeasurement(C=EST_C, D_u=np.zeros((2, 0)), D_v=np.eye(2), V=V)


def example1_config(method: str, seed: int, ng: int = 20, nc: int = 5,
                    steps: int = 100, h: str | None = None) -> EstimatorConfig:
    W = ConstrainedZonotope.zonotope(EST_BOUND_W * np.eye(2), np.zeros(2))
    return EstimatorConfig(
        method=method,
        X0=EST_X0,
        W=W,
        measurement=example1_measurement(),
        x0_true=EST_X0_TRUE,
        steps=steps,
        seed=seed,
        h_strategy=h or EST_H[method],
        max_generators=ng,
        max_constraints=nc,
    )


def scenario_example1_reach(output_dir: str | None = None, samples: int = 10000,
                            seed: int = 0):
    """One prediction step from the constrained initial set, no disturbance.

    Returns {name: enclosure} for the mean value extension under C1/C2 and
    the first-order Taylor extension under C1-C4. The C4 enclosure is also
    reduced to the same generator/constraint counts as the other Taylor
    strategies for a like-for-like comparison.
    """
    model = PlanarGrowthModel()
    W0 = ConstrainedZonotope.singleton(np.zeros(2))
    u = np.zeros(0)
    out = {}
    for strat in ("C1", "C2"):
        out[f"mean-value-{strat}"] = mean_value_extension(model, REACH_X0, W0, u, strat)
    for strat in ("C1", "C2", "C3", "C4"):
        out[f"taylor-{strat}"] = first_order_taylor_extension(
            model, REACH_X0, W0, u, strat
        )
    # Recentering inflates the C4 representation; bring it back to the same
    # size as the other Taylor enclosures.
    ref = out["taylor-C1"]
    z4 = out["taylor-C4"]
    if z4.n_con > ref.n_con:
        z4, _ = eliminate_constraints(z4, z4.n_con - ref.n_con)
    if z4.n_gen > ref.n_gen:
        z4 = reduce_generators(z4, ref.n_gen)
    out["taylor-C4-reduced"] = z4

    pts = REACH_X0.sample(samples, seed=seed)
    images = np.array([model.eval(p, u, np.zeros(2)) for p in pts])
    if output_dir:
        from . import plotting

        for name, Z in out.items():
            export_set_json(Z, os.path.join(output_dir, f"reach_{name}.json"))
        plotting.plot_sets_2d(
            [(n, z) for n, z in out.items() if n != "taylor-C4"],
            os.path.join(output_dir, "reach_overlay.svg"),
            samples=images,
            title="one-step enclosures",
        )
    return out, images


def scenario_example1_estimation(seeds, ng: int = 20, nc: int = 5,
                                 steps: int = 100,
                                 output_dir: str | None = None,
                                 methods=("CZMV", "CZFO", "ZMV", "ZFO")):
    """Full four-method estimation study on the planar benchmark.

    Returns (rows, summary) where summary holds per-seed and mean pairwise
    average radius ratios. Raises ScenarioError on a containment violation.
    """
    model = PlanarGrowthModel()

    def run_seed(seed):
        return {
            method: run_estimation(
                model, example1_config(method, seed, ng=ng, nc=nc, steps=steps)
            )
            for method in methods
        }

    by_seed = _map_seeds(seeds, run_seed)
    rows = []
    per_seed = {}
    first_runs = None
    for seed, runs in by_seed.items():
        for method, run in runs.items():
            for rec in run.records:
                if not rec.contains_true:
                    raise ScenarioError(
                        f"containment violated: seed {seed} method {method} "
                        f"step {rec.k}"
                    )
            rows.extend(metrics_rows(run))
        per_seed[seed] = _pairwise_arrs(runs)
        if first_runs is None:
            first_runs = runs
    summary = {
        "per_seed": per_seed,
        "mean": {
            key: float(np.mean([v[key] for v in per_seed.values()]))
            for key in next(iter(per_seed.values()))
        },
    }
    if output_dir:
        from . import plotting

        export_run_csv(rows, os.path.join(output_dir, "example1_metrics.csv"))
        _write(
            os.path.join(output_dir, "example1_arr.json"),
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
        plotting.plot_radius_series(
            [(m, r.radii) for m, r in first_runs.items()],
            os.path.join(output_dir, "example1_radius.svg"),
            title=f"planar benchmark, caps ({ng}, {nc})",
        )
    return rows, summary


def _pairwise_arrs(runs: dict) -> dict:
    arrs = {}
    if "CZMV" in runs and "ZMV" in runs:
        arrs["CZMV/ZMV"] = compute_arr(runs["CZMV"], runs["ZMV"])
    if "CZFO" in runs and "ZFO" in runs:
        arrs["CZFO/ZFO"] = compute_arr(runs["CZFO"], runs["ZFO"])
    if "CZFO" in runs and "CZMV" in runs:
        arrs["CZFO/CZMV"] = compute_arr(runs["CZFO"], runs["CZMV"])
    if "CZMV" in runs and "CZFO" in runs:
        arrs["CZMV/CZFO"] = compute_arr(runs["CZMV"], runs["CZFO"])
    return arrs


def example1_arr_table(seeds, nc_values=(1, 3, 5), ng_values=(8, 12, 20),
                       steps: int = 100, output_dir: str | None = None):
    """CZMV-to-ZMV average radius ratios across complexity caps.

    Returns {(ng, nc): mean ARR over seeds}. The zonotope baseline uses the
    same generator cap and zero constraints.
    """
    model = PlanarGrowthModel()
    table = {}
    for ng in ng_values:
        zmv = {
            seed: run_estimation(model, example1_config("ZMV", seed, ng=ng, nc=0,
                                                        steps=steps))
            for seed in seeds
        }
        for nc in nc_values:
            vals = []
            for seed in seeds:
                czmv = run_estimation(
                    model, example1_config("CZMV", seed, ng=ng, nc=nc, steps=steps)
                )
                vals.append(compute_arr(czmv, zmv[seed]))
            table[(ng, nc)] = float(np.mean(vals))
    if output_dir:
        lines = ["ng,nc,arr_czmv_zmv"]
        for (ng, nc), v in sorted(table.items()):
            lines.append(f"{ng},{nc},{v:.6f}")
        _write(os.path.join(output_dir, "example1_arr_table.csv"),
               "\n".join(lines) + "\n")
    return table


# ---------------------------------------------------------------------------
# Quadrotor scenario.
# ---------------------------------------------------------------------------

QUAD_STATE_LABELS = ("x", "y", "z", "vx", "vy", "vz",
                     "phi", "theta", "psi", "p", "q", "r")

# Substitute cascaded PD tracking controller (the reference controller is
# external to the estimation problem; containment holds for any bounded
# input). Gains are plain config data and can be overridden via the CLI
# config file.
QUAD_GAINS = {
    "kp_pos": 4.0,
    "kd_pos": 4.0,
    "kp_ang": 80.0,
    "kd_ang": 18.0,
    "tilt_limit": 0.5,
}
QUAD_PSI_REF = math.pi / 3.0

QUAD_X0_TRUE = np.array(
    [0.5, 0.0, 1.0, 0, 0, 0, 0, 0, math.pi / 3.0, 0, 0, 0], dtype=float
)
QUAD_X0_RADII = np.array(
    [2, 2, 2, 1, 1, 1, math.pi / 6, math.pi / 6, math.pi / 2,
     math.pi / 12, math.pi / 12, math.pi / 12]
)
QUAD_MEASURED = (0, 1, 2, 6, 7, 8, 9, 10, 11)
QUAD_NOISE_BOUNDS = np.array(
    [0.15, 0.15, 0.51, 2.618e-3, 2.618e-3, 2.618e-3,
     16.558e-3, 16.558e-3, 16.558e-3]
)
QUAD_H = {"CZMV": "C2", "CZFO": "C3", "ZMV": "C2", "ZFO": "C3"}


def quad_reference(t: float):
    """Helical position reference with velocity and acceleration."""
    pos = np.array([0.5 * math.cos(t / 2.0), 0.5 * math.sin(t / 2.0),
                    1.0 + t / 10.0])
    vel = np.array([-0.25 * math.sin(t / 2.0), 0.25 * math.cos(t / 2.0), 0.1])
    acc = np.array([-0.125 * math.cos(t / 2.0), -0.125 * math.sin(t / 2.0), 0.0])
    return pos, vel, acc


def make_quad_controller(model: QuadrotorModel, gains: dict | None = None):
    """Cascaded PD: position error -> desired tilt/thrust -> torque PD."""
    g = dict(QUAD_GAINS)
    if gains:
        g.update(gains)
    kp, kd = g["kp_pos"], g["kd_pos"]
    kpa, kda = g["kp_ang"], g["kd_ang"]
    lim = g["tilt_limit"]

    def control(k, x):
        t = k * model.ts
        pos_r, vel_r, acc_r = quad_reference(t)
        acc_d = acc_r + kd * (vel_r - x[3:6]) + kp * (pos_r - x[0:3])
        fz = max(acc_d[2] + model.g, 1.0)
        u1 = model.mass * math.sqrt(acc_d[0] ** 2 + acc_d[1] ** 2 + fz**2)
        spsi, cpsi = math.sin(x[8]), math.cos(x[8])
        arg = model.mass * (acc_d[0] * spsi - acc_d[1] * cpsi) / u1
        phi_d = math.asin(max(-lim, min(lim, arg)))
        th_d = math.atan2(acc_d[0] * cpsi + acc_d[1] * spsi, fz)
        th_d = max(-lim, min(lim, th_d))
        u2 = (model.ixx / model.arm) * (kpa * (phi_d - x[6]) - kda * x[9])
        u3 = (model.ixx / model.arm) * (kpa * (th_d - x[7]) - kda * x[10])
        u4 = model.ixx * (kpa * (QUAD_PSI_REF - x[8]) - kda * x[11])
        return np.array([u1, u2, u3, u4])

    return control


def quad_disturbance(k: int, ts: float = 0.01) -> np.ndarray:
    """Step force disturbances on the three translational axes."""
    t = k * ts
    return np.array(
        [
            1.0 if 5.0 <= t < 15.0 else 0.0,
            1.0 if 8.0 <= t < 15.0 else 0.0,
            1.0 if 10.0 <= t < 15.0 else 0.0,
        ]
    )


def quadrotor_config(method: str, seed: int = 0, steps: int = 1500,
                     ng: int = 40, nc: int = 12, h: str | None = None,
                     gains: dict | None = None,
                     store_sets: bool = False) -> EstimatorConfig:
    model = QuadrotorModel()
    X0 = ConstrainedZonotope.zonotope(np.diag(QUAD_X0_RADII), np.zeros(12))
    W = ConstrainedZonotope.zonotope(np.eye(3), np.zeros(3))
    C = np.zeros((9, 12))
    for i, j in enumerate(QUAD_MEASURED):
        C[i, j] = 1.0
    V = ConstrainedZonotope.zonotope(np.diag(QUAD_NOISE_BOUNDS), np.zeros(9))
    meas = LinearMeasurement(C=C, D_u=np.zeros((9, 0)), D_v=np.eye(9), V=V)
    return EstimatorConfig(
        method=method,
        X0=X0,
        W=W,
        measurement=meas,
        x0_true=QUAD_X0_TRUE,
        steps=steps,
        seed=seed,
        h_strategy=h or QUAD_H[method],
        max_generators=ng,
        max_constraints=nc,
        control=make_quad_controller(model, gains),
        disturbance=lambda k: quad_disturbance(k, model.ts),
        store_sets=store_sets,
    )


def scenario_quadrotor(seeds=(0,), steps: int = 1500,
                       output_dir: str | None = None,
                       methods=("CZMV", "CZFO", "ZMV", "ZFO")):
    """12-state quadrotor estimation study.

    Returns (rows, summary). Raises ScenarioError on containment violation.
    """
    model = QuadrotorModel()
    seeds = list(seeds)

    def run_seed(seed):
        runs = {}
        for method in methods:
            store = bool(output_dir) and method == "CZMV" and seed == seeds[0]
            cfg = quadrotor_config(method, seed=seed, steps=steps,
                                   store_sets=store)
            runs[method] = run_estimation(model, cfg)
        return runs

    by_seed = _map_seeds(seeds, run_seed)
    rows = []
    per_seed = {}
    first_runs = None
    for seed, runs in by_seed.items():
        for method, run in runs.items():
            for rec in run.records:
                if not rec.contains_true:
                    raise ScenarioError(
                        f"containment violated: seed {seed} method {method} "
                        f"step {rec.k}"
                    )
            rows.extend(metrics_rows(run))
        per_seed[seed] = _pairwise_arrs(runs)
        if first_runs is None:
            first_runs = runs
    summary = {
        "per_seed": per_seed,
        "mean": {
            key: float(np.mean([v[key] for v in per_seed.values()]))
            for key in next(iter(per_seed.values()))
        },
    }
    if output_dir:
        from . import plotting

        export_run_csv(rows, os.path.join(output_dir, "quadrotor_metrics.csv"))
        _write(
            os.path.join(output_dir, "quadrotor_arr.json"),
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
        plotting.plot_radius_series(
            [(m, r.radii) for m, r in first_runs.items()],
            os.path.join(output_dir, "quadrotor_radius.svg"),
            title="quadrotor, caps (40, 12) / 40",
        )
        czmv = first_runs["CZMV"]
        if czmv.records[0].updated is not None:
            hulls = [rec.updated.interval_hull() for rec in czmv.records]
            truth = np.asarray(czmv.true_states)
            plotting.plot_hull_panes(
                hulls,
                truth,
                pairs=[(0, 1), (0, 2), (1, 2)],
                labels=QUAD_STATE_LABELS,
                path=os.path.join(output_dir, "quadrotor_panes.svg"),
                every=max(1, steps // 30),
                title="position bounds along the trajectory",
            )
    return rows, summary
