"""Command-line interface for the bundled scenarios.

Exit codes: 0 success, 1 usage error, 2 containment violation or failed
self-test.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import scenarios
from .scenarios import ScenarioError


class _Parser(argparse.ArgumentParser):
    # The contract reserves exit code 2 for containment violations; argparse
    # uses it for usage errors by default.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config_file(path: str) -> dict:
    """Parse a flat key=value override file ('#' starts a comment)."""
    overrides = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            overrides[key.strip()] = _parse_value(value.strip())
    return overrides


def _resolved(args, config: dict, key: str, default):
    cli_value = getattr(args, key, None)
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _parse_seeds(spec) -> list:
    if isinstance(spec, int):
        return [spec]
    return [int(s) for s in str(spec).split(",")]


def _add_common(p):
    p.add_argument("--method", help="comma-separated subset of CZMV,CZFO,ZMV,ZFO")
    p.add_argument("--ng", type=int, help="generator cap")
    p.add_argument("--nc", type=int, help="constraint cap for the CZ methods")
    p.add_argument("--h", help="expansion point strategy override (C1-C4)")
    p.add_argument("--seed", help="seed or comma-separated seed list")
    p.add_argument("--steps", type=int, help="number of estimation steps")
    p.add_argument("--out", help="output directory for CSV/JSON/SVG artifacts")
    p.add_argument("--config", help="key=value override file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="czest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("reach", "one-step reachability enclosures on the planar benchmark"),
        ("estimate", "100-step estimation study on the planar benchmark"),
        ("quadrotor", "12-state quadrotor estimation study"),
        ("selftest", "quick built-in verification checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
    return parser


def _methods(args, config) -> tuple:
    spec = _resolved(args, config, "method", None)
    if spec is None:
        return ("CZMV", "CZFO", "ZMV", "ZFO")
    methods = tuple(m.strip().upper() for m in str(spec).split(","))
    for m in methods:
        if m not in ("CZMV", "CZFO", "ZMV", "ZFO"):
            raise ValueError(f"unknown method {m!r}")
    return methods


def cmd_reach(args, config) -> int:
    out = _resolved(args, config, "out", None)
    seed = _parse_seeds(_resolved(args, config, "seed", 0))[0]
    sets, images = scenarios.scenario_example1_reach(output_dir=out, seed=seed)
    for name, Z in sets.items():
        hull = Z.interval_hull()
        print(f"{name}: generators={Z.n_gen} constraints={Z.n_con} "
              f"hull radius={hull.rad.max():.6f}")
    print(f"propagated samples: {len(images)}")
    return 0


def cmd_estimate(args, config) -> int:
    out = _resolved(args, config, "out", None)
    seeds = _parse_seeds(_resolved(args, config, "seed", 0))
    ng = _resolved(args, config, "ng", 20)
    nc = _resolved(args, config, "nc", 5)
    steps = _resolved(args, config, "steps", 100)
    methods = _methods(args, config)
    rows, summary = scenarios.scenario_example1_estimation(
        seeds, ng=ng, nc=nc, steps=steps, output_dir=out, methods=methods
    )
    print(f"rows: {len(rows)}  seeds: {seeds}  caps: ({ng}, {nc})")
    for key, value in sorted(summary["mean"].items()):
        print(f"ARR {key} = {value:.4f}")
    return 0


def cmd_quadrotor(args, config) -> int:
    out = _resolved(args, config, "out", None)
    seeds = _parse_seeds(_resolved(args, config, "seed", 0))
    steps = _resolved(args, config, "steps", 1500)
    methods = _methods(args, config)
    gains = {k: config[k] for k in scenarios.QUAD_GAINS if k in config}
    if gains:
        scenarios.QUAD_GAINS.update(gains)
    rows, summary = scenarios.scenario_quadrotor(
        seeds, steps=steps, output_dir=out, methods=methods
    )
    print(f"rows: {len(rows)}  seeds: {seeds}  steps: {steps}")
    for key, value in sorted(summary["mean"].items()):
        print(f"ARR {key} = {value:.4f}")
    return 0


def cmd_selftest(args, config) -> int:
    """Fast end-to-end sanity checks; exits 2 on any failure."""
    from .models import PlanarGrowthModel, QuadraticModel
    from .estimator import run_estimation
    from .propagation import mean_value_extension
    from .sets import ConstrainedZonotope

    failures = []

    def check(name, ok):
        print(f"{'ok' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    # Interval hull of the constrained initial set.
    hull = scenarios.REACH_X0.interval_hull()
    check(
        "constrained initial set hull",
        np.allclose(hull.lo, [-1.5, 0.7], atol=1e-6)
        and np.allclose(hull.hi, [-1.2, 1.3], atol=1e-6),
    )

    # Mean value extension encloses sampled images.
    model = PlanarGrowthModel()
    W0 = ConstrainedZonotope.singleton(np.zeros(2))
    Z = mean_value_extension(model, scenarios.REACH_X0, W0, np.zeros(0), "C2")
    pts = scenarios.REACH_X0.sample(200, seed=1)
    images = [model.eval(p, np.zeros(0), np.zeros(2)) for p in pts]
    check("extension encloses samples", all(Z.contains(q, 1e-6) for q in images))

    # Random quadratic model, one step, sampled enclosure.
    rng = np.random.default_rng(7)
    qm = QuadraticModel.random(rng, n=2, n_w=1, affine_in_w=True)
    X = ConstrainedZonotope.zonotope(0.3 * np.eye(2), np.zeros(2))
    Ww = ConstrainedZonotope.zonotope(0.1 * np.eye(1), np.zeros(1))
    Zq = mean_value_extension(qm, X, Ww, np.zeros(0), "C1")
    ok = True
    for p in X.sample(100, seed=2):
        for wv in (-0.1, 0.0, 0.1):
            if not Zq.contains(qm.eval(p, np.zeros(0), np.array([wv])), 1e-6):
                ok = False
    check("quadratic model enclosure", ok)

    # Short estimation run keeps the true state inside.
    run = run_estimation(model, scenarios.example1_config("CZMV", seed=0, steps=15))
    check("15-step estimation containment", run.all_contained)

    if failures:
        print(f"{len(failures)} self-test failure(s)")
        return 2
    print("all self-tests passed")
    return 0


COMMANDS = {
    "reach": cmd_reach,
    "estimate": cmd_estimate,
    "quadrotor": cmd_quadrotor,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    if getattr(args, "config", None):
        try:
            config = read_config_file(args.config)
        except (OSError, ValueError) as e:
            print(f"czest: config error: {e}", file=sys.stderr)
            return 1
    try:
        return COMMANDS[args.command](args, config)
    except ScenarioError as e:
        print(f"czest: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"czest: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
