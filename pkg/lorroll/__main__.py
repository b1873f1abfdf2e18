#!/usr/bin/env python3
"""Command-line interface for lorroll"""

import argparse
import json
import logging
import os
from dataclasses import replace
from typing import List, Optional, Tuple

import jsonschema
import numpy as np
from rich.console import Console

from . import parse_manifold
from .holonomy import (
    classify_subgroup,
    closed_geodesic_loop,
    controllability_verdict,
    holonomy_algebra_estimate,
    loop_holonomy,
    rectangle_loop,
)
from .manifold import default_point, orthonormal_frame, validate_point
from .minkowski import LorentzMatrix, SEElement, fixed_point_embedding, lorentz_signature, so_basis, so_exp
from .models import (
    DEFAULT_TOLERANCES,
    ConfigError,
    ControllabilityVerdict,
    Curve,
    LoopSpec,
    ManifoldSpec,
    Point,
    RunConfig,
    SubgroupVerdict,
    Tolerances,
    TransportError,
)
from .reports import (
    classify_json,
    controllability_json,
    develop_csv,
    develop_json,
    geodesic_csv,
    geodesic_json,
    holonomy_json,
    j_norm,
    probe_json,
    render_summary,
    roll_csv,
    roll_json,
    to_json,
)
from .rolling import canonical_state, constraint_residuals, roll_flat, roll_general
from .transport import completeness_probe, develop, geodesic, make_curve
from .utils import get_default_seed, parse_vector

logger = logging.getLogger(__name__)

COMMANDS = ("geodesic", "develop", "roll", "holonomy", "classify-group", "controllability")
EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

MANIFOLD_HELP = (
    "manifold shorthand: flat:n,nu | s:n,nu,r | h:n,nu,r | clifton-pohl | "
    "custom:<json object of gij expressions or path>"
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorroll",
        description="Rolling of pseudo-Riemannian manifolds on R^{n,nu}: geodesics, development, "
                    "rolling, holonomy and controllability",
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration; command-line flags override it")
        p.add_argument("--manifold", help=MANIFOLD_HELP)
        p.add_argument("--x", help="Base point, comma-separated coordinates")
        p.add_argument("--v", help="Initial velocity or vector, comma-separated")
        p.add_argument("--T", type=float, help="Parameter length (default: 1)")
        p.add_argument("--step", type=float, help="Integration step (default: 1e-3)")
        p.add_argument("--tol", type=float, help="Translation detection tolerance (default: 1e-6)")
        p.add_argument("--seed", type=int, help="Random seed (default: $LORROLL_SEED or 0)")
        p.add_argument("--budget", type=int, help="Sampling budget (default: 16)")
        p.add_argument("--out", choices=["csv", "json"], help="Output format")
        p.add_argument("--output", help="Output file (default: stdout)")
        if name == "geodesic":
            p.add_argument("--probe", action="store_true", default=None,
                           help="Run the adaptive completeness probe and write a JSON diagnostic")
        if name in ("develop", "roll"):
            p.add_argument("--curve", help="geodesic (default) | closed-geodesic | rect:i,j,s | CSV path")
        if name == "roll":
            p.add_argument("--target", help="Target manifold (default: flat space of the same signature)")
        if name == "holonomy":
            p.add_argument("--method", choices=["curvature", "loops"], help="Estimation method")
            p.add_argument("--loop", help="Also report the holonomy of rect:i,j,s or closed-geodesic")
        if name == "classify-group":
            p.add_argument("--group", help="translation (default) | fixed-point | JSON file of generators")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "manifold": args.manifold,
        "x": parse_vector(args.x),
        "v": parse_vector(args.v),
        "T": args.T,
        "step": args.step,
        "tol": args.tol,
        "seed": args.seed,
        "budget": args.budget,
        "out": args.out,
        "output": args.output,
    }
    for key in ("probe", "curve", "target", "method", "loop", "group"):
        overrides[key] = getattr(args, key, None)
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError("", f"invalid JSON in {args.config}: {e.msg}")
        if isinstance(data, dict):
            data = {"seed": get_default_seed(), **data}
        base = RunConfig.from_mapping(data, command=args.command)
    else:
        base = RunConfig(command=args.command, seed=get_default_seed())
    return base.merged(overrides)


def _manifold(config: RunConfig, default: str = "flat:2,1") -> ManifoldSpec:
    try:
        return parse_manifold(config.manifold if config.manifold is not None else default)
    except ValueError as e:
        raise ConfigError("/manifold", str(e))


def _point(M: ManifoldSpec, config: RunConfig) -> np.ndarray:
    if config.x is None:
        return default_point(M).coords
    return validate_point(M, config.x).coords


def _vector(M: ManifoldSpec, p: np.ndarray, config: RunConfig) -> np.ndarray:
    if config.v is None:
        return orthonormal_frame(M, p).vectors[:, 0]
    v = np.asarray(config.v, dtype=float)
    if v.shape[0] != M.coord_dim:
        raise ConfigError("/v", f"expected {M.coord_dim} components, got {v.shape[0]}")
    return v


def _read_curve_csv(M: ManifoldSpec, path: str) -> Curve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 1 + M.coord_dim:
        raise ConfigError("/curve", f"{path} needs columns t and {M.coord_dim} coordinates")
    grid = data[:, 0]
    points = data[:, 1:1 + M.coord_dim]
    velocities = data[:, 1 + M.coord_dim:1 + 2 * M.coord_dim] if data.shape[1] >= 1 + 2 * M.coord_dim else None
    return make_curve(M, grid, points, velocities)


def _parse_rect(text: str, pointer: str) -> Tuple[int, int, float]:
    try:
        i, j, s = text.split(":", 1)[1].split(",")
        return int(i), int(j), float(s)
    except ValueError:
        raise ConfigError(pointer, f"expected rect:i,j,side, got {text!r}")


def _curve(M: ManifoldSpec, config: RunConfig, tol: Tolerances) -> Curve:
    spec = config.curve or "geodesic"
    p = _point(M, config)
    if spec == "geodesic":
        return geodesic(M, p, _vector(M, p, config), config.T, config.step, tol)
    if spec == "closed-geodesic":
        return closed_geodesic_loop(M, p, step=config.step, tol=tol)
    if spec.startswith("rect:"):
        i, j, s = _parse_rect(spec, "/curve")
        return rectangle_loop(M, p, i, j, s, config.step, tol)
    if os.path.exists(spec):
        return _read_curve_csv(M, spec)
    raise ConfigError("/curve", f"unknown curve {spec!r}; use geodesic, closed-geodesic, rect:i,j,s or a CSV path")


def _emit(config: RunConfig, text: str):
    if config.output:
        with open(config.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")


# --- Commands ---

def cmd_geodesic(config: RunConfig, console: Console, tol: Tolerances) -> int:
    M = _manifold(config)
    p = _point(M, config)
    v = _vector(M, p, config)
    if config.probe:
        report = completeness_probe(M, p, v, config.T, initial_step=min(1e-2, config.step * 10), tol=tol)
        _emit(config, to_json(probe_json(M, p, v, report)))
        render_summary(console, f"Completeness probe on {M.label}", [
            ("Reached", report.reached), ("t*", report.t_star), ("Steps", report.steps), ("Summary", report.summary),
        ])
        return EXIT_OK
    curve = geodesic(M, p, v, config.T, config.step, tol)
    if config.out == "json":
        _emit(config, to_json(geodesic_json(curve, config.T, config.step)))
    else:
        _emit(config, geodesic_csv(curve))
    render_summary(console, f"Geodesic on {M.label}", [
        ("Samples", curve.samples), ("Start", curve.points[0].tolist()), ("End", curve.points[-1].tolist()),
    ])
    return EXIT_OK


def cmd_develop(config: RunConfig, console: Console, tol: Tolerances) -> int:
    M = _manifold(config)
    curve = _curve(M, config, tol)
    dev = develop(M, curve, tol=tol)
    if config.out == "json":
        _emit(config, to_json(develop_json(curve, dev)))
    else:
        _emit(config, develop_csv(curve, dev))
    render_summary(console, f"Development on {M.label}", [
        ("Samples", curve.samples), ("Endpoint", dev.vectors[-1].tolist()),
    ])
    return EXIT_OK


def cmd_roll(config: RunConfig, console: Console, tol: Tolerances) -> int:
    M = _manifold(config)
    curve = _curve(M, config, tol)
    q0 = canonical_state(M, curve.points[0], tol=tol)
    if config.target is not None:
        try:
            target = parse_manifold(config.target)
        except ValueError as e:
            raise ConfigError("/target", str(e))
        target_q = canonical_state(target, tol=tol)
        q0 = replace(q0, x_hat=target_q.x.coords, frame_hat=target_q.frame_m)
        rc = roll_general(M, target, q0, curve, tol)
    else:
        rc = roll_flat(M, q0, curve, tol)
    residuals = constraint_residuals(M, rc, seed=config.seed, tol=tol)
    if config.out == "json":
        _emit(config, to_json(roll_json(M, rc, residuals)))
    else:
        _emit(config, roll_csv(rc))
    render_summary(console, f"Rolling {M.label}", [
        ("Samples", len(rc.states)), ("Final contact", rc.final.x_hat.tolist()),
        ("Slip", f"{residuals['slip']:.3e}"), ("Twist", f"{residuals['twist']:.3e}"),
        ("Partial", rc.diagnostic or rc.partial),
    ])
    if rc.partial:
        logger.warning(f"Rolling stopped early: {rc.diagnostic}")
    return EXIT_OK


def cmd_holonomy(config: RunConfig, console: Console, tol: Tolerances) -> int:
    M = _manifold(config)
    p = _point(M, config)
    estimate = holonomy_algebra_estimate(M, p, budget=config.budget, seed=config.seed,
                                         method=config.method, tol=tol)
    loop = None
    if config.loop:
        if config.loop == "closed-geodesic":
            spec = LoopSpec.explicit(closed_geodesic_loop(M, p, tol=tol), label="closed-geodesic")
        else:
            i, j, s = _parse_rect(config.loop, "/loop")
            spec = LoopSpec.rectangle(Point(p), i, j, s)
        P = loop_holonomy(M, spec, step=config.step, tol=tol)
        loop = {"label": spec.label, "matrix": P.matrix.tolist(), "distanceToIdentity": P.distance_to_identity()}
    _emit(config, to_json(holonomy_json(M, estimate, loop)))
    render_summary(console, f"Holonomy of {M.label}", [
        ("Method", estimate.method), ("Rank", f"{estimate.rank} / {estimate.dim_full}"),
        ("Verdict", estimate.verdict), ("Lower bound", estimate.lower_bound),
    ])
    return EXIT_OK


def _group_generators(config: RunConfig) -> List[SEElement]:
    M = _manifold(config)
    sig = lorentz_signature(M.dim)
    if M.nu != 1:
        raise ConfigError("/manifold", f"classify-group needs a Lorentzian signature, got {M.label}")
    rotations = [so_exp(X.scaled(0.5)) for X in so_basis(sig)]
    source = config.group or "translation"
    if source == "translation":
        v = np.asarray(config.v, dtype=float) if config.v is not None else np.eye(sig.m)[0]
        return [SEElement.translation(v, sig)] + [SEElement.rotation(C) for C in rotations]
    if source == "fixed-point":
        x0 = np.asarray(config.x, dtype=float) if config.x is not None else np.ones(sig.m)
        return [fixed_point_embedding(x0, C) for C in rotations]
    if not os.path.exists(source):
        raise ConfigError("/group", f"unknown group {source!r}; use translation, fixed-point or a JSON file")
    with open(source, encoding="utf-8") as f:
        data = json.load(f)
    generators = []
    for k, item in enumerate(data.get("generators", [])):
        C = np.asarray(item["C"], dtype=float)
        generators.append(SEElement(np.asarray(item["y"], dtype=float), LorentzMatrix(C, lorentz_signature(C.shape[0]), tol=1e-8)))
    if not generators:
        raise ConfigError("/group", f"{source} lists no generators")
    return generators


def cmd_classify_group(config: RunConfig, console: Console, tol: Tolerances) -> int:
    generators = _group_generators(config)
    sig = generators[0].sig
    result = classify_subgroup(generators, budget=config.budget, seed=config.seed, tol=tol)
    _emit(config, to_json(classify_json(result, f"{sig.n},{sig.nu}")))
    rows = [("Verdict", result.verdict.value), ("Generators", len(generators))]
    if result.witness is not None:
        rows.append(("Witness word", " ".join(result.witness.word)))
        rows.extend((f"Closure {d.causal}", f"{len(d.word)} letters, residual {d.residual:.2e}")
                    for d in result.demonstrations)
    render_summary(console, "Subgroup classification", rows)
    if result.verdict == SubgroupVerdict.FULL_SE:
        return EXIT_OK
    if result.verdict == SubgroupVerdict.NO_TRANSLATION_DETECTED:
        return EXIT_INCONCLUSIVE
    console.print(f"[red]Inapplicable: {result.report.get('reason')}")
    return EXIT_ERROR


def cmd_controllability(config: RunConfig, console: Console, tol: Tolerances) -> int:
    M = _manifold(config)
    p = _point(M, config)
    report = controllability_verdict(M, p, budget=config.budget, seed=config.seed, tol=tol)
    _emit(config, to_json(controllability_json(M, report)))
    rows = [("Verdict", report.verdict.value), ("Holonomy rank", f"{report.holonomy.rank} / {report.holonomy.dim_full}")]
    rows.extend(("Witness |y|_J", f"{j_norm(w.element.y):.6f}") for w in report.witnesses)
    rows.extend(("Note", note) for note in report.notes)
    render_summary(console, f"Controllability of rolling {M.label}", rows)
    if report.verdict == ControllabilityVerdict.FULL_HOLONOMY_NO_TRANSLATION_WITNESS:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


HANDLERS = {
    "geodesic": cmd_geodesic,
    "develop": cmd_develop,
    "roll": cmd_roll,
    "holonomy": cmd_holonomy,
    "classify-group": cmd_classify_group,
    "controllability": cmd_controllability,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    log_level = logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    console = Console(stderr=True)
    try:
        config = load_config(args)
        tol = replace(DEFAULT_TOLERANCES, translation=config.tol)
        return HANDLERS[config.command](config, console, tol)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        console.print(f"[red]Configuration error at {e.pointer or '/'}: {e}")
        return EXIT_ERROR
    except TransportError as e:
        logger.error(f"Integration failed: {e}")
        console.print(f"[red]Error: {e}\nRerun with --probe for a blow-up diagnostic")
        return EXIT_ERROR
    except jsonschema.ValidationError as e:
        logger.error(f"Report failed schema validation: {e.message}")
        console.print(f"[red]Error: report does not match its schema: {e.message}")
        return EXIT_ERROR
    except (ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        console.print(f"[red]Error: {str(e)}")
        return EXIT_ERROR


if __name__ == "__main__":
    exit(main())
