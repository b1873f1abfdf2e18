# lorroll/transport.py
# Geodesics, parallel transport along sampled curves, development and anti-development,
# and the adaptive completeness probe.

import logging
import math
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .manifold import (
    connection_matrix,
    coordinate_form,
    frame_coordinates,
    geodesic_acceleration,
    orthonormal_frame,
    project_to_manifold,
    tangent_project,
    validate_frame,
    validate_point,
)
from .minkowski import LorentzMatrix, SEElement
from .models import (
    DEFAULT_TOLERANCES,
    Curve,
    DevelopmentCurve,
    Frame,
    GeometryError,
    ManifoldKind,
    ManifoldSpec,
    Point,
    ProbeReport,
    Tangent,
    Tolerances,
    TransportError,
    TransportResult,
)

logger = logging.getLogger(__name__)


# --- Curves ---

def _segments(grid: np.ndarray) -> List[Tuple[int, int]]:
    """Index ranges [start, stop) of maximal strictly increasing runs of the grid."""
    bounds = [0] + [k for k in range(1, len(grid)) if grid[k] == grid[k - 1]] + [len(grid)]
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _spline_derivative(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    for a, b in _segments(grid):
        if b - a == 1:
            continue
        if b - a == 2:
            slope = (values[a + 1] - values[a]) / (grid[a + 1] - grid[a])
            out[a:b] = slope
            continue
        out[a:b] = CubicSpline(grid[a:b], values[a:b], axis=0).derivative()(grid[a:b])
    return out


def make_curve(M: ManifoldSpec, grid, points, velocities=None,
               tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """
    Build a validated Curve. Repeated grid values mark corners of piecewise-C1 curves and
    must repeat the point; velocities default to spline derivatives of the points.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape != (len(grid), M.coord_dim):
        raise TransportError(f"Curve points must have shape ({len(grid)}, {M.coord_dim}), got {points.shape}")
    if len(grid) == 0:
        raise TransportError("Curve needs at least one sample")
    if np.any(np.diff(grid) < 0):
        raise TransportError("Curve grid must be nondecreasing")
    for k in range(len(grid)):
        validate_point(M, points[k], tol)
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if steps.size and float(np.max(steps)) > tol.step_bound:
        k = int(np.argmax(steps))
        raise TransportError(
            f"Curve is under-resolved: samples {k} and {k + 1} are {steps[k]:.3g} apart (bound {tol.step_bound})"
        )
    same_time = np.diff(grid) == 0
    if np.any(same_time & (steps > tol.construction * max(1.0, float(np.max(np.abs(points)))))):
        raise TransportError("Repeated grid values must repeat the curve point")

    if velocities is None:
        velocities = _spline_derivative(grid, points)
        if M.is_embedded:
            velocities = np.array([tangent_project(M, p, w).vec for p, w in zip(points, velocities)])
    else:
        velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
        if velocities.shape != points.shape:
            raise TransportError(f"Velocities must have shape {points.shape}, got {velocities.shape}")
        if M.is_embedded:
            J = M.ambient.J
            normal = np.abs(np.einsum("ki,ij,kj->k", velocities, J, points))
            scale = np.linalg.norm(velocities, axis=1) * np.linalg.norm(points, axis=1)
            if np.any(normal > 1e-6 * np.maximum(1.0, scale)):
                raise TransportError("Curve velocities are not tangent to the manifold")
    return Curve(manifold=M, grid=grid, points=points, velocities=velocities)


def constant_curve(M: ManifoldSpec, x, samples: int = 2) -> Curve:
    p = validate_point(M, x).coords
    grid = np.linspace(0.0, 1.0, samples)
    return make_curve(M, grid, np.repeat(p[None, :], samples, axis=0), np.zeros((samples, M.coord_dim)))


def concatenate_curves(c1: Curve, c2: Curve, tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """gamma1 . gamma2; the junction sample is kept twice so both one-sided velocities survive."""
    if c1.manifold is not c2.manifold and c1.manifold.label != c2.manifold.label:
        raise TransportError("Cannot concatenate curves on different manifolds")
    gap = float(np.linalg.norm(c1.points[-1] - c2.points[0]))
    if gap > tol.construction * max(1.0, float(np.linalg.norm(c1.points[-1]))):
        raise TransportError(f"Curves do not meet: gap {gap:.3e}")
    grid = np.concatenate([c1.grid, c2.grid - c2.grid[0] + c1.grid[-1]])
    points = np.concatenate([c1.points, c2.points])
    points[len(c1.grid)] = c1.points[-1]
    velocities = np.concatenate([c1.velocities, c2.velocities])
    return make_curve(c1.manifold, grid, points, velocities, tol)


def reverse_curve(curve: Curve) -> Curve:
    grid = curve.grid[-1] + curve.grid[0] - curve.grid[::-1]
    return Curve(
        manifold=curve.manifold,
        grid=grid,
        points=curve.points[::-1].copy(),
        velocities=-curve.velocities[::-1].copy(),
    )


def map_curve(curve: Curve, isometry: Union[SEElement, LorentzMatrix, np.ndarray]) -> Curve:
    """Image of a curve under an isometry: an SE element on flat charts, an ambient map when embedded."""
    M = curve.manifold
    if isinstance(isometry, SEElement):
        if M.kind != ManifoldKind.FLAT:
            raise GeometryError("Affine isometries act on flat manifolds only")
        C, y = isometry.C.matrix, isometry.y
    else:
        C = isometry.matrix if isinstance(isometry, LorentzMatrix) else np.asarray(isometry, dtype=float)
        y = np.zeros(C.shape[0])
        if M.is_embedded:
            J = M.ambient.J
            if np.linalg.norm(C.T @ J @ C - J) > 1e-8 * max(1.0, float(np.linalg.norm(C)) ** 2):
                raise GeometryError("Ambient map is not J-orthogonal")
    points = curve.points @ C.T + y
    velocities = curve.velocities @ C.T
    return Curve(manifold=M, grid=curve.grid.copy(), points=points, velocities=velocities)


# --- Parallel transport ---

def _hermite_midpoint(p0, v0, p1, v1, h):
    pm = 0.5 * (p0 + p1) + h * (v0 - v1) / 8.0
    vm = 1.5 * (p1 - p0) / h - 0.25 * (v0 + v1)
    return pm, vm


def _retract(M: ManifoldSpec, p: np.ndarray, F: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Push a point back onto the quadric and its frame back into the tangent space."""
    p = project_to_manifold(M, p)
    J = M.ambient.J
    F = F - np.outer(p, p @ J @ F) / float(p @ J @ p)
    return p, F


def transport_frames(M: ManifoldSpec, curve: Curve, E0: np.ndarray,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Transport the columns of E0 along the curve with a fixed-step RK4 on the sample grid.

    Returns an array of shape (samples, coords, columns).
    """
    E0 = np.asarray(E0, dtype=float)
    if E0.ndim == 1:
        E0 = E0[:, None]
    frames = np.zeros((curve.samples,) + E0.shape)
    frames[0] = E0
    if M.kind == ManifoldKind.FLAT:
        frames[:] = E0
        return frames
    F = E0.copy()
    P, V, grid = curve.points, curve.velocities, curve.grid
    K1 = connection_matrix(M, P[0], V[0], tol)
    for k in range(curve.samples - 1):
        h = grid[k + 1] - grid[k]
        K0 = K1
        K1 = connection_matrix(M, P[k + 1], V[k + 1], tol)
        if h == 0:
            frames[k + 1] = F
            continue
        pm, vm = _hermite_midpoint(P[k], V[k], P[k + 1], V[k + 1], h)
        if M.is_embedded:
            pm = project_to_manifold(M, pm)
            vm = tangent_project(M, pm, vm).vec
        Km = connection_matrix(M, pm, vm, tol)
        k1 = -K0 @ F
        k2 = -Km @ (F + 0.5 * h * k1)
        k3 = -Km @ (F + 0.5 * h * k2)
        k4 = -K1 @ (F + h * k3)
        F = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if M.is_embedded:
            J = M.ambient.J
            F = F - np.outer(P[k + 1], P[k + 1] @ J @ F) / float(P[k + 1] @ J @ P[k + 1])
        if not np.all(np.isfinite(F)):
            raise TransportError(f"Transport produced non-finite values at t={grid[k + 1]:.6g}")
        frames[k + 1] = F
    return frames


def _closes(curve: Curve, tol: float) -> bool:
    return float(np.linalg.norm(curve.points[-1] - curve.points[0])) <= tol * max(1.0, float(np.linalg.norm(curve.points[0])))


def parallel_transport(M: ManifoldSpec, curve: Curve, v, frame: Optional[Frame] = None,
                       end_frame: Optional[Frame] = None, check_reverse: bool = False,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[Tangent, TransportResult]:
    """
    Transport v from gamma(0) to the end of the curve.

    The operator is the matrix of P_0^1 from `frame` at gamma(0) to `end_frame` at gamma(1);
    for closed curves the end frame defaults to the start frame.
    """
    vec = v.vec if isinstance(v, Tangent) else np.asarray(v, dtype=float).reshape(-1)
    start = curve.points[0]
    if M.is_embedded and abs(float(vec @ M.ambient.J @ start)) > 1e-9 * max(1.0, float(np.linalg.norm(vec))):
        raise GeometryError("Vector is not tangent at the start of the curve")
    frame = frame or orthonormal_frame(M, start, tol)
    validate_frame(M, frame, 1e-8)
    E0 = frame.vectors
    frames = transport_frames(M, curve, np.column_stack([E0, vec]), tol)
    transported = frames[:, :, :M.dim]
    end_vec = frames[-1, :, M.dim]
    if end_frame is None:
        end_frame = frame if _closes(curve, tol.construction) else orthonormal_frame(M, curve.points[-1], tol)
    end = curve.points[-1]
    eta = M.signature.diagonal
    operator = np.diag(eta) @ end_frame.vectors.T @ coordinate_form(M, end, tol) @ transported[-1]

    reverse_residual = None
    if check_reverse:
        back = transport_frames(M, reverse_curve(curve), transported[-1], tol)[-1]
        reverse_residual = float(np.linalg.norm(back - E0))
        logger.debug(f"Reverse transport residual {reverse_residual:.3e}")

    result = TransportResult(
        operator=operator,
        start_frame=frame,
        end_frame=end_frame,
        frames=transported,
        reverse_residual=reverse_residual,
    )
    return Tangent(Point(end), end_vec), result


# --- Geodesics ---

def _geodesic_rhs(M: ManifoldSpec, tol: Tolerances):
    def rhs(x, v):
        return v, geodesic_acceleration(M, x, v, tol)
    return rhs


def _rk4_state(rhs, x, v, h):
    a1, b1 = rhs(x, v)
    a2, b2 = rhs(x + 0.5 * h * a1, v + 0.5 * h * b1)
    a3, b3 = rhs(x + 0.5 * h * a2, v + 0.5 * h * b2)
    a4, b4 = rhs(x + h * a3, v + h * b3)
    return (x + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4),
            v + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4))


def _relative_drift(M: ManifoldSpec, x: np.ndarray) -> float:
    J = M.ambient.J
    target = M.constraint_sign * M.r ** 2
    return abs(float(x @ J @ x) - target) / max(M.r ** 2, float(x @ x))


def _renormalize(M: ManifoldSpec, x: np.ndarray, v: np.ndarray, t: float,
                 tol: Tolerances) -> Tuple[np.ndarray, np.ndarray]:
    drift = _relative_drift(M, x)
    if drift > tol.drift_abort:
        raise TransportError(f"Geodesic drifted off {M.label} by {drift:.3e} at t={t:.6g}")
    if drift > tol.drift_reproject:
        logger.debug(f"Reprojecting onto {M.label} at t={t:.6g} (drift {drift:.3e})")
        x = project_to_manifold(M, x)
        v = tangent_project(M, x, v).vec
    return x, v


def geodesic(M: ManifoldSpec, x, v, T: float, step: float,
             tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """Fixed-step RK4 solution of the geodesic equation on [0, T]."""
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    if not T >= 0:
        raise ValueError(f"T must be >= 0, got {T}")
    p = validate_point(M, x, tol).coords
    vel = v.vec if isinstance(v, Tangent) else np.asarray(v, dtype=float).reshape(-1)
    if vel.shape[0] != M.coord_dim:
        raise GeometryError(f"Velocity has {vel.shape[0]} coordinates, {M.label} needs {M.coord_dim}")
    if M.is_embedded and abs(float(vel @ M.ambient.J @ p)) > 1e-9 * max(1.0, float(np.linalg.norm(vel))):
        raise GeometryError("Initial velocity is not tangent")

    N = max(1, int(math.ceil(T / step - 1e-9)))
    h = T / N
    grid = np.linspace(0.0, T, N + 1)
    points = np.zeros((N + 1, M.coord_dim))
    velocities = np.zeros_like(points)
    points[0], velocities[0] = p, vel
    rhs = _geodesic_rhs(M, tol)
    for k in range(N):
        try:
            xn, vn = _rk4_state(rhs, points[k], velocities[k], h)
        except GeometryError as e:
            raise TransportError(f"Geodesic left the domain of {M.label} near t={grid[k]:.6g}: {e}")
        if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(vn))):
            raise TransportError(f"Geodesic blew up near t={grid[k + 1]:.6g}")
        if not M.is_embedded and max(float(np.linalg.norm(xn)), float(np.linalg.norm(vn))) > tol.blowup_norm:
            raise TransportError(f"Geodesic blew up near t={grid[k + 1]:.6g}")
        if M.is_embedded:
            xn, vn = _renormalize(M, xn, vn, grid[k + 1], tol)
        points[k + 1], velocities[k + 1] = xn, vn
    logger.debug(f"Integrated geodesic on {M.label} with {N} steps of {h:.3g}")
    return Curve(manifold=M, grid=grid, points=points, velocities=velocities)


def quadric_geodesic(M: ManifoldSpec, x, v, t) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form geodesic on a hyperquadric (trigonometric, hyperbolic or straight)."""
    p = np.asarray(x.coords if isinstance(x, Point) else x, dtype=float)
    vel = np.asarray(v.vec if isinstance(v, Tangent) else v, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    J = M.ambient.J
    a = float(vel @ J @ vel)
    P = float(p @ J @ p)
    ratio = a / P
    if abs(a) <= 1e-14 * max(1.0, float(vel @ vel)):
        return p + t[:, None] * vel, np.repeat(vel[None, :], len(t), axis=0)
    w = math.sqrt(abs(ratio))
    if ratio > 0:
        c, s = np.cos(w * t), np.sin(w * t)
        points = c[:, None] * p + (s / w)[:, None] * vel
        velocities = -(w * s)[:, None] * p + c[:, None] * vel
    else:
        c, s = np.cosh(w * t), np.sinh(w * t)
        points = c[:, None] * p + (s / w)[:, None] * vel
        velocities = (w * s)[:, None] * p + c[:, None] * vel
    return points, velocities


# --- Development ---

def develop(M: ManifoldSpec, curve: Curve, frame: Optional[Frame] = None,
            tol: Tolerances = DEFAULT_TOLERANCES) -> DevelopmentCurve:
    """Trapezoidal integral of the back-transported velocity, in coordinates of the initial frame."""
    frame = frame or orthonormal_frame(M, curve.points[0], tol)
    frames = transport_frames(M, curve, frame.vectors, tol)
    coords = np.array([
        frame_coordinates(M, p, F, w) for p, F, w in zip(curve.points, frames, curve.velocities)
    ])
    if curve.samples > 1:
        vectors = cumulative_trapezoid(coords, curve.grid, axis=0, initial=0)
    else:
        vectors = np.zeros_like(coords)
    return DevelopmentCurve(grid=curve.grid.copy(), vectors=vectors, velocities=coords, frame=frame)


class _Escaped(Exception):
    def __init__(self, t: float, reason: str):
        super().__init__(reason)
        self.t = t
        self.reason = reason


def _development_velocity(dev: DevelopmentCurve) -> Tuple[np.ndarray, Callable[[int, float], np.ndarray]]:
    """Node velocities of the development and an interpolant on each grid interval."""
    grid = dev.grid
    nodes = dev.velocities if dev.velocities is not None else _spline_derivative(grid, dev.vectors)
    splines = {}
    for a, b in _segments(grid):
        if b - a >= 3:
            spline = CubicSpline(grid[a:b], nodes[a:b], axis=0)
            for k in range(a, b - 1):
                splines[k] = spline

    def at(k: int, t: float) -> np.ndarray:
        if k in splines:
            return splines[k](t)
        h = grid[k + 1] - grid[k]
        w = (t - grid[k]) / h if h > 0 else 0.0
        return (1.0 - w) * nodes[k] + w * nodes[k + 1]

    return nodes, at


def _antidevelop_frames(M: ManifoldSpec, x0: np.ndarray, E0: np.ndarray, dev: DevelopmentCurve,
                        tol: Tolerances, rtol: float = 1e-10):
    """
    Solve gamma' = F c'(t), F' = -K(gamma, gamma') F on the development grid.

    Returns (points, velocities, frames, escaped_at, reason) truncated at an escape.
    """
    grid = dev.grid
    N = len(grid)
    m = M.dim
    nodes, c_dot = _development_velocity(dev)
    points = np.zeros((N, M.coord_dim))
    frames = np.zeros((N, M.coord_dim, m))
    velocities = np.zeros((N, M.coord_dim))
    points[0], frames[0] = x0, E0
    velocities[0] = E0 @ nodes[0]

    def rhs(x, F, c):
        xdot = F @ c
        return xdot, -connection_matrix(M, x, xdot, tol) @ F

    def rk4(x, F, t, h, k):
        ca, cm, cb = c_dot(k, t), c_dot(k, t + 0.5 * h), c_dot(k, t + h)
        a1, b1 = rhs(x, F, ca)
        a2, b2 = rhs(x + 0.5 * h * a1, F + 0.5 * h * b1, cm)
        a3, b3 = rhs(x + 0.5 * h * a2, F + 0.5 * h * b2, cm)
        a4, b4 = rhs(x + h * a3, F + h * b3, cb)
        return (x + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4),
                F + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4))

    def check(x, F, t):
        size = max(float(np.linalg.norm(x)), float(np.linalg.norm(F)))
        if not np.isfinite(size):
            raise _Escaped(t, "non-finite state")
        if not M.is_embedded and size > tol.blowup_norm:
            raise _Escaped(t, "state norm exceeded")
        if M.kind == ManifoldKind.CLIFTON_POHL and float(x @ x) <= tol.construction:
            raise _Escaped(t, "reached the origin")

    x, F = x0.copy(), E0.copy()
    for k in range(N - 1):
        t, t_end = grid[k], grid[k + 1]
        h = t_end - t
        try:
            while t < t_end:
                h = min(h, t_end - t)
                if h < tol.min_step:
                    raise _Escaped(t, "step collapse")
                full = rk4(x, F, t, h, k)
                half = rk4(x, F, t, 0.5 * h, k)
                half = rk4(half[0], half[1], t + 0.5 * h, 0.5 * h, k)
                err = max(float(np.linalg.norm(half[0] - full[0])), float(np.linalg.norm(half[1] - full[1])))
                size = 1.0 + max(float(np.linalg.norm(half[0])), float(np.linalg.norm(half[1])))
                if not np.isfinite(err) or err > rtol * size:
                    h *= 0.5
                    continue
                check(half[0], half[1], t + h)
                x, F = half
                t += h
                h *= 2.0
        except (_Escaped, GeometryError) as e:
            t_star = e.t if isinstance(e, _Escaped) else t
            reason = e.reason if isinstance(e, _Escaped) else str(e)
            logger.warning(f"Anti-development on {M.label} escaped at t={t_star:.6g}: {reason}")
            return points[:k + 1], velocities[:k + 1], frames[:k + 1], t_star, reason
        if M.is_embedded:
            x, F = _retract(M, x, F)
        points[k + 1], frames[k + 1] = x, F
        velocities[k + 1] = F @ nodes[k + 1]
    return points, velocities, frames, None, ""


def antidevelop(M: ManifoldSpec, x0, frame: Frame, dev: DevelopmentCurve,
                tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """
    Inverse of the development map at x0 with initial frame `frame`.

    When the solution escapes (incomplete manifolds) the curve is partial, with a diagnostic.
    """
    p = validate_point(M, x0, tol).coords
    validate_frame(M, frame, 1e-8)
    if float(np.linalg.norm(dev.vectors[0])) > tol.construction:
        raise GeometryError("Development curve must start at 0")
    E0 = frame.vectors
    if M.kind == ManifoldKind.FLAT:
        nodes = dev.velocities if dev.velocities is not None else _spline_derivative(dev.grid, dev.vectors)
        return Curve(manifold=M, grid=dev.grid.copy(), points=p + dev.vectors @ E0.T, velocities=nodes @ E0.T)
    points, velocities, _, t_star, reason = _antidevelop_frames(M, p, E0, dev, tol)
    if t_star is None:
        return Curve(manifold=M, grid=dev.grid.copy(), points=points, velocities=velocities)
    return Curve(
        manifold=M,
        grid=dev.grid[:len(points)].copy(),
        points=points,
        velocities=velocities,
        partial=True,
        escaped_at=t_star,
        diagnostic=f"escaped at t*={t_star:.6g} ({reason})",
    )


# --- Completeness probe ---

def completeness_probe(M: ManifoldSpec, x, v, Tmax: float, initial_step: float = 1e-2,
                       rtol: float = 1e-9, max_steps: int = 1_000_000,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> ProbeReport:
    """
    Integrate the geodesic with step-doubling RK4 and report finite-parameter blow-up.

    Blow-up is declared when the step falls below `min_step` or, on chart manifolds, when the
    state norm exceeds `blowup_norm`. Reaching Tmax is a heuristic, not a completeness proof.
    """
    p = validate_point(M, x, tol).coords
    vel = v.vec if isinstance(v, Tangent) else np.asarray(v, dtype=float).reshape(-1)
    rhs = _geodesic_rhs(M, tol)
    h_max = max(initial_step, Tmax / 100.0)
    t, h, steps = 0.0, initial_step, 0

    def blow_up(reason: str) -> ProbeReport:
        logger.info(f"Probe on {M.label}: blow-up at t={t:.6g} ({reason})")
        return ProbeReport(reached=False, t_reached=t, t_max=Tmax, t_star=t,
                           witness=np.concatenate([p, vel]), steps=steps, reason=reason)

    while t < Tmax:
        if steps >= max_steps:
            return ProbeReport(reached=False, t_reached=t, t_max=Tmax, t_star=None,
                               witness=np.concatenate([p, vel]), steps=steps, reason="step budget exhausted")
        h = min(h, Tmax - t)
        if h < tol.min_step:
            return blow_up("step collapse")
        try:
            full = _rk4_state(rhs, p, vel, h)
            half = _rk4_state(rhs, p, vel, 0.5 * h)
            half = _rk4_state(rhs, half[0], half[1], 0.5 * h)
        except GeometryError:
            return blow_up("left the chart domain")
        err = max(float(np.linalg.norm(half[0] - full[0])), float(np.linalg.norm(half[1] - full[1])))
        size = 1.0 + max(float(np.linalg.norm(half[0])), float(np.linalg.norm(half[1])))
        if not np.isfinite(err) or err > rtol * size:
            h *= 0.5
            continue
        p, vel = half
        t += h
        steps += 1
        if not M.is_embedded and max(float(np.linalg.norm(p)), float(np.linalg.norm(vel))) > tol.blowup_norm:
            return blow_up("state norm exceeded")
        if M.is_embedded:
            try:
                p, vel = _renormalize(M, p, vel, t, tol)
            except TransportError as e:
                logger.warning(f"Probe on {M.label} stopped: {e}")
                return ProbeReport(reached=False, t_reached=t, t_max=Tmax, t_star=None,
                                   witness=np.concatenate([p, vel]), steps=steps, reason="drift")
        if err > 0:
            h = min(h_max, h * min(2.0, 0.9 * (rtol * size / err) ** 0.2))
        else:
            h = min(h_max, 2.0 * h)
    logger.info(f"Probe on {M.label}: no blow-up detected up to t={Tmax:g} in {steps} steps")
    return ProbeReport(reached=True, t_reached=Tmax, t_max=Tmax, t_star=None,
                       witness=None, steps=steps, reason="reached Tmax")
