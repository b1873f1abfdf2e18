# lorroll/rolling.py
# Configuration space of rollings onto R^{n,nu}: rolling curves, the SE_0 action on states,
# and verification of the no-slip and no-twist conditions.

import logging
from typing import Dict, Optional

import numpy as np

from .manifold import (
    connection_matrix,
    coordinate_form,
    default_point,
    frame_coordinates,
    orthonormal_frame,
    project_to_manifold,
    random_orthonormal_frame,
    validate_frame,
    validate_point,
)
from .minkowski import LorentzMatrix, SEElement
from .models import (
    DEFAULT_TOLERANCES,
    ConfigState,
    Curve,
    DevelopmentCurve,
    Frame,
    GeometryError,
    LiftVector,
    ManifoldKind,
    ManifoldSpec,
    Point,
    RollingCurve,
    Tolerances,
)
from .transport import _antidevelop_frames, _segments, develop, transport_frames

logger = logging.getLogger(__name__)


def canonical_state(M: ManifoldSpec, x=None, x_hat=None, tol: Tolerances = DEFAULT_TOLERANCES) -> ConfigState:
    """State at x whose isometry sends the canonical frame of M to the standard basis of R^{n,nu}."""
    p = default_point(M) if x is None else validate_point(M, x, tol)
    frame = orthonormal_frame(M, p, tol)
    x_hat = np.zeros(M.dim) if x_hat is None else np.asarray(x_hat, dtype=float)
    return ConfigState(x=p, frame_m=frame.vectors, x_hat=x_hat, frame_hat=np.eye(M.dim))


def validate_state(M: ManifoldSpec, q: ConfigState, target: Optional[ManifoldSpec] = None,
                   tol: float = 1e-8) -> ConfigState:
    """Both frames pseudo-orthonormal with equal Gram matrices."""
    validate_frame(M, Frame(q.x, q.frame_m), tol)
    if target is None or target.kind == ManifoldKind.FLAT:
        J = M.signature.J
        if q.frame_hat.shape != (M.dim, M.dim) or q.x_hat.shape != (M.dim,):
            raise GeometryError(f"Target frame must be {M.dim}x{M.dim} with a point of dimension {M.dim}")
        gram = q.frame_hat.T @ J @ q.frame_hat
        if float(np.linalg.norm(gram - J)) > tol * max(1.0, float(np.linalg.norm(q.frame_hat)) ** 2):
            raise GeometryError("Target frame is not pseudo-orthonormal")
    else:
        if target.signature != M.signature:
            raise GeometryError(f"Cannot roll {M.label} onto {target.label}: signatures differ")
        validate_frame(target, Frame(Point(q.x_hat), q.frame_hat), tol)
    return q


def se_act(B: SEElement, q: ConfigState) -> ConfigState:
    """mu(B, q) = (x, C x_hat + y; C A)."""
    if B.C.m != q.frame_hat.shape[0]:
        raise GeometryError(f"Group element acts on R^{B.C.m}, state lives in R^{q.frame_hat.shape[0]}")
    return ConfigState(
        x=q.x,
        frame_m=q.frame_m,
        x_hat=B.apply(q.x_hat),
        frame_hat=B.C.matrix @ q.frame_hat,
    )


def _change_of_frame(M: ManifoldSpec, x: np.ndarray, F_from: np.ndarray, F_to: np.ndarray) -> np.ndarray:
    """Coordinates of the columns of F_from in the frame F_to."""
    eta = M.signature.diagonal
    return np.diag(eta) @ F_to.T @ coordinate_form(M, x) @ F_from


def fiber_transporter(M: ManifoldSpec, q: ConfigState, q_bar: ConfigState,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> SEElement:
    """The unique B with se_act(B, q) = q_bar for two states over the same point."""
    x = q.x.coords
    if float(np.linalg.norm(x - q_bar.x.coords)) > tol.construction * max(1.0, float(np.linalg.norm(x))):
        raise GeometryError("States lie over different points of the manifold")
    sig = M.signature
    S = _change_of_frame(M, x, q.frame_m, q_bar.frame_m)
    F_hat_inv = np.diag(sig.diagonal) @ q.frame_hat.T @ sig.J
    C = LorentzMatrix(q_bar.frame_hat @ S @ F_hat_inv, sig, tol=tol.holonomy)
    y = q_bar.x_hat - C.matrix @ q.x_hat
    return SEElement(y, C)


def state_distance(M: ManifoldSpec, q1: ConfigState, q2: ConfigState) -> float:
    """Max of base, target and isometry discrepancies; the isometries are compared on the frame of q1."""
    base = float(np.linalg.norm(q1.x.coords - q2.x.coords))
    target = float(np.linalg.norm(q1.x_hat - q2.x_hat))
    T = _change_of_frame(M, q1.x.coords, q1.frame_m, q2.frame_m)
    isometry = float(np.linalg.norm(q1.frame_hat - q2.frame_hat @ T))
    return max(base, target, isometry)


def rolling_lift(M: ManifoldSpec, q: ConfigState, X, tol: Tolerances = DEFAULT_TOLERANCES) -> LiftVector:
    """Rolling lift of X at q in the frame trivialization, onto the flat target."""
    x = q.x.coords
    X = np.asarray(X, dtype=float).reshape(-1)
    coords = frame_coordinates(M, x, q.frame_m, X)
    return LiftVector(
        x_dot=X,
        x_hat_dot=q.frame_hat @ coords,
        frame_m_dot=-connection_matrix(M, x, X, tol) @ q.frame_m,
        frame_hat_dot=np.zeros_like(q.frame_hat),
    )


def _check_start(M: ManifoldSpec, q0: ConfigState, curve: Curve, tol: Tolerances):
    gap = float(np.linalg.norm(curve.points[0] - q0.x.coords))
    if gap > tol.construction * max(1.0, float(np.linalg.norm(q0.x.coords))):
        raise GeometryError(f"Curve starts {gap:.3e} away from the base point of the state")


def roll_flat(M: ManifoldSpec, q0: ConfigState, curve: Curve,
              tol: Tolerances = DEFAULT_TOLERANCES) -> RollingCurve:
    """
    Roll M on R^{n,nu} along the curve without slipping or twisting.

    The target frame stays constant; the frame on M is parallel transported and the contact
    point on the target is x_hat_0 + A_0 applied to the development of the curve.
    """
    _check_start(M, q0, curve, tol)
    frame = Frame(q0.x, q0.frame_m)
    dev = develop(M, curve, frame, tol)
    frames = transport_frames(M, curve, q0.frame_m, tol)
    x_hat = q0.x_hat + dev.vectors @ q0.frame_hat.T
    states = [
        ConfigState(x=Point(curve.points[k]), frame_m=frames[k], x_hat=x_hat[k], frame_hat=q0.frame_hat)
        for k in range(curve.samples)
    ]
    logger.debug(f"Rolled {M.label} along {curve.samples} samples, final contact {x_hat[-1].tolist()}")
    return RollingCurve(grid=curve.grid.copy(), states=states, base=curve)


def roll_general(M: ManifoldSpec, target: ManifoldSpec, q0: ConfigState, curve: Curve,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> RollingCurve:
    """
    Roll M on another manifold of the same signature: the target curve is the anti-development
    of A_0 applied to the development of the base curve.

    Returns a partial RollingCurve when the anti-development escapes.
    """
    if target.signature != M.signature:
        raise GeometryError(f"Cannot roll {M.label} onto {target.label}: signatures differ")
    if target.kind == ManifoldKind.FLAT:
        rc = roll_flat(M, q0, curve, tol)
        return RollingCurve(grid=rc.grid, states=rc.states, base=curve, target=target)

    _check_start(M, q0, curve, tol)
    validate_point(target, q0.x_hat, tol)
    validate_frame(target, Frame(Point(q0.x_hat), q0.frame_hat), 1e-8)
    dev = develop(M, curve, Frame(q0.x, q0.frame_m), tol)
    frames = transport_frames(M, curve, q0.frame_m, tol)
    # A_0 maps frame_m to frame_hat, so the coordinates of the development carry over unchanged
    hat_dev = DevelopmentCurve(grid=dev.grid, vectors=dev.vectors, velocities=dev.velocities)
    points, _, hat_frames, t_star, reason = _antidevelop_frames(target, q0.x_hat, q0.frame_hat, hat_dev, tol)
    count = len(points)
    states = [
        ConfigState(x=Point(curve.points[k]), frame_m=frames[k], x_hat=points[k], frame_hat=hat_frames[k])
        for k in range(count)
    ]
    if t_star is not None:
        logger.warning(f"Rolling onto {target.label} stopped at t={t_star:.6g}: {reason}")
        return RollingCurve(grid=curve.grid[:count].copy(), states=states, base=curve, target=target,
                            partial=True, diagnostic=f"escaped at t*={t_star:.6g} ({reason})")
    return RollingCurve(grid=curve.grid.copy(), states=states, base=curve, target=target)


def _covariant_rate(target: Optional[ManifoldSpec], x0: np.ndarray, x1: np.ndarray,
                    W0: np.ndarray, W1: np.ndarray, h: float, tol: Tolerances) -> np.ndarray:
    rate = (W1 - W0) / h
    if target is None or target.kind == ManifoldKind.FLAT:
        return rate
    mid = 0.5 * (x0 + x1)
    if target.is_embedded:
        mid = project_to_manifold(target, mid)
    K = connection_matrix(target, mid, (x1 - x0) / h, tol)
    return rate + K @ (0.5 * (W0 + W1))


def constraint_residuals(M: ManifoldSpec, rc: RollingCurve, seed: int = 0,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, float]:
    """
    Discrete no-slip and no-twist residuals of a rolling curve.

    slip compares each difference quotient of x_hat with the trapezoidal average of A(t) gamma'(t);
    twist is the largest covariant rate of A(t) V(t) for a seeded parallel frame V along the base.
    """
    curve = rc.base
    count = len(rc.states)
    grid = rc.grid
    a_gamma = np.array([
        q.frame_hat @ frame_coordinates(M, q.x.coords, q.frame_m, curve.velocities[k])
        for k, q in enumerate(rc.states)
    ])
    test_frame = random_orthonormal_frame(M, curve.points[0], seed=seed, tol=tol)
    parallel = transport_frames(M, curve, test_frame.vectors, tol)[:count]
    images = np.array([
        q.frame_hat @ _change_of_frame(M, q.x.coords, parallel[k], q.frame_m)
        for k, q in enumerate(rc.states)
    ])

    slip = 0.0
    twist = 0.0
    for a, b in _segments(grid[:count]):
        for k in range(a, b - 1):
            h = grid[k + 1] - grid[k]
            quotient = (rc.states[k + 1].x_hat - rc.states[k].x_hat) / h
            slip = max(slip, float(np.linalg.norm(quotient - 0.5 * (a_gamma[k] + a_gamma[k + 1]))))
            rate = _covariant_rate(rc.target, rc.states[k].x_hat, rc.states[k + 1].x_hat,
                                   images[k], images[k + 1], h, tol)
            twist = max(twist, float(np.linalg.norm(rate)))
    logger.debug(f"Rolling residuals: slip {slip:.3e}, twist {twist:.3e}")
    return {"slip": slip, "twist": twist}
