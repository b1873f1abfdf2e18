# lorroll/manifold.py
# Catalog manifolds: metric, Christoffel and curvature evaluation in chart or embedded form,
# plus pointwise pseudo-orthonormal frames.

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy import linalg

from .minkowski import pseudo_gram_schmidt, standard_candidates
from .models import (
    DEFAULT_TOLERANCES,
    Frame,
    GeometryError,
    ManifoldKind,
    ManifoldSpec,
    Point,
    Tangent,
    Tolerances,
)

logger = logging.getLogger(__name__)

PointLike = Union[Point, np.ndarray, list, tuple]
VectorLike = Union[Tangent, np.ndarray, list, tuple]


def _coords(x: PointLike) -> np.ndarray:
    if isinstance(x, Point):
        return x.coords
    return np.asarray(x, dtype=float).reshape(-1)


def _vec(w: VectorLike) -> np.ndarray:
    if isinstance(w, Tangent):
        return w.vec
    return np.asarray(w, dtype=float).reshape(-1)


def validate_point(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> Point:
    """Coerce x to a Point of M, checking dimension and the defining constraint."""
    p = _coords(x)
    if p.shape[0] != M.coord_dim:
        raise GeometryError(f"Point has {p.shape[0]} coordinates, {M.label} needs {M.coord_dim}")
    if not np.all(np.isfinite(p)):
        raise GeometryError(f"Point {p.tolist()} has non-finite coordinates")
    if M.is_embedded:
        J = M.ambient.J
        value = float(p @ J @ p)
        target = M.constraint_sign * M.r ** 2
        if abs(value - target) > tol.construction * max(1.0, M.r ** 2, float(p @ p)):
            raise GeometryError(
                f"Point {p.tolist()} is off {M.label}: <p,p> = {value:.12g}, expected {target:.12g}"
            )
    elif M.kind == ManifoldKind.CLIFTON_POHL and float(p @ p) <= tol.construction ** 2:
        raise GeometryError("The Clifton-Pohl chart excludes the origin")
    return Point(p)


def ambient_form(M: ManifoldSpec) -> np.ndarray:
    if not M.is_embedded:
        raise GeometryError(f"{M.label} is not an embedded manifold")
    return M.ambient.J


def _clifton_pohl_metric(p: np.ndarray) -> np.ndarray:
    rho2 = float(p @ p)
    f = 2.0 / rho2
    return np.array([[0.0, f], [f, 0.0]])


def _chart_metric(M: ManifoldSpec, p: np.ndarray) -> np.ndarray:
    if M.kind == ManifoldKind.FLAT:
        return M.signature.J
    if M.kind == ManifoldKind.CLIFTON_POHL:
        return _clifton_pohl_metric(p)
    return M.metric.evaluate(p)


def _check_metric(M: ManifoldSpec, g: np.ndarray, p: np.ndarray):
    if not np.all(np.isfinite(g)):
        raise GeometryError(f"Metric of {M.label} is not finite at {p.tolist()}")
    eig = np.linalg.eigvalsh(g)
    largest = max(1.0, float(np.max(np.abs(eig))))
    if float(np.min(np.abs(eig))) <= 1e-12 * largest:
        raise GeometryError(f"Metric of {M.label} is singular at {p.tolist()}")
    index = int(np.sum(eig < 0))
    if index != M.nu:
        raise GeometryError(f"Metric of {M.label} has index {index} at {p.tolist()}, expected {M.nu}")


def metric_at(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Metric matrix at x.

    Chart kinds return g_ij in chart coordinates. Embedded kinds return the Gram matrix of the
    canonical orthonormal tangent frame, i.e. the restricted ambient form, diag(+1 x n, -1 x nu).
    """
    p = validate_point(M, x, tol).coords
    if M.is_embedded:
        E = orthonormal_frame(M, p, tol).vectors
        return E.T @ M.ambient.J @ E
    g = _chart_metric(M, p)
    if M.kind == ManifoldKind.CUSTOM_CHART:
        _check_metric(M, g, p)
    return g


def coordinate_form(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Matrix G with <u, w> = u^T G w for coordinate vectors at x (ambient J when embedded)."""
    if M.is_embedded:
        return M.ambient.J
    return metric_at(M, x, tol)


def inner_at(M: ManifoldSpec, x: PointLike, u: VectorLike, w: VectorLike) -> float:
    G = coordinate_form(M, x)
    return float(_vec(u) @ G @ _vec(w))


def christoffel_at(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Gamma[k, i, j] = Gamma^k_ij for chart kinds; closed forms for flat and Clifton-Pohl."""
    if M.is_embedded:
        raise GeometryError(f"christoffel_at needs a chart manifold, {M.label} is embedded")
    p = validate_point(M, x, tol).coords
    m = M.dim
    if M.kind == ManifoldKind.FLAT:
        return np.zeros((m, m, m))
    if M.kind == ManifoldKind.CLIFTON_POHL:
        u, v = p
        rho2 = u * u + v * v
        gamma = np.zeros((2, 2, 2))
        gamma[0, 0, 0] = -2.0 * u / rho2
        gamma[1, 1, 1] = -2.0 * v / rho2
        return gamma

    h = tol.fd_step
    g = metric_at(M, p, tol)
    g_inv = np.linalg.inv(g)
    dg = np.zeros((m, m, m))
    for l in range(m):
        step = np.zeros(m)
        step[l] = h
        dg[l] = (_chart_metric(M, p + step) - _chart_metric(M, p - step)) / (2.0 * h)
    # lowered[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    lowered = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    return np.einsum("kl,lij->kij", g_inv, lowered)


def curvature_tensor(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """R[l, k, i, j] with R(d_i, d_j) d_k = R[l, k, i, j] d_l, from finite differences of Gamma."""
    p = validate_point(M, x, tol).coords
    m = M.dim
    gamma = christoffel_at(M, p, tol)
    h = tol.curvature_fd_step
    d_gamma = np.zeros((m, m, m, m))
    for a in range(m):
        step = np.zeros(m)
        step[a] = h
        d_gamma[a] = (christoffel_at(M, p + step, tol) - christoffel_at(M, p - step, tol)) / (2.0 * h)
    return (
        np.einsum("iljk->lkij", d_gamma)
        - np.einsum("jlik->lkij", d_gamma)
        + np.einsum("lip,pjk->lkij", gamma, gamma)
        - np.einsum("ljp,pik->lkij", gamma, gamma)
    )


def connection_matrix(M: ManifoldSpec, x: np.ndarray, velocity: np.ndarray,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """K with dV/dt = -K V for parallel fields V along a curve through x with the given velocity."""
    if M.is_embedded:
        J = M.ambient.J
        return np.outer(x, J @ velocity) / float(x @ J @ x)
    if M.kind == ManifoldKind.FLAT:
        return np.zeros((M.dim, M.dim))
    gamma = christoffel_at(M, x, tol)
    return np.einsum("kij,i->kj", gamma, velocity)


def geodesic_acceleration(M: ManifoldSpec, x: np.ndarray, v: np.ndarray,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    if M.is_embedded:
        J = M.ambient.J
        return -(float(v @ J @ v) / float(x @ J @ x)) * x
    if M.kind == ManifoldKind.FLAT:
        return np.zeros_like(v)
    gamma = christoffel_at(M, x, tol)
    return -np.einsum("kij,i,j->k", gamma, v, v)


# --- Embedded tangent spaces ---

def tangent_project(M: ManifoldSpec, p: PointLike, w: VectorLike) -> Tangent:
    """w - (<w,p>/<p,p>) p for embedded kinds."""
    if not M.is_embedded:
        raise GeometryError(f"tangent_project needs an embedded manifold, {M.label} is a chart")
    point = _coords(p)
    w = _vec(w)
    J = M.ambient.J
    pp = float(point @ J @ point)
    if abs(pp) <= 1e-300:
        raise GeometryError("Cannot project at a null position vector")
    return Tangent(Point(point), w - (float(w @ J @ point) / pp) * point)


def project_to_manifold(M: ManifoldSpec, p: np.ndarray) -> np.ndarray:
    """Rescale p along its ray onto the quadric."""
    J = M.ambient.J
    value = M.constraint_sign * float(p @ J @ p)
    if value <= 0:
        raise GeometryError(f"Ray through {p.tolist()} does not meet {M.label}")
    return p * (M.r / math.sqrt(value))


def is_tangent(M: ManifoldSpec, x: PointLike, w: VectorLike, tol: float = DEFAULT_TOLERANCES.construction) -> bool:
    if not M.is_embedded:
        return _vec(w).shape[0] == M.dim
    p = _coords(x)
    w = _vec(w)
    J = M.ambient.J
    return abs(float(w @ J @ p)) <= tol * max(1.0, float(np.linalg.norm(w)) * float(np.linalg.norm(p)))


def tangent_basis(M: ManifoldSpec, x: PointLike) -> np.ndarray:
    """Columns spanning T_xM in coordinates (Euclidean-orthonormal for embedded kinds)."""
    if not M.is_embedded:
        return np.eye(M.dim)
    p = _coords(x)
    return linalg.null_space((M.ambient.J @ p)[None, :])


# --- Frames ---

def default_point(M: ManifoldSpec) -> Point:
    if M.kind == ManifoldKind.PSEUDO_SPHERE:
        p = np.zeros(M.coord_dim)
        p[0] = M.r
        return Point(p)
    if M.kind == ManifoldKind.PSEUDO_HYPERBOLIC:
        p = np.zeros(M.coord_dim)
        p[-1] = M.r
        return Point(p)
    if M.kind == ManifoldKind.CLIFTON_POHL:
        return Point(np.array([1.0, 0.0]))
    if M.kind == ManifoldKind.CUSTOM_CHART:
        return Point(np.ones(M.dim))
    return Point(np.zeros(M.dim))


def time_reference(M: ManifoldSpec, x: PointLike) -> Optional[np.ndarray]:
    """A timelike vector field defining the future cone; only for index 1."""
    if M.nu != 1:
        return None
    p = _coords(x)
    if M.kind == ManifoldKind.FLAT:
        t = np.zeros(M.dim)
        t[-1] = 1.0
        return t
    if M.kind == ManifoldKind.PSEUDO_SPHERE:
        e = np.zeros(M.coord_dim)
        e[-1] = 1.0
        return tangent_project(M, p, e).vec
    if M.kind == ManifoldKind.PSEUDO_HYPERBOLIC:
        # rotation generator of the two timelike ambient axes
        t = np.zeros(M.coord_dim)
        t[-2], t[-1] = -p[-1], p[-2]
        return t
    if M.kind == ManifoldKind.CLIFTON_POHL:
        return np.array([1.0, -1.0])
    g = metric_at(M, p)
    eig, vecs = np.linalg.eigh(g)
    t = vecs[:, int(np.argmin(eig))]
    return t if t[int(np.argmax(np.abs(t)))] > 0 else -t


def frame_coordinates(M: ManifoldSpec, x: PointLike, E: np.ndarray, w: VectorLike) -> np.ndarray:
    """Components c_a = eta_a <e_a, w> of w in the pseudo-orthonormal frame E."""
    G = coordinate_form(M, x)
    eta = M.signature.diagonal
    return eta * (E.T @ G @ _vec(w))


def frame_gram(M: ManifoldSpec, x: PointLike, E: np.ndarray) -> np.ndarray:
    return E.T @ coordinate_form(M, x) @ E


def _orientation_det(M: ManifoldSpec, p: np.ndarray, E: np.ndarray) -> float:
    if M.is_embedded:
        return float(np.linalg.det(np.column_stack([E, p])))
    return float(np.linalg.det(E))


def _orient(M: ManifoldSpec, p: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Flip e_m into the future cone (index 1), then flip e_1 for positive orientation."""
    E = E.copy()
    G = coordinate_form(M, p)
    t_ref = time_reference(M, p)
    if t_ref is not None and float(E[:, -1] @ G @ t_ref) > 0:
        E[:, -1] = -E[:, -1]
    if _orientation_det(M, p, E) < 0:
        if M.n >= 1:
            E[:, 0] = -E[:, 0]
        else:
            E[:, -1] = -E[:, -1]
    return E


def _sort_frame(M: ManifoldSpec, p: np.ndarray, vectors) -> np.ndarray:
    G = coordinate_form(M, p)
    spacelike = [w for w in vectors if float(w @ G @ w) > 0]
    timelike = [w for w in vectors if float(w @ G @ w) < 0]
    if len(timelike) != M.nu:
        raise GeometryError(f"Frame at {p.tolist()} has {len(timelike)} timelike vectors, expected {M.nu}")
    return np.column_stack(spacelike + timelike)


def orthonormal_frame(M: ManifoldSpec, x: PointLike, tol: Tolerances = DEFAULT_TOLERANCES) -> Frame:
    """Deterministic pseudo-orthonormal frame from the coordinate axes, oriented and time-oriented."""
    p = validate_point(M, x, tol).coords
    if M.kind == ManifoldKind.FLAT:
        return Frame(Point(p), np.eye(M.dim))
    G = coordinate_form(M, p, tol)
    candidates = [tangent_basis(M, p) @ (tangent_basis(M, p).T @ c) for c in standard_candidates(M.coord_dim)]
    vectors = pseudo_gram_schmidt(candidates, G, M.dim)
    if len(vectors) != M.dim:
        raise GeometryError(f"Could not build an orthonormal frame of {M.label} at {p.tolist()}")
    E = _orient(M, p, _sort_frame(M, p, vectors))
    return Frame(Point(p), E)


def random_orthonormal_frame(M: ManifoldSpec, x: PointLike, seed: int = 0,
                             tol: Tolerances = DEFAULT_TOLERANCES, retries: int = 10) -> Frame:
    """Pseudo Gram-Schmidt on a seeded random tangent basis; resamples on breakdown."""
    p = validate_point(M, x, tol).coords
    G = coordinate_form(M, p, tol)
    T = tangent_basis(M, p)
    rng = np.random.default_rng(seed)
    for attempt in range(retries):
        raw = T @ rng.normal(size=(M.dim, M.dim))
        vectors = pseudo_gram_schmidt([raw[:, a] for a in range(M.dim)], G, M.dim, tol=1e-6)
        if len(vectors) == M.dim:
            E = _orient(M, p, _sort_frame(M, p, vectors))
            return Frame(Point(p), E)
        logger.debug(f"Pseudo Gram-Schmidt broke down on attempt {attempt + 1}, resampling")
    raise GeometryError(f"No orthonormal frame found at {p.tolist()} after {retries} attempts")


def validate_frame(M: ManifoldSpec, frame: Frame, tol: float = DEFAULT_TOLERANCES.construction) -> Frame:
    p = frame.base.coords
    E = np.asarray(frame.vectors, dtype=float)
    if E.shape != (M.coord_dim, M.dim):
        raise GeometryError(f"Frame must be {M.coord_dim}x{M.dim}, got {E.shape}")
    gram = frame_gram(M, p, E)
    residual = float(np.linalg.norm(gram - np.diag(M.signature.diagonal)))
    if residual > tol * max(1.0, float(np.linalg.norm(E)) ** 2):
        raise GeometryError(f"Frame is not pseudo-orthonormal: Gram residual {residual:.3e}")
    if M.is_embedded:
        normal = float(np.max(np.abs(E.T @ M.ambient.J @ p)))
        if normal > tol * max(1.0, float(np.linalg.norm(E)) * float(np.linalg.norm(p))):
            raise GeometryError(f"Frame vectors are not tangent: normal residual {normal:.3e}")
    return frame


# --- Curvature ---

def curvature_endomorphism(M: ManifoldSpec, x: PointLike, X: VectorLike, Y: VectorLike,
                           frame: Optional[Frame] = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """R(X, Y) as a matrix in the coordinates of a pseudo-orthonormal frame at x."""
    p = validate_point(M, x, tol).coords
    E = frame.vectors if frame is not None else orthonormal_frame(M, p, tol).vectors
    eta = M.signature.diagonal
    c = M.curvature_constant
    if c is not None:
        xc = frame_coordinates(M, p, E, X)
        yc = frame_coordinates(M, p, E, Y)
        # R(X,Y)Z = c(<Y,Z>X - <X,Z>Y)
        return c * (np.outer(xc, yc) - np.outer(yc, xc)) @ np.diag(eta)
    R = curvature_tensor(M, p, tol)
    Rc = np.einsum("lkij,i,j->lk", R, _vec(X), _vec(Y))
    G = coordinate_form(M, p, tol)
    return np.diag(eta) @ E.T @ G @ Rc @ E
