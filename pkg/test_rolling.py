import math

import numpy as np
import pytest

from lorroll import get_manifold
from lorroll.holonomy import rectangle_loop
from lorroll.manifold import default_point, frame_coordinates, orthonormal_frame, random_orthonormal_frame, tangent_basis
from lorroll.minkowski import LorentzMatrix, SEElement, random_lorentz, so_basis, so_exp
from lorroll.models import ConfigState, GeometryError, Point, RollingCurve, Signature
from lorroll.reports import j_norm
from lorroll.rolling import (
    canonical_state,
    constraint_residuals,
    fiber_transporter,
    roll_flat,
    roll_general,
    rolling_lift,
    se_act,
    state_distance,
    validate_state,
)
from lorroll.transport import concatenate_curves, geodesic, make_curve, transport_frames

SIG21 = Signature(2, 1)


def _line(M, direction, T=1.0, samples=101):
    grid = np.linspace(0.0, T, samples)
    direction = np.asarray(direction, dtype=float)
    return make_curve(M, grid, grid[:, None] * direction[None, :], np.repeat(direction[None, :], samples, axis=0))


def _random_state(M, x, rng, seed):
    return ConfigState(
        x=Point(x),
        frame_m=random_orthonormal_frame(M, x, seed=seed).vectors,
        x_hat=rng.normal(size=M.dim),
        frame_hat=random_lorentz(M.signature, rng, 0.5).matrix,
    )


def test_canonical_state_is_valid(s21):
    q = canonical_state(s21)
    validate_state(s21, q)
    assert np.allclose(q.frame_hat, np.eye(3))
    with pytest.raises(GeometryError, match="pseudo-orthonormal"):
        validate_state(s21, ConfigState(q.x, q.frame_m, q.x_hat, 2.0 * np.eye(3)))


def test_rolling_flat_on_flat_follows_the_curve(flat21, rng):
    A = random_lorentz(SIG21, rng, 0.4).matrix
    q0 = ConfigState(Point(np.zeros(3)), np.eye(3), np.array([1.0, 2.0, 3.0]), A)
    curve = _line(flat21, [1.0, 0.5, 0.2])
    rc = roll_flat(flat21, q0, curve)
    expected = q0.x_hat + (curve.points - curve.points[0]) @ A.T
    assert np.allclose(rc.x_hat, expected)
    assert all(np.allclose(q.frame_m, np.eye(3)) for q in rc.states)


def test_rolling_along_closed_geodesic(s21):
    x = np.array([1.0, 0.0, 0.0, 0.0])
    curve = geodesic(s21, x, [0.0, 1.0, 0.0, 0.0], T=2 * math.pi, step=1e-3)
    q0 = canonical_state(s21, x)
    rc = roll_flat(s21, q0, curve)
    assert j_norm(rc.final.x_hat - q0.x_hat) == pytest.approx(2 * math.pi, abs=1e-6)
    assert np.allclose(rc.final.frame_m, q0.frame_m, atol=1e-6)


def test_se_action_laws(s21, rng):
    q = _random_state(s21, default_point(s21).coords, rng, 1)
    ident = se_act(SEElement.identity(SIG21), q)
    assert state_distance(s21, ident, q) <= 1e-12
    B1 = SEElement(rng.normal(size=3), random_lorentz(SIG21, rng, 0.5))
    B2 = SEElement(rng.normal(size=3), random_lorentz(SIG21, rng, 0.5))
    assert state_distance(s21, se_act(B1 @ B2, q), se_act(B1, se_act(B2, q))) <= 1e-12


def test_fiber_transporter(s21, rng):
    x = default_point(s21).coords
    for k in range(100):
        q = _random_state(s21, x, rng, 2 * k)
        q_bar = _random_state(s21, x, rng, 2 * k + 1)
        B = fiber_transporter(s21, q, q_bar)
        assert state_distance(s21, se_act(B, q), q_bar) <= 1e-10
    same = fiber_transporter(s21, q, q)
    assert same.linear_distance() <= 1e-10
    assert np.linalg.norm(same.y) <= 1e-10


def test_fiber_transporter_needs_common_base_point(s21):
    q = canonical_state(s21)
    other = canonical_state(s21, [math.cosh(0.1), 0.0, 0.0, math.sinh(0.1)])
    with pytest.raises(GeometryError, match="different points"):
        fiber_transporter(s21, q, other)


def test_rolling_is_equivariant(s21):
    rng = np.random.default_rng(3)
    x = default_point(s21).coords
    for _ in range(50):
        B = SEElement(rng.normal(size=3), random_lorentz(SIG21, rng, 0.5))
        q0 = canonical_state(s21, x, rng.normal(size=3))
        curve = geodesic(s21, x, tangent_basis(s21, x) @ rng.normal(scale=0.8, size=3), T=0.5, step=1e-2)
        moved = roll_flat(s21, se_act(B, q0), curve)
        plain = roll_flat(s21, q0, curve)
        worst = max(state_distance(s21, a, se_act(B, b)) for a, b in zip(moved.states, plain.states))
        assert worst <= 1e-6


def test_rolling_satisfies_both_constraints(h21):
    x = default_point(h21).coords
    curve = geodesic(h21, x, [0.3, 0.5, 0.4, 0.0], T=1.0, step=1e-3)
    rc = roll_flat(h21, canonical_state(h21, x), curve)
    residuals = constraint_residuals(h21, rc, seed=4)
    assert residuals["slip"] <= 1e-9
    assert residuals["twist"] <= 1e-6


def test_residuals_detect_slipping_and_twisting(flat21):
    curve = _line(flat21, [1.0, 0.0, 0.0])
    rc = roll_flat(flat21, canonical_state(flat21), curve)
    frozen = RollingCurve(
        grid=rc.grid,
        states=[ConfigState(q.x, q.frame_m, np.zeros(3), q.frame_hat) for q in rc.states],
        base=curve,
    )
    assert constraint_residuals(flat21, frozen)["slip"] >= 0.5

    X = so_basis(SIG21)[0].matrix
    spinning = RollingCurve(
        grid=rc.grid,
        states=[ConfigState(q.x, q.frame_m, q.x_hat, so_exp(so_basis(SIG21)[0].scaled(t)).matrix)
                for t, q in zip(rc.grid, rc.states)],
        base=curve,
    )
    residuals = constraint_residuals(flat21, spinning)
    assert residuals["twist"] >= 0.5 * np.linalg.norm(X, 2)


def test_rolling_lift(s21):
    q = canonical_state(s21)
    lift = rolling_lift(s21, q, q.frame_m[:, 0])
    assert np.allclose(lift.x_hat_dot, [1.0, 0.0, 0.0])
    assert np.allclose(lift.frame_hat_dot, 0.0)


def test_rolling_along_concatenation(s21):
    x = default_point(s21).coords
    c1 = geodesic(s21, x, [0.0, 0.5, 0.0, 0.2], T=0.5, step=1e-3)
    end = c1.points[-1]
    c2 = geodesic(s21, end, tangent_basis(s21, end) @ np.array([0.2, -0.3, 0.1]), T=0.5, step=1e-3)
    q0 = canonical_state(s21, x)
    whole = roll_flat(s21, q0, concatenate_curves(c1, c2))
    first = roll_flat(s21, q0, c1)
    second = roll_flat(s21, first.final, c2)
    offset = c1.samples
    worst = max(state_distance(s21, whole.states[offset + k], q) for k, q in enumerate(second.states))
    assert worst <= 1e-9


def test_roll_general_onto_flat_matches_roll_flat(s21, flat21):
    x = default_point(s21).coords
    curve = geodesic(s21, x, [0.0, 0.5, 0.0, 0.2], T=0.5, step=1e-3)
    q0 = canonical_state(s21, x)
    rc = roll_general(s21, flat21, q0, curve)
    assert rc.target is flat21
    assert np.allclose(rc.x_hat, roll_flat(s21, q0, curve).x_hat)


def _self_contact(M, x):
    E = orthonormal_frame(M, x).vectors
    return ConfigState(Point(x), E, x.copy(), E.copy())


def test_rolling_a_manifold_on_itself_retraces_the_curve(s21):
    x = default_point(s21).coords
    curve = geodesic(s21, x, [0.0, 0.6, 0.2, 0.3], T=1.0, step=1e-2)
    rc = roll_general(s21, s21, _self_contact(s21, x), curve)
    assert not rc.partial
    assert np.max(np.linalg.norm(rc.x_hat - curve.points, axis=1)) <= 1e-6


def test_rolling_on_itself_along_a_rectangle(s21):
    x = default_point(s21).coords
    loop = rectangle_loop(s21, x, 0, 2, 0.2, step=1e-3)
    rc = roll_general(s21, s21, _self_contact(s21, x), loop)
    assert np.max(np.linalg.norm(rc.x_hat - loop.points, axis=1)) <= 1e-5
    residuals = constraint_residuals(s21, rc)
    assert residuals["slip"] <= 1e-4
    assert residuals["twist"] <= 1e-4


def test_rolling_flat_space_onto_pseudo_sphere_closes(flat21, s21):
    x_hat = np.array([1.0, 0.0, 0.0, 0.0])
    frame_hat = orthonormal_frame(s21, x_hat).vectors
    q0 = ConfigState(Point(np.zeros(3)), np.eye(3), x_hat, frame_hat)
    curve = _line(flat21, [1.0, 0.0, 0.0], T=2 * math.pi, samples=2001)
    rc = roll_general(flat21, s21, q0, curve)
    assert np.linalg.norm(rc.final.x_hat - x_hat) <= 1e-6


def test_rolling_onto_clifton_pohl_escapes(clifton_pohl):
    flat11 = get_manifold("flat", 1, 1)
    x_hat = np.array([1.0, 0.0])
    frame_hat = orthonormal_frame(clifton_pohl, x_hat).vectors
    direction = frame_coordinates(clifton_pohl, x_hat, frame_hat, [2.0, 0.0])
    q0 = ConfigState(Point(np.zeros(2)), np.eye(2), x_hat, frame_hat)
    rc = roll_general(flat11, clifton_pohl, q0, _line(flat11, direction, T=1.0, samples=1001))
    assert rc.partial
    assert "escaped" in rc.diagnostic
    assert rc.grid[-1] <= 0.5


def test_roll_general_rejects_signature_mismatch(flat21, clifton_pohl):
    with pytest.raises(GeometryError, match="signatures differ"):
        roll_general(flat21, clifton_pohl, canonical_state(flat21), _line(flat21, [1.0, 0.0, 0.0]))


def _apply_isometry(M, q, w):
    """A(q) w for a tangent vector w at the base point of q."""
    return q.frame_hat @ frame_coordinates(M, q.x.coords, q.frame_m, w)


def test_rolling_isometry_intertwines_parallel_transport(s21, rng):
    x = default_point(s21).coords
    q0 = _random_state(s21, x, rng, seed=9)
    curve = geodesic(s21, x, [0.0, 0.5, -0.3, 0.4], T=1.0, step=1e-3)
    rc = roll_flat(s21, q0, curve)
    basis = tangent_basis(s21, x)
    for _ in range(5):
        u = basis @ rng.normal(size=3)
        transported = transport_frames(s21, curve, u)
        # the flat target transports trivially: A(t) P u = A_0 u
        for k in (len(rc.states) // 2, len(rc.states) - 1):
            assert np.allclose(_apply_isometry(s21, rc.states[k], transported[k][:, 0]),
                               _apply_isometry(s21, q0, u), atol=1e-8)


def test_rolling_onto_a_curved_target_intertwines_both_transports(flat21, s21, rng):
    x_hat = np.array([1.0, 0.0, 0.0, 0.0])
    q0 = ConfigState(Point(np.zeros(3)), np.eye(3), x_hat, random_orthonormal_frame(s21, x_hat, seed=2).vectors)
    curve = _line(flat21, [0.7, 0.3, 0.2], T=1.0, samples=401)
    rc = roll_general(flat21, s21, q0, curve)
    assert not rc.partial
    target_curve = make_curve(s21, rc.grid, rc.x_hat)
    for _ in range(5):
        u = rng.normal(size=3)
        # parallel transport on the flat base is the identity, so A(t) P u = A(t) u
        moved = rc.final.frame_hat @ frame_coordinates(flat21, curve.points[-1], rc.final.frame_m, u)
        expected = transport_frames(s21, target_curve, _apply_isometry(flat21, q0, u))[-1][:, 0]
        assert np.allclose(moved, expected, atol=1e-5)
