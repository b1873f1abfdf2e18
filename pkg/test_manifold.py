import numpy as np
import pytest

from lorroll import get_manifold, parse_manifold
from lorroll.manifold import (
    christoffel_at,
    curvature_endomorphism,
    default_point,
    frame_coordinates,
    frame_gram,
    inner_at,
    is_tangent,
    metric_at,
    orthonormal_frame,
    random_orthonormal_frame,
    tangent_project,
    time_reference,
    validate_frame,
    validate_point,
)
from lorroll.models import Frame, GeometryError, ManifoldKind, Point


def test_factory_rejects_unknown_kind():
    with pytest.raises(ValueError, match="Unknown manifold kind"):
        get_manifold("torus", 2, 1)
    with pytest.raises(ValueError, match="needs parameters"):
        get_manifold("s")


def test_parse_manifold_shorthand():
    M = parse_manifold("s:2,1,2.5")
    assert M.kind == ManifoldKind.PSEUDO_SPHERE
    assert (M.n, M.nu, M.r) == (2, 1, 2.5)
    assert M.coord_dim == 4
    assert parse_manifold("h:2,1").r == 1.0
    assert parse_manifold("flat:3,1").label == "flat:3,1"
    assert parse_manifold("clifton-pohl").dim == 2
    assert parse_manifold({"kind": "h", "n": 2, "nu": 2, "r": 1.0}).coord_dim == 5
    with pytest.raises(ValueError):
        parse_manifold("s:2")
    with pytest.raises(ValueError, match="Malformed"):
        parse_manifold("flat:a,b")


def test_custom_signature_from_default_point(de_sitter_chart):
    assert (de_sitter_chart.n, de_sitter_chart.nu) == (1, 1)
    assert np.allclose(default_point(de_sitter_chart).coords, [1.0, 1.0])


def test_validate_point(s21, h21, clifton_pohl):
    validate_point(s21, [1.0, 0.0, 0.0, 0.0])
    validate_point(h21, [0.0, 0.0, 0.0, 1.0])
    with pytest.raises(GeometryError, match="is off"):
        validate_point(s21, [0.5, 0.0, 0.0, 0.0])
    with pytest.raises(GeometryError, match="coordinates"):
        validate_point(s21, [1.0, 0.0, 0.0])
    with pytest.raises(GeometryError, match="origin"):
        validate_point(clifton_pohl, [0.0, 0.0])


def test_embedded_metric_is_restricted_ambient_form(s21):
    g = metric_at(s21, default_point(s21))
    assert np.allclose(g, np.diag([1.0, 1.0, -1.0]))


@pytest.mark.parametrize("fixture", ["flat21", "s21", "h21", "s31", "h22", "clifton_pohl", "de_sitter_chart"])
def test_orthonormal_frame(request, fixture):
    M = request.getfixturevalue(fixture)
    x = default_point(M)
    frame = orthonormal_frame(M, x)
    validate_frame(M, frame)
    assert np.allclose(frame_gram(M, x, frame.vectors), np.diag(M.signature.diagonal), atol=1e-10)
    t_ref = time_reference(M, x)
    if t_ref is not None:
        # last frame vector lies in the future cone: <e_m, T> < 0
        assert inner_at(M, x, frame.vectors[:, -1], t_ref) < 0


def test_random_frames_are_seeded(s21):
    x = default_point(s21)
    a = random_orthonormal_frame(s21, x, seed=3)
    b = random_orthonormal_frame(s21, x, seed=3)
    c = random_orthonormal_frame(s21, x, seed=4)
    validate_frame(s21, a)
    assert np.array_equal(a.vectors, b.vectors)
    assert not np.allclose(a.vectors, c.vectors)


def test_validate_frame_rejects_bad_frames(s21):
    x = default_point(s21)
    E = orthonormal_frame(s21, x).vectors
    with pytest.raises(GeometryError, match="pseudo-orthonormal"):
        validate_frame(s21, Frame(x, 2.0 * E))
    with pytest.raises(GeometryError, match="must be"):
        validate_frame(s21, Frame(x, E[:, :2]))


def test_frame_coordinates_reconstruct(h21):
    x = default_point(h21)
    E = orthonormal_frame(h21, x).vectors
    w = tangent_project(h21, x, [0.3, -1.2, 0.7, 5.0]).vec
    c = frame_coordinates(h21, x, E, w)
    assert np.allclose(E @ c, w)


def test_clifton_pohl_christoffels_match_finite_differences(clifton_pohl):
    chart = parse_manifold('custom:{"g12": "2/(x1^2+x2^2)"}')
    assert (chart.n, chart.nu) == (1, 1)
    x = np.array([1.0, 0.5])
    assert np.allclose(christoffel_at(chart, x), christoffel_at(clifton_pohl, x), atol=1e-7)


def test_curvature_of_de_sitter_chart(de_sitter_chart):
    x = np.array([1.0, 0.3])
    frame = orthonormal_frame(de_sitter_chart, x)
    E = frame.vectors
    R = curvature_endomorphism(de_sitter_chart, x, E[:, 0], E[:, 1], frame)
    # constant curvature +1 in frame coordinates: (x y^T - y x^T) diag(eta)
    expected = np.array([[0.0, -1.0], [-1.0, 0.0]])
    assert np.allclose(R, expected, atol=1e-5)


@pytest.mark.parametrize("fixture,sign", [("s21", 1.0), ("h21", -1.0)])
def test_constant_curvature_endomorphism(request, fixture, sign):
    M = request.getfixturevalue(fixture)
    x = default_point(M)
    frame = orthonormal_frame(M, x)
    E = frame.vectors
    R = curvature_endomorphism(M, x, E[:, 0], E[:, 1], frame)
    eta = M.signature.diagonal
    expected = sign * (np.outer([1, 0, 0], [0, 1, 0]) - np.outer([0, 1, 0], [1, 0, 0])) @ np.diag(eta)
    assert np.allclose(R, expected)
    # R(X, Y) is skew for the frame metric
    assert np.allclose(R.T @ np.diag(eta) + np.diag(eta) @ R, 0.0)


def test_flat_curvature_vanishes(flat21):
    x = default_point(flat21)
    assert np.allclose(curvature_endomorphism(flat21, x, [1, 0, 0], [0, 0, 1]), 0.0)
    assert isinstance(default_point(flat21), Point)


def test_parsed_clifton_pohl_metric_matches_builtin(clifton_pohl, rng):
    chart = parse_manifold('custom:{"g12":"2/(x1^2+x2^2)"}')
    points = rng.uniform(0.2, 2.0, size=(10, 2)) * rng.choice([-1.0, 1.0], size=(10, 2))
    for x in points:
        assert np.allclose(metric_at(chart, x), metric_at(clifton_pohl, x), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("fixture,x", [
    ("clifton_pohl", [1.0, 0.5]),
    ("clifton_pohl", [-0.7, 1.3]),
    ("de_sitter_chart", [0.4, 0.3]),
    ("de_sitter_chart", [-1.0, -0.8]),
])
def test_levi_civita_is_metric_and_torsion_free(request, fixture, x):
    M = request.getfixturevalue(fixture)
    x = np.array(x)
    gamma = christoffel_at(M, x)
    assert np.allclose(gamma, np.swapaxes(gamma, 1, 2), atol=1e-12)

    g = metric_at(M, x)
    h = 1e-5
    dg = np.zeros((M.dim, M.dim, M.dim))
    for k in range(M.dim):
        step = np.zeros(M.dim)
        step[k] = h
        dg[k] = (metric_at(M, x + step) - metric_at(M, x - step)) / (2.0 * h)
    # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il
    expected = np.einsum("lki,lj->kij", gamma, g) + np.einsum("lkj,il->kij", gamma, g)
    assert np.allclose(dg, expected, atol=1e-6)


@pytest.mark.parametrize("fixture", ["s21", "h21", "s31", "h22"])
def test_tangent_project_is_idempotent(request, fixture, rng):
    M = request.getfixturevalue(fixture)
    x = default_point(M).coords
    for _ in range(5):
        w = rng.normal(size=M.coord_dim)
        once = tangent_project(M, x, w).vec
        twice = tangent_project(M, x, once).vec
        assert np.allclose(once, twice, atol=1e-12)
        assert is_tangent(M, x, once)
    assert not is_tangent(M, x, x)
