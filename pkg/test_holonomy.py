import math

import numpy as np
import pytest

from lorroll import get_manifold
from lorroll.holonomy import (
    classify_subgroup,
    closed_geodesic_loop,
    conjugate_elements,
    controllability_verdict,
    detect_pure_translation,
    holonomy_algebra_estimate,
    loop_holonomy,
    rectangle_loop,
    rolling_holonomy_sample,
)
from lorroll.manifold import curvature_endomorphism, default_point, orthonormal_frame
from lorroll.minkowski import SEElement, fixed_point_embedding, random_lorentz, so_basis, so_exp, so_log
from lorroll.models import (
    ControllabilityVerdict,
    LoopSpec,
    Point,
    RollingHolonomyEstimate,
    Signature,
    SubgroupVerdict,
)
from lorroll.reports import j_norm
from lorroll.rolling import canonical_state, se_act
from lorroll.transport import constant_curve

SIG21 = Signature(2, 1)


def test_flat_and_constant_loops_have_trivial_holonomy(flat21, s21):
    P = loop_holonomy(flat21, LoopSpec.rectangle(Point(np.zeros(3)), 0, 2, 0.3))
    assert np.allclose(P.matrix, np.eye(3))
    constant = LoopSpec.explicit(constant_curve(s21, default_point(s21), samples=5))
    assert np.allclose(loop_holonomy(s21, constant).matrix, np.eye(3))


def test_rectangle_loops_close(s21, clifton_pohl):
    for M in (s21, clifton_pohl):
        curve = rectangle_loop(M, default_point(M), 0, 1, 0.1)
        assert np.linalg.norm(curve.points[-1] - curve.points[0]) <= 1e-12
    with pytest.raises(ValueError, match="distinct"):
        rectangle_loop(s21, default_point(s21), 1, 1, 0.1)


@pytest.mark.parametrize("i,j", [(0, 1), (0, 2), (1, 2)])
def test_small_rectangle_holonomy_matches_curvature(s21, i, j):
    x = default_point(s21)
    frame = orthonormal_frame(s21, x)
    R = curvature_endomorphism(s21, x, frame.vectors[:, i], frame.vectors[:, j], frame)
    errors = {}
    for side in (0.1, 0.05):
        P = loop_holonomy(s21, LoopSpec.rectangle(x, i, j, side), frame)
        errors[side] = np.linalg.norm(so_log(P).matrix - side ** 2 * R)
    assert errors[0.1] <= 0.1 * 0.1 ** 2 * np.linalg.norm(R)
    assert errors[0.05] / 0.05 ** 2 <= 0.75 * errors[0.1] / 0.1 ** 2


@pytest.mark.parametrize("label,kind,n,nu,rank", [
    ("flat21", "flat", 2, 1, 0),
    ("s21", "s", 2, 1, 3),
    ("h21", "h", 2, 1, 3),
    ("s31", "s", 3, 1, 6),
    ("h22", "h", 2, 2, 6),
])
def test_holonomy_rank_by_curvature(label, kind, n, nu, rank):
    M = get_manifold(kind, n, nu)
    estimate = holonomy_algebra_estimate(M, method="curvature")
    assert estimate.rank == rank
    assert estimate.dim_full == (n + nu) * (n + nu - 1) // 2
    assert not estimate.lower_bound
    assert len(estimate.basis) == rank


@pytest.mark.parametrize("fixture,rank", [("flat21", 0), ("s21", 3), ("h21", 3)])
def test_holonomy_rank_by_loops_agrees(request, fixture, rank):
    M = request.getfixturevalue(fixture)
    estimate = holonomy_algebra_estimate(M, method="loops")
    assert estimate.rank == rank
    assert len(estimate.samples) == 3


def test_holonomy_verdict_labels(flat21, s21):
    assert holonomy_algebra_estimate(flat21).verdict == "trivial"
    assert holonomy_algebra_estimate(s21).verdict == "full"
    assert holonomy_algebra_estimate(s21).is_full


def test_chart_estimate_is_a_lower_bound(de_sitter_chart):
    estimate = holonomy_algebra_estimate(de_sitter_chart, budget=2, seed=1)
    assert estimate.lower_bound
    assert estimate.rank == 1


def test_holonomy_estimate_rejects_bad_arguments(s21):
    with pytest.raises(ValueError, match="budget"):
        holonomy_algebra_estimate(s21, budget=0)
    with pytest.raises(ValueError, match="Unknown method"):
        holonomy_algebra_estimate(s21, method="guess")


def test_flat_rolling_holonomy_is_trivial(flat21):
    q = canonical_state(flat21)
    loops = [LoopSpec.rectangle(q.x, 0, 1, 0.2), LoopSpec.rectangle(q.x, 1, 2, 0.2)]
    estimate = rolling_holonomy_sample(flat21, q, loops)
    for B in estimate.samples:
        assert B.linear_distance() <= 1e-10
        assert np.linalg.norm(B.y) <= 1e-10
    assert detect_pure_translation(estimate) is None


def test_closed_geodesic_gives_a_pure_translation(s21):
    q = canonical_state(s21)
    loop = LoopSpec.explicit(closed_geodesic_loop(s21), label="closed-geodesic")
    estimate = rolling_holonomy_sample(s21, q, [loop])
    element = estimate.samples[0]
    assert element.linear_distance() <= 1e-6
    assert j_norm(element.y) == pytest.approx(2 * math.pi, abs=1e-6)
    witness = detect_pure_translation(estimate)
    assert witness is not None
    assert witness.word == ["closed-geodesic"]


def test_rolling_holonomy_linear_part_inverts_loop_holonomy(s21):
    q = canonical_state(s21)
    loop = LoopSpec.rectangle(q.x, 0, 2, 0.1)
    element = rolling_holonomy_sample(s21, q, [loop]).samples[0]
    P = loop_holonomy(s21, loop, orthonormal_frame(s21, q.x))
    assert np.allclose(element.C.matrix @ P.matrix, np.eye(3), atol=1e-9)


def test_rolling_holonomy_conjugates_under_the_action(s21, rng):
    q = canonical_state(s21)
    loops = [LoopSpec.rectangle(q.x, 0, 1, 0.1), LoopSpec.rectangle(q.x, 0, 2, 0.1)]
    B = SEElement(rng.normal(size=3), random_lorentz(SIG21, rng, 0.5))
    estimate = rolling_holonomy_sample(s21, q, loops)
    moved = rolling_holonomy_sample(s21, se_act(B, q), loops)
    expected = conjugate_elements(B, estimate)
    for a, b in zip(moved.samples, expected.samples):
        assert np.allclose(a.y, b.y, atol=1e-9)
        assert np.allclose(a.C.matrix, b.C.matrix, atol=1e-9)


def test_translation_search_finds_products():
    C = so_exp(so_basis(SIG21)[0].scaled(0.4))
    a = SEElement([1.0, 0.0, 0.0], C)
    b = SEElement([0.0, 1.0, 0.0], C)
    estimate = RollingHolonomyEstimate(base=None, samples=[a, b], labels=["a", "b"])
    witness = detect_pure_translation(estimate)
    assert witness is not None
    assert witness.word == ["a", "b^-1"]
    assert np.allclose(witness.element.y, [1.0, -1.0, 0.0], atol=1e-12)
    assert witness.element.linear_distance() <= 1e-12


def _rotations():
    return [so_exp(X.scaled(0.5)) for X in so_basis(SIG21)]


def test_classify_translation_group_is_full():
    generators = [SEElement.translation([1.0, 0.0, 0.0])] + [SEElement.rotation(C) for C in _rotations()]
    result = classify_subgroup(generators, budget=4, seed=0)
    assert result.verdict == SubgroupVerdict.FULL_SE
    assert result.witness.word == ["g0"]
    assert len(result.demonstrations) == 3
    assert {str(d.causal).split("/")[0] for d in result.demonstrations} == {"Spacelike", "Timelike", "Lightlike"}
    for d in result.demonstrations:
        assert d.residual <= 1e-8
    assert result.report["linearRank"] == 3


def test_classify_fixed_point_group_finds_no_translation():
    x0 = np.array([0.3, -0.2, 1.0])
    generators = [fixed_point_embedding(x0, C) for C in _rotations()]
    result = classify_subgroup(generators, budget=40, seed=0, word_length=6)
    assert result.verdict == SubgroupVerdict.NO_TRANSLATION_DETECTED
    assert result.witness is None
    assert result.report["wordsChecked"] >= 10_000


def test_classify_is_inapplicable_without_full_linear_parts():
    rotation = so_exp(so_basis(SIG21)[0].scaled(0.5))
    generators = [SEElement.translation([1.0, 0.0, 0.0]), SEElement.rotation(rotation)]
    result = classify_subgroup(generators)
    assert result.verdict == SubgroupVerdict.INAPPLICABLE
    assert result.report["linearRank"] == 1

    planar = [SEElement.translation([1.0, 0.0])]
    assert classify_subgroup(planar).verdict == SubgroupVerdict.INAPPLICABLE


def test_controllability_of_flat_space(flat21):
    report = controllability_verdict(flat21)
    assert report.verdict == ControllabilityVerdict.NOT_CONTROLLABLE
    assert report.holonomy.rank == 0
    assert not report.inconclusive


@pytest.mark.parametrize("fixture", ["s21", "h21"])
def test_controllability_is_witnessed_on_quadrics(request, fixture):
    M = request.getfixturevalue(fixture)
    report = controllability_verdict(M, budget=16, seed=0)
    assert report.verdict == ControllabilityVerdict.CONTROLLABLE_WITNESSED
    assert j_norm(report.witnesses[0].element.y) == pytest.approx(2 * math.pi, abs=1e-6)
    # a larger budget cannot lose the witness
    assert controllability_verdict(M, budget=64, seed=0).verdict == ControllabilityVerdict.CONTROLLABLE_WITNESSED


def test_controllability_beyond_index_one_is_inconclusive(h22):
    report = controllability_verdict(h22)
    assert report.verdict == ControllabilityVerdict.FULL_HOLONOMY_NO_TRANSLATION_WITNESS
    assert report.inconclusive
    assert any("index 2" in note for note in report.notes)
