# lorroll/holonomy.py
# Holonomy of the Levi-Civita connection and of the rolling distribution:
# loop construction, algebra rank estimates, translation search and the controllability verdict.

import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .manifold import (
    coordinate_form,
    curvature_endomorphism,
    default_point,
    orthonormal_frame,
    validate_point,
)
from .minkowski import (
    LieAlgebraElement,
    LorentzMatrix,
    SEElement,
    algebra_element,
    causal_character,
    compose_all,
    lie_closure_rank,
    so_log,
    span_rank,
    translation_closure_word,
)
from .models import (
    DEFAULT_TOLERANCES,
    ClosureDemonstration,
    ConfigState,
    ControllabilityReport,
    ControllabilityVerdict,
    Curve,
    Frame,
    GeometryError,
    HolonomyEstimate,
    LoopKind,
    LoopSpec,
    ManifoldKind,
    ManifoldSpec,
    Point,
    RollingHolonomyEstimate,
    SubgroupClassification,
    SubgroupVerdict,
    Tolerances,
    TransportError,
    TranslationWitness,
)
from .rolling import canonical_state, fiber_transporter, roll_flat, se_act
from .transport import geodesic, make_curve, transport_frames
from .utils import make_rng

logger = logging.getLogger(__name__)

DEFAULT_WORD_LENGTH = 4
LOOP_SIDE = 0.1
MAX_WORDS_PER_BUDGET = 256


# --- Loops ---

def _plane_map(M: ManifoldSpec, x: np.ndarray, u: np.ndarray, w: np.ndarray):
    """(a, b) -> point and partial derivatives; central projection for embedded kinds."""
    if not M.is_embedded:
        def chart(a, b):
            return x + a * u + b * w, u, w
        return chart

    J = M.ambient.J

    def embedded(a, b):
        q = x + a * u + b * w
        qq = float(q @ J @ q)
        if M.constraint_sign * qq <= 0:
            raise GeometryError(f"Loop leaves the projection domain of {M.label}")
        rho = math.sqrt(M.constraint_sign * qq)
        scale = M.r / rho

        def d(direction):
            return scale * (direction - q * float(q @ J @ direction) / qq)

        return scale * q, d(u), d(w)

    return embedded


def _samples_for(length: float, step: float) -> int:
    return max(8, int(math.ceil(length / step))) + 1


def _polygon(M: ManifoldSpec, plane, corners: Sequence[Tuple[float, float]], step: float,
             tol: Tolerances) -> Curve:
    """Piecewise path through parameter-plane corners; corner samples are repeated."""
    grid, points, velocities = [], [], []
    t0 = 0.0
    for (a0, b0), (a1, b1) in zip(corners[:-1], corners[1:]):
        length = math.hypot(a1 - a0, b1 - b0)
        N = _samples_for(length, step)
        for s in np.linspace(0.0, 1.0, N):
            p, du, dw = plane(a0 + s * (a1 - a0), b0 + s * (b1 - b0))
            grid.append(t0 + s * length)
            points.append(p)
            velocities.append((a1 - a0) / length * du + (b1 - b0) / length * dw)
        t0 += length
    return make_curve(M, grid, points, velocities, tol)


def rectangle_loop(M: ManifoldSpec, x, i: int, j: int, side: float, step: float = 1e-3,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """
    Rectangle of side `side` spanned by directions i and j at x, traversed along j first.

    Directions are coordinate axes on charts and canonical frame vectors on embedded kinds.
    """
    p = validate_point(M, x, tol).coords
    if i == j or not (0 <= i < M.dim and 0 <= j < M.dim):
        raise ValueError(f"Rectangle needs two distinct directions in [0, {M.dim}), got ({i}, {j})")
    if M.is_embedded:
        E = orthonormal_frame(M, p, tol).vectors
        u, w = E[:, i], E[:, j]
    else:
        u, w = np.eye(M.dim)[i], np.eye(M.dim)[j]
    corners = [(0.0, 0.0), (0.0, side), (side, side), (side, 0.0), (0.0, 0.0)]
    return _polygon(M, _plane_map(M, p, u, w), corners, step, tol)


def triangle_loop(M: ManifoldSpec, x, v1, v2, scale: float, step: float = 1e-3,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """
    Triangle x -> x + scale v1 -> x + scale v2 -> x.

    On hyperquadrics the sides are projected chords, hence geodesic arcs; on charts they are
    coordinate segments.
    """
    p = validate_point(M, x, tol).coords
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    corners = [(0.0, 0.0), (scale, 0.0), (0.0, scale), (0.0, 0.0)]
    return _polygon(M, _plane_map(M, p, v1, v2), corners, step, tol)


def closed_geodesic_loop(M: ManifoldSpec, x=None, step: float = 2e-3,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    """
    Closed geodesic of period 2 pi r through x: spacelike on S^{n,nu}(r), timelike on H^{n,nu}(r).
    """
    if M.kind not in (ManifoldKind.PSEUDO_SPHERE, ManifoldKind.PSEUDO_HYPERBOLIC):
        raise GeometryError(f"{M.label} has no closed geodesics of this family")
    p = default_point(M).coords if x is None else validate_point(M, x, tol).coords
    E = orthonormal_frame(M, p, tol).vectors
    if M.kind == ManifoldKind.PSEUDO_SPHERE:
        if M.n < 1:
            raise GeometryError(f"{M.label} has no spacelike directions")
        v = E[:, 0]
    else:
        if M.nu < 1:
            raise GeometryError(f"{M.label} has no timelike directions")
        v = E[:, -1]
    period = 2.0 * math.pi * M.r
    grid = np.linspace(0.0, period, _samples_for(period, step))
    c, s = np.cos(grid / M.r), np.sin(grid / M.r)
    points = c[:, None] * p + M.r * s[:, None] * v
    velocities = -(s / M.r)[:, None] * p + c[:, None] * v
    points[-1] = p
    return make_curve(M, grid, points, velocities, tol)


def build_loop(M: ManifoldSpec, loop: LoopSpec, step: float = 1e-3,
               tol: Tolerances = DEFAULT_TOLERANCES) -> Curve:
    if loop.kind == LoopKind.COORDINATE_RECTANGLE:
        curve = rectangle_loop(M, loop.base, loop.i, loop.j, loop.side, step, tol)
    elif loop.kind == LoopKind.GEODESIC_TRIANGLE:
        curve = triangle_loop(M, loop.base, loop.v1, loop.v2, loop.scale, step, tol)
    elif loop.kind == LoopKind.EXPLICIT:
        curve = loop.curve
    else:
        raise ValueError(f"Unknown loop kind: {loop.kind}. Available kinds: {[k.value for k in LoopKind]}")
    gap = float(np.linalg.norm(curve.points[-1] - curve.points[0]))
    if gap > tol.construction:
        raise GeometryError(f"Loop {loop.label or loop.kind.value} does not close: gap {gap:.3e}")
    base = loop.base.coords
    if float(np.linalg.norm(curve.points[0] - base)) > tol.construction * max(1.0, float(np.linalg.norm(base))):
        raise GeometryError("Loop does not start at its base point")
    return curve


def loop_holonomy(M: ManifoldSpec, loop: LoopSpec, frame: Optional[Frame] = None, step: float = 1e-3,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> LorentzMatrix:
    """Matrix of parallel transport around the loop in a pseudo-orthonormal frame at its base."""
    curve = build_loop(M, loop, step, tol)
    p = curve.points[0]
    E = (frame or orthonormal_frame(M, p, tol)).vectors
    F = transport_frames(M, curve, E, tol)[-1]
    P = np.diag(M.signature.diagonal) @ E.T @ coordinate_form(M, p, tol) @ F
    return LorentzMatrix(P, M.signature, tol=tol.holonomy)


# --- Holonomy algebra ---

def _curvature_samples(M: ManifoldSpec, p: np.ndarray, E: np.ndarray, budget: int,
                       rng: np.random.Generator, tol: Tolerances) -> List[np.ndarray]:
    m = M.dim
    frame = Frame(Point(p), E)
    samples = [curvature_endomorphism(M, p, E[:, a], E[:, b], frame, tol)
               for a in range(m) for b in range(a + 1, m)]
    for k in range(budget - 1):
        # curvature at the end of a short geodesic, read in the transported frame
        v = E @ rng.normal(scale=0.5, size=m)
        try:
            curve = geodesic(M, p, v, 1.0, 1e-2, tol)
            F = transport_frames(M, curve, E, tol)[-1]
        except (TransportError, GeometryError) as e:
            logger.debug(f"Skipping curvature sample {k}: {e}")
            continue
        y = curve.points[-1]
        moved = Frame(Point(y), F)
        samples.extend(curvature_endomorphism(M, y, F[:, a], F[:, b], moved, tol)
                       for a in range(m) for b in range(a + 1, m))
    return samples


def _loop_samples(M: ManifoldSpec, p: np.ndarray, E: np.ndarray, budget: int,
                  rng: np.random.Generator, tol: Tolerances) -> Tuple[List[LorentzMatrix], List[np.ndarray]]:
    m = M.dim
    loops = [LoopSpec.rectangle(Point(p), a, b, LOOP_SIDE) for a in range(m) for b in range(a + 1, m)]
    for _ in range(budget - 1):
        v1, v2 = E @ rng.normal(size=m), E @ rng.normal(size=m)
        loops.append(LoopSpec.triangle(Point(p), v1 / np.linalg.norm(v1), v2 / np.linalg.norm(v2), LOOP_SIDE))
    elements, logs = [], []
    for loop in loops:
        try:
            P = loop_holonomy(M, loop, Frame(Point(p), E), tol=tol)
            elements.append(P)
            logs.append(so_log(P, tol).matrix)
        except (TransportError, GeometryError) as e:
            logger.debug(f"Skipping loop {loop.label}: {e}")
    return elements, logs


def holonomy_algebra_estimate(M: ManifoldSpec, x=None, budget: int = 1, seed: int = 0,
                              method: str = "curvature",
                              tol: Tolerances = DEFAULT_TOLERANCES) -> HolonomyEstimate:
    """
    Estimate the holonomy algebra at x as the span of curvature endomorphisms or of loop logarithms.

    The rank uses a singular-value cutoff relative to the largest singular value. Both methods
    give lower bounds; on constant-curvature manifolds the curvature span is exact.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if method not in ("curvature", "loops"):
        raise ValueError(f"Unknown method: {method}. Available methods: ['curvature', 'loops']")
    p = default_point(M).coords if x is None else validate_point(M, x, tol).coords
    E = orthonormal_frame(M, p, tol).vectors
    rng = make_rng(seed)
    sig = M.signature
    elements: List[LorentzMatrix] = []
    if method == "curvature":
        matrices = _curvature_samples(M, p, E, budget, rng, tol)
    else:
        elements, matrices = _loop_samples(M, p, E, budget, rng, tol)
    rank, s, rows = span_rank(matrices, tol.rank_cutoff)
    basis = [LieAlgebraElement(row.reshape(sig.m, sig.m), sig, tol=1e-6) for row in rows]
    estimate = HolonomyEstimate(
        base=Point(p),
        samples=elements,
        basis=basis,
        rank=rank,
        dim_full=sig.algebra_dim,
        method=method,
        singular_values=s,
        lower_bound=M.curvature_constant is None,
        budget=budget,
        seed=seed,
    )
    logger.info(f"Holonomy of {M.label} ({method}): rank {rank} of {sig.algebra_dim}, {estimate.verdict}")
    return estimate


# --- Rolling holonomy ---

def rolling_holonomy_sample(M: ManifoldSpec, q: ConfigState, loops: Sequence[LoopSpec],
                            word_length: int = DEFAULT_WORD_LENGTH, step: float = 1e-3,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> RollingHolonomyEstimate:
    """Roll q around each loop and record the element of SE_0 carrying q to the final state."""
    samples, labels = [], []
    for loop in loops:
        curve = build_loop(M, loop, step, tol)
        rc = roll_flat(M, q, curve, tol)
        samples.append(fiber_transporter(M, q, rc.final, tol))
        labels.append(loop.label or loop.kind.value)
    logger.debug(f"Sampled {len(samples)} rolling holonomy elements of {M.label}")
    return RollingHolonomyEstimate(base=q, samples=samples, labels=labels, word_length=word_length)


def conjugate_elements(B: SEElement, estimate: RollingHolonomyEstimate) -> RollingHolonomyEstimate:
    """Holonomy samples at se_act(B, q): B o H o B^-1."""
    B_inv = B.inverse()
    return RollingHolonomyEstimate(
        base=se_act(B, estimate.base) if estimate.base is not None else None,
        samples=[B.compose(S).compose(B_inv) for S in estimate.samples],
        labels=list(estimate.labels),
        word_length=estimate.word_length,
    )


def _inverse_label(label: str) -> str:
    return label[:-3] if label.endswith("^-1") else f"{label}^-1"


def _reduced_words(count: int, length: int):
    """Freely reduced words over generators 0..count-1 and their inverses (letters count..2count-1)."""
    for size in range(1, length + 1):
        for word in itertools.product(range(2 * count), repeat=size):
            if all(abs(a - b) != count for a, b in zip(word[:-1], word[1:])):
                yield word


def _search_translation(estimate: RollingHolonomyEstimate, tol: float, budget: int,
                        seed: int) -> Tuple[Optional[TranslationWitness], int]:
    samples = estimate.samples
    if not samples:
        return None, 0
    sig = samples[0].sig
    labels = estimate.labels or [f"g{k}" for k in range(len(samples))]
    letters = samples + [S.inverse() for S in samples]
    names = labels + [_inverse_label(label) for label in labels]
    checked = 0

    # equal linear parts with different translations give a pure translation
    for a in range(len(samples)):
        for b in range(a + 1, len(samples)):
            candidate = samples[a].compose(letters[len(samples) + b])
            checked += 1
            if candidate.is_pure_translation(tol):
                return TranslationWitness(candidate, [labels[a], names[len(samples) + b]]), checked

    limit = budget * MAX_WORDS_PER_BUDGET
    count = len(samples)
    total = sum((2 * count) * (2 * count - 1) ** (size - 1) for size in range(1, estimate.word_length + 1))
    if total <= limit:
        words = _reduced_words(count, estimate.word_length)
    else:
        rng = make_rng(seed)
        logger.debug(f"Sampling {limit} of {total} words up to length {estimate.word_length}")
        words = (tuple(int(k) for k in rng.integers(0, 2 * count, size=rng.integers(1, estimate.word_length + 1)))
                 for _ in range(limit))
    for word in words:
        element = compose_all([letters[k] for k in word], sig)
        checked += 1
        if element.is_pure_translation(tol):
            return TranslationWitness(element, [names[k] for k in word]), checked
    return None, checked


def detect_pure_translation(estimate: RollingHolonomyEstimate, tol: float = DEFAULT_TOLERANCES.translation,
                            budget: int = 16, seed: int = 0) -> Optional[TranslationWitness]:
    """
    Search sampled elements and their products for ||C - I|| <= tol with ||y|| >= 10 tol.

    None means nothing was found within the budget, not that the group has no translations.
    """
    witness, checked = _search_translation(estimate, tol, budget, seed)
    if witness is None:
        logger.info(f"No pure translation among {checked} checked words")
    else:
        logger.info(f"Pure translation found: word {witness.word}, |y| = {np.linalg.norm(witness.element.y):.6g}")
    return witness


# --- Subgroups of SE_0(n, 1) ---

def _canonical_targets(m: int) -> List[np.ndarray]:
    e1 = np.eye(m)[0]
    em = np.eye(m)[-1]
    return [e1, em, e1 + em]


def classify_subgroup(generators: Sequence[SEElement], budget: int = 16, seed: int = 0,
                      word_length: int = DEFAULT_WORD_LENGTH,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> SubgroupClassification:
    """
    Decide between SE_0(n,1) and a translation-free subgroup whose linear parts generate so(n,1).

    A translation found among bounded products yields FullSE with closure demonstrations for a
    spacelike, a timelike and a lightlike target; otherwise the result is NoTranslationDetected.
    """
    if not generators:
        raise ValueError("classify_subgroup needs at least one generator")
    sig = generators[0].sig
    report: Dict[str, object] = {"budget": budget, "seed": seed, "wordLength": word_length,
                                 "generators": len(generators)}
    if sig.nu != 1 or sig.n < 2:
        report["reason"] = f"signature {sig} is not Lorentzian with n >= 2"
        logger.warning(f"Subgroup classification inapplicable: {report['reason']}")
        return SubgroupClassification(SubgroupVerdict.INAPPLICABLE, None, [], report)

    logs = []
    for k, B in enumerate(generators):
        if B.linear_distance() <= tol.translation:
            continue
        try:
            logs.append(algebra_element(B.C, tol))
        except GeometryError as e:
            logger.warning(f"No real logarithm for the linear part of generator {k}: {e}")
    rank = lie_closure_rank(logs, sig, tol.rank_cutoff) if logs else 0
    report["linearRank"] = rank
    report["dimFull"] = sig.algebra_dim
    if rank < sig.algebra_dim:
        report["reason"] = "linear parts do not generate so(n,1)"
        logger.warning(f"Subgroup classification inapplicable: linear rank {rank} of {sig.algebra_dim}")
        return SubgroupClassification(SubgroupVerdict.INAPPLICABLE, None, [], report)

    labels = [f"g{k}" for k in range(len(generators))]
    estimate = RollingHolonomyEstimate(base=None, samples=list(generators), labels=labels, word_length=word_length)
    witness, checked = _search_translation(estimate, tol.translation, budget, seed)
    report["wordsChecked"] = checked
    if witness is None:
        logger.info(f"No translation among {checked} words; subgroup may fix a point")
        return SubgroupClassification(SubgroupVerdict.NO_TRANSLATION_DETECTED, None, [], report)

    demonstrations = []
    for target in _canonical_targets(sig.m):
        word = translation_closure_word(witness.element.y, target, section=SEElement.rotation)
        composed = word.compose(sig)
        residual = float(np.linalg.norm(composed.y - target)) + composed.linear_distance()
        demonstrations.append(ClosureDemonstration(
            target=target,
            causal=causal_character(target, sig),
            word=word.labels,
            residual=residual,
        ))
    logger.info(f"Subgroup is all of SE_0({sig.n},1): witness word {witness.word}")
    return SubgroupClassification(SubgroupVerdict.FULL_SE, witness, demonstrations, report)


# --- Controllability ---

def _rolling_loops(M: ManifoldSpec, p: np.ndarray, tol: Tolerances) -> List[LoopSpec]:
    loops = []
    if M.kind in (ManifoldKind.PSEUDO_SPHERE, ManifoldKind.PSEUDO_HYPERBOLIC):
        try:
            loops.append(LoopSpec.explicit(closed_geodesic_loop(M, p, tol=tol), label="closed-geodesic"))
        except GeometryError as e:
            logger.debug(f"No closed geodesic loop: {e}")
    m = M.dim
    loops.extend(LoopSpec.rectangle(Point(p), a, b, LOOP_SIDE) for a in range(m) for b in range(a + 1, m))
    return loops


def controllability_verdict(M: ManifoldSpec, x0=None, budget: int = 16, seed: int = 0,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> ControllabilityReport:
    """
    Three-valued verdict for rolling M on R^{n,nu}: holonomy rank first, then a translation
    witness in the rolling holonomy.
    """
    p = default_point(M).coords if x0 is None else validate_point(M, x0, tol).coords
    curvature_budget = 1 if M.curvature_constant is not None else min(budget, 8)
    holonomy = holonomy_algebra_estimate(M, p, budget=curvature_budget, seed=seed, tol=tol)
    notes = []
    if holonomy.lower_bound:
        notes.append("holonomy rank is a sampled lower bound")
    if not holonomy.is_full:
        notes.append(f"holonomy rank {holonomy.rank} < {holonomy.dim_full}: "
                     f"not completely controllable if the estimate is exact")
        return ControllabilityReport(ControllabilityVerdict.NOT_CONTROLLABLE, holonomy, [], budget, seed, notes)
    if M.nu != 1:
        notes.append(f"index {M.nu} != 1: only the necessity direction applies")
        logger.warning(f"Controllability of {M.label} is inconclusive: index {M.nu}")
        return ControllabilityReport(ControllabilityVerdict.FULL_HOLONOMY_NO_TRANSLATION_WITNESS,
                                     holonomy, [], budget, seed, notes)

    q = canonical_state(M, p, tol=tol)
    rolling = rolling_holonomy_sample(M, q, _rolling_loops(M, p, tol), tol=tol)
    witness = detect_pure_translation(rolling, tol.translation, budget, seed)
    if witness is None:
        notes.append("full holonomy but no pure translation within budget")
        return ControllabilityReport(ControllabilityVerdict.FULL_HOLONOMY_NO_TRANSLATION_WITNESS,
                                     holonomy, [], budget, seed, notes)
    return ControllabilityReport(ControllabilityVerdict.CONTROLLABLE_WITNESSED, holonomy, [witness],
                                 budget, seed, notes)
