# lorroll/minkowski.py
# Pseudo-Euclidean linear algebra, the Lorentz and Lorentzian-affine groups,
# their Lie algebras and the constructive translation-closure procedure.

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .models import (
    DEFAULT_TOLERANCES,
    CausalClass,
    CausalKind,
    GeometryError,
    Signature,
    TimeComponent,
    Tolerances,
)

logger = logging.getLogger(__name__)


def _as_vector(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1)


def _check_dim(v: np.ndarray, sig: Signature, name: str = "vector"):
    if v.shape[0] != sig.m:
        raise GeometryError(f"{name} has dimension {v.shape[0]}, expected {sig.m} for signature {sig}")


def lorentz_signature(m: int) -> Signature:
    """Signature (m-1, 1) of the Lorentzian space of total dimension m."""
    return Signature(m - 1, 1)


def inner(u, v, sig: Signature) -> float:
    u, v = _as_vector(u), _as_vector(v)
    _check_dim(u, sig, "u")
    _check_dim(v, sig, "v")
    return float(np.dot(u[:sig.n], v[:sig.n]) - np.dot(u[sig.n:], v[sig.n:]))


def causal_character(v, sig: Signature, tol: float = DEFAULT_TOLERANCES.construction) -> CausalClass:
    """Classify v as spacelike, timelike or lightlike; v = 0 counts as spacelike."""
    v = _as_vector(v)
    _check_dim(v, sig)
    scale = float(np.dot(v, v))
    if scale <= tol ** 2:
        return CausalClass(CausalKind.SPACELIKE)
    q = inner(v, v, sig)
    if q > tol * max(1.0, scale):
        return CausalClass(CausalKind.SPACELIKE)
    component = TimeComponent.FUTURE if v[-1] >= 0 else TimeComponent.PAST
    if q < -tol * max(1.0, scale):
        return CausalClass(CausalKind.TIMELIKE, component)
    return CausalClass(CausalKind.LIGHTLIKE, component)


# --- The Lorentz group SO_0(n, nu) ---

def lorentz_residual(C: np.ndarray, sig: Signature) -> float:
    J = sig.J
    return float(np.linalg.norm(C.T @ J @ C - J))


@dataclass(frozen=True, eq=False)
class LorentzMatrix:
    """
    Element of the identity component SO_0(n, nu).

    Membership is checked at construction with a scale-aware tolerance:
    ||C^T J C - J|| <= tol * max(1, ||C||^2), det C = +1 and time orientation preserved.
    """
    matrix: np.ndarray
    sig: Signature
    tol: float = DEFAULT_TOLERANCES.construction
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        C = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", C)
        if not self.check:
            return
        m = self.sig.m
        if C.shape != (m, m):
            raise GeometryError(f"Lorentz matrix must be {m}x{m}, got {C.shape}")
        if not np.all(np.isfinite(C)):
            raise GeometryError("Lorentz matrix has non-finite entries")
        scale = max(1.0, float(np.linalg.norm(C)) ** 2)
        residual = lorentz_residual(C, self.sig)
        if residual > self.tol * scale:
            raise GeometryError(f"Matrix is not J-orthogonal: ||C^T J C - J|| = {residual:.3e}")
        det = float(np.linalg.det(C))
        if abs(det - 1.0) > self.tol * scale:
            raise GeometryError(f"Matrix does not preserve orientation: det = {det:.12g}")
        if self.sig.nu == 1 and self.sig.n >= 0:
            if C[-1, -1] < 1.0 - self.tol * scale:
                raise GeometryError(f"Matrix reverses time orientation: C[m,m] = {C[-1, -1]:.12g}")
        elif self.sig.nu >= 2:
            block = C[self.sig.n:, self.sig.n:]
            if np.linalg.det(block) <= 0:
                raise GeometryError("Matrix reverses time orientation: time block has nonpositive determinant")

    @classmethod
    def identity(cls, sig: Signature) -> "LorentzMatrix":
        return cls(np.eye(sig.m), sig, check=False)

    @classmethod
    def trusted(cls, matrix: np.ndarray, sig: Signature) -> "LorentzMatrix":
        return cls(matrix, sig, check=False)

    @property
    def m(self) -> int:
        return self.sig.m

    def inverse(self) -> "LorentzMatrix":
        J = self.sig.J
        return LorentzMatrix.trusted(J @ self.matrix.T @ J, self.sig)

    def __matmul__(self, other):
        if isinstance(other, LorentzMatrix):
            return LorentzMatrix.trusted(self.matrix @ other.matrix, self.sig)
        return self.matrix @ np.asarray(other, dtype=float)

    def distance_to_identity(self) -> float:
        return float(np.linalg.norm(self.matrix - np.eye(self.m), 2))

    def __repr__(self) -> str:
        return f"LorentzMatrix(sig={self.sig}, matrix={self.matrix.tolist()})"


# --- SE_0(n, nu) = R^{n,nu} x| SO_0(n, nu) ---

@dataclass(frozen=True, eq=False)
class SEElement:
    """Affine isometry v -> C v + y."""
    y: np.ndarray
    C: LorentzMatrix

    def __post_init__(self):
        y = _as_vector(self.y)
        object.__setattr__(self, "y", y)
        _check_dim(y, self.C.sig, "translation part")

    @property
    def sig(self) -> Signature:
        return self.C.sig

    @classmethod
    def identity(cls, sig: Signature) -> "SEElement":
        return cls(np.zeros(sig.m), LorentzMatrix.identity(sig))

    @classmethod
    def translation(cls, v, sig: Optional[Signature] = None) -> "SEElement":
        v = _as_vector(v)
        sig = sig or lorentz_signature(v.shape[0])
        return cls(v, LorentzMatrix.identity(sig))

    @classmethod
    def rotation(cls, C: LorentzMatrix) -> "SEElement":
        return cls(np.zeros(C.m), C)

    def compose(self, other: "SEElement") -> "SEElement":
        return SEElement(self.y + self.C.matrix @ other.y, self.C @ other.C)

    def inverse(self) -> "SEElement":
        Cinv = self.C.inverse()
        return SEElement(-(Cinv.matrix @ self.y), Cinv)

    def apply(self, v) -> np.ndarray:
        return self.C.matrix @ _as_vector(v) + self.y

    def __matmul__(self, other: "SEElement") -> "SEElement":
        return self.compose(other)

    def linear_distance(self) -> float:
        return float(np.linalg.norm(self.C.matrix - np.eye(self.C.m)))

    def is_pure_translation(self, tol: float) -> bool:
        return self.linear_distance() <= tol and float(np.linalg.norm(self.y)) >= 10 * tol

    def to_dict(self) -> dict:
        return {"y": self.y.tolist(), "C": self.C.matrix.tolist()}


def se_compose(B1: SEElement, B2: SEElement) -> SEElement:
    return B1.compose(B2)


def se_inverse(B: SEElement) -> SEElement:
    return B.inverse()


def se_apply(B: SEElement, v) -> np.ndarray:
    return B.apply(v)


def compose_all(elements: Sequence[SEElement], sig: Signature) -> SEElement:
    """Left-to-right composition e0 o e1 o ... o ek."""
    result = SEElement.identity(sig)
    for element in elements:
        result = result.compose(element)
    return result


def fixed_point_embedding(x0, A: LorentzMatrix) -> SEElement:
    """The affine map v -> A v - A x0 + x0, which fixes x0."""
    x0 = _as_vector(x0)
    return SEElement(x0 - A.matrix @ x0, A)


# --- Lie algebra so(n, nu) ---

@dataclass(frozen=True, eq=False)
class LieAlgebraElement:
    """J-skew matrix: X^T J + J X = 0."""
    matrix: np.ndarray
    sig: Signature
    tol: float = DEFAULT_TOLERANCES.construction

    def __post_init__(self):
        X = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", X)
        m = self.sig.m
        if X.shape != (m, m):
            raise GeometryError(f"Algebra element must be {m}x{m}, got {X.shape}")
        J = self.sig.J
        residual = float(np.linalg.norm(X.T @ J + J @ X))
        if residual > self.tol * max(1.0, float(np.linalg.norm(X))):
            raise GeometryError(f"Matrix is not J-skew: ||X^T J + J X|| = {residual:.3e}")

    def scaled(self, c: float) -> "LieAlgebraElement":
        return LieAlgebraElement(c * self.matrix, self.sig, self.tol)

    def bracket(self, other: "LieAlgebraElement") -> "LieAlgebraElement":
        X, Y = self.matrix, other.matrix
        return LieAlgebraElement(X @ Y - Y @ X, self.sig, self.tol)


def j_skew_part(X: np.ndarray, sig: Signature) -> np.ndarray:
    J = sig.J
    return 0.5 * (X - J @ X.T @ J)


def so_basis(sig: Signature) -> List[LieAlgebraElement]:
    """Generators (E_ij - E_ji) J for i < j: rotations between like coordinates, boosts otherwise."""
    m = sig.m
    J = sig.J
    basis = []
    for i in range(m):
        for j in range(i + 1, m):
            A = np.zeros((m, m))
            A[i, j], A[j, i] = 1.0, -1.0
            basis.append(LieAlgebraElement(A @ J, sig))
    return basis


def so_exp(X: LieAlgebraElement, tol: float = DEFAULT_TOLERANCES.construction) -> LorentzMatrix:
    return LorentzMatrix(linalg.expm(X.matrix), X.sig, tol=tol)


def so_log(C: LorentzMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> LieAlgebraElement:
    """Principal logarithm of a Lorentz matrix within operator-norm distance `log_radius` of I."""
    distance = C.distance_to_identity()
    if distance >= tol.log_radius:
        raise GeometryError(
            f"Matrix is outside the logarithm radius: ||C - I|| = {distance:.4g} >= {tol.log_radius}"
        )
    X = linalg.logm(C.matrix)
    X = np.real_if_close(X, tol=1000)
    X = np.real(X)
    return LieAlgebraElement(j_skew_part(X, C.sig), C.sig, tol=max(tol.construction, tol.holonomy))


def algebra_element(C: LorentzMatrix, tol: Tolerances = DEFAULT_TOLERANCES,
                    max_halvings: int = 30) -> LieAlgebraElement:
    """Logarithm by inverse scaling and squaring: take square roots until within radius."""
    k = 0
    current = C.matrix
    while np.linalg.norm(current - np.eye(C.m), 2) >= tol.log_radius:
        if k >= max_halvings:
            raise GeometryError("Square-root iteration did not reach the logarithm radius")
        root = linalg.sqrtm(current)
        if np.iscomplexobj(root):
            if np.max(np.abs(np.imag(root))) > 1e-8 * max(1.0, np.max(np.abs(root))):
                raise GeometryError("Matrix has no real principal square root")
            root = np.real(root)
        current = root
        k += 1
    logger.debug(f"algebra_element used {k} square roots")
    X = so_log(LorentzMatrix.trusted(current, C.sig), tol)
    return X.scaled(2.0 ** k)


def span_rank(matrices: Sequence[np.ndarray], cutoff: float = DEFAULT_TOLERANCES.rank_cutoff,
              floor: float = DEFAULT_TOLERANCES.holonomy) -> Tuple[int, np.ndarray, np.ndarray]:
    """
    Rank of the linear span of matrices from the singular values of their stacked vectorizations.

    Returns (rank, singular values, right singular vectors spanning the estimate).
    """
    if len(matrices) == 0:
        return 0, np.zeros(0), np.zeros((0, 0))
    stacked = np.array([np.asarray(M, dtype=float).reshape(-1) for M in matrices])
    _, s, vt = np.linalg.svd(stacked, full_matrices=False)
    if s.size == 0 or s[0] <= floor:
        return 0, s, vt[:0]
    rank = int(np.sum(s > cutoff * s[0]))
    return rank, s, vt[:rank]


def lie_closure_rank(elements: Sequence[LieAlgebraElement], sig: Signature,
                     cutoff: float = DEFAULT_TOLERANCES.rank_cutoff, max_rounds: int = 10) -> int:
    """Dimension of the Lie algebra generated by `elements` (span plus iterated brackets)."""
    current = [e.matrix for e in elements]
    rank, _, basis = span_rank(current, cutoff)
    for _ in range(max_rounds):
        if rank == 0 or rank == sig.algebra_dim:
            break
        mats = [row.reshape(sig.m, sig.m) for row in basis]
        brackets = [X @ Y - Y @ X for i, X in enumerate(mats) for Y in mats[i + 1:]]
        new_rank, _, new_basis = span_rank(mats + brackets, cutoff)
        if new_rank == rank:
            break
        rank, basis = new_rank, new_basis
    logger.debug(f"Lie closure rank {rank} of {sig.algebra_dim}")
    return rank


def random_lorentz(sig: Signature, rng: np.random.Generator, scale: float = 1.0) -> LorentzMatrix:
    """exp of a random combination of the standard generators."""
    basis = so_basis(sig)
    coeffs = rng.normal(scale=scale, size=len(basis))
    X = sum((c * b.matrix for c, b in zip(coeffs, basis)), np.zeros((sig.m, sig.m)))
    return LorentzMatrix(linalg.expm(X), sig, tol=1e-8)


# --- Orbits of SO_0(n, 1) ---

def standard_candidates(m: int) -> List[np.ndarray]:
    eye = np.eye(m)
    candidates = [eye[i] for i in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            candidates.append(eye[i] + eye[j])
            candidates.append(eye[i] - eye[j])
    return candidates


def pseudo_gram_schmidt(candidates: Sequence[np.ndarray], G: np.ndarray, count: int,
                        basis: Sequence[np.ndarray] = (), tol: float = 1e-6) -> List[np.ndarray]:
    """
    Orthonormalize candidates against `basis` for the form u^T G v, skipping null residuals.

    Returns at most `count` new vectors, each with u^T G u = +-1.
    """
    basis = [_as_vector(b) for b in basis]
    added: List[np.ndarray] = []
    for w in candidates:
        if len(added) == count:
            break
        w = _as_vector(w).copy()
        for b in basis + added:
            w = w - (float(w @ G @ b) / float(b @ G @ b)) * b
        q = float(w @ G @ w)
        if abs(q) <= tol * max(1.0, float(np.dot(w, w))):
            continue
        added.append(w / math.sqrt(abs(q)))
    return added


def complete_orthonormal(vectors: Sequence[np.ndarray], sig: Signature,
                         tol: float = 1e-6) -> List[np.ndarray]:
    """Extend J-orthonormal `vectors` to a J-orthonormal basis; added vectors come spacelike first."""
    count = sig.m - len(vectors)
    added = pseudo_gram_schmidt(standard_candidates(sig.m), sig.J, count, vectors, tol)
    if len(added) != count:
        raise GeometryError("Pseudo Gram-Schmidt completion broke down")
    added.sort(key=lambda w: 0 if inner(w, w, sig) > 0 else 1)
    return added


def _require_lorentzian(sig: Signature, what: str):
    if sig.nu != 1:
        raise GeometryError(f"{what} requires signature (n,1), got {sig}")


def _adapted_basis(u: np.ndarray, sig: Signature, tol: float) -> np.ndarray:
    """Columns: J-orthonormal basis whose structure pins down u (see orbit_transporter)."""
    q = inner(u, u, sig)
    if abs(q) > tol * max(1.0, float(np.dot(u, u))):
        e = u / math.sqrt(abs(q))
        rest = complete_orthonormal([e], sig)
        if q > 0:
            return np.column_stack([e] + rest)
        # timelike u occupies the last slot
        return np.column_stack(rest + [e])
    # null u: Witt partner f with <f,f> = 0 and <u,f> = -1
    f0 = np.zeros(sig.m)
    f0[-1] = 1.0
    f = f0 - (inner(f0, f0, sig) / (2.0 * inner(u, f0, sig))) * u
    f = f * (-1.0 / inner(u, f, sig))
    T = (u + f) / math.sqrt(2.0)
    S = (u - f) / math.sqrt(2.0)
    rest = complete_orthonormal([S, T], sig)
    return np.column_stack([S] + rest + [T])


def orbit_transporter(u, v, sig: Optional[Signature] = None,
                      tol: float = DEFAULT_TOLERANCES.construction) -> LorentzMatrix:
    """
    Return C in SO_0(n,1) with C u = v.

    u and v must have equal squared norm and, when not spacelike, the same time component.
    """
    u, v = _as_vector(u), _as_vector(v)
    sig = sig or lorentz_signature(u.shape[0])
    _require_lorentzian(sig, "orbit_transporter")
    _check_dim(u, sig, "u")
    _check_dim(v, sig, "v")
    scale = max(1.0, float(np.dot(u, u)), float(np.dot(v, v)))
    if np.linalg.norm(u) <= tol or np.linalg.norm(v) <= tol:
        raise GeometryError("orbit_transporter needs nonzero vectors")
    qu, qv = inner(u, u, sig), inner(v, v, sig)
    if abs(qu - qv) > 1e3 * tol * scale:
        raise GeometryError(f"Vectors lie on different orbits: <u,u> = {qu:.12g}, <v,v> = {qv:.12g}")
    cu, cv = causal_character(u, sig, 1e3 * tol), causal_character(v, sig, 1e3 * tol)
    if cu.kind != cv.kind or cu.component != cv.component:
        raise GeometryError(f"Vectors lie on different orbits: {cu} versus {cv}")

    Bu = _adapted_basis(u, sig, 1e3 * tol)
    Bv = _adapted_basis(v, sig, 1e3 * tol)
    lightlike = cu.kind == CausalKind.LIGHTLIKE
    if cu.kind == CausalKind.TIMELIKE or lightlike:
        pinned = {0, sig.m - 1} if lightlike else {sig.m - 1}
    else:
        pinned = {0}
    J = sig.J
    eta = np.diag(Bu.T @ J @ Bu)
    Bu_inv = np.diag(eta) @ Bu.T @ J

    def product(B):
        return B @ Bu_inv

    C = product(Bv)
    if C[-1, -1] < 0:
        if sig.m - 1 in pinned:
            raise GeometryError("Cannot fix time orientation of orbit transporter")
        Bv[:, -1] = -Bv[:, -1]
        C = product(Bv)
    if np.linalg.det(C) < 0:
        free = [a for a in range(sig.n) if a not in pinned]
        if not free:
            raise GeometryError(f"No free spacelike direction to fix orientation in signature {sig}")
        Bv[:, free[0]] = -Bv[:, free[0]]
        C = product(Bv)
    result = LorentzMatrix(C, sig, tol=1e3 * tol)
    residual = float(np.linalg.norm(C @ u - v))
    if residual > 1e3 * tol * scale:
        raise GeometryError(f"orbit_transporter residual {residual:.3e} too large")
    return result


# --- Translation closure (signature (n,1), n >= 2) ---

@dataclass
class ClosureWord:
    letters: List[SEElement] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)

    def extend(self, other: "ClosureWord") -> "ClosureWord":
        return ClosureWord(self.letters + other.letters, self.labels + other.labels)

    def inverse(self) -> "ClosureWord":
        letters = [letter.inverse() for letter in reversed(self.letters)]
        labels = [_invert_label(label) for label in reversed(self.labels)]
        return ClosureWord(letters, labels)

    def repeated(self, k: int) -> "ClosureWord":
        return ClosureWord(self.letters * k, self.labels * k)

    def compose(self, sig: Signature) -> SEElement:
        return compose_all(self.letters, sig)

    def __len__(self) -> int:
        return len(self.letters)


def _invert_label(label: str) -> str:
    return label[:-3] if label.endswith("^-1") else f"{label}^-1"


Section = Callable[[LorentzMatrix], SEElement]


def _conjugated(word: ClosureWord, A: LorentzMatrix, section: Section, name: str) -> ClosureWord:
    """psi^-1 o word o psi with psi = section(A); maps phi_w to phi_{A^-1 w}."""
    psi = section(A)
    if float(np.linalg.norm(psi.C.matrix - A.matrix)) > 1e-9 * max(1.0, float(np.linalg.norm(A.matrix))):
        raise GeometryError("section(A) must have linear part A")
    return ClosureWord([psi.inverse()], [f"{name}^-1"]).extend(word).extend(ClosureWord([psi], [name]))


class _ClosureBuilder:
    """Case analysis producing words in phi_v, its inverse and section elements that compose to phi_u."""

    def __init__(self, v: np.ndarray, section: Section, sig: Signature, tol: float):
        self.sig = sig
        self.section = section
        self.tol = tol
        self.counter = 0
        seed = ClosureWord([SEElement.translation(v, sig)], ["phi_v"])
        kind = causal_character(v, sig, tol).kind
        if kind == CausalKind.SPACELIKE:
            self.s, self.seed = v, seed
        elif kind == CausalKind.TIMELIKE:
            self.s, self.seed = self._from_timelike(v, seed)
        else:
            self.s, self.seed = self._from_lightlike(v, seed)
        self.r2 = inner(self.s, self.s, sig)
        logger.debug(f"Closure seed {self.s.tolist()} with <s,s> = {self.r2:.6g}, word length {len(self.seed)}")

    def _name(self) -> str:
        self.counter += 1
        return f"psi{self.counter}"

    def _orbit_letter(self, target: np.ndarray, seed_vec: np.ndarray, seed_word: ClosureWord) -> ClosureWord:
        """Word for phi_target from a seed word for phi_seed_vec on the same orbit or its negative."""
        c_target = causal_character(target, self.sig, self.tol)
        c_seed = causal_character(seed_vec, self.sig, self.tol)
        if c_target.kind != CausalKind.SPACELIKE and c_target.component != c_seed.component:
            seed_vec, seed_word = -seed_vec, seed_word.inverse()
        # A target = seed  =>  psi^-1 o phi_seed o psi = phi_target
        A = orbit_transporter(target, seed_vec, self.sig)
        return _conjugated(seed_word, A, self.section, self._name())

    def _from_timelike(self, v: np.ndarray, seed: ClosureWord):
        r = math.sqrt(-inner(v, v, self.sig))
        w1 = np.zeros(self.sig.m)
        w2 = np.zeros(self.sig.m)
        w1[-2], w1[-1] = r / 2.0, math.sqrt(5.0) / 2.0 * r
        w2[-2], w2[-1] = r / 2.0, -math.sqrt(5.0) / 2.0 * r
        word = self._orbit_letter(w1, v, seed).extend(self._orbit_letter(w2, v, seed))
        return w1 + w2, word

    def _from_lightlike(self, v: np.ndarray, seed: ClosureWord):
        w1 = np.zeros(self.sig.m)
        w2 = np.zeros(self.sig.m)
        w1[0], w1[-1] = 0.5, 0.5
        w2[0], w2[-1] = 0.5, -0.5
        word = self._orbit_letter(w1, v, seed).extend(self._orbit_letter(w2, v, seed))
        return w1 + w2, word

    def word_for(self, t: np.ndarray) -> ClosureWord:
        t = _as_vector(t)
        if np.linalg.norm(t) <= self.tol:
            return ClosureWord()
        c = causal_character(t, self.sig, self.tol)
        if c.kind == CausalKind.SPACELIKE:
            return self._spacelike(t)
        if c.kind == CausalKind.TIMELIKE:
            return self._timelike(t, c.component)
        return self._lightlike(t, c.component)

    def _spacelike(self, t: np.ndarray) -> ClosureWord:
        q = inner(t, t, self.sig)
        r2 = self.r2
        if abs(q - r2) <= self.tol * r2:
            return self._orbit_letter(t, self.s, self.seed)
        if q > r2:
            k = int(math.floor(math.sqrt(q / r2))) + 1
            return self._spacelike(t / k).repeated(k)
        # t = u' + u'' with <u',u'> = <u'',u''> = r2
        e = t / math.sqrt(q)
        p_hat = complete_orthonormal([e], self.sig)[0]
        lam = math.sqrt(r2 - q / 4.0)
        u1 = t / 2.0 + lam * p_hat
        u2 = t / 2.0 - lam * p_hat
        return self._orbit_letter(u1, self.s, self.seed).extend(self._orbit_letter(u2, self.s, self.seed))

    def _timelike(self, t: np.ndarray, component: TimeComponent) -> ClosureWord:
        rho = math.sqrt(-inner(t, t, self.sig))
        sign = 1.0 if component == TimeComponent.FUTURE else -1.0
        u_plus = np.zeros(self.sig.m)
        u_minus = np.zeros(self.sig.m)
        u_plus[0], u_plus[-1] = math.sqrt(5.0) / 2.0 * rho, sign * rho / 2.0
        u_minus[0], u_minus[-1] = -math.sqrt(5.0) / 2.0 * rho, sign * rho / 2.0
        t0 = u_plus + u_minus
        inner_word = self._spacelike(u_plus).extend(self._spacelike(u_minus))
        A = orbit_transporter(t, t0, self.sig)
        return _conjugated(inner_word, A, self.section, self._name())

    def _lightlike(self, t: np.ndarray, component: TimeComponent) -> ClosureWord:
        sign = 1.0 if component == TimeComponent.FUTURE else -1.0
        u1 = np.zeros(self.sig.m)
        u2 = np.zeros(self.sig.m)
        u1[0] = 1.0
        u2[-1] = sign
        t0 = u1 + u2
        inner_word = self._spacelike(u1).extend(
            self._timelike(u2, component)
        )
        A = orbit_transporter(t, t0, self.sig)
        return _conjugated(inner_word, A, self.section, self._name())


def translation_closure_word(v, u, section: Optional[Section] = None,
                             tol: float = DEFAULT_TOLERANCES.construction) -> ClosureWord:
    """
    Word in phi_v, phi_v^-1 and section elements composing (left to right) to phi_u.

    `section(A)` must return some (w_A, A); the default section is A -> (0, A).
    """
    v, u = _as_vector(v), _as_vector(u)
    sig = lorentz_signature(v.shape[0])
    if sig.n < 2:
        raise GeometryError(f"Translation closure needs n >= 2, got signature {sig}")
    if np.linalg.norm(v) <= tol:
        raise GeometryError("Translation closure needs a nonzero seed translation")
    _check_dim(u, sig, "target")
    if section is None:
        section = SEElement.rotation
    builder = _ClosureBuilder(v, section, sig, tol)
    word = builder.word_for(u)
    logger.debug(f"Closure word for target {u.tolist()} has {len(word)} letters")
    return word
