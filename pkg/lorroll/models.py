# lorroll/models.py
from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .utils import load_packaged_schema

if TYPE_CHECKING:
    from .metric_parser import MetricField
    from .minkowski import LieAlgebraElement, LorentzMatrix, SEElement


class GeometryError(ValueError):
    """Raised when a geometric object violates its defining constraints."""


class TransportError(RuntimeError):
    """Raised when a fixed-step integration cannot be completed."""


class ConfigError(ValueError):
    """Configuration error pointing at the offending key."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class Tolerances:
    construction: float = 1e-9
    property: float = 1e-8
    group: float = 1e-12
    holonomy: float = 1e-7
    rank_cutoff: float = 1e-6
    translation: float = 1e-6
    fd_step: float = 1e-5
    curvature_fd_step: float = 1e-4
    log_radius: float = 0.5
    blowup_norm: float = 1e12
    min_step: float = 1e-12
    drift_reproject: float = 1e-6
    drift_abort: float = 1e-3
    step_bound: float = 0.5


DEFAULT_TOLERANCES = Tolerances()


# --- Pseudo-Euclidean signature and causal character ---

@dataclass(frozen=True)
class Signature:
    """Bilinear form diag(+1 x n, -1 x nu); timelike coordinates come last."""
    n: int
    nu: int

    def __post_init__(self):
        if self.n < 0 or self.nu < 0:
            raise GeometryError(f"Signature entries must be nonnegative, got ({self.n},{self.nu})")
        if self.n + self.nu < 1:
            raise GeometryError("Signature must have total dimension at least 1")

    @property
    def m(self) -> int:
        return self.n + self.nu

    @property
    def J(self) -> np.ndarray:
        return np.diag(np.concatenate([np.ones(self.n), -np.ones(self.nu)]))

    @property
    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n), -np.ones(self.nu)])

    @property
    def algebra_dim(self) -> int:
        return self.m * (self.m - 1) // 2

    def __str__(self) -> str:
        return f"({self.n},{self.nu})"


class CausalKind(Enum):
    SPACELIKE = "Spacelike"
    TIMELIKE = "Timelike"
    LIGHTLIKE = "Lightlike"


class TimeComponent(Enum):
    FUTURE = "Future"
    PAST = "Past"


@dataclass(frozen=True)
class CausalClass:
    kind: CausalKind
    component: Optional[TimeComponent] = None

    def __str__(self) -> str:
        if self.component is None:
            return self.kind.value
        return f"{self.kind.value}/{self.component.value}"


# --- Manifold catalog ---

class ManifoldKind(Enum):
    FLAT = "flat"
    PSEUDO_SPHERE = "s"
    PSEUDO_HYPERBOLIC = "h"
    CLIFTON_POHL = "clifton-pohl"
    CUSTOM_CHART = "custom"


class Representation(Enum):
    CHART = "chart"
    EMBEDDED = "embedded"


@dataclass
class ManifoldConfig:
    name: str
    kind: ManifoldKind
    representation: Representation = Representation.CHART
    params: Tuple[str, ...] = ()
    description: str = ""


MANIFOLD_CONFIGS: Dict[str, ManifoldConfig] = {
    "flat": ManifoldConfig(
        name="flat", kind=ManifoldKind.FLAT, params=("n", "nu"),
        description="flat pseudo-Euclidean space R^{n,nu}",
    ),
    "s": ManifoldConfig(
        name="s", kind=ManifoldKind.PSEUDO_SPHERE, representation=Representation.EMBEDDED,
        params=("n", "nu", "r"),
        description="pseudo-sphere S^{n,nu}(r) = {<p,p> = r^2} in R^{n+1,nu}",
    ),
    "h": ManifoldConfig(
        name="h", kind=ManifoldKind.PSEUDO_HYPERBOLIC, representation=Representation.EMBEDDED,
        params=("n", "nu", "r"),
        description="pseudo-hyperbolic space H^{n,nu}(r) = {<p,p> = -r^2} in R^{n,nu+1}",
    ),
    "clifton-pohl": ManifoldConfig(
        name="clifton-pohl", kind=ManifoldKind.CLIFTON_POHL,
        description="chart R^2 minus origin with g = 2 du dv / (u^2 + v^2)",
    ),
    "custom": ManifoldConfig(
        name="custom", kind=ManifoldKind.CUSTOM_CHART, params=("n", "nu"),
        description="user chart metric given as a JSON object of gij expressions",
    ),
}


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    kind: ManifoldKind
    n: int
    nu: int
    r: float = 1.0
    metric: Optional["MetricField"] = None

    def __post_init__(self):
        if self.kind in (ManifoldKind.PSEUDO_SPHERE, ManifoldKind.PSEUDO_HYPERBOLIC) and not self.r > 0:
            raise GeometryError(f"Radius must be positive, got {self.r}")
        if self.kind == ManifoldKind.CLIFTON_POHL and (self.n, self.nu) != (1, 1):
            raise GeometryError("Clifton-Pohl chart has dimension 2 and index 1")
        if self.kind == ManifoldKind.CUSTOM_CHART:
            if self.metric is None:
                raise GeometryError("Custom chart manifold needs a metric field")
            if self.metric.dim != self.n + self.nu:
                raise GeometryError(
                    f"Metric field has dimension {self.metric.dim}, expected {self.n + self.nu}"
                )
        Signature(self.n, self.nu)

    @property
    def dim(self) -> int:
        return self.n + self.nu

    @property
    def signature(self) -> Signature:
        return Signature(self.n, self.nu)

    @property
    def representation(self) -> Representation:
        return MANIFOLD_CONFIGS[self.kind.value].representation

    @property
    def is_embedded(self) -> bool:
        return self.representation == Representation.EMBEDDED

    @property
    def is_flat(self) -> bool:
        return self.kind == ManifoldKind.FLAT

    @property
    def ambient(self) -> Optional[Signature]:
        if self.kind == ManifoldKind.PSEUDO_SPHERE:
            return Signature(self.n + 1, self.nu)
        if self.kind == ManifoldKind.PSEUDO_HYPERBOLIC:
            return Signature(self.n, self.nu + 1)
        return None

    @property
    def coord_dim(self) -> int:
        ambient = self.ambient
        return ambient.m if ambient is not None else self.dim

    @property
    def constraint_sign(self) -> float:
        """Sign of <p,p> on the quadric (+1 for S, -1 for H)."""
        return -1.0 if self.kind == ManifoldKind.PSEUDO_HYPERBOLIC else 1.0

    @property
    def curvature_constant(self) -> Optional[float]:
        if self.kind == ManifoldKind.PSEUDO_SPHERE:
            return 1.0 / self.r ** 2
        if self.kind == ManifoldKind.PSEUDO_HYPERBOLIC:
            return -1.0 / self.r ** 2
        if self.kind == ManifoldKind.FLAT:
            return 0.0
        return None

    @property
    def label(self) -> str:
        if self.kind == ManifoldKind.FLAT:
            return f"flat:{self.n},{self.nu}"
        if self.kind in (ManifoldKind.PSEUDO_SPHERE, ManifoldKind.PSEUDO_HYPERBOLIC):
            return f"{self.kind.value}:{self.n},{self.nu},{self.r:g}"
        if self.kind == ManifoldKind.CUSTOM_CHART:
            return f"custom:{self.n},{self.nu}"
        return self.kind.value

    def __repr__(self) -> str:
        return f"ManifoldSpec({self.label})"


@dataclass(frozen=True, eq=False)
class Point:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float).reshape(-1))


@dataclass(frozen=True, eq=False)
class Tangent:
    base: Point
    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vec", np.asarray(self.vec, dtype=float).reshape(-1))


@dataclass(frozen=True, eq=False)
class Frame:
    """Pseudo-orthonormal frame; columns of `vectors` are the frame vectors in coordinates."""
    base: Point
    vectors: np.ndarray

    @property
    def tangents(self) -> List[Tangent]:
        return [Tangent(self.base, self.vectors[:, a]) for a in range(self.vectors.shape[1])]


# --- Curves, transport and development ---

@dataclass(frozen=True, eq=False)
class Curve:
    manifold: ManifoldSpec
    grid: np.ndarray
    points: np.ndarray
    velocities: Optional[np.ndarray] = None
    partial: bool = False
    escaped_at: Optional[float] = None
    diagnostic: str = ""

    @property
    def start(self) -> Point:
        return Point(self.points[0])

    @property
    def end(self) -> Point:
        return Point(self.points[-1])

    @property
    def samples(self) -> int:
        return len(self.grid)


@dataclass(frozen=True, eq=False)
class TransportResult:
    operator: np.ndarray
    start_frame: Frame
    end_frame: Frame
    frames: np.ndarray
    reverse_residual: Optional[float] = None


@dataclass(frozen=True, eq=False)
class DevelopmentCurve:
    """Development in coordinates of the initial frame `frame` at gamma(0)."""
    grid: np.ndarray
    vectors: np.ndarray
    velocities: Optional[np.ndarray] = None
    frame: Optional[Frame] = None

    @classmethod
    def line(cls, direction, grid, frame: Optional[Frame] = None) -> "DevelopmentCurve":
        grid = np.asarray(grid, dtype=float)
        direction = np.asarray(direction, dtype=float)
        vectors = (grid - grid[0])[:, None] * direction[None, :]
        velocities = np.repeat(direction[None, :], len(grid), axis=0)
        return cls(grid=grid, vectors=vectors, velocities=velocities, frame=frame)


@dataclass(frozen=True, eq=False)
class ProbeReport:
    reached: bool
    t_reached: float
    t_max: float
    t_star: Optional[float]
    witness: Optional[np.ndarray]
    steps: int
    reason: str
    heuristic: bool = True

    @property
    def summary(self) -> str:
        if self.reached:
            return f"no blow-up detected up to t={self.t_max:g} (heuristic, not a completeness proof)"
        if self.t_star is None:
            return f"stopped at t={self.t_reached:.6g} ({self.reason})"
        return f"blow-up at t*={self.t_star:.6g} ({self.reason})"


# --- Rolling ---

@dataclass(frozen=True, eq=False)
class ConfigState:
    """Rolling state q = (x, x_hat; A) with A stored as the frame pair (frame_m -> frame_hat)."""
    x: Point
    frame_m: np.ndarray
    x_hat: np.ndarray
    frame_hat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "frame_m", np.asarray(self.frame_m, dtype=float))
        object.__setattr__(self, "x_hat", np.asarray(self.x_hat, dtype=float).reshape(-1))
        object.__setattr__(self, "frame_hat", np.asarray(self.frame_hat, dtype=float))


@dataclass(frozen=True, eq=False)
class RollingCurve:
    grid: np.ndarray
    states: List[ConfigState]
    base: Curve
    target: Optional[ManifoldSpec] = None
    partial: bool = False
    diagnostic: str = ""

    @property
    def final(self) -> ConfigState:
        return self.states[-1]

    @property
    def x_hat(self) -> np.ndarray:
        return np.array([q.x_hat for q in self.states])


@dataclass(frozen=True, eq=False)
class LiftVector:
    x_dot: np.ndarray
    x_hat_dot: np.ndarray
    frame_m_dot: np.ndarray
    frame_hat_dot: np.ndarray


# --- Holonomy ---

class LoopKind(Enum):
    COORDINATE_RECTANGLE = "rect"
    GEODESIC_TRIANGLE = "triangle"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class LoopSpec:
    base: Point
    kind: LoopKind
    i: int = 0
    j: int = 1
    side: float = 0.1
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    scale: float = 0.1
    curve: Optional[Curve] = None
    label: str = ""

    @classmethod
    def rectangle(cls, base: Point, i: int, j: int, side: float) -> "LoopSpec":
        return cls(base=base, kind=LoopKind.COORDINATE_RECTANGLE, i=i, j=j, side=side,
                   label=f"rect:{i},{j},{side:g}")

    @classmethod
    def triangle(cls, base: Point, v1, v2, scale: float) -> "LoopSpec":
        return cls(base=base, kind=LoopKind.GEODESIC_TRIANGLE, v1=np.asarray(v1, dtype=float),
                   v2=np.asarray(v2, dtype=float), scale=scale, label=f"triangle:{scale:g}")

    @classmethod
    def explicit(cls, curve: Curve, label: str = "explicit") -> "LoopSpec":
        return cls(base=curve.start, kind=LoopKind.EXPLICIT, curve=curve, label=label)


@dataclass(frozen=True, eq=False)
class HolonomyEstimate:
    base: Point
    samples: List["LorentzMatrix"]
    basis: List["LieAlgebraElement"]
    rank: int
    dim_full: int
    method: str
    singular_values: np.ndarray
    lower_bound: bool = False
    budget: int = 1
    seed: int = 0

    @property
    def verdict(self) -> str:
        if self.rank == 0:
            return "trivial"
        if self.rank == self.dim_full:
            return "full"
        return "partial"

    @property
    def is_full(self) -> bool:
        return self.rank == self.dim_full


@dataclass(frozen=True, eq=False)
class TranslationWitness:
    element: "SEElement"
    word: List[str]


@dataclass(frozen=True, eq=False)
class RollingHolonomyEstimate:
    base: Optional[ConfigState]
    samples: List["SEElement"]
    labels: List[str]
    word_length: int = 4
    witnesses: List[TranslationWitness] = field(default_factory=list)

    @property
    def linear_parts(self) -> List[np.ndarray]:
        return [B.C.matrix for B in self.samples]


class SubgroupVerdict(Enum):
    FULL_SE = "FullSE"
    NO_TRANSLATION_DETECTED = "NoTranslationDetected"
    INAPPLICABLE = "Inapplicable"


@dataclass(frozen=True, eq=False)
class ClosureDemonstration:
    target: np.ndarray
    causal: CausalClass
    word: List[str]
    residual: float


@dataclass(frozen=True, eq=False)
class SubgroupClassification:
    verdict: SubgroupVerdict
    witness: Optional[TranslationWitness]
    demonstrations: List[ClosureDemonstration]
    report: Dict[str, Any]


class ControllabilityVerdict(Enum):
    CONTROLLABLE_WITNESSED = "ControllableWitnessed"
    NOT_CONTROLLABLE = "NotControllable"
    FULL_HOLONOMY_NO_TRANSLATION_WITNESS = "FullHolonomyNoTranslationWitness"


@dataclass(frozen=True, eq=False)
class ControllabilityReport:
    verdict: ControllabilityVerdict
    holonomy: HolonomyEstimate
    witnesses: List[TranslationWitness]
    budget: int
    seed: int
    notes: List[str] = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return self.verdict == ControllabilityVerdict.FULL_HOLONOMY_NO_TRANSLATION_WITNESS


# --- Run configuration ---

@dataclass
class RunConfig:
    command: str
    manifold: Any = None
    x: Optional[List[float]] = None
    v: Optional[List[float]] = None
    T: float = 1.0
    step: float = 1e-3
    tol: float = 1e-6
    seed: int = 0
    budget: int = 16
    method: str = "curvature"
    loop: Optional[str] = None
    curve: Optional[str] = None
    group: Optional[str] = None
    target: Any = None
    probe: bool = False
    out: Optional[str] = None
    output: Optional[str] = None

    def __post_init__(self):
        self.validate()
        self._normalize()

    def validate(self):
        _check_against_schema({f.name: getattr(self, f.name) for f in fields(self)})

    def _normalize(self):
        for key in ("T", "step", "tol"):
            setattr(self, key, float(getattr(self, key)))
        self.seed = int(self.seed)
        self.budget = int(self.budget)
        for key in ("x", "v"):
            value = getattr(self, key)
            if value is not None:
                setattr(self, key, [float(item) for item in value])

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], command: Optional[str] = None) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("", "configuration must be a JSON object")
        data = dict(data)
        if command is not None:
            data["command"] = command
        _check_against_schema(data)
        return cls(**data)

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**values)


@lru_cache(maxsize=None)
def _run_config_validator() -> Draft202012Validator:
    return Draft202012Validator(load_packaged_schema("run_config"))


def _check_against_schema(instance: Dict[str, Any]):
    error = best_match(_run_config_validator().iter_errors(instance))
    if error is None:
        return
    path = list(error.absolute_path)
    message = error.message
    if error.validator == "additionalProperties":
        allowed = sorted(error.schema.get("properties", {}))
        path.append(sorted(k for k in error.instance if k not in allowed)[0])
        message = f"unknown key (allowed: {allowed})"
    elif error.validator == "required":
        path.append(next(k for k in error.validator_value if k not in error.instance))
    raise ConfigError("/" + "/".join(map(str, path)), message)
