# =========================
# models.py
# Certificate and report models, serialised as JSON
# =========================
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from numerics.interval import ComplexInterval, Interval
from numerics.rpa import ExistenceResult

SCHEMA_VERSION = 1


def interval_to_list(x: Interval) -> list[float]:
    return [x.lo, x.hi]


def interval_from_list(v: list[float]) -> Interval:
    return Interval(v[0], v[1])


def enclosure_to_list(x: Interval | ComplexInterval) -> list[float]:
    """[re_lo, re_hi, im_lo, im_hi] for either kind of enclosure."""
    if isinstance(x, Interval):
        return [x.lo, x.hi, 0.0, 0.0]
    return x.to_list()


def complex_from_list(v: list[float]) -> ComplexInterval:
    return ComplexInterval(Interval(v[0], v[1]), Interval(v[2], v[3]))


class Bounds(BaseModel):
    """Y, Z0, Z1 and Z enclosures as [lo, hi] plus the gate outcome."""

    Y: list[float]
    Z0: list[float]
    Z1: list[float]
    Z: list[float]
    R: Optional[float] = None  # None when unbounded
    r: Optional[float] = None
    r_unique: Optional[float] = None
    success: bool

    @classmethod
    def from_result(cls, result: ExistenceResult, Z0: Interval, Z1: Interval) -> "Bounds":
        finite_R = result.R if result.R != float("inf") else None
        return cls(
            Y=interval_to_list(result.Y),
            Z0=interval_to_list(Z0),
            Z1=interval_to_list(Z1),
            Z=interval_to_list(result.Z),
            R=finite_R,
            r=result.r_inf,
            r_unique=result.r_unique,
            success=result.success,
        )


class EquilibriumCertificate(BaseModel):
    name: str
    c_bar: list[float]
    r: float
    enclosure: list[list[float]]
    norm: str = "l1"
    bounds: Bounds

    def box(self) -> list[Interval]:
        return [interval_from_list(v) for v in self.enclosure]


class EigenCertificate(BaseModel):
    name: str
    equilibrium: str
    eigenvalue: list[float]
    eigenvalue_mid: list[float]
    eigenvector: list[list[float]]
    eigenvector_mid: list[list[float]]
    normalization_index: int = Field(ge=1, le=3)
    r: float
    stability: Literal["stable", "unstable", "indefinite"]
    norm: str = "sum of component moduli on C^3 x C"
    conjugate_of: Optional[str] = None
    bounds: Optional[Bounds] = None

    @property
    def is_complex(self) -> bool:
        return self.eigenvalue[2] != 0.0 or self.eigenvalue[3] != 0.0

    @property
    def sign_definite(self) -> bool:
        return self.stability != "indefinite"

    def eigenvalue_enclosure(self) -> ComplexInterval:
        return complex_from_list(self.eigenvalue)

    def eigenvector_enclosure(self) -> list[ComplexInterval]:
        return [complex_from_list(v) for v in self.eigenvector]

    def lambda_mid(self) -> complex:
        return complex(*self.eigenvalue_mid)

    def v_mid(self) -> list[complex]:
        return [complex(re, im) for re, im in self.eigenvector_mid]


class ManifoldCertificate(BaseModel):
    name: str
    side: Literal["stable", "unstable"]
    equilibrium: str
    eigenpairs: list[str]
    K: int
    nu: str
    scale: float
    eigenvalues: list[list[float]]
    eigenvalue_mids: list[list[float]]
    coefficients: list[dict]
    r: float
    invariance_residual: float
    bounds: Bounds


class ConnectionCertificate(BaseModel):
    K: int
    mu: str
    tau: float
    alpha: float
    theta: list[float]
    coefficients: list[dict]
    r: float
    unstable_manifold: str
    stable_manifold: str
    equilibria: list[str]
    contraction_success: bool
    endpoint_consistent: bool
    domain_margin: float
    ode_residual: float
    injectivity_note: str = (
        "contraction of the Newton-like operator on the certified ball implies the "
        "intersection of the unstable and stable manifolds is transverse"
    )
    bounds: Bounds


class StageRecord(BaseModel):
    name: str
    status: Literal["success", "failure", "skipped"]
    depends_on: list[str] = Field(default_factory=list)
    message: str = ""


class ProofReport(BaseModel):
    """Deterministic proof report; wall-clock timings are stored separately."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    version: str
    config: dict
    stages: list[StageRecord] = Field(default_factory=list)
    equilibria: list[EquilibriumCertificate] = Field(default_factory=list)
    eigenpairs: list[EigenCertificate] = Field(default_factory=list)
    manifolds: list[ManifoldCertificate] = Field(default_factory=list)
    connection: Optional[ConnectionCertificate] = None

    def to_json(self) -> str:
        return dumps(self.model_dump(mode="json", by_alias=True))

    @classmethod
    def from_json(cls, text: str) -> "ProofReport":
        return cls.model_validate(json.loads(text))

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((s for s in self.stages if s.name == name), None)


def dumps(data) -> str:
    """Canonical JSON: sorted keys, two-space indent, no NaN or infinity."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"
