"""
Pydantic models for problem configs and JSON reports
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class Quantity(BaseModel):
    """A physical value with an explicit unit annotation"""

    value: float
    unit: str


class MeshDescription(BaseModel):
    kind: Literal["disk_radial", "disk_polar", "rectangle"]
    geometry: Dict[str, float]
    resolution: List[int]


class MeshConfig(BaseModel):
    kind: Literal["disk_radial", "disk_polar", "rectangle"]
    radius: Optional[Quantity] = None
    a: Optional[Quantity] = None
    b: Optional[Quantity] = None
    n: Optional[int] = Field(None, ge=1)
    n_r: Optional[int] = Field(None, ge=1)
    n_t: Optional[int] = Field(None, ge=1)
    nx: Optional[int] = Field(None, ge=1)
    ny: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "MeshConfig":
        required = {
            "disk_radial": ("radius", "n"),
            "disk_polar": ("radius", "n_r", "n_t"),
            "rectangle": ("a", "b", "nx", "ny"),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"mesh kind '{self.kind}' requires {', '.join(missing)}")
        return self


class PotentialSpec(BaseModel):
    """How a potential component (p or q) is realized on the mesh"""

    kind: Literal["constant", "annulus", "two_level", "csv"]
    height: Optional[Quantity] = None
    inner_radius: Optional[Quantity] = None
    outer_radius: Optional[Quantity] = None
    area: Optional[Quantity] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "PotentialSpec":
        required = {
            "constant": ("height",),
            "annulus": ("height", "inner_radius", "outer_radius"),
            "two_level": ("height", "area"),
            "csv": ("path",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"potential kind '{self.kind}' requires {', '.join(missing)}")
        return self


class SolverConfig(BaseModel):
    eig_tol: Optional[float] = Field(None, gt=0)
    root_tol: Optional[float] = Field(None, gt=0)
    max_outer: Optional[int] = Field(None, gt=0)
    max_inner: Optional[int] = Field(None, gt=0)
    strict_interval: bool = False


class OptimizeConfig(BaseModel):
    max_iters: Optional[int] = Field(None, gt=0)
    tol: Optional[float] = Field(None, gt=0)
    start: str = "adversarial"
    seed: Optional[int] = None


class ProblemConfig(BaseModel):
    """Top-level JSON problem document shared by the CLI and the HTTP API"""

    mesh: MeshConfig
    gamma: Optional[Quantity] = None
    p: PotentialSpec = PotentialSpec(kind="constant", height=Quantity(value=0.0, unit="eV"))
    q: PotentialSpec = PotentialSpec(kind="constant", height=Quantity(value=0.0, unit="eV^2"))
    solver: SolverConfig = SolverConfig()
    optimize: OptimizeConfig = OptimizeConfig()


class GroundStateSummary(BaseModel):
    lambda_: float = Field(..., alias="lambda")
    lambda_squared: float
    residual: float
    linear_mu: float
    in_interval: bool
    iterations: Dict[str, int]
    diagnostics: Dict[str, float] = {}

    model_config = {"populate_by_name": True}


class AdmissibilitySummary(BaseModel):
    C_omega: float
    cond_p_ok: bool
    cond_p_margin: float
    cond_q_ok: bool
    cond_q_lhs: float
    cond_q_rhs: float
    notes: List[str] = []


class CertificateSummary(BaseModel):
    passed: bool
    p_mismatch_cells: List[int] = []
    q_mismatch_cells: List[int] = []
    schwarz_gap: Optional[float] = None
    schwarz_gap_p: Optional[float] = None
    schwarz_gap_q: Optional[float] = None
    schwarz_bound_p: Optional[float] = None
    schwarz_bound_q: Optional[float] = None
    schwarz_ok: Optional[bool] = None
    tied_cells: int = 0
    p_measure_error: float = 0.0
    q_measure_error: float = 0.0


class OptimizationSummary(BaseModel):
    mesh: MeshDescription
    lambda_history: List[float]
    lambda_final: float
    lambda_squared_final: float
    iterations: int
    converged: bool
    cycled: bool
    monotone: bool
    fixed_point_gap: float
    schwarz_gap: Optional[float] = None
    best_index: int
    certificate: Optional[CertificateSummary] = None
    notes: List[str] = []
