from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.services.growth import EmpiricalPoint


class ImageResult(BaseModel):
    word: str = Field(..., description="Cylinder word u")
    route: str = Field(..., description="formula or adaptive")
    stretch: int = Field(..., description="S(φ)")
    depth: int = Field(..., description="Extension depth k = S⁴+S³+S²")
    raw: List[str] = Field(..., description="Unreduced image set")
    reduced: List[str] = Field(..., description="U_min")


class DualResult(BaseModel):
    word: str
    fast: List[str] = Field(..., description="φ*(w) from the suffix table")
    general: Optional[List[str]] = Field(None, description="φ*(w) from the cylinder image")
    route: Optional[str] = Field(None, description="Route of the general computation")
    agree: Optional[bool] = Field(None, description="Both paths agree; null if general was skipped")


class CollectionResult(BaseModel):
    t: int = Field(..., description="Number of Nielsen moves")
    bound: int = Field(..., description="2^t")
    max_cardinality: int
    reduction_fired: int = Field(..., description="Compositions in which reduction removed words")
    moves: str
    table: Dict[str, List[str]]


class GrowthReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(..., alias="lambda", description="Perron-Frobenius eigenvalue")
    matrix: List[List[int]]
    letter_order: List[str]
    empirical: List[EmpiricalPoint]
    t: int
    tail_rate: Optional[float] = None
    limsup_estimate: Optional[float] = None
    partial: bool = False
    consistent: bool = Field(..., description="Tail rate within tolerance of lambda")
    discrepancy: Optional[str] = Field(None, description="How the empirical sequence contradicts lambda")
    witness: Optional[Dict[str, List[str]]] = Field(
        None, description="Suffix table of an automorphism whose growth contradicts its matrix"
    )


class DecomposeResult(BaseModel):
    moves: str
    t: int
    images: List[str]


class OracleCheckResult(BaseModel):
    word: str
    out_depth: int
    claimed: List[str]
    agree: bool
    oracle_only: List[str] = Field(default_factory=list)
    claimed_only: List[str] = Field(default_factory=list)


class Violation(BaseModel):
    check: str
    detail: str


class VerificationReport(BaseModel):
    seed: int
    rank: int
    checks: Dict[str, int] = Field(default_factory=dict, description="Instances run per check")
    inconclusive: int = Field(0, description="Oracle runs that could not stabilize")
    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations
