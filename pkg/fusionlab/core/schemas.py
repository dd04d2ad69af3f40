"""
Pydantic schemas for fusionlab's JSON interfaces: category files, zoo specs,
suite and analysis reports.
"""

from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- scalars and algebraic data -------------------------------------------------------


class CyclotomicModel(StrictModel):
    N: int = Field(..., ge=1, description="Conductor")
    terms: List[Tuple[int, int, int]] = Field(
        default_factory=list, description="[exponent, numerator, denominator], sorted by exponent"
    )

    @field_validator("terms")
    @classmethod
    def _denominators_positive(cls, terms):
        for e, _, q in terms:
            if q <= 0:
                raise ValueError(f"denominator of the term at exponent {e} must be positive")
        return terms


class GroupModel(StrictModel):
    factors: List[int] = Field(default_factory=list, description="Invariant factors")


class TableEntry(StrictModel):
    args: List[List[int]] = Field(..., description="Element coordinates of the arguments")
    value: CyclotomicModel


class QuadraticFormModel(StrictModel):
    group: GroupModel
    values: List[TableEntry]


class Cocycle3Model(StrictModel):
    group: GroupModel
    exponents: Dict[str, int] = Field(default_factory=dict, description="Generator exponents")
    values: List[TableEntry]


class FusionRingModel(StrictModel):
    labels: List[str]
    dual: List[int]
    N: List[Tuple[int, int, int, int]] = Field(..., description="Sparse [i, j, k, N_ij^k] triples")


# --- zoo specs ------------------------------------------------------------------------


class BaseSpec(StrictModel):
    name: Optional[str] = Field(None, description="Display name")


# 1. Pointed category of a metric group
class MetricGroupSpec(BaseSpec):
    family: Literal["metric_group"]
    group: str
    form: Optional[Literal["residue", "nonresidue"]] = None
    coefficients: Optional[List[int]] = None


# 2. Ising braided category
class IsingSpec(BaseSpec):
    family: Literal["ising"]
    twist: int = 1


# 3. Twisted double of an abelian group
class TwistedDoubleSpec(BaseSpec):
    family: Literal["twisted_double"]
    group: str
    cocycle: str = "trivial"


# 4. Deligne product
class ProductSpec(BaseSpec):
    family: Literal["product"]
    factors: List["ZooSpec"]


ZooSpec = Annotated[
    Union[MetricGroupSpec, IsingSpec, TwistedDoubleSpec, ProductSpec],
    Field(discriminator="family"),
]

ProductSpec.model_rebuild()


class ModularDataModel(FusionRingModel):
    name: str = ""
    S: List[List[CyclotomicModel]]
    T: List[CyclotomicModel]
    D2: int
    spec: Optional[ZooSpec] = None


class CensusModel(StrictModel):
    group: GroupModel
    cocycle: str
    sectors: List[Tuple[List[int], int, int]] = Field(
        ..., description="[sector element, number of simples, squared dimension]"
    )
    simples: int
    total_dim: int
    pointed: bool
    modular_data: Optional[str] = Field(None, description="Marker when S/T were not constructed")
    spec: Optional[ZooSpec] = None


# --- reports --------------------------------------------------------------------------


class SuiteFailure(StrictModel):
    instance: str
    identity: str
    witness: List[Any] = Field(default_factory=list)
    detail: str = ""
    reproduce: str


class SuiteReport(StrictModel):
    suite: str
    checked: int = 0
    skipped: int = 0
    failures: List[SuiteFailure] = Field(default_factory=list)
    disclaimer: str
    passed: bool = True
    wall_time: Optional[float] = None


class AnalysisReport(StrictModel):
    name: str
    rank: int
    fpdim: int
    fields: Dict[str, Any] = Field(default_factory=dict)


class ZooIndexEntry(StrictModel):
    id: str
    file: str
    family: str
    rank: int
    fpdim: int
    census_only: bool = False
    nondegenerate: Optional[bool] = None


class ZooIndex(StrictModel):
    entries: List[ZooIndexEntry] = Field(default_factory=list)
