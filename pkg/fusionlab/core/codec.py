"""
JSON encoding of cyclotomic numbers, groups, forms, cocycles, fusion rings
and modular data, on top of the pydantic schemas.

Canonical output is ``json.dumps(..., indent=2, sort_keys=True,
ensure_ascii=False)`` plus a trailing newline, written atomically.
"""

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, TypeAdapter, ValidationError

from .abelian import Cocycle3, FiniteAbelianGroup, QuadraticForm
from .cyclo import Cyclotomic
from .errors import SpecError, ValidationFailure
from .fusion import FusionRing
from .modular import ModularData, require_modular
from .schemas import (
    CensusModel,
    Cocycle3Model,
    CyclotomicModel,
    FusionRingModel,
    GroupModel,
    ModularDataModel,
    QuadraticFormModel,
    TableEntry,
    ZooSpec,
)

PathLike = Union[str, Path]

_spec_adapter = TypeAdapter(ZooSpec)


def cyclo_to_model(x: Cyclotomic) -> CyclotomicModel:
    return CyclotomicModel(**x.to_json())


def cyclo_from_model(m: CyclotomicModel) -> Cyclotomic:
    return Cyclotomic(m.N, {e: Fraction(p, q) for e, p, q in m.terms})


def group_to_model(G: FiniteAbelianGroup) -> GroupModel:
    return GroupModel(factors=list(G.invariant_factors))


def form_to_model(phi: QuadraticForm) -> QuadraticFormModel:
    G = phi.group
    return QuadraticFormModel(
        group=group_to_model(G),
        values=[TableEntry(args=[list(x)], value=cyclo_to_model(phi.value(x))) for x in G.elements(None)],
    )


def cocycle_to_model(omega: Cocycle3) -> Cocycle3Model:
    G = omega.group
    elems = G.elements(None)
    values = [
        TableEntry(args=[list(a), list(b), list(c)], value=cyclo_to_model(omega.value(a, b, c)))
        for a in elems for b in elems for c in elems
    ]
    return Cocycle3Model(group=group_to_model(G), exponents=dict(omega.exponents), values=values)


def ring_to_model(R: FusionRing) -> FusionRingModel:
    return FusionRingModel(labels=list(R.labels), dual=list(R.dual), N=_sparse(R))


def _sparse(R: FusionRing):
    return [[i, j, k, v] for i in range(R.rank) for j in range(R.rank) for k, v in R.products[i][j]]


def ring_from_model(m: FusionRingModel) -> FusionRing:
    rank = len(m.labels)
    coefficients = {}
    for i, j, k, v in m.N:
        if not all(0 <= x < rank for x in (i, j, k)):
            raise SpecError(f"fusion triple ({i}, {j}, {k}) out of range for rank {rank}")
        if v < 0:
            raise SpecError(f"negative fusion coefficient at ({i}, {j}, {k})")
        coefficients[(i, j, k)] = v
    return FusionRing(m.labels, m.dual, coefficients)


def modular_to_model(M: ModularData, spec: Optional[Any] = None) -> ModularDataModel:
    return ModularDataModel(
        name=M.name,
        labels=list(M.labels),
        dual=list(M.ring.dual),
        N=_sparse(M.ring),
        S=[[cyclo_to_model(x) for x in row] for row in M.S],
        T=[cyclo_to_model(x) for x in M.T],
        D2=M.global_dim,
        spec=spec,
    )


def modular_from_model(m: ModularDataModel, validate: bool = True) -> ModularData:
    ring = ring_from_model(m)
    M = ModularData(
        ring,
        tuple(tuple(cyclo_from_model(x) for x in row) for row in m.S),
        tuple(cyclo_from_model(x) for x in m.T),
        m.name,
    )
    if validate:
        violation = ring.validate()
        if violation is not None:
            raise ValidationFailure(violation, f"{m.name or 'input'}: fusion ring {violation.identity} at {violation.witness}")
        require_modular(M)
        if M.global_dim != m.D2:
            raise SpecError(f"declared D2 = {m.D2} but the certified global dimension is {M.global_dim}")
    return M


def census_to_model(result, spec: Optional[Any] = None) -> CensusModel:
    return CensusModel(
        group=group_to_model(result.group),
        cocycle=result.cocycle.label,
        sectors=[[list(s.element), s.simples, s.dim_square] for s in result.sectors],
        simples=result.simples,
        total_dim=result.total_dim,
        pointed=result.pointed,
        modular_data=result.marker,
        spec=spec,
    )


def spec_from_json(data: Any) -> ZooSpec:
    try:
        return _spec_adapter.validate_python(data)
    except ValidationError as exc:
        raise SpecError(f"invalid zoo spec: {exc.errors()[0]['msg']}") from exc


# --- files ------------------------------------------------------------------------------


def dumps(model: Union[BaseModel, Dict[str, Any]]) -> str:
    data = model.model_dump(mode="json", exclude_none=True) if isinstance(model, BaseModel) else model
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def atomic_write(path: PathLike, text: str) -> Path:
    """Write text to path through a sibling temporary file and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise SpecError(f"no such file: {path}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", path=str(path)) from exc


def load_modular(path: PathLike, validate: bool = True) -> ModularData:
    """Read and validate a category file."""
    data = read_json(path)
    try:
        model = ModularDataModel.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise SpecError(f"{path}: {location}: {first['msg']}", path=str(path)) from exc
    return modular_from_model(model, validate)


def load_spec_of(path: PathLike) -> Optional[ZooSpec]:
    data = read_json(path)
    return spec_from_json(data["spec"]) if isinstance(data, dict) and data.get("spec") else None


def save_modular(path: PathLike, M: ModularData, spec: Optional[Any] = None) -> Path:
    return atomic_write(path, dumps(modular_to_model(M, spec)))
