"""
Exception types shared by the fusionlab core modules.
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional, Tuple


@dataclass(frozen=True)
class Violation:
    """First violated identity found by a validator, with witness indices."""
    identity: str
    witness: Tuple[Any, ...] = ()
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["witness"] = list(self.witness)
        return data


class FusionLabError(Exception):
    """Base class for every error raised by fusionlab."""
    kind = "error"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.kind, "message": self.message, **self.context}


class LimitExceeded(FusionLabError):
    """A configured size limit (group order, rank, lattice) was exceeded."""
    kind = "limit_exceeded"


class ShapeMismatch(FusionLabError, ValueError):
    """Inputs of incompatible shape, e.g. a cocycle kind on the wrong group."""
    kind = "shape_mismatch"


class CertificationError(FusionLabError):
    """A numeric dimension could not be certified as the square root of an integer."""
    kind = "certification_failed"


class SpecError(FusionLabError, ValueError):
    """Malformed spec string, flag combination or input file."""
    kind = "invalid_spec"


class ValidationFailure(FusionLabError):
    """Raised when constructed or loaded data violates its invariants."""
    kind = "validation_failed"

    def __init__(self, violation: Violation, message: Optional[str] = None):
        super().__init__(message or f"{violation.identity} violated at {violation.witness}")
        self.violation = violation

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["violation"] = self.violation.to_dict()
        return data
