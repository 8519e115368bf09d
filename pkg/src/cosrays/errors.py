"""Domain errors shared by the core modules; the CLI serializes them as JSON."""

from __future__ import annotations

from typing import Any


class DomainError(ValueError):
    code = "domain"

    def __init__(self, message: str, at: Any = None):
        super().__init__(message)
        self.message = message
        self.at = at

    def to_json(self) -> dict:
        at = self.at
        if isinstance(at, complex):
            at = [at.real, at.imag]
        return {"error": self.code, "message": self.message, "at": at}


class BoundaryError(DomainError):
    code = "boundary"


class OutsideTractError(DomainError):
    code = "outside_tract"


class BranchDomainError(DomainError):
    code = "branch_domain"


class OrbitEscapeError(DomainError):
    code = "orbit_escape"


class PrecisionLossError(DomainError):
    code = "precision_loss"


class VerificationError(DomainError):
    code = "verification"


class QViolation(DomainError):
    code = "q_violation"


class NotOnSkeletonError(DomainError):
    code = "not_on_skeleton"


class NonStabilizationError(DomainError):
    code = "non_stabilization"


class EvalOverflow(DomainError):
    code = "overflow"


class SearchExhausted(DomainError):
    code = "search_exhausted"


class BelowMinimalPotential(DomainError):
    code = "below_t_min"
