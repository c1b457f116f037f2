"""
Domain errors.

Every error raised by the services derives from RoughLabError so the CLI and the
HTTP layer can render it in one place.
"""

from typing import Any


class RoughLabError(Exception):
    """Base error: a stable `code`, a human message and structured details."""

    code = "roughlab_error"
    status_code = 422

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": _plain(self.details)}


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_plain(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# ── exact-dist ──────────────────────────────────────────────────────────────


class NegativeMass(RoughLabError):
    code = "negative_mass"


class MassNotOne(RoughLabError):
    code = "mass_not_one"

    def __init__(self, total: Any, **details: Any) -> None:
        super().__init__(f"mass {total} ≠ 1", total=total, deficit=1 - total, **details)
        self.total = total
        self.deficit = 1 - total


class PointNotInSpace(RoughLabError):
    code = "point_not_in_space"


class SpaceMismatch(RoughLabError):
    code = "space_mismatch"


class InvalidValueSpace(RoughLabError):
    code = "invalid_value_space"


class InvalidCoupling(RoughLabError):
    code = "invalid_coupling"


# ── kyfan ───────────────────────────────────────────────────────────────────


class NegativeSupport(RoughLabError):
    code = "negative_support"


# ── index-ideals ────────────────────────────────────────────────────────────


class NoDensityData(RoughLabError):
    code = "no_density_data"


# ── sequence-model ──────────────────────────────────────────────────────────


class OutsideValidity(RoughLabError):
    code = "outside_validity"


class GrammarViolation(RoughLabError):
    code = "grammar_violation"


class CoverageError(RoughLabError):
    code = "coverage_error"


class OscillationUnsupported(RoughLabError):
    code = "oscillation_unsupported"


# ── spec-dsl ────────────────────────────────────────────────────────────────


class SpecSyntaxError(RoughLabError):
    code = "syntax_error"
    status_code = 400

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()) -> None:
        super().__init__(
            f"{line}:{column}: {message}", line=line, column=column, expected=list(expected)
        )
        self.line = line
        self.column = column
        self.expected = expected


class SpecSemanticError(RoughLabError):
    code = "semantic_error"

    def __init__(self, message: str, line: int = 0, column: int = 0, **details: Any) -> None:
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}", line=line, column=column, **details)
        self.line = line
        self.column = column


# ── analysis ────────────────────────────────────────────────────────────────


class HypothesisNotEstablished(RoughLabError):
    code = "hypothesis_not_established"


class UnverifiedMember(RoughLabError):
    code = "unverified_member"


class NotIdealAlmostSure(RoughLabError):
    code = "not_ideal_almost_sure"


class NotConvergentFamily(RoughLabError):
    code = "not_convergent_family"


class FatalInconsistency(RoughLabError):
    code = "fatal_inconsistency"
    status_code = 500


# ── cli ─────────────────────────────────────────────────────────────────────


class UnknownRegistryId(RoughLabError):
    code = "unknown_registry_id"
    status_code = 404
