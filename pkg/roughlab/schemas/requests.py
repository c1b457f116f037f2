"""
Strict request schemas for the HTTP surface.

Laws, index sets and ideals travel in .rcl fragment syntax; rationals as strings.
"""

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class MetricRequest(BaseModel):
    """Either a distance law alone, or two laws with a coupling."""

    law: str | None = Field(None, description="distance law, e.g. '{ atom 0 prob 1/2 atom 3 prob 1/2 }'")
    x: str | None = None
    y: str | None = None
    coupling: Literal["independent", "diagonal"] = "independent"

    @model_validator(mode="after")
    def one_form(self) -> "MetricRequest":
        if (self.law is None) == (self.x is None or self.y is None):
            raise ValueError("give either `law` or both `x` and `y`")
        return self


class DensityRequest(BaseModel):
    set: str = Field(..., min_length=1)


class IdealMemberRequest(BaseModel):
    ideal: str = Field(..., min_length=1, description="fin | density | summable | exh <submeasure> ...")
    set: str = Field(..., min_length=1)


class RunRequest(BaseModel):
    spec: str = Field(..., description=".rcl document text")


class CheckRow(BaseModel):
    id: str
    check: str
    expected: str
    computed: str
    provenance: Literal["PAPER", "TRIVIAL", "DERIVED"]
    passed: bool = Field(..., alias="pass")

    model_config = {"populate_by_name": True}
