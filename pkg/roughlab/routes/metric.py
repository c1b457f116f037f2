"""POST /metric: Ky Fan distance."""

from fastapi import APIRouter, Depends

from roughlab.deps.size_guard import check_payload_size
from roughlab.errors import InvalidCoupling
from roughlab.schemas.common import success_response
from roughlab.schemas.requests import MetricRequest
from roughlab.services.exact_dist import diagonal_coupling, product_coupling
from roughlab.services.kyfan import kyfan_between, kyfan_of_law
from roughlab.services.spec_dsl import parse_law

router = APIRouter(tags=["metric"], dependencies=[Depends(check_payload_size)])


@router.post("/metric")
async def metric(body: MetricRequest):
    """rho of a distance law, or rho(X, Y) under the independent or diagonal coupling."""
    if body.law is not None:
        result = kyfan_of_law(parse_law(body.law))
    else:
        x, y = parse_law(body.x), parse_law(body.y)
        if body.coupling == "diagonal":
            if x != y:
                raise InvalidCoupling("a diagonal coupling needs identical laws")
            coupling = diagonal_coupling(x)
        else:
            coupling = product_coupling(x, y)
        result = kyfan_between(x, y, coupling)
    return success_response(data=result.to_json())
