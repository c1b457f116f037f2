"""POST /sets/density and /sets/ideal-member."""

from fastapi import APIRouter, Depends

from roughlab.deps.size_guard import check_payload_size
from roughlab.schemas.common import success_response
from roughlab.schemas.requests import DensityRequest, IdealMemberRequest
from roughlab.services.ideals import ideal_member
from roughlab.services.index_sets import natural_density
from roughlab.services.spec_dsl import parse_ideal, parse_index_set

router = APIRouter(prefix="/sets", tags=["sets"], dependencies=[Depends(check_payload_size)])


@router.post("/density")
async def density(body: DensityRequest):
    index = parse_index_set(body.set)
    return success_response(data={"set": index.text(), **natural_density(index).to_json()})


@router.post("/ideal-member")
async def member(body: IdealMemberRequest):
    ideal, index = parse_ideal(body.ideal), parse_index_set(body.set)
    verdict = ideal_member(ideal, index)
    return success_response(data={"ideal": ideal.to_json(), "set": index.text(), **verdict.to_json()})
