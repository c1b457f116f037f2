"""POST /run: execute a .rcl document."""

from fastapi import APIRouter, Depends
from fastapi.responses import JSONResponse

from roughlab.deps.size_guard import check_payload_size
from roughlab.schemas.common import error_response, success_response
from roughlab.schemas.requests import RunRequest
from roughlab.services.registry import run_document
from roughlab.services.spec_dsl import parse

router = APIRouter(tags=["run"], dependencies=[Depends(check_payload_size)])


@router.post("/run")
async def run(body: RunRequest):
    """Parse errors come back as 400/422 through the domain error handler."""
    report = run_document(parse(body.spec))
    if report["fatal"]:
        return JSONResponse(status_code=500, content=error_response("Fatal inconsistency.", report))
    return success_response(data=report, message=f"{len(report['results'])} queries run.")
