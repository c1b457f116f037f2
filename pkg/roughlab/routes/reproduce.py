"""GET /reproduce: the worked-example registry."""

from fastapi import APIRouter

from roughlab.schemas.common import success_response
from roughlab.schemas.requests import CheckRow
from roughlab.services.registry import reproduce, reproduce_all

router = APIRouter(prefix="/reproduce", tags=["reproduce"])


def _payload(checks) -> dict:
    rows = [CheckRow.model_validate(c.row()).model_dump(by_alias=True) for c in checks]
    return {"rows": rows, "passed": all(r["pass"] for r in rows)}


@router.get("")
async def reproduce_everything():
    return success_response(data=_payload(reproduce_all()))


@router.get("/{entry_id}")
async def reproduce_one(entry_id: str):
    return success_response(data=_payload(reproduce(entry_id)))
