"""Request size guard for POST endpoints. Limit from ROUGHLAB_MAX_PAYLOAD_BYTES."""

from fastapi import Request
from starlette.exceptions import HTTPException

from roughlab.config import settings


def check_payload_size(request: Request) -> None:
    """Raise 413 when the declared body is larger than the configured limit."""
    content_length = request.headers.get("content-length")
    if content_length and content_length.isdigit() and int(content_length) > settings.max_payload_bytes:
        raise HTTPException(
            status_code=413,
            detail=f"Payload too large. Maximum size is {settings.max_payload_bytes} bytes.",
        )
