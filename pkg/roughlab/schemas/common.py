"""Common response envelope: { success, message?, data? }."""

from typing import Any

from roughlab.errors import RoughLabError


def success_response(data: Any = None, message: str | None = None) -> dict:
    out: dict = {"success": True}
    if message is not None:
        out["message"] = message
    if data is not None:
        out["data"] = data
    return out


def error_response(message: str, data: Any = None) -> dict:
    out: dict = {"success": False, "message": message}
    if data is not None:
        out["data"] = data
    return out


def domain_error(exc: RoughLabError) -> dict:
    """Envelope for a domain error; `data` keeps the code and structured details."""
    return error_response(exc.message, exc.to_dict())


def error_message(detail: Any) -> str:
    """Normalize an HTTPException / validation detail to a single string."""
    if detail is None:
        return "An error occurred."
    if isinstance(detail, str):
        return detail
    if isinstance(detail, list):
        parts = []
        for item in detail:
            if isinstance(item, dict):
                loc = ".".join(str(x) for x in item.get("loc", []))
                parts.append(f"{loc}: {item.get('msg', item)}")
            else:
                parts.append(str(item))
        return " ".join(parts) if parts else "Validation error."
    return str(detail)
