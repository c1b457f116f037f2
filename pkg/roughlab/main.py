"""
roughlab: FastAPI service

Exact verdicts on rough ideal convergence in probability, served over HTTP.
"""

from contextlib import asynccontextmanager

import structlog
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from roughlab import __version__
from roughlab.config import settings
from roughlab.errors import RoughLabError
from roughlab.logs import configure_logging
from roughlab.routes import metric, reproduce, run, sets
from roughlab.schemas.common import domain_error, error_message, error_response, success_response

log = structlog.get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    configure_logging(settings.log_level, settings.json_logs)
    log.info("startup", version=__version__)
    yield


app = FastAPI(
    title="roughlab API",
    description="Ky Fan distances, ideal membership and rough limit / cluster point verdicts.",
    version=__version__,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(metric.router)
app.include_router(sets.router)
app.include_router(run.router)
app.include_router(reproduce.router)


@app.exception_handler(RoughLabError)
async def domain_exception_handler(_request: Request, exc: RoughLabError):
    if exc.status_code >= 500:
        log.error("domain_error", code=exc.code, error=exc.message)
    return JSONResponse(status_code=exc.status_code, content=domain_error(exc))


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(_request: Request, exc: RequestValidationError):
    return JSONResponse(status_code=422, content=error_response(error_message(exc.errors())))


@app.exception_handler(StarletteHTTPException)
async def http_exception_handler(_request: Request, exc: StarletteHTTPException):
    return JSONResponse(status_code=exc.status_code, content=error_response(error_message(exc.detail)))


@app.exception_handler(Exception)
async def unhandled_exception_handler(_request: Request, exc: Exception):
    log.exception("unhandled_error")
    return JSONResponse(status_code=500, content=error_response(str(exc) or "Internal server error."))


@app.get("/health", tags=["health"])
async def health():
    return success_response(data={"status": "ok", "version": __version__})
