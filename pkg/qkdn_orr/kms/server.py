"""ETSI GS QKD 014 REST front-end for the mock KMS.

Usage:
    qkdn-orr kms serve --addr 127.0.0.1:8014

The calling SAE names itself with the X-SAE-ID header.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Header, Path, Query, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from qkdn_orr.errors import KmsError
from qkdn_orr.kms.models import (
    ErrorBody,
    ErrorDetail,
    KeyContainer,
    KeyEntry,
    KeyIdsRequest,
    LinkRequest,
    LinkStatus,
)
from qkdn_orr.kms.store import KEY_SIZE_BITS, KeyManagementService

logger = logging.getLogger(__name__)

SAE_HEADER = "X-SAE-ID"


def _error(status_code: int, message: str, reason: str) -> JSONResponse:
    body = ErrorBody(message=message, details=[ErrorDetail(reason=reason)])
    return JSONResponse(status_code=status_code, content=body.model_dump())


def create_app(service: KeyManagementService) -> FastAPI:
    app = FastAPI(title="qkdn-orr mock KME")
    app.state.kms = service

    # ------------------------------
    # Error mapping
    # ------------------------------
    @app.exception_handler(KmsError)
    async def kms_error(request: Request, exc: KmsError) -> JSONResponse:
        logger.debug("%s %s -> %d %s", request.method, request.url.path, exc.status_code, exc)
        return _error(exc.status_code, str(exc), exc.reason)

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error(status.HTTP_400_BAD_REQUEST, "malformed request", "BadRequest")

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError) -> JSONResponse:
        return _error(status.HTTP_400_BAD_REQUEST, str(exc), "BadRequest")

    # ------------------------------
    # Key delivery
    # ------------------------------
    @app.get("/api/v1/keys/{slave_SAE_ID}/enc_keys", response_model=KeyContainer)
    def get_enc_keys(
        slave_SAE_ID: str = Path(..., description="SAE that will decrypt"),
        number: int = Query(1, ge=1),
        size: int = Query(KEY_SIZE_BITS),
        master_SAE_ID: str = Header(..., alias=SAE_HEADER),
    ) -> KeyContainer:
        keys = service.get_enc_keys(master_SAE_ID, slave_SAE_ID, number, size)
        return KeyContainer(keys=[KeyEntry.from_key(k) for k in keys])

    @app.post("/api/v1/keys/{master_SAE_ID}/dec_keys", response_model=KeyContainer)
    def get_dec_keys(
        body: KeyIdsRequest,
        master_SAE_ID: str = Path(..., description="SAE that requested enc_keys"),
        slave_SAE_ID: str = Header(..., alias=SAE_HEADER),
    ) -> KeyContainer:
        key_ids = [entry.key_ID for entry in body.key_IDs]
        keys = service.get_dec_keys(slave_SAE_ID, master_SAE_ID, key_ids)
        return KeyContainer(keys=[KeyEntry.from_key(k) for k in keys])

    # ------------------------------
    # Link administration
    # ------------------------------
    @app.post(
        "/api/v1/admin/links",
        response_model=LinkStatus,
        status_code=status.HTTP_201_CREATED,
    )
    def provision_link(body: LinkRequest) -> LinkStatus:
        store = service.provision_link(body.master_SAE_ID, body.slave_SAE_ID, body.count)
        return LinkStatus(
            master_SAE_ID=store.master_sae_id,
            slave_SAE_ID=store.slave_sae_id,
            stored_key_count=len(store.available),
        )

    @app.get("/")
    def index() -> dict:
        return {"health_check": "OK"}

    return app
