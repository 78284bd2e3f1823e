"""Clients the simulated nodes use to fetch QKD keys."""

from __future__ import annotations

import logging
import threading
from typing import Any, Protocol

import requests

from qkdn_orr.errors import KMS_ERRORS, KmsError
from qkdn_orr.kms.models import KeyContainer, KeyIdsRequest, LinkRequest
from qkdn_orr.kms.server import SAE_HEADER
from qkdn_orr.kms.store import KEY_SIZE_BITS, KeyManagementService, QkdKey

logger = logging.getLogger(__name__)


class KmsClient(Protocol):
    def provision_link(self, sae_a: str, sae_b: str, count: int) -> None: ...

    def get_enc_keys(
        self, master: str, slave: str, number: int = 1, size_bits: int = KEY_SIZE_BITS
    ) -> list[QkdKey]: ...

    def get_dec_keys(self, slave: str, master: str, key_ids: list[str]) -> list[QkdKey]: ...


class InProcessKmsClient:
    """Direct calls into a KeyManagementService, no HTTP in the path."""

    def __init__(self, service: KeyManagementService) -> None:
        self.service = service

    def provision_link(self, sae_a: str, sae_b: str, count: int) -> None:
        self.service.provision_link(sae_a, sae_b, count)

    def get_enc_keys(
        self, master: str, slave: str, number: int = 1, size_bits: int = KEY_SIZE_BITS
    ) -> list[QkdKey]:
        return self.service.get_enc_keys(master, slave, number, size_bits)

    def get_dec_keys(self, slave: str, master: str, key_ids: list[str]) -> list[QkdKey]:
        return self.service.get_dec_keys(slave, master, key_ids)


class HttpKmsClient:
    """ETSI GS QKD 014 client.

    Each calling thread gets its own requests.Session. An injected `session`
    may be any object with requests-style get/post (tests hand in FastAPI's
    TestClient); it is shared, so calls through it are serialised.
    """

    def __init__(self, base_url: str, session: Any = None, timeout: float = 10.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._shared = session
        self._lock = threading.Lock()
        self._local = threading.local()

    @property
    def session(self) -> Any:
        if self._shared is not None:
            return self._shared
        session = getattr(self._local, "session", None)
        if session is None:
            session = self._local.session = requests.Session()
        return session

    def _request(self, method: str, path: str, **kwargs: Any) -> Any:
        url = f"{self.base_url}{path}"
        if self._shared is None:
            response = getattr(self.session, method)(url, timeout=self.timeout, **kwargs)
        else:
            with self._lock:
                response = getattr(self._shared, method)(url, timeout=self.timeout, **kwargs)
        return self._check(response)

    def _check(self, response: Any) -> Any:
        if response.status_code < 400:
            return response.json()
        try:
            body = response.json()
            message = body.get("message", response.text)
            reason = body["details"][0]["reason"]
        except (ValueError, KeyError, IndexError, TypeError):
            message, reason = response.text, ""
        logger.debug("KMS answered %s: %s", response.status_code, reason or message)
        raise KMS_ERRORS.get(reason, KmsError)(message)

    def provision_link(self, sae_a: str, sae_b: str, count: int) -> None:
        body = LinkRequest(master_SAE_ID=sae_a, slave_SAE_ID=sae_b, count=count)
        self._request("post", "/api/v1/admin/links", json=body.model_dump())

    def get_enc_keys(
        self, master: str, slave: str, number: int = 1, size_bits: int = KEY_SIZE_BITS
    ) -> list[QkdKey]:
        payload = self._request(
            "get",
            f"/api/v1/keys/{slave}/enc_keys",
            params={"number": number, "size": size_bits},
            headers={SAE_HEADER: master},
        )
        container = KeyContainer.model_validate(payload)
        return [entry.to_key() for entry in container.keys]

    def get_dec_keys(self, slave: str, master: str, key_ids: list[str]) -> list[QkdKey]:
        body = KeyIdsRequest(key_IDs=[{"key_ID": kid} for kid in key_ids])
        payload = self._request(
            "post",
            f"/api/v1/keys/{master}/dec_keys",
            json=body.model_dump(),
            headers={SAE_HEADER: slave},
        )
        container = KeyContainer.model_validate(payload)
        return [entry.to_key() for entry in container.keys]
