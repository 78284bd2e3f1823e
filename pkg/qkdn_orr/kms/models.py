"""ETSI GS QKD 014 request/response bodies."""

from __future__ import annotations

import base64

from pydantic import BaseModel, Field

from qkdn_orr.kms.store import QkdKey


class KeyEntry(BaseModel):
    key_ID: str
    key: str

    @classmethod
    def from_key(cls, k: QkdKey) -> KeyEntry:
        return cls(key_ID=k.key_id, key=base64.b64encode(k.key).decode("ascii"))

    def to_key(self) -> QkdKey:
        return QkdKey(key_id=self.key_ID, key=base64.b64decode(self.key, validate=True))


class KeyContainer(BaseModel):
    keys: list[KeyEntry]


class KeyIdEntry(BaseModel):
    key_ID: str


class KeyIdsRequest(BaseModel):
    key_IDs: list[KeyIdEntry] = Field(min_length=1)


class ErrorDetail(BaseModel):
    reason: str


class ErrorBody(BaseModel):
    message: str
    details: list[ErrorDetail] = []


class LinkRequest(BaseModel):
    master_SAE_ID: str
    slave_SAE_ID: str
    count: int = Field(ge=1)


class LinkStatus(BaseModel):
    master_SAE_ID: str
    slave_SAE_ID: str
    stored_key_count: int
