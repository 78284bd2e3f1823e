"""Classical-channel message framing."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EnvelopeKind(str, Enum):
    KEM_PK = "KEM_PK"
    KEM_CT = "KEM_CT"
    KEY_ID = "KEY_ID"
    ONION_HOP = "ONION_HOP"
    KR_HOP = "KR_HOP"
    TN_SHARE = "TN_SHARE"
    TN_FINAL = "TN_FINAL"


# Only these count towards DistributionResult.messages_sent; negotiation and
# key-id announcements are management traffic.
SECRET_BEARING = frozenset(
    {EnvelopeKind.ONION_HOP, EnvelopeKind.KR_HOP, EnvelopeKind.TN_SHARE, EnvelopeKind.TN_FINAL}
)


@dataclass(frozen=True)
class Envelope:
    sender: str
    recipient: str
    kind: EnvelopeKind
    payload: bytes
    qkd_key_id: str | None = None

    @property
    def link_protected(self) -> bool:
        return self.qkd_key_id is not None

    def __repr__(self) -> str:
        return (
            f"Envelope({self.sender}->{self.recipient} {self.kind.value} "
            f"{len(self.payload)}B key_id={self.qkd_key_id})"
        )
