"""Paired QKD key stores behind the mock Key Management Service.

One logical service holds both sides of every link: the master SAE draws
fresh keys with get_enc_keys (consuming them), the slave SAE looks the same
bytes up by key_ID with get_dec_keys.
"""

from __future__ import annotations

import logging
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field

from qkdn_orr.crypto import RandomSource
from qkdn_orr.errors import (
    DuplicateLink,
    Exhausted,
    UnknownKeyId,
    UnknownLink,
    UnsupportedSize,
)

logger = logging.getLogger(__name__)

KEY_SIZE_BITS = 256
KEY_SIZE = KEY_SIZE_BITS // 8


@dataclass(frozen=True)
class QkdKey:
    key_id: str
    key: bytes

    def __post_init__(self) -> None:
        if len(self.key) != KEY_SIZE:
            raise ValueError(f"QKD key must be {KEY_SIZE} bytes, got {len(self.key)}")

    def __repr__(self) -> str:
        return f"QkdKey(key_id={self.key_id!r})"


@dataclass
class LinkStore:
    master_sae_id: str
    slave_sae_id: str
    available: OrderedDict[str, QkdKey] = field(default_factory=OrderedDict)
    delivered: dict[str, QkdKey] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add(self, keys: list[QkdKey]) -> None:
        with self.lock:
            for k in keys:
                if k.key_id in self.available or k.key_id in self.delivered:
                    raise ValueError(f"duplicate key_ID {k.key_id} on link")
                self.available[k.key_id] = k

    def take(self, number: int) -> list[QkdKey]:
        with self.lock:
            if number > len(self.available):
                raise Exhausted(
                    f"link {self.master_sae_id}<->{self.slave_sae_id}: requested "
                    f"{number} keys, {len(self.available)} available"
                )
            out = []
            for _ in range(number):
                _, k = self.available.popitem(last=False)
                self.delivered[k.key_id] = k
                out.append(k)
            return out

    def lookup(self, key_ids: list[str]) -> list[QkdKey]:
        with self.lock:
            missing = [kid for kid in key_ids if kid not in self.delivered]
            if missing:
                raise UnknownKeyId(f"unknown key_ID(s): {', '.join(missing)}")
            return [self.delivered[kid] for kid in key_ids]


def _link_name(a: str, b: str) -> frozenset[str]:
    return frozenset((a, b))


class KeyManagementService:
    """All link stores of the simulated QKD network."""

    def __init__(self, rng: RandomSource | None = None) -> None:
        self.rng = rng or RandomSource()
        self._links: dict[frozenset[str], LinkStore] = {}
        self._lock = threading.Lock()

    def _fresh_key(self) -> QkdKey:
        key_id = str(uuid.UUID(bytes=self.rng.random_bytes(16), version=4))
        return QkdKey(key_id=key_id, key=self.rng.random_bytes(KEY_SIZE))

    def provision_link(self, sae_a: str, sae_b: str, count: int) -> LinkStore:
        if sae_a == sae_b:
            raise ValueError("a link needs two distinct SAEs")
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        name = _link_name(sae_a, sae_b)
        with self._lock:
            if name in self._links:
                raise DuplicateLink(f"link {sae_a}<->{sae_b} already provisioned")
            store = LinkStore(master_sae_id=sae_a, slave_sae_id=sae_b)
            store.add([self._fresh_key() for _ in range(count)])
            self._links[name] = store
        logger.info("provisioned link %s<->%s with %d keys", sae_a, sae_b, count)
        return store

    def import_keys(self, sae_a: str, sae_b: str, keys: list[QkdKey]) -> LinkStore:
        """Load fixed keys onto a link, creating it when absent."""
        name = _link_name(sae_a, sae_b)
        with self._lock:
            store = self._links.get(name)
            if store is None:
                store = self._links[name] = LinkStore(master_sae_id=sae_a, slave_sae_id=sae_b)
        store.add(keys)
        return store

    def link(self, sae_a: str, sae_b: str) -> LinkStore:
        try:
            return self._links[_link_name(sae_a, sae_b)]
        except KeyError:
            raise UnknownLink(f"no link between {sae_a} and {sae_b}") from None

    def available(self, sae_a: str, sae_b: str) -> int:
        return len(self.link(sae_a, sae_b).available)

    def delivered(self, sae_a: str, sae_b: str) -> int:
        return len(self.link(sae_a, sae_b).delivered)

    def get_enc_keys(
        self, master: str, slave: str, number: int = 1, size_bits: int = KEY_SIZE_BITS
    ) -> list[QkdKey]:
        if size_bits != KEY_SIZE_BITS:
            raise UnsupportedSize(f"only {KEY_SIZE_BITS}-bit keys are served, got {size_bits}")
        if number < 1:
            raise ValueError(f"number must be >= 1, got {number}")
        return self.link(master, slave).take(number)

    def get_dec_keys(self, slave: str, master: str, key_ids: list[str]) -> list[QkdKey]:
        return self.link(slave, master).lookup(key_ids)
