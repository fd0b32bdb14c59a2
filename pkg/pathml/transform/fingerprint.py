from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

from pathml.domain.errors import EmptyPath

FINGERPRINT_LEN = 16


class _HopLike(Protocol):
    @property
    def isd_as(self) -> object: ...

    @property
    def ingress_if(self) -> int: ...

    @property
    def egress_if(self) -> int: ...


def canonical_hop_string(hops: Sequence[_HopLike]) -> str:
    return "|".join(f"{hop.isd_as}#{hop.ingress_if},{hop.egress_if}" for hop in hops)


def path_fingerprint(hops: Sequence[_HopLike]) -> str:
    """`isd-as#in,out` 以 `|` 连接后取 SHA-256，截前 16 位小写十六进制。顺序敏感。"""
    if not hops:
        raise EmptyPath("路径为空，无法计算 fingerprint")
    digest = hashlib.sha256(canonical_hop_string(hops).encode("utf-8")).hexdigest()
    return digest[:FINGERPRINT_LEN]
