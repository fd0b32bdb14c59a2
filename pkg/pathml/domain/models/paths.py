from __future__ import annotations

import re
from datetime import datetime
from typing import Sequence

from pydantic import AwareDatetime, Field, field_validator, model_validator

from pathml.domain.enums import PathStatus
from pathml.schemas.common import DocumentModel
from pathml.transform.fingerprint import path_fingerprint

from .topology import IsdAsField

FINGERPRINT_RE = re.compile(r"^[0-9a-f]{16}$")


def check_fingerprint(value: str | None) -> str | None:
    if value is None:
        return None
    if not FINGERPRINT_RE.match(value):
        raise ValueError(f"fingerprint 必须是 16 位小写十六进制: {value!r}")
    return value


class HopRef(DocumentModel):
    isd_as: IsdAsField
    ingress_if: int = Field(ge=0)
    egress_if: int = Field(ge=0)


def check_endpoints(hops: Sequence[HopRef]) -> None:
    if hops[0].ingress_if != 0:
        raise ValueError("首跳的 ingress_if 必须为 0")
    if hops[-1].egress_if != 0:
        raise ValueError("末跳的 egress_if 必须为 0")


class PathRecord(DocumentModel):
    hops: tuple[HopRef, ...] = Field(min_length=1)
    mtu: int = Field(gt=0)
    status: PathStatus
    expiry: AwareDatetime
    fingerprint: str
    next_hop: str | None = None

    @field_validator("fingerprint")
    @classmethod
    def _fp(cls, v: str) -> str:
        check_fingerprint(v)
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "PathRecord":
        check_endpoints(self.hops)
        expected = path_fingerprint(self.hops)
        if self.fingerprint != expected:
            raise ValueError(f"fingerprint 与 hops 不一致: {self.fingerprint} != {expected}")
        return self

    @classmethod
    def from_hops(
        cls,
        hops: Sequence[HopRef],
        *,
        mtu: int,
        status: PathStatus,
        expiry: datetime,
        next_hop: str | None = None,
    ) -> "PathRecord":
        return cls(
            hops=tuple(hops),
            mtu=mtu,
            status=status,
            expiry=expiry,
            fingerprint=path_fingerprint(hops),
            next_hop=next_hop,
        )

    @property
    def src(self):
        return self.hops[0].isd_as

    @property
    def dst(self):
        return self.hops[-1].isd_as

    def sequence(self) -> str:
        """路径钉选参数：`isd-as#in,out` 以空格连接。"""
        return " ".join(f"{h.isd_as}#{h.ingress_if},{h.egress_if}" for h in self.hops)
