from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass
from typing import Annotated, Any

from pydantic import Field, PlainSerializer, PlainValidator, field_validator

from pathml.domain.errors import (
    DomainError,
    InvalidIp,
    IsdOutOfRange,
    MalformedIsdAs,
    PortOutOfRange,
)
from pathml.schemas.common import DocumentModel

ISD_MIN = 1
ISD_MAX = 65535

_ISD_AS_RE = re.compile(
    r"^(?P<isd>0|[1-9][0-9]*)-"
    r"(?P<as>[0-9a-fA-F]{1,4}:[0-9a-fA-F]{1,4}:[0-9a-fA-F]{1,4}|[0-9]+)$"
)


@dataclass(frozen=True, slots=True, order=True)
class IsdAs:
    isd: int
    as_code: str

    def __str__(self) -> str:
        return f"{self.isd}-{self.as_code}"


def validate_isd_as(text: str) -> IsdAs:
    """
    解析 `ISD-AS`：ISD 为 [1, 65535] 的十进制；AS 为 `H:H:H`（1–4 位十六进制，统一小写）或纯十进制。
    """
    raw = str(text)
    match = _ISD_AS_RE.match(raw)
    if not match:
        raise MalformedIsdAs(f"非法的 ISD-AS: {raw!r}（应为 <ISD>-<AS>，例如 17-ffaa:0:1101）")
    isd = int(match.group("isd"))
    if not ISD_MIN <= isd <= ISD_MAX:
        raise IsdOutOfRange(f"ISD 超出范围 [{ISD_MIN}, {ISD_MAX}]: {isd}")
    as_code = match.group("as")
    if ":" in as_code:
        as_code = as_code.lower()
    return IsdAs(isd=isd, as_code=as_code)


def _coerce_isd_as(value: Any) -> IsdAs:
    if isinstance(value, IsdAs):
        return value
    if not isinstance(value, str):
        raise ValueError("ISD-AS 必须是字符串")
    try:
        return validate_isd_as(value)
    except DomainError as exc:
        raise ValueError(exc.message) from exc


IsdAsField = Annotated[IsdAs, PlainValidator(_coerce_isd_as), PlainSerializer(str, return_type=str)]


def check_ip(ip: str) -> str:
    try:
        return str(ipaddress.ip_address(str(ip).strip()))
    except ValueError as exc:
        raise InvalidIp(f"非法的 IP 地址: {ip!r}") from exc


def check_port(port: int) -> int:
    if not 1 <= int(port) <= 65535:
        raise PortOutOfRange(f"端口超出范围 [1, 65535]: {port}")
    return int(port)


class AsDescriptor(DocumentModel):
    isd_as: IsdAsField
    ip: str
    name: str = Field(min_length=1)

    @field_validator("ip")
    @classmethod
    def _ip(cls, v: str) -> str:
        try:
            return check_ip(v)
        except InvalidIp as exc:
            raise ValueError(exc.message) from exc


class ServerDescriptor(DocumentModel):
    isd_as: IsdAsField
    ip: str
    port: int
    name: str = Field(min_length=1)

    @field_validator("ip")
    @classmethod
    def _ip(cls, v: str) -> str:
        try:
            return check_ip(v)
        except InvalidIp as exc:
            raise ValueError(exc.message) from exc

    @field_validator("port")
    @classmethod
    def _port(cls, v: int) -> int:
        try:
            return check_port(v)
        except PortOutOfRange as exc:
            raise ValueError(exc.message) from exc

    @property
    def address(self) -> str:
        if ":" in self.ip:
            return f"[{self.ip}]:{self.port}"
        return f"{self.ip}:{self.port}"
