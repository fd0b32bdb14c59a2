from __future__ import annotations

from datetime import datetime
from typing import Any, Final

from pydantic import AwareDatetime, BaseModel, Field, ValidationError, field_validator, model_validator

from pathml.domain.enums import Category
from pathml.domain.models.paths import check_fingerprint
from pathml.domain.models.results import (
    BandwidthResult,
    ComparerResult,
    MpBandwidthResult,
    MpProberResult,
    PingResult,
    ShowpathsResult,
    TracerouteResult,
)
from pathml.domain.models.topology import IsdAs, IsdAsField
from pathml.state import as_utc

from .common import DocumentModel, format_validation_error

SCHEMA_VERSION: Final[int] = 1

PAYLOAD_MODELS: Final[dict[Category, type[DocumentModel]]] = {
    Category.SHOWPATHS: ShowpathsResult,
    Category.COMPARER: ComparerResult,
    Category.BANDWIDTH: BandwidthResult,
    Category.MP_BANDWIDTH: MpBandwidthResult,
    Category.PING: PingResult,
    Category.MP_PROBER: MpProberResult,
    Category.TRACEROUTE: TracerouteResult,
}


class ToolInfo(DocumentModel):
    name: str = Field(min_length=1)
    version: str = Field(min_length=1)


class RecordEnvelope(DocumentModel):
    schema_version: int = SCHEMA_VERSION
    timestamp_utc: AwareDatetime
    cycle: int = Field(ge=0)
    seq: int = Field(default=0, ge=0, le=9999)
    category: Category
    src: IsdAsField
    dst: IsdAsField
    fingerprint: str | None = None
    tool: ToolInfo
    payload: dict[str, Any]

    @field_validator("timestamp_utc")
    @classmethod
    def _utc(cls, v: datetime) -> datetime:
        return as_utc(v)

    @field_validator("fingerprint")
    @classmethod
    def _fp(cls, v: str | None) -> str | None:
        return check_fingerprint(v)

    @model_validator(mode="after")
    def _payload_matches_category(self) -> "RecordEnvelope":
        if self.schema_version > SCHEMA_VERSION:
            raise ValueError(f"不支持的 schema_version: {self.schema_version}")
        model = PAYLOAD_MODELS[self.category]
        try:
            model.model_validate(self.payload)
        except ValidationError as exc:
            raise ValueError(f"payload 与类别 {self.category.value} 不匹配: {format_validation_error(exc)}") from None
        return self

    def typed_payload(self) -> Any:
        return PAYLOAD_MODELS[self.category].model_validate(self.payload)

    @classmethod
    def wrap(
        cls,
        *,
        category: Category,
        result: BaseModel,
        src: IsdAs,
        dst: IsdAs,
        timestamp: datetime,
        cycle: int,
        tool: ToolInfo,
        fingerprint: str | None = None,
        seq: int = 0,
    ) -> "RecordEnvelope":
        return cls(
            timestamp_utc=timestamp,
            cycle=cycle,
            seq=seq,
            category=category,
            src=src,
            dst=dst,
            fingerprint=fingerprint,
            tool=tool,
            payload=result.model_dump(mode="json"),
        )

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"
