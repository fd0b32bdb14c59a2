from __future__ import annotations

from typing import Any, TypeVar

from pydantic import BaseModel, ConfigDict, ValidationError

from pathml.domain.errors import SchemaError

_M = TypeVar("_M", bound=BaseModel)


class DocumentModel(BaseModel):
    """落盘文档：未知字段直接报错，实例不可变。"""

    model_config = ConfigDict(extra="forbid", frozen=True)


class LenientModel(BaseModel):
    model_config = ConfigDict(extra="ignore")


def _loc_text(loc: tuple[Any, ...]) -> str:
    parts = [str(p) for p in loc if p != "[key]"]
    return ".".join(parts) or "<root>"


def format_validation_error(exc: ValidationError) -> str:
    first = exc.errors()[0] if exc.errors() else None
    if first is None:
        return str(exc)
    extra = len(exc.errors()) - 1
    suffix = f"（另有 {extra} 处错误）" if extra > 0 else ""
    return f"字段 {_loc_text(tuple(first.get('loc', ())))}: {first.get('msg', '')}{suffix}"


def validate_document(model: type[_M], payload: Any, *, source: str = "") -> _M:
    """把 pydantic 校验错误统一转成 SchemaError（消息里带出字段路径）。"""
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        prefix = f"{source}: " if source else ""
        raise SchemaError(
            prefix + format_validation_error(exc),
            details=[{"loc": list(e.get("loc", ())), "msg": e.get("msg", "")} for e in exc.errors()],
        ) from exc


def validate_json_document(model: type[_M], text: str, *, source: str = "") -> _M:
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        prefix = f"{source}: " if source else ""
        raise SchemaError(
            prefix + format_validation_error(exc),
            details=[{"loc": list(e.get("loc", ())), "msg": e.get("msg", "")} for e in exc.errors()],
        ) from exc
