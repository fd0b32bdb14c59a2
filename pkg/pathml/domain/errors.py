from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar

from .enums import ExitCode


@dataclass(slots=True)
class DomainError(Exception):
    code: str
    message: str
    details: Any = None
    exit_code: int = ExitCode.CONFIG

    def __str__(self) -> str:
        return self.message


class UsageError(DomainError):
    def __init__(self, message: str, *, details: Any = None) -> None:
        super().__init__(
            code="usage",
            message=message,
            details=details,
            exit_code=ExitCode.USAGE,
        )


# =========
# 配置 / schema（exit 2）
# =========


class ConfigError(DomainError):
    default_code: ClassVar[str] = "config_error"

    def __init__(self, message: str, *, details: Any = None) -> None:
        super().__init__(
            code=self.default_code,
            message=message,
            details=details,
            exit_code=ExitCode.CONFIG,
        )


class MalformedIsdAs(ConfigError):
    default_code = "malformed_isd_as"


class IsdOutOfRange(ConfigError):
    default_code = "isd_out_of_range"


class InvalidIp(ConfigError):
    default_code = "invalid_ip"


class PortOutOfRange(ConfigError):
    default_code = "port_out_of_range"


class DuplicateAs(ConfigError):
    default_code = "duplicate_as"


class DuplicateServer(ConfigError):
    default_code = "duplicate_server"


class UnknownEntry(ConfigError):
    default_code = "unknown_entry"


class UnknownCategory(ConfigError):
    default_code = "unknown_category"


class DependencyViolation(ConfigError):
    default_code = "dependency_violation"


class SchemaError(ConfigError):
    default_code = "schema_error"


class IoError(ConfigError):
    default_code = "io_error"


class UnsupportedInterval(ConfigError):
    default_code = "unsupported_interval"


class InvalidSpec(ConfigError):
    default_code = "invalid_spec"


class OverlappingEvents(ConfigError):
    default_code = "overlapping_events"


class InvalidEvent(ConfigError):
    default_code = "invalid_event"


class InvalidCriteria(ConfigError):
    default_code = "invalid_criteria"


class InvalidFraction(ConfigError):
    default_code = "invalid_fraction"


class InvalidContamination(ConfigError):
    default_code = "invalid_contamination"


class InvalidParams(ConfigError):
    default_code = "invalid_params"


# =========
# 后端（exit 3）
# =========


class BackendError(DomainError):
    default_code: ClassVar[str] = "backend_error"

    def __init__(self, message: str, *, kind: str | None = None, details: Any = None) -> None:
        merged = {"kind": kind or self.default_code}
        if isinstance(details, dict):
            merged.update(details)
        elif details is not None:
            merged["info"] = details
        super().__init__(
            code=self.default_code,
            message=message,
            details=merged,
            exit_code=ExitCode.BACKEND,
        )

    @property
    def kind(self) -> str:
        return str(self.details.get("kind", "backend"))


class ParseError(BackendError):
    default_code = "parse_error"

    def __init__(self, message: str, *, line: int = 0, token: str = "") -> None:
        super().__init__(
            f"第 {line} 行: {message} (token={token!r})" if line else message,
            kind="parse",
            details={"line": line, "token": token},
        )

    @property
    def line(self) -> int:
        return int(self.details.get("line", 0))

    @property
    def token(self) -> str:
        return str(self.details.get("token", ""))


class EmptyOutput(ParseError):
    default_code = "empty_output"


class ServerUnreachable(BackendError):
    default_code = "server_unreachable"


class InvariantViolation(BackendError):
    default_code = "invariant_violation"


class ProbeTimeout(BackendError):
    default_code = "timeout"


class UnknownFingerprint(BackendError):
    default_code = "unknown_fingerprint"


class UnknownDestination(BackendError):
    default_code = "unknown_destination"


class ToolFailed(BackendError):
    default_code = "tool_failed"


class StoreUnavailable(BackendError):
    default_code = "store_unavailable"


# =========
# 数据不足 / 退化数据（exit 4）
# =========


class DataError(DomainError):
    default_code: ClassVar[str] = "data_error"

    def __init__(self, message: str, *, details: Any = None) -> None:
        super().__init__(
            code=self.default_code,
            message=message,
            details=details,
            exit_code=ExitCode.INSUFFICIENT_DATA,
        )


class InsufficientData(DataError):
    default_code = "insufficient_data"


class DegenerateLabels(DataError):
    default_code = "degenerate_labels"


class SingleClassAuc(DataError):
    default_code = "single_class_auc"


class NoCandidates(DataError):
    default_code = "no_candidates"


class InsufficientHops(DataError):
    default_code = "insufficient_hops"


class EmptyTraining(DataError):
    default_code = "empty_training"


class EmptyPath(DataError):
    default_code = "empty_path"


class LengthMismatch(DataError):
    default_code = "length_mismatch"


class SingularSystem(DataError):
    default_code = "singular_system"


class NonFiniteData(DataError):
    default_code = "non_finite_data"
