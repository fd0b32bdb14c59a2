"""按 current / history / archives / measurements 组织的文件存储。

布局::

    <root>/current/<src>_<dst>.json        最新一次 showpaths
    <root>/history/<src>_<dst>.json        上一次 showpaths（N-1）
    <root>/measurements/<YYYY-MM-DD>/<category>/<ts>_<src>_<dst>[_<fp>]_<seq>.json
    <root>/archives/<YYYY-MM-DD>/<category>/...
    <root>/logs/cycle-<ts>.log

所有写入都是“临时文件 + rename”，读者永远看不到半个 JSON。
"""

from __future__ import annotations

import os
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

from pydantic import Field

from pathml.domain.enums import CATEGORIES, Category
from pathml.domain.errors import InvalidCriteria, IoError, SchemaError, StoreUnavailable
from pathml.domain.models.topology import IsdAs
from pathml.files import RecordKey, pair_filename, parse_record_filename, record_filename
from pathml.logger import get_logger
from pathml.schemas.common import DocumentModel, validate_document, validate_json_document
from pathml.schemas.envelope import RecordEnvelope
from pathml.state import as_utc, compact_utc, write_text_atomic

LOCK_NAME = ".cycle.lock"


@dataclass(frozen=True)
class StoreLayout:
    root: Path
    current_dir: Path
    history_dir: Path
    archives_dir: Path
    measurements_dir: Path
    logs_dir: Path


def make_layout(root: Path) -> StoreLayout:
    return StoreLayout(
        root=root,
        current_dir=root / "current",
        history_dir=root / "history",
        archives_dir=root / "archives",
        measurements_dir=root / "measurements",
        logs_dir=root / "logs",
    )


@dataclass(frozen=True)
class SearchCriteria:
    src: IsdAs | None = None
    dst: IsdAs | None = None
    categories: tuple[Category, ...] = ()
    start: datetime | None = None
    end: datetime | None = None
    fingerprint: str | None = None
    include_archives: bool = False

    def __post_init__(self) -> None:
        if self.start is not None and self.end is not None and as_utc(self.start) > as_utc(self.end):
            raise InvalidCriteria(f"时间范围非法：from({self.start}) 晚于 to({self.end})")

    def matches(self, record: "StoredRecord") -> bool:
        key = record.key
        if self.categories and record.category not in self.categories:
            return False
        if self.src is not None and key.src != self.src:
            return False
        if self.dst is not None and key.dst != self.dst:
            return False
        if self.fingerprint is not None and key.fingerprint != self.fingerprint:
            return False
        if self.start is not None and key.timestamp < as_utc(self.start):
            return False
        if self.end is not None and key.timestamp > as_utc(self.end):
            return False
        return True


@dataclass(frozen=True)
class StoredRecord:
    path: Path
    category: Category
    key: RecordKey
    archived: bool = False


class CategoryStatus(DocumentModel):
    files: int = 0
    bytes: int = 0
    cycles: int = 0


class StoreStatus(DocumentModel):
    root: str
    categories: dict[Category, CategoryStatus]
    total_files: int = 0
    total_bytes: int = 0
    archived_files: int = 0
    archived_bytes: int = 0
    current_pairs: int = 0
    history_pairs: int = 0
    first_timestamp: str | None = None
    last_timestamp: str | None = None
    log_files: int = Field(default=0, ge=0)


@dataclass
class _Tally:
    files: int = 0
    bytes: int = 0
    stamps: set[datetime] = field(default_factory=set)


class MeasurementStore:
    def __init__(self, root: Path, *, before_rename: Callable[[Path], None] | None = None) -> None:
        self.layout = make_layout(root)
        self._before_rename = before_rename
        self._logger = get_logger().bind(category="store")

    @property
    def root(self) -> Path:
        return self.layout.root

    def ensure(self) -> StoreLayout:
        layout = self.layout
        try:
            for d in (layout.current_dir, layout.history_dir, layout.archives_dir, layout.measurements_dir, layout.logs_dir):
                d.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreUnavailable(f"存储目录不可用: {layout.root}（{exc.strerror or exc}）") from exc
        return layout

    # ---- 写入 ----

    def record_path(self, envelope: RecordEnvelope, *, base: Path | None = None) -> Path:
        ts = envelope.timestamp_utc
        name = record_filename(ts, envelope.src, envelope.dst, envelope.fingerprint, envelope.seq)
        return (base or self.layout.measurements_dir) / ts.strftime("%Y-%m-%d") / envelope.category.value / name

    def _coerce(self, envelope: RecordEnvelope | dict[str, Any]) -> RecordEnvelope:
        if isinstance(envelope, RecordEnvelope):
            return envelope
        return validate_document(RecordEnvelope, envelope, source="record")

    def _write(self, path: Path, envelope: RecordEnvelope) -> Path:
        try:
            return write_text_atomic(path, envelope.to_json(), before_rename=self._before_rename)
        except OSError as exc:
            raise StoreUnavailable(f"写入失败: {path}（{exc.strerror or exc}）") from exc

    def store(self, envelope: RecordEnvelope | dict[str, Any]) -> Path:
        env = self._coerce(envelope)
        return self._write(self.record_path(env), env)

    def rotate_showpaths(self, envelope: RecordEnvelope | dict[str, Any]) -> None:
        """上一版 current 变成 history（覆盖更旧的 history），新列表成为 current。"""
        env = self._coerce(envelope)
        if env.category != Category.SHOWPATHS:
            raise SchemaError(f"只有 showpaths 记录可以轮转，实际为 {env.category.value}")
        name = pair_filename(env.src, env.dst)
        current = self.layout.current_dir / name
        history = self.layout.history_dir / name
        try:
            if current.exists():
                history.parent.mkdir(parents=True, exist_ok=True)
                os.replace(current, history)
        except OSError as exc:
            raise StoreUnavailable(f"轮转失败: {current}（{exc.strerror or exc}）") from exc
        self._write(current, env)

    # ---- 读取 ----

    def load(self, path: Path) -> RecordEnvelope:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"无法读取记录: {path}（{exc.strerror or exc}）") from exc
        return validate_json_document(RecordEnvelope, text, source=str(path))

    def _listing(self, directory: Path, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None:
        path = directory / pair_filename(src, dst)
        if not path.exists():
            return None
        return self.load(path)

    def current_listing(self, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None:
        return self._listing(self.layout.current_dir, src, dst)

    def history_listing(self, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None:
        return self._listing(self.layout.history_dir, src, dst)

    def _scan(self, base: Path, *, archived: bool) -> Iterator[StoredRecord]:
        if not base.exists():
            return
        for day_dir in sorted(p for p in base.iterdir() if p.is_dir()):
            for cat_dir in sorted(p for p in day_dir.iterdir() if p.is_dir()):
                try:
                    category = Category(cat_dir.name)
                except ValueError:
                    continue
                for path in sorted(cat_dir.glob("*.json")):
                    key = parse_record_filename(path.name)
                    if key is None:
                        continue
                    yield StoredRecord(path=path, category=category, key=key, archived=archived)

    def iter_records(self, *, include_archives: bool = False) -> Iterator[StoredRecord]:
        yield from self._scan(self.layout.measurements_dir, archived=False)
        if include_archives:
            yield from self._scan(self.layout.archives_dir, archived=True)

    def search(self, criteria: SearchCriteria) -> list[Path]:
        return [r.path for r in self.iter_records(include_archives=criteria.include_archives) if criteria.matches(r)]

    # ---- 数据管理 ----

    def archive(
        self,
        start: datetime | None = None,
        end: datetime | None = None,
        categories: Iterable[Category] = (),
        *,
        dest: Path | None = None,
    ) -> int:
        """把时间范围内的测量移入 archives（或 dest），保持 <日期>/<类别>/ 结构。已归档的不会重复计数。"""
        criteria = SearchCriteria(start=start, end=end, categories=tuple(categories))
        target_root = dest or self.layout.archives_dir
        moved = 0
        for record in list(self.iter_records()):
            if not criteria.matches(record):
                continue
            rel = record.path.relative_to(self.layout.measurements_dir)
            target = target_root / rel
            try:
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.move(str(record.path), str(target))
            except OSError as exc:
                raise IoError(f"归档失败: {record.path}（{exc.strerror or exc}）") from exc
            moved += 1
        self._prune_empty(self.layout.measurements_dir)
        if moved:
            self._logger.info(f"已归档 {moved} 个文件 -> {target_root}")
        return moved

    def purge(self, criteria: SearchCriteria, *, dry_run: bool = False) -> int:
        victims = [r.path for r in self.iter_records(include_archives=criteria.include_archives) if criteria.matches(r)]
        if dry_run:
            return len(victims)
        for path in victims:
            try:
                path.unlink()
            except FileNotFoundError:
                continue
            except OSError as exc:
                raise IoError(f"删除失败: {path}（{exc.strerror or exc}）") from exc
        self._prune_empty(self.layout.measurements_dir)
        self._prune_empty(self.layout.archives_dir)
        if victims:
            self._logger.info(f"已删除 {len(victims)} 个文件")
        return len(victims)

    def _prune_empty(self, base: Path) -> None:
        if not base.exists():
            return
        for d in sorted((p for p in base.rglob("*") if p.is_dir()), key=lambda p: len(p.parts), reverse=True):
            try:
                d.rmdir()
            except OSError:
                pass

    def status(self) -> StoreStatus:
        tallies: dict[Category, _Tally] = {c: _Tally() for c in CATEGORIES}
        archived = _Tally()
        stamps: list[datetime] = []
        for record in self.iter_records(include_archives=True):
            size = record.path.stat().st_size
            tally = archived if record.archived else tallies[record.category]
            tally.files += 1
            tally.bytes += size
            tally.stamps.add(record.key.timestamp)
            stamps.append(record.key.timestamp)
        live_files = sum(t.files for t in tallies.values())
        live_bytes = sum(t.bytes for t in tallies.values())
        return StoreStatus(
            root=str(self.root),
            categories={c: CategoryStatus(files=t.files, bytes=t.bytes, cycles=len(t.stamps)) for c, t in tallies.items()},
            total_files=live_files + archived.files,
            total_bytes=live_bytes + archived.bytes,
            archived_files=archived.files,
            archived_bytes=archived.bytes,
            current_pairs=_count_json(self.layout.current_dir),
            history_pairs=_count_json(self.layout.history_dir),
            first_timestamp=min(stamps).strftime("%Y-%m-%dT%H:%M:%SZ") if stamps else None,
            last_timestamp=max(stamps).strftime("%Y-%m-%dT%H:%M:%SZ") if stamps else None,
            log_files=len(self.cycle_logs()),
        )

    # ---- 周期锁与日志 ----

    @contextmanager
    def cycle_lock(self, stale_after_s: float) -> Iterator[bool]:
        """拿到锁时 yield True；上一周期仍在运行时 yield False（调用方应跳过本次）。"""
        self.ensure()
        lock = self.layout.root / LOCK_NAME
        acquired = self._try_lock(lock, stale_after_s)
        try:
            yield acquired
        finally:
            if acquired:
                try:
                    lock.unlink()
                except FileNotFoundError:
                    pass

    def _try_lock(self, lock: Path, stale_after_s: float) -> bool:
        for _ in range(2):
            try:
                fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                try:
                    age = time.time() - lock.stat().st_mtime
                except FileNotFoundError:
                    continue
                if age <= stale_after_s:
                    return False
                self._logger.warning(f"接管过期的周期锁（{age:.0f}s）: {lock}")
                try:
                    lock.unlink()
                except FileNotFoundError:
                    pass
                continue
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(f"{os.getpid()}\n")
            return True
        return False

    def cycle_log_path(self, started: datetime) -> Path:
        return self.layout.logs_dir / f"cycle-{compact_utc(started)}.log"

    def cycle_logs(self) -> list[Path]:
        if not self.layout.logs_dir.exists():
            return []
        return sorted(self.layout.logs_dir.glob("cycle-*.log"))

    def latest_cycle_log(self) -> Path | None:
        logs = self.cycle_logs()
        return logs[-1] if logs else None


def _count_json(directory: Path) -> int:
    return len(list(directory.glob("*.json"))) if directory.exists() else 0
