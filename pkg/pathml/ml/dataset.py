from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pathml.domain.errors import InsufficientData, InvalidFraction, LengthMismatch, NonFiniteData
from pathml.transform.windows import FeatureSample

DEFAULT_TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class Dataset:
    """X 的行与 y、t_index、fingerprint 一一对应；t_index 是样本目标所在的 cycle。"""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = ()
    t_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    fingerprint: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=object))

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, len(self.feature_names))
        y = np.asarray(self.y)
        n = X.shape[0]
        if y.shape[0] != n:
            raise LengthMismatch(f"X 与 y 行数不一致: {n} != {y.shape[0]}")
        if not np.isfinite(X).all() or (y.dtype.kind == "f" and not np.isfinite(y).all()):
            raise NonFiniteData("数据集中存在 NaN/Inf")
        if self.feature_names and len(self.feature_names) != X.shape[1]:
            raise LengthMismatch(f"特征名数量 {len(self.feature_names)} 与列数 {X.shape[1]} 不一致")
        t = np.asarray(self.t_index, dtype=np.int64)
        if t.size == 0:
            t = np.arange(n, dtype=np.int64)
        fp = np.asarray(self.fingerprint, dtype=object)
        if fp.size == 0:
            fp = np.full(n, "", dtype=object)
        if t.shape[0] != n or fp.shape[0] != n:
            raise LengthMismatch("t_index / fingerprint 与样本数不一致")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t_index", t)
        object.__setattr__(self, "fingerprint", fp)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{i}" for i in range(X.shape[1])))

    def __len__(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    def subset(self, index: np.ndarray | slice) -> "Dataset":
        return Dataset(
            X=self.X[index],
            y=self.y[index],
            feature_names=self.feature_names,
            t_index=self.t_index[index],
            fingerprint=self.fingerprint[index],
        )

    def with_features(self, X: np.ndarray, feature_names: Sequence[str]) -> "Dataset":
        return Dataset(X=X, y=self.y, feature_names=tuple(feature_names), t_index=self.t_index, fingerprint=self.fingerprint)

    def with_labels(self, y: np.ndarray) -> "Dataset":
        return Dataset(X=self.X, y=y, feature_names=self.feature_names, t_index=self.t_index, fingerprint=self.fingerprint)


def dataset_from_samples(
    samples: Sequence[FeatureSample],
    feature_names: Sequence[str] = (),
    *,
    label_dtype: type = float,
) -> Dataset:
    """按 t_index 稳定排序；同一时刻的样本保持输入顺序。"""
    if not samples:
        width = len(feature_names)
        return Dataset(X=np.zeros((0, width)), y=np.zeros(0, dtype=label_dtype), feature_names=tuple(feature_names))
    order = sorted(range(len(samples)), key=lambda i: samples[i].t_index)
    ordered = [samples[i] for i in order]
    return Dataset(
        X=np.array([s.features for s in ordered], dtype=float),
        y=np.array([s.label for s in ordered], dtype=label_dtype),
        feature_names=tuple(feature_names),
        t_index=np.array([s.t_index for s in ordered], dtype=np.int64),
        fingerprint=np.array([s.fingerprint for s in ordered], dtype=object),
    )


@dataclass(frozen=True, slots=True)
class SplitSpec:
    train_fraction: float = DEFAULT_TRAIN_FRACTION

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidFraction(f"train_fraction 必须在 (0, 1) 内: {self.train_fraction}")


def temporal_split(dataset: Dataset, spec: SplitSpec | None = None) -> tuple[Dataset, Dataset]:
    """
    不打乱。切分点取 floor(n × fraction)，再向后挪到 t_index 的边界，
    保证训练集的每个样本都严格早于测试集；挪到末尾时改为向前挪。
    """
    spec = spec or SplitSpec()
    n = len(dataset)
    order = np.argsort(dataset.t_index, kind="stable")
    ordered = dataset.subset(order)
    t = ordered.t_index
    cut = int(np.floor(n * spec.train_fraction + 1e-9))
    forward = cut
    while 0 < forward < n and t[forward] == t[forward - 1]:
        forward += 1
    if forward < n:
        cut = forward
    else:
        while 0 < cut < n and t[cut] == t[cut - 1]:
            cut -= 1
    if cut <= 0 or cut >= n:
        raise InsufficientData(
            f"样本不足以做时间切分（n={n}）",
            details={"required": 2, "actual": n},
        )
    return ordered.subset(slice(0, cut)), ordered.subset(slice(cut, n))
