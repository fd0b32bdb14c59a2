"""模型 ↔ JSON 文档（带 schema_version），供报告复现使用。"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Final, Literal, Union

import numpy as np
from pydantic import Field

from pathml.domain.errors import IoError, SchemaError
from pathml.schemas.common import DocumentModel, validate_json_document
from pathml.state import write_text_atomic

from .boosting import BoostingModel
from .forest import ForestModel
from .iforest import IForestModel, IsolationTree
from .linreg import LinearModel
from .tree import DecisionTree

MODEL_SCHEMA_VERSION: Final[int] = 1

Model = LinearModel | DecisionTree | ForestModel | BoostingModel | IForestModel


class TreeDocument(DocumentModel):
    kind: Literal["tree"] = "tree"
    criterion: Literal["gini", "mse"]
    n_outputs: int = Field(ge=1)
    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[list[float]]


class LinearDocument(DocumentModel):
    kind: Literal["linreg"] = "linreg"
    coef: list[float]
    intercept: float
    ridge_lambda: float = Field(ge=0)


class ForestDocument(DocumentModel):
    kind: Literal["forest"] = "forest"
    task: Literal["classify", "regress"]
    classes: list[int | float]
    n_features: int = Field(ge=0)
    trees: list[TreeDocument]


class BoostingDocument(DocumentModel):
    kind: Literal["boosting"] = "boosting"
    learning_rate: float = Field(gt=0)
    base: LinearDocument | None = None
    base_value: float
    trees: list[TreeDocument]


class IsolationTreeDocument(DocumentModel):
    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    size: list[int]
    path: list[float]


class IForestDocument(DocumentModel):
    kind: Literal["iforest"] = "iforest"
    subsample: int = Field(ge=2)
    n_features: int = Field(ge=0)
    trees: list[IsolationTreeDocument]


AnyModelDocument = Annotated[
    Union[TreeDocument, LinearDocument, ForestDocument, BoostingDocument, IForestDocument],
    Field(discriminator="kind"),
]


class ModelDocument(DocumentModel):
    schema_version: int = MODEL_SCHEMA_VERSION
    model: AnyModelDocument


def _tree_doc(tree: DecisionTree) -> TreeDocument:
    return TreeDocument(
        criterion=tree.criterion,
        n_outputs=tree.n_outputs,
        feature=tree.feature.tolist(),
        threshold=tree.threshold.tolist(),
        left=tree.left.tolist(),
        right=tree.right.tolist(),
        value=tree.value.tolist(),
    )


def _tree(doc: TreeDocument) -> DecisionTree:
    return DecisionTree(
        criterion=doc.criterion,
        n_outputs=doc.n_outputs,
        feature=np.array(doc.feature, dtype=np.int64),
        threshold=np.array(doc.threshold, dtype=float),
        left=np.array(doc.left, dtype=np.int64),
        right=np.array(doc.right, dtype=np.int64),
        value=np.array(doc.value, dtype=float).reshape(len(doc.value), doc.n_outputs),
    )


def _linear_doc(model: LinearModel) -> LinearDocument:
    return LinearDocument(coef=model.coef.tolist(), intercept=model.intercept, ridge_lambda=model.ridge_lambda)


def _linear(doc: LinearDocument) -> LinearModel:
    return LinearModel(coef=np.array(doc.coef, dtype=float), intercept=doc.intercept, ridge_lambda=doc.ridge_lambda)


def to_document(model: Model) -> ModelDocument:
    match model:
        case LinearModel():
            body: AnyModelDocument = _linear_doc(model)
        case DecisionTree():
            body = _tree_doc(model)
        case ForestModel():
            body = ForestDocument(
                task=model.task,
                classes=model.classes.tolist(),
                n_features=model.n_features,
                trees=[_tree_doc(t) for t in model.trees],
            )
        case BoostingModel():
            body = BoostingDocument(
                learning_rate=model.learning_rate,
                base=_linear_doc(model.base) if model.base is not None else None,
                base_value=model.base_value,
                trees=[_tree_doc(t) for t in model.trees],
            )
        case IForestModel():
            body = IForestDocument(
                subsample=model.subsample,
                n_features=model.n_features,
                trees=[
                    IsolationTreeDocument(
                        feature=t.feature.tolist(),
                        threshold=t.threshold.tolist(),
                        left=t.left.tolist(),
                        right=t.right.tolist(),
                        size=t.size.tolist(),
                        path=t.path.tolist(),
                    )
                    for t in model.trees
                ],
            )
        case _:
            raise SchemaError(f"不支持序列化的模型类型: {type(model).__name__}")
    return ModelDocument(model=body)


def from_document(doc: ModelDocument) -> Model:
    if doc.schema_version > MODEL_SCHEMA_VERSION:
        raise SchemaError(f"不支持的模型 schema_version: {doc.schema_version}")
    body = doc.model
    match body:
        case LinearDocument():
            return _linear(body)
        case TreeDocument():
            return _tree(body)
        case ForestDocument():
            return ForestModel(
                task=body.task,
                classes=np.array(body.classes),
                n_features=body.n_features,
                trees=[_tree(t) for t in body.trees],
            )
        case BoostingDocument():
            return BoostingModel(
                learning_rate=body.learning_rate,
                base=_linear(body.base) if body.base is not None else None,
                base_value=body.base_value,
                trees=[_tree(t) for t in body.trees],
            )
        case IForestDocument():
            return IForestModel(
                subsample=body.subsample,
                n_features=body.n_features,
                trees=[
                    IsolationTree(
                        feature=np.array(t.feature, dtype=np.int64),
                        threshold=np.array(t.threshold, dtype=float),
                        left=np.array(t.left, dtype=np.int64),
                        right=np.array(t.right, dtype=np.int64),
                        size=np.array(t.size, dtype=np.int64),
                        path=np.array(t.path, dtype=float),
                    )
                    for t in body.trees
                ],
            )
    raise SchemaError(f"未知的模型文档: {type(body).__name__}")


def dumps_model(model: Model) -> str:
    return to_document(model).model_dump_json() + "\n"


def loads_model(text: str, *, source: str = "model") -> Model:
    return from_document(validate_json_document(ModelDocument, text, source=source))


def save_model(model: Model, path: Path) -> Path:
    try:
        return write_text_atomic(path, dumps_model(model))
    except OSError as exc:
        raise IoError(f"无法写入模型文件: {path}（{exc.strerror or exc}）") from exc


def load_model(path: Path) -> Model:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"无法读取模型文件: {path}（{exc.strerror or exc}）") from exc
    return loads_model(text, source=str(path))
