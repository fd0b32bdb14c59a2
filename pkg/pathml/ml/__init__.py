"""基线模型与评估指标：线性回归、CART、随机森林、梯度提升、孤立森林。"""

from .boosting import BoostingModel, BoostingParams, fit_tree_ensemble_regressor
from .dataset import Dataset, SplitSpec, dataset_from_samples, temporal_split
from .forest import ForestModel, ForestParams, fit_forest, predict_forest, predict_forest_proba
from .iforest import IForestModel, IForestParams, anomaly_score, average_path_length, fit_iforest
from .linreg import LinearModel, fit_linreg, predict_linreg
from .metrics import accuracy, auc_roc, confusion_matrix, f1, mae, precision, recall
from .tree import DecisionTree, TreeParams, fit_tree

__all__ = [
    "BoostingModel",
    "BoostingParams",
    "Dataset",
    "DecisionTree",
    "ForestModel",
    "ForestParams",
    "IForestModel",
    "IForestParams",
    "LinearModel",
    "SplitSpec",
    "TreeParams",
    "accuracy",
    "anomaly_score",
    "auc_roc",
    "average_path_length",
    "confusion_matrix",
    "dataset_from_samples",
    "f1",
    "fit_forest",
    "fit_iforest",
    "fit_linreg",
    "fit_tree",
    "fit_tree_ensemble_regressor",
    "mae",
    "precision",
    "predict_forest",
    "predict_forest_proba",
    "predict_linreg",
    "recall",
    "temporal_split",
]
