"""The five crackle classifiers behind one training entry point."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .adaboost import AdaBoostModel, adaboost_predict, train_adaboost
from .dummy import DummyModel, dummy_predict, train_dummy
from .knn import KnnModel, knn_predict, train_knn
from .svm import SvmModel, svm_decision, train_svm

KINDS = ("svm_rbf", "knn", "adaboost", "svm_linear", "dummy")

DISPLAY_NAMES = {
    "svm_rbf": "SVM (RBF)",
    "knn": "KNN",
    "adaboost": "AdaBoost (Decision Stump)",
    "svm_linear": "Linear SVM",
    "dummy": "Dummy classifier (Stratified)",
}

_C_AXIS = [float(v) for v in 2.0 ** np.linspace(5, 15, 8)]
_GAMMA_AXIS = [float(v) for v in 2.0 ** np.linspace(-7, 0, 8)]

DEFAULT_GRIDS = {
    "svm_rbf": {"C": _C_AXIS, "gamma": _GAMMA_AXIS},
    "svm_linear": {"C": [float(v) for v in 2.0 ** np.linspace(-5, 5, 8)]},
    "knn": {"k": [2, 3, 4]},
    "adaboost": {"rounds": [50]},
    "dummy": {},
}

DEFAULT_PARAMS = {
    "svm_rbf": {"C": 1000.0, "gamma": 0.2},
    "svm_linear": {"C": 1.0},
    "knn": {"k": 3},
    "adaboost": {"rounds": 50},
    "dummy": {},
}


def fit_classifier(kind, X, y, params=None, seed=0):
    """Train one classifier of ``kind`` on scaled features."""
    p = dict(DEFAULT_PARAMS.get(kind, {}))
    p.update(params or {})
    if kind == "svm_rbf":
        return train_svm(X, y, C=p["C"], kernel="rbf", gamma=p["gamma"])
    if kind == "svm_linear":
        return train_svm(X, y, C=p["C"], kernel="linear", gamma=1.0)
    if kind == "knn":
        return train_knn(X, y, k=int(p["k"]))
    if kind == "adaboost":
        return train_adaboost(X, y, rounds=int(p["rounds"]))
    if kind == "dummy":
        return train_dummy(y, seed=seed)
    raise ParameterError(f"unknown classifier {kind!r}; expected one of {KINDS}")


__all__ = [
    "KINDS", "DISPLAY_NAMES", "DEFAULT_GRIDS", "DEFAULT_PARAMS", "fit_classifier",
    "SvmModel", "train_svm", "svm_decision",
    "KnnModel", "train_knn", "knn_predict",
    "AdaBoostModel", "train_adaboost", "adaboost_predict",
    "DummyModel", "train_dummy", "dummy_predict",
]
