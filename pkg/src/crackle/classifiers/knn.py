"""Brute-force k-nearest-neighbor classification with Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    X: np.ndarray
    y: np.ndarray

    def neighbors(self, Q):
        """Indices of the k nearest training points per query row.

        Equal distances resolve to the lower training index.
        """
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict(self, Q):
        votes = self.y[self.neighbors(Q)].sum(axis=1)
        label = (2 * votes > self.k).astype(np.int64)  # even split goes to normal
        return label, np.maximum(votes, self.k - votes) / self.k


def train_knn(X, y, k: int = 3) -> KnnModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = (np.asarray(y) > 0).astype(np.int64)
    if X.shape[0] != y.shape[0]:
        raise ParameterError("X and y lengths differ")
    if not 1 <= k <= X.shape[0]:
        raise ParameterError(f"k={k} must be between 1 and the sample count {X.shape[0]}")
    return KnnModel(int(k), X.copy(), y.copy())


def knn_predict(model: KnnModel, x):
    x = x.as_array() if hasattr(x, "as_array") else x
    label, conf = model.predict(np.asarray(x, dtype=np.float64)[None, :])
    return int(label[0]), float(conf[0])
