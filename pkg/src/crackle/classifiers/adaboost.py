"""Discrete AdaBoost over depth-1 decision stumps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TrainingError

# stand-in error for a perfect stump, keeps its stage weight finite
MIN_ERROR = 1e-10


@dataclass(frozen=True, eq=False)
class AdaBoostModel:
    dims: np.ndarray
    thresholds: np.ndarray
    polarities: np.ndarray
    stage_weights: np.ndarray
    errors: np.ndarray  # weighted error of each stump at its round

    def __len__(self):
        return len(self.stage_weights)

    def stump_outputs(self, X):
        """(n_queries, n_stumps) matrix of +-1 stump votes."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if not len(self):
            return np.zeros((X.shape[0], 0))
        margin = self.polarities * (X[:, self.dims] - self.thresholds)
        return np.where(margin > 0, 1.0, -1.0)

    def score(self, X):
        # row-wise sum, not a matrix product, so batching never changes a score
        return (self.stump_outputs(X) * self.stage_weights).sum(axis=1)

    def predict(self, X):
        s = self.score(X)
        total = self.stage_weights.sum()
        conf = np.abs(s) / total if total > 0 else np.zeros_like(s)
        return (s > 0).astype(np.int64), conf


def best_stump(X, y, w):
    """Stump minimizing weighted error over every dimension and midpoint.

    ``y`` is in {-1, +1}; ``w`` sums to 1. Returns (dim, threshold, polarity, error)
    or None when no dimension has two distinct values.
    """
    best = None
    for d in range(X.shape[1]):
        order = np.argsort(X[:, d], kind="stable")
        xs, ys, ws = X[order, d], y[order], w[order]
        cut = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # split between cut-1 and cut
        if not cut.size:
            continue
        pos_below = np.cumsum(np.where(ys > 0, ws, 0.0))[cut - 1]
        neg_below = np.cumsum(np.where(ys < 0, ws, 0.0))[cut - 1]
        neg_total = ws[ys < 0].sum()
        # polarity +1 calls everything above the threshold positive
        err_up = pos_below + (neg_total - neg_below)
        err_down = 1.0 - err_up
        for pol, err in ((1, err_up), (-1, err_down)):
            m = int(np.argmin(err))
            e = float(err[m])
            if best is None or e < best[3]:
                thr = 0.5 * (xs[cut[m] - 1] + xs[cut[m]])
                best = (d, thr, pol, e)
    return best


def train_adaboost(X, y, rounds: int = 50) -> AdaBoostModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    ys = np.where(np.asarray(y) > 0, 1.0, -1.0)
    if rounds < 1:
        raise ParameterError(f"rounds must be positive, got {rounds}")
    if X.shape[0] != ys.shape[0]:
        raise ParameterError("X and y lengths differ")
    if X.shape[0] < 2 or np.all(ys == ys[0]):
        raise TrainingError("AdaBoost training needs samples from both classes")

    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    dims, thrs, pols, alphas, errs = [], [], [], [], []
    for _ in range(rounds):
        stump = best_stump(X, ys, w)
        if stump is None:
            break
        d, thr, pol, eps = stump
        # recompute from the chosen stump; cumulative sums drift by ~1e-16
        h = np.where(pol * (X[:, d] - thr) > 0, 1.0, -1.0)
        eps = float(w[h != ys].sum())
        if eps >= 0.5:
            break
        perfect = eps < MIN_ERROR
        e = max(eps, MIN_ERROR)
        alpha = 0.5 * math.log((1.0 - e) / e)
        dims.append(d), thrs.append(thr), pols.append(pol), alphas.append(alpha), errs.append(eps)
        if perfect:
            break
        w = w * np.exp(-alpha * ys * h)
        w /= w.sum()
    return AdaBoostModel(
        np.array(dims, dtype=np.int64),
        np.array(thrs, dtype=np.float64),
        np.array(pols, dtype=np.int64),
        np.array(alphas, dtype=np.float64),
        np.array(errs, dtype=np.float64),
    )


def adaboost_predict(model: AdaBoostModel, x):
    x = x.as_array() if hasattr(x, "as_array") else x
    label, conf = model.predict(np.asarray(x, dtype=np.float64)[None, :])
    return int(label[0]), float(conf[0])
