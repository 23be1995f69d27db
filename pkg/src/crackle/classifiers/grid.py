"""Exhaustive hyperparameter search by stratified k-fold cross-validation."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .._rng import derive_seed
from ..errors import ConvergenceError, FoldingError, ParameterError
from ..metrics import compute_metrics
from . import fit_classifier

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridResult:
    best_params: dict
    best_score: float
    n_fits: int
    scores: tuple  # mean F1 per grid point, in grid order; nan where a fit did not converge


def expand_grid(param_grid):
    """A dict of axes becomes its Cartesian product in key order; a list passes through."""
    if isinstance(param_grid, dict):
        keys = list(param_grid)
        points = [dict(zip(keys, vals)) for vals in itertools.product(*param_grid.values())]
    else:
        points = [dict(p) for p in param_grid]
    if not points:
        raise ParameterError("parameter grid is empty")
    return points


def stratified_folds(y, folds, seed):
    """Fold index per sample; each class is shuffled then dealt round-robin.

    The deal continues across classes so fold sizes differ by at most one.
    """
    y = np.asarray(y)
    if folds < 2:
        raise ParameterError(f"need at least 2 folds, got {folds}")
    rng = np.random.default_rng(derive_seed(seed, 0xF01D))
    assign = np.empty(y.size, dtype=np.int64)
    dealt = 0
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < folds:
            raise FoldingError(
                f"class {cls} has {idx.size} samples, fewer than {folds} folds; use fewer folds"
            )
        idx = rng.permutation(idx)
        assign[idx] = (dealt + np.arange(idx.size)) % folds
        dealt += idx.size
    return assign


def grid_search(X, y, kind, param_grid, folds=3, seed=0, fit=fit_classifier) -> GridResult:
    """Pick the grid point with the best mean crackle-class F1; ties go to the earlier point.

    A grid point whose fit hits the solver's iteration cap in any fold is
    scored nan and never selected; if no point converges the last error is raised.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    points = expand_grid(param_grid)
    assign = stratified_folds(y, folds, seed)
    scores = []
    n_fits = 0
    failure = None
    for params in points:
        f1s = []
        for f in range(folds):
            tr, te = assign != f, assign == f
            n_fits += 1
            try:
                model = fit(kind, X[tr], y[tr], params, seed=derive_seed(seed, f))
            except ConvergenceError as err:
                log.debug("grid point %s did not converge: %s", params, err)
                failure = err
                f1s.append(math.nan)
                continue
            pred, _ = model.predict(X[te])
            f1s.append(compute_metrics(y[te], pred).f1)
        scores.append(float(np.mean(f1s)))
    if all(math.isnan(s) for s in scores):
        raise failure
    best = int(np.nanargmax(scores))
    return GridResult(points[best], scores[best], n_fits, tuple(scores))


def refit_best(kind, X, y, points, result: GridResult, seed=0, fit=fit_classifier):
    """Fit on all of ``X`` with the winning grid point.

    The full training set can need more solver iterations than any fold did;
    if the winner's refit does not converge, the next converged point in
    score order is tried. Returns ``(params, model)``.
    """
    ranked = sorted((i for i, s in enumerate(result.scores) if not math.isnan(s)),
                    key=lambda i: -result.scores[i])  # stable, so ties keep grid order
    failure = None
    for i in ranked:
        try:
            return points[i], fit(kind, X, y, points[i], seed=seed)
        except ConvergenceError as err:
            log.info("refit with %s did not converge, trying the next grid point", points[i])
            failure = err
    raise failure
