"""Repeated shuffled train/validate protocol and its reports.

Each cycle draws a fresh stratified split, standardizes with statistics from
the training rows only, grid-searches hyperparameters inside the training
rows, refits on all of them and scores the held-out rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._rng import derive_seed
from .classifiers import DEFAULT_GRIDS, DISPLAY_NAMES, fit_classifier
from .classifiers.grid import expand_grid, grid_search, refit_best
from .dataset import Corpus
from .errors import CrackleError, ParameterError, SplitError
from .features import FEATURE_NAMES, fit_scaler
from .metrics import Metrics, compute_metrics

__all__ = [
    "Metrics", "compute_metrics", "EvalReport", "split_indices", "stratified_split",
    "run_protocol", "univariate_feature_scores", "summarize",
]

METRIC_NAMES = ("precision", "recall", "f1")


def split_indices(y, train_fraction=0.7, seed=0):
    """Per-class proportional split; returns sorted (train, validation) indices."""
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must be in (0, 1), got {train_fraction}")
    y = np.asarray(y)
    rng = np.random.default_rng(derive_seed(seed, 0x5917))
    train, val = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            raise SplitError(f"class {cls} has {idx.size} samples; need at least 2 to split")
        idx = rng.permutation(idx)
        n_train = min(max(int(round(train_fraction * idx.size)), 1), idx.size - 1)
        train.append(idx[:n_train])
        val.append(idx[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def stratified_split(corpus: Corpus, train_fraction: float = 0.7, seed: int = 0):
    tr, va = split_indices(corpus.y, train_fraction, seed)
    return corpus.subset(tr), corpus.subset(va)


@dataclass
class EvalReport:
    per_cycle: list
    config: dict
    chosen_params: list = field(default_factory=list)

    @property
    def aggregate(self):
        """Mean and population std across cycles, per metric."""
        out = {}
        for name in METRIC_NAMES:
            v = np.array([getattr(m, name) for m in self.per_cycle])
            out[name] = (float(v.mean()), float(v.std()))
        return out

    @property
    def classifier(self):
        return self.config.get("classifier", "")

    def table_row(self):
        agg = self.aggregate
        return {
            "classifier": DISPLAY_NAMES.get(self.classifier, self.classifier),
            **{k: {"mean": agg[k][0], "std": agg[k][1]} for k in METRIC_NAMES},
        }

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "table": self.table_row(),
            "per_cycle": [
                {**asdict(m), "params": p}
                for m, p in zip(self.per_cycle, self.chosen_params or [{}] * len(self.per_cycle))
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", "precision", "recall", "f1", "precision_std", "recall_std",
                    "f1_std", "tp", "fp", "fn", "tn", "degenerate", "params"])
        params = self.chosen_params or [{}] * len(self.per_cycle)
        for i, (m, p) in enumerate(zip(self.per_cycle, params)):
            w.writerow([i, repr(m.precision), repr(m.recall), repr(m.f1), "", "", "",
                        m.tp, m.fp, m.fn, m.tn, int(m.degenerate),
                        json.dumps(p, sort_keys=True)])
        agg = self.aggregate
        tot = np.sum([m.confusion for m in self.per_cycle], axis=0)
        w.writerow(["aggregate", *(repr(agg[k][0]) for k in METRIC_NAMES),
                    *(repr(agg[k][1]) for k in METRIC_NAMES), *(int(t) for t in tot),
                    sum(m.degenerate for m in self.per_cycle), ""])
        return buf.getvalue()


def _label_error(err, cycle):
    err.cycle = cycle
    err.args = (f"cycle {cycle}: {err}",)
    return err


def run_protocol(corpus: Corpus, classifier_kind: str, grid=None, cycles: int = 100,
                 train_fraction: float = 0.7, seed: int = 0, folds: int = 3,
                 feature_dims=None) -> EvalReport:
    if cycles < 1:
        raise ParameterError(f"cycles must be positive, got {cycles}")
    grid = DEFAULT_GRIDS[classifier_kind] if grid is None else grid
    points = expand_grid(grid)
    dims = list(range(corpus.X.shape[1])) if feature_dims is None else list(feature_dims)
    X = corpus.X[:, dims]
    y = corpus.y
    per_cycle, chosen = [], []
    for c in range(cycles):
        cseed = derive_seed(seed, c)
        try:
            tr, va = split_indices(y, train_fraction, cseed)
            scaler = fit_scaler(X[tr])
            Ztr, Zva = scaler.transform(X[tr]), scaler.transform(X[va])
            if len(points) > 1:
                gs = grid_search(Ztr, y[tr], classifier_kind, points, folds, cseed)
                params, model = refit_best(classifier_kind, Ztr, y[tr], points, gs, seed=cseed)
            else:
                params = points[0]
                model = fit_classifier(classifier_kind, Ztr, y[tr], params, seed=cseed)
            pred, _ = model.predict(Zva)
        except CrackleError as err:
            raise _label_error(err, c) from None
        per_cycle.append(compute_metrics(y[va], pred))
        chosen.append(params)
    config = {
        "classifier": classifier_kind,
        "grid": grid if isinstance(grid, dict) else list(points),
        "cycles": cycles,
        "train_fraction": train_fraction,
        "folds": folds,
        "seed": seed,
        "features": [FEATURE_NAMES[d] if d < len(FEATURE_NAMES) else str(d) for d in dims],
    }
    return EvalReport(per_cycle, config, chosen)


def univariate_feature_scores(corpus: Corpus, classifier_kind: str = "svm_rbf",
                              cycles: int = 100, seed: int = 0, grid=None,
                              train_fraction: float = 0.7, folds: int = 3):
    """Run the protocol once per single feature; returns {feature: EvalReport}."""
    return {
        name: run_protocol(corpus, classifier_kind, grid, cycles, train_fraction, seed,
                           folds, feature_dims=[d])
        for d, name in enumerate(FEATURE_NAMES[: corpus.X.shape[1]])
    }


def summarize(reports) -> str:
    """Table-1 style text: classifier, precision, recall, F1 as mean ± std in percent."""
    lines = [f"{'Classifier':<32}{'Precision':>16}{'Recall':>16}{'F1-Score':>16}"]
    for r in reports:
        agg = r.aggregate
        cells = [f"{100 * agg[k][0]:.1f} ± {100 * agg[k][1]:.1f}" for k in METRIC_NAMES]
        lines.append(f"{DISPLAY_NAMES.get(r.classifier, r.classifier):<32}"
                     + "".join(f"{c:>16}" for c in cells))
    return "\n".join(lines)
