from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    degenerate: bool = False

    @property
    def confusion(self):
        return self.tp, self.fp, self.fn, self.tn


def compute_metrics(truth, predicted, positive=1) -> Metrics:
    """Precision, recall and F1 for the ``positive`` class.

    Rates with a zero denominator are reported as 0 and set ``degenerate``.
    """
    t = np.asarray(truth)
    p = np.asarray(predicted)
    if t.shape != p.shape:
        raise ParameterError(f"truth and predictions differ in length ({t.size} vs {p.size})")
    if t.size == 0:
        raise ParameterError("cannot score an empty prediction set")
    tpos, ppos = t == positive, p == positive
    tp = int(np.sum(tpos & ppos))
    fp = int(np.sum(~tpos & ppos))
    fn = int(np.sum(tpos & ~ppos))
    tn = int(t.size - tp - fp - fn)
    degenerate = False
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return Metrics(precision, recall, f1, tp, fp, fn, tn, degenerate)
