"""Stratified random baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._rng import uniform_at
from ..errors import ParameterError


@dataclass(frozen=True)
class DummyModel:
    class_priors: tuple  # (normal, crackle)
    rng_seed: int = 0

    def predict(self, X, first_draw=0):
        """Draw one label per row; row ``i`` uses draw index ``first_draw + i``."""
        n = np.atleast_2d(np.asarray(X)).shape[0]
        u = uniform_at(self.rng_seed, np.arange(first_draw, first_draw + n))
        label = (u < self.class_priors[1]).astype(np.int64)
        conf = np.where(label == 1, self.class_priors[1], self.class_priors[0])
        return label, conf


def train_dummy(y, seed: int = 0) -> DummyModel:
    y = np.asarray(y)
    if y.size == 0:
        raise ParameterError("dummy classifier needs at least one label")
    p = float(np.mean(y > 0))
    return DummyModel((1.0 - p, p), int(seed))


def dummy_predict(model: DummyModel, x=None, draw_index: int = 0) -> int:
    label, _ = model.predict(np.zeros((1, 1)), first_draw=draw_index)
    return int(label[0])
