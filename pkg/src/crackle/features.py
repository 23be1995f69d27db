"""Per-window feature vector and training-set standardization.

The five dimensions, in persisted order: variance, amplitude range,
total variation of the whole window (``sma_coarse``), the largest total
variation over short sub-windows (``sma_fine``), and the mean DFT magnitude.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, fields

import numpy as np

from . import fft as _fft
from .audio_io import Window
from .errors import DegenerateInputError, InsufficientDataError, ParameterError

FEATURE_NAMES = ("variance", "range", "sma_coarse", "sma_fine", "spectrum_mean")
N_FEATURES = len(FEATURE_NAMES)
SUBWINDOW_LEN = 256
SUBWINDOW_STRIDE = 128


@dataclass(frozen=True)
class FeatureVector:
    variance: float
    range: float
    sma_coarse: float
    sma_fine: float
    spectrum_mean: float
    scaled: bool = False

    @classmethod
    def from_array(cls, values, scaled=False):
        v = [float(x) for x in values]
        if len(v) != N_FEATURES:
            raise ParameterError(f"expected {N_FEATURES} values, got {len(v)}")
        return cls(*v, scaled=scaled)

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)[:N_FEATURES]])


@dataclass(frozen=True)
class Spectrum:
    """Magnitude spectrum with the zero-frequency bin at index ``len // 2``."""

    magnitudes: np.ndarray


def _samples(window):
    s = window.samples if isinstance(window, Window) else window
    return np.asarray(s, dtype=np.float64)


def variance(window) -> float:
    x = _samples(window)
    x = x - x[0]  # shift first so constant input gives exactly 0
    return float(np.mean((x - x.mean()) ** 2))


def amplitude_range(window) -> float:
    x = _samples(window)
    return float(x.max() - x.min())


def sma_coarse(signal) -> float:
    x = _samples(signal)
    if x.size < 2:
        raise DegenerateInputError(f"sma_coarse needs at least 2 samples, got {x.size}")
    return math.fsum(np.abs(np.diff(x)).tolist())


def _subwindow_starts(n, subwindow_len, subwindow_stride):
    if subwindow_len < 2 or subwindow_stride < 1:
        raise ParameterError(
            f"need subwindow_len >= 2 and stride >= 1, got {subwindow_len}, {subwindow_stride}"
        )
    if subwindow_len > n:
        raise ParameterError(f"subwindow_len {subwindow_len} exceeds window length {n}")
    return np.arange(0, n - subwindow_len + 1, subwindow_stride)


def sma_fine(window, subwindow_len: int = SUBWINDOW_LEN,
             subwindow_stride: int = SUBWINDOW_STRIDE) -> float:
    x = _samples(window)
    return float(_sma_fine_rows(x[None, :], subwindow_len, subwindow_stride)[0])


def _sma_fine_rows(x, subwindow_len, subwindow_stride):
    starts = _subwindow_starts(x.shape[1], subwindow_len, subwindow_stride)
    # sub-window [s, s+L) holds the L-1 differences d[s .. s+L-2]. Sums are
    # correctly rounded (fsum), so a sub-window can never out-sum the whole window.
    m = subwindow_len - 1
    out = np.empty(x.shape[0])
    for i, d in enumerate(np.abs(np.diff(x, axis=1)).tolist()):
        out[i] = max(math.fsum(d[s:s + m]) for s in starts.tolist())
    return out


def dft_magnitudes(window) -> Spectrum:
    x = _samples(window)
    return Spectrum(_fft.fftshift(np.abs(_fft.fft(x))))


def spectrum_mean(spectrum) -> float:
    m = spectrum.magnitudes if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if m.size == 0:
        raise DegenerateInputError("empty spectrum")
    return float(np.mean(m))


def extract_features(window, subwindow_len=SUBWINDOW_LEN,
                     subwindow_stride=SUBWINDOW_STRIDE) -> FeatureVector:
    return FeatureVector.from_array(
        feature_matrix(_samples(window)[None, :], subwindow_len, subwindow_stride)[0]
    )


def feature_matrix(windows, subwindow_len=SUBWINDOW_LEN,
                   subwindow_stride=SUBWINDOW_STRIDE) -> np.ndarray:
    """Unscaled ``(n_windows, 5)`` features for a ``(n_windows, window_len)`` array."""
    x = np.asarray(windows, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError("windows must be a 2-D array")
    out = np.empty((x.shape[0], N_FEATURES))
    if x.shape[0] == 0:
        return out
    if x.shape[1] < 2:
        raise DegenerateInputError(f"windows need at least 2 samples, got {x.shape[1]}")
    xs = x - x[:, :1]
    out[:, 0] = np.mean((xs - xs.mean(axis=1, keepdims=True)) ** 2, axis=1)
    out[:, 1] = x.max(axis=1) - x.min(axis=1)
    out[:, 2] = [math.fsum(d) for d in np.abs(np.diff(x, axis=1)).tolist()]
    out[:, 3] = _sma_fine_rows(x, subwindow_len, subwindow_stride)
    # bin order does not affect the mean, so the center shift is skipped here
    out[:, 4] = np.abs(_fft.fft(x)).mean(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class ScalerStats:
    means: np.ndarray
    stds: np.ndarray

    def transform(self, X):
        """Standardize rows of ``X``; zero-spread dimensions map to 0."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        safe = np.where(self.stds > 0, self.stds, 1.0)
        return np.where(self.stds > 0, (X - self.means) / safe, 0.0)


def fit_scaler(training_features) -> ScalerStats:
    X = np.asarray(training_features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientDataError(
            f"scaler needs at least 2 training rows, got {X.shape[0] if X.ndim else 0}"
        )
    means = X.mean(axis=0)
    stds = np.sqrt(np.mean((X - means) ** 2, axis=0))
    return ScalerStats(means, stds)


def apply_scaler(stats: ScalerStats, features: FeatureVector) -> FeatureVector:
    return FeatureVector.from_array(stats.transform(features.as_array())[0], scaled=True)
