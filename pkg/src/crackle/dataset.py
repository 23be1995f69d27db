"""Annotations, labeled window extraction, corpus assembly and synthetic data."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, lfilter

from ._rng import derive_seed
from .audio_io import WINDOW_LEN, AudioRecording, Window
from .errors import (
    AnnotationError,
    CapacityError,
    DanglingReferenceError,
    EmptyInputError,
    ParameterError,
)
from .features import FEATURE_NAMES, SUBWINDOW_LEN, SUBWINDOW_STRIDE, feature_matrix

CRACKLE = 1
NORMAL = 0
LABELS = {"crackle": CRACKLE, "normal": NORMAL}
LABEL_NAMES = {v: k for k, v in LABELS.items()}
ANNOTATION_HEADER = "source_id,start_time,end_time,label"


@dataclass(frozen=True)
class Annotation:
    source_id: str
    start_time: float
    end_time: float
    label: str = "crackle"

    def __post_init__(self):
        if not self.end_time > self.start_time:
            raise ParameterError(f"end_time {self.end_time} must exceed start_time {self.start_time}")
        if self.start_time < 0:
            raise ParameterError(f"start_time must be >= 0, got {self.start_time}")
        if self.label not in LABELS:
            raise ParameterError(f"unknown label {self.label!r}")

    @property
    def midpoint(self):
        return 0.5 * (self.start_time + self.end_time)


def parse_annotations(text: str) -> list[Annotation]:
    lines = text.splitlines()
    if not lines or lines[0].strip().lstrip("﻿") != ANNOTATION_HEADER:
        raise AnnotationError(1, f"expected header {ANNOTATION_HEADER!r}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4 or not parts[0]:
            raise AnnotationError(lineno, f"expected 4 comma-separated fields, got {line!r}")
        sid, start, end, label = parts
        try:
            t0, t1 = float(start), float(end)
        except ValueError:
            raise AnnotationError(lineno, f"times must be decimal seconds, got {start!r}, {end!r}") from None
        if not (math.isfinite(t0) and math.isfinite(t1)) or t0 < 0:
            raise AnnotationError(lineno, f"invalid times {start!r}, {end!r}")
        if t1 <= t0:
            raise AnnotationError(lineno, f"end_time {t1} is not after start_time {t0}")
        if label not in LABELS:
            raise AnnotationError(lineno, f"unknown label {label!r}; expected crackle or normal")
        out.append(Annotation(sid, t0, t1, label))
    return out


def format_annotations(annotations) -> str:
    rows = [ANNOTATION_HEADER]
    rows += [f"{a.source_id},{a.start_time:.6f},{a.end_time:.6f},{a.label}" for a in annotations]
    return "\n".join(rows) + "\n"


def _window(recording, start, window_len):
    return Window(recording.samples[start:start + window_len], int(start),
                  recording.sample_rate, recording.source_id)


def centered_start(recording, annotation, window_len=WINDOW_LEN):
    n = len(recording)
    if n < window_len:
        raise EmptyInputError(n, window_len)
    center = int(round(annotation.midpoint * recording.sample_rate))
    return min(max(center - window_len // 2, 0), n - window_len)


def extract_crackle_window(recording: AudioRecording, annotation: Annotation,
                           window_len: int = WINDOW_LEN) -> Window:
    """The window centered on the annotation midpoint, clamped to the file."""
    return _window(recording, centered_start(recording, annotation, window_len), window_len)


def _forbidden_mask(n_offsets, intervals, window_len):
    """True at every window offset that touches a padded crackle interval."""
    diff = np.zeros(n_offsets + 1, dtype=np.int64)
    pad = window_len // 2
    for a, b in intervals:
        lo, hi = a - pad, b + pad  # padded interval [lo, hi)
        # window [s, s + L) intersects [lo, hi) iff lo - L < s < hi
        s0 = max(lo - window_len + 1, 0)
        s1 = min(hi, n_offsets)
        if s0 < s1:
            diff[s0] += 1
            diff[s1] -= 1
    return np.cumsum(diff[:-1]) > 0


def crackle_intervals(recording, annotations):
    sr = recording.sample_rate
    return [(int(math.floor(a.start_time * sr)), int(math.ceil(a.end_time * sr)))
            for a in annotations
            if a.label == "crackle" and a.source_id == recording.source_id]


def sample_normal_windows(recording: AudioRecording, crackle_annotations, count: int,
                          seed: int = 0, window_len: int = WINDOW_LEN) -> list[Window]:
    """Seeded uniform draw of ``count`` distinct crackle-free window offsets."""
    if count < 0:
        raise ParameterError(f"count must be non-negative, got {count}")
    n = len(recording)
    if n < window_len:
        raise EmptyInputError(n, window_len)
    n_offsets = n - window_len + 1
    banned = _forbidden_mask(n_offsets, crackle_intervals(recording, crackle_annotations), window_len)
    valid = np.flatnonzero(~banned)
    if valid.size < count:
        raise CapacityError(count, int(valid.size))
    rng = np.random.default_rng(derive_seed(seed, n))
    picks = np.sort(rng.choice(valid, size=count, replace=False))
    return [_window(recording, int(s), window_len) for s in picks]


@dataclass(eq=False)
class Corpus:
    X: np.ndarray
    y: np.ndarray
    provenance: list
    window_len: int = WINDOW_LEN
    subwindow_len: int = SUBWINDOW_LEN
    subwindow_stride: int = SUBWINDOW_STRIDE

    def __post_init__(self):
        if len(self.provenance) != len(self.y) or self.X.shape[0] != len(self.y):
            raise ParameterError("corpus rows, labels and provenance must align")

    def __len__(self):
        return len(self.y)

    @property
    def class_counts(self):
        """(crackle count, normal count)."""
        pos = int(np.sum(self.y == CRACKLE))
        return pos, len(self.y) - pos

    def subset(self, idx):
        idx = np.asarray(idx)
        return Corpus(self.X[idx], self.y[idx], [self.provenance[i] for i in idx],
                      self.window_len, self.subwindow_len, self.subwindow_stride)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source_id", "start_sample", "label", *FEATURE_NAMES])
        for (sid, start), lab, row in zip(self.provenance, self.y, self.X):
            w.writerow([sid, start, LABEL_NAMES[int(lab)], *(repr(float(v)) for v in row)])
        return buf.getvalue()


def _split_count(total, k):
    base, extra = divmod(total, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def build_corpus(recordings, annotations, seed: int = 0, normal_count: int = 0,
                 window_len: int = WINDOW_LEN, subwindow_len: int = SUBWINDOW_LEN,
                 subwindow_stride: int = SUBWINDOW_STRIDE) -> Corpus:
    """Labeled, unscaled feature corpus.

    Every annotation yields one window centered on it. ``normal_count`` extra
    normal windows are drawn at random from the annotated recordings, spread
    evenly over them in ``source_id`` order.
    """
    if not isinstance(recordings, dict):
        recordings = {r.source_id: r for r in recordings}
    for a in annotations:
        if a.source_id not in recordings:
            raise DanglingReferenceError(a.source_id)

    rows = []  # (source_id, start_sample, label, samples)
    for a in annotations:
        rec = recordings[a.source_id]
        start = centered_start(rec, a, window_len)
        rows.append((a.source_id, start, LABELS[a.label], rec.samples[start:start + window_len]))

    if normal_count:
        hosts = sorted({a.source_id for a in annotations}) or sorted(recordings)
        for i, (sid, cnt) in enumerate(zip(hosts, _split_count(normal_count, len(hosts)))):
            if not cnt:
                continue
            rec = recordings[sid]
            for w in sample_normal_windows(rec, annotations, cnt, derive_seed(seed, i), window_len):
                rows.append((sid, w.start_sample, NORMAL, w.samples))

    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    if rows:
        X = feature_matrix(np.stack([r[3] for r in rows]), subwindow_len, subwindow_stride)
    else:
        X = np.empty((0, len(FEATURE_NAMES)))
    y = np.array([r[2] for r in rows], dtype=np.int64)
    return Corpus(X, y, [(r[0], r[1]) for r in rows], window_len, subwindow_len, subwindow_stride)


@dataclass
class SyntheticConfig:
    """Parameters for a synthetic crackle corpus.

    Background is low-passed noise under a slow breathing envelope; crackles
    are exponentially damped sinusoids. Each recording gets a random gain that
    scales noise and crackles together, so absolute levels vary between
    recordings while the crackle-to-noise ratio stays fixed.
    """

    n_recordings: int = 35
    n_crackles: int = 175
    duration_s: float = 15.0
    sample_rate: int = 44100
    noise_level: float = 0.02
    crackle_amplitude: float = 0.06
    gain_spread: float = 1.1
    amplitude_jitter: float = 0.6
    duration_ms: tuple = (5.0, 40.0)
    carrier_hz: tuple = (600.0, 1200.0)
    breath_period_s: float = 4.0
    breath_depth: float = 0.1
    decay_fraction: float = 0.4
    noise_cutoff_hz: float = 300.0
    hiss: float = 0.05
    seed: int = 0
    window_len: int = WINDOW_LEN

    def validate(self):
        if self.n_recordings <= 0 or self.n_crackles < 0 or self.duration_s <= 0:
            raise ParameterError("recording and crackle counts must be positive")
        for name in ("noise_level", "crackle_amplitude"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ParameterError(f"{name} must be in (0, 1], got {v}")
        if self.gain_spread < 1 or not 0 <= self.amplitude_jitter < 1:
            raise ParameterError("gain_spread must be >= 1 and amplitude_jitter in [0, 1)")


@dataclass(frozen=True)
class CrackleEvent:
    start_time: float
    duration: float
    amplitude: float
    frequency: float
    phase: float = 0.5 * math.pi


def _noise(n, sample_rate, breath_period, breath_depth, cutoff_hz, hiss, seed):
    rng = np.random.default_rng(derive_seed(seed, 1))
    white = rng.standard_normal(n)
    b, a = butter(2, cutoff_hz, fs=sample_rate)
    x = lfilter(b, a, white)
    x /= np.sqrt(np.mean(x * x))
    if hiss:
        x += hiss * rng.standard_normal(n)
        x /= math.sqrt(1.0 + hiss * hiss)
    t = np.arange(n) / sample_rate
    phase = rng.uniform(0, 2 * math.pi)
    envelope = 1.0 + breath_depth * (2.0 * np.sin(math.pi * t / breath_period + phase) ** 2 - 1.0)
    return x * envelope


def synthesize_recording(duration_s, sample_rate=44100, noise_level=0.02, events=(),
                         seed=0, source_id="", breath_period_s=4.0, breath_depth=0.1,
                         gain=1.0, decay_fraction=0.4, noise_cutoff_hz=300.0,
                         hiss=0.05) -> AudioRecording:
    """Noise background with the given crackle events added on top.

    The noise depends only on ``seed`` and the length, so two calls that
    differ only in ``events`` agree exactly outside the transients.
    """
    n = int(round(duration_s * sample_rate))
    x = noise_level * gain * _noise(n, sample_rate, breath_period_s, breath_depth, noise_cutoff_hz, hiss,
                                      seed)
    for ev in events:
        s0 = int(round(ev.start_time * sample_rate))
        m = max(1, int(round(ev.duration * sample_rate)))
        m = min(m, n - s0)
        if s0 < 0 or m <= 0:
            raise ParameterError(f"event at {ev.start_time}s lies outside the recording")
        t = np.arange(m) / sample_rate
        tau = ev.duration * decay_fraction
        x[s0:s0 + m] += gain * ev.amplitude * np.exp(-t / tau) * np.sin(
            2 * math.pi * ev.frequency * t + ev.phase)
    peak = float(np.max(np.abs(x))) if n else 0.0
    if peak > 1.0:
        raise ParameterError(f"synthetic signal clips (peak {peak:.3f}); lower noise or amplitude")
    return AudioRecording(x, sample_rate, source_id)


def _place(rng, count, n_samples, sample_rate, min_gap, max_dur, margin):
    lo = margin
    hi = n_samples / sample_rate - margin - max_dur
    if count and hi <= lo:
        raise ParameterError("recording too short for the requested crackles")
    for _ in range(1000):
        t = np.sort(rng.uniform(lo, hi, size=count))
        if count < 2 or np.min(np.diff(t)) >= min_gap:
            return t
    raise ParameterError(f"cannot place {count} crackles at least {min_gap:.3f}s apart")


def generate_synthetic_corpus(config: SyntheticConfig):
    """Recordings and crackle annotations, reproducible from ``config.seed``."""
    config.validate()
    counts = _split_count(config.n_crackles, config.n_recordings)
    recordings, annotations = [], []
    sr = config.sample_rate
    n_samples = int(round(config.duration_s * sr))
    margin = config.window_len / sr
    for r, cnt in enumerate(counts):
        sid = f"syn{r:03d}"
        rseed = derive_seed(config.seed, r)
        rng = np.random.default_rng(derive_seed(rseed, 2))
        gain = math.exp(rng.uniform(-1, 1) * math.log(config.gain_spread))
        starts = _place(rng, cnt, n_samples, sr, 2 * margin, config.duration_ms[1] / 1000, margin)
        events = []
        for t0 in starts:
            dur = rng.uniform(*config.duration_ms) / 1000.0
            amp = config.crackle_amplitude * rng.uniform(1 - config.amplitude_jitter,
                                                          1 + config.amplitude_jitter)
            freq = rng.uniform(*config.carrier_hz)
            phase = rng.uniform(0, 2 * math.pi)
            # round to the 1 µs grid the annotation file stores
            t0 = round(float(t0), 6)
            dur = round(float(dur), 6)
            events.append(CrackleEvent(t0, dur, float(amp), float(freq), float(phase)))
            annotations.append(Annotation(sid, t0, round(t0 + dur, 6), "crackle"))
        recordings.append(synthesize_recording(
            config.duration_s, sr, config.noise_level, events, rseed, sid,
            config.breath_period_s, config.breath_depth, gain, config.decay_fraction,
            config.noise_cutoff_hz, config.hiss))
    return recordings, annotations
