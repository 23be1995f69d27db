"""End-to-end training and per-window classification of recordings."""

from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .audio_io import OVERLAP, WINDOW_LEN, AudioRecording, read_wav, window_matrix
from .classifiers import fit_classifier
from .classifiers.grid import expand_grid, grid_search, refit_best
from .classifiers.model import TrainedModel
from .dataset import LABEL_NAMES, build_corpus, parse_annotations
from .errors import CrackleError, DanglingReferenceError
from .features import SUBWINDOW_LEN, SUBWINDOW_STRIDE, feature_matrix, fit_scaler

RESULT_HEADER = ("source_id", "start_time", "end_time", "label", "confidence")


@dataclass(frozen=True)
class ClassificationResult:
    source_id: str
    start_time: float
    end_time: float
    label: str
    confidence: float

    def as_row(self):
        return [self.source_id, repr(self.start_time), repr(self.end_time), self.label,
                repr(self.confidence)]

    def as_json(self):
        return {"start_time": self.start_time, "end_time": self.end_time,
                "label": self.label, "confidence": self.confidence}


def classify_recording(model: TrainedModel, recording: AudioRecording) -> list[ClassificationResult]:
    """One result per analysis window, in time order."""
    meta = model.metadata
    window_len = int(meta.get("window_len", WINDOW_LEN))
    mat, starts = window_matrix(recording, window_len, float(meta.get("overlap_fraction", OVERLAP)))
    feats = feature_matrix(mat, int(meta.get("subwindow_len", SUBWINDOW_LEN)),
                           int(meta.get("subwindow_stride", SUBWINDOW_STRIDE)))
    labels, conf = model.classify(feats)
    sr = recording.sample_rate
    return [
        ClassificationResult(recording.source_id, int(s) / sr, (int(s) + window_len) / sr,
                             LABEL_NAMES[int(lab)], float(c))
        for s, lab, c in zip(starts, labels, conf)
    ]


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in results:
        w.writerow(r.as_row())
    return buf.getvalue()


def load_inputs(config):
    """Annotations and the recordings they reference, resolved as ``audio_dir/<id>.wav``."""
    ann_path = Path(config.annotations)
    annotations = parse_annotations(ann_path.read_text(encoding="utf-8"))
    audio_dir = Path(config.audio_dir) if config.audio_dir else ann_path.parent
    recordings = {}
    for sid in sorted({a.source_id for a in annotations}):
        path = audio_dir / f"{sid}.wav"
        if not path.exists():
            raise DanglingReferenceError(sid)
        recordings[sid] = read_wav(path, sid)
    return recordings, annotations


def corpus_from_config(config):
    recordings, annotations = load_inputs(config)
    return build_corpus(recordings, annotations, config.seed, config.normal_count,
                        config.window_len, config.subwindow_len, config.subwindow_stride)


def _timestamp():
    # honor reproducible-build convention; otherwise omit so reruns are byte-identical
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(int(epoch)))


def train_model(corpus, config):
    """Scale, grid-search and fit on the whole corpus.

    Returns ``(TrainedModel, summary)``; the summary includes wall time and is
    not persisted.
    """
    t0 = time.perf_counter()
    kind = config.classifier
    scaler = fit_scaler(corpus.X)
    Z = scaler.transform(corpus.X)
    points = expand_grid(config.grid(kind))
    if len(points) > 1:
        gs = grid_search(Z, corpus.y, kind, points, config.folds, config.seed)
        params, model = refit_best(kind, Z, corpus.y, points, gs, seed=config.seed)
        score, n_fits = gs.scores[points.index(params)], gs.n_fits
    else:
        params, score, n_fits = points[0], None, 0
        model = fit_classifier(kind, Z, corpus.y, params, seed=config.seed)
    elapsed = time.perf_counter() - t0
    pos, neg = corpus.class_counts
    metadata = {
        "classifier": kind,
        "hyperparameters": params,
        "grid_score": score,
        "window_len": config.window_len,
        "overlap_fraction": config.overlap_fraction,
        "subwindow_len": config.subwindow_len,
        "subwindow_stride": config.subwindow_stride,
        "class_counts": {"crackle": pos, "normal": neg},
        "trained_at": _timestamp(),
        "library_version": __version__,
        "config": config.to_dict(),
    }
    summary = {
        "classifier": kind,
        "crackle_windows": pos,
        "normal_windows": neg,
        "hyperparameters": params,
        "grid_fits": n_fits,
        "grid_mean_f1": score,
        "fit_seconds": round(elapsed, 4),
    }
    return TrainedModel(kind, model, scaler, metadata), summary


def classify_paths(model, paths):
    """Classify each WAV path; failures are collected, not raised."""
    results, failures = [], []
    for p in paths:
        try:
            rec = read_wav(p)
            results.append((rec, classify_recording(model, rec)))
        except (CrackleError, OSError) as e:
            failures.append((str(p), e))
    return results, failures
