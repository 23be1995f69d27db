"""Trained model envelope and its binary ``.cklm`` file format.

Layout (little-endian throughout)::

    b"CKLM"  u16 format version
    section*   4-byte tag, u32 payload length, payload
    u32 CRC-32 of every preceding byte

Sections, in order: META (UTF-8 JSON), SCAL (scaler means and stds),
VARI (ASCII classifier kind), PAYL (classifier-specific arrays). Reals are
stored as IEEE float64 so a load reproduces decision values bit for bit.
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import IntegrityError, ModelFormatError, ModelVersionError, ParameterError
from ..features import ScalerStats
from .adaboost import AdaBoostModel
from .dummy import DummyModel
from .knn import KnnModel
from .svm import SvmModel

MAGIC = b"CKLM"
FORMAT_VERSION = 1
EXTENSION = ".cklm"


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    model: object
    scaler: ScalerStats
    metadata: dict = field(default_factory=dict)

    def classify(self, features, first_draw=0):
        """Labels and confidences for unscaled feature rows."""
        Z = self.scaler.transform(features)
        if isinstance(self.model, DummyModel):
            return self.model.predict(Z, first_draw=first_draw)
        return self.model.predict(Z)

    @property
    def version_tag(self):
        return self.metadata.get("library_version", __version__)


def _f8(a):
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


class _Reader:
    def __init__(self, buf, where):
        self.buf = buf
        self.pos = 0
        self.where = where

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise IntegrityError(f"{self.where}: payload ends early")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def f8(self, count):
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def done(self):
        if self.pos != len(self.buf):
            raise IntegrityError(f"{self.where}: {len(self.buf) - self.pos} trailing bytes")


def _pack_payload(kind, m):
    if kind in ("svm_rbf", "svm_linear"):
        n, d = m.support_vectors.shape
        head = struct.pack("<B3dII", 0 if m.kernel == "rbf" else 1, m.gamma, m.C, m.bias, n, d)
        return head + _f8(m.support_vectors) + _f8(m.dual_coefficients)
    if kind == "knn":
        n, d = m.X.shape
        return struct.pack("<III", m.k, n, d) + _f8(m.X) + m.y.astype("u1").tobytes()
    if kind == "adaboost":
        n = len(m)
        return (struct.pack("<I", n) + m.dims.astype("<u4").tobytes() + _f8(m.thresholds)
                + m.polarities.astype("i1").tobytes() + _f8(m.stage_weights) + _f8(m.errors))
    if kind == "dummy":
        return struct.pack("<2dQ", *m.class_priors, m.rng_seed)
    raise ParameterError(f"cannot serialize classifier kind {kind!r}")


def _unpack_payload(kind, buf):
    r = _Reader(buf, "PAYL")
    if kind in ("svm_rbf", "svm_linear"):
        k, gamma, C, bias, n, d = r.unpack("<B3dII")
        sv = r.f8(n * d).reshape(n, d)
        coef = r.f8(n)
        m = SvmModel("rbf" if k == 0 else "linear", gamma, C, sv, coef, bias)
    elif kind == "knn":
        k, n, d = r.unpack("<III")
        X = r.f8(n * d).reshape(n, d)
        y = np.frombuffer(r.take(n), dtype="u1").astype(np.int64)
        m = KnnModel(k, X, y)
    elif kind == "adaboost":
        (n,) = r.unpack("<I")
        dims = np.frombuffer(r.take(4 * n), dtype="<u4").astype(np.int64)
        thr = r.f8(n)
        pol = np.frombuffer(r.take(n), dtype="i1").astype(np.int64)
        m = AdaBoostModel(dims, thr, pol, r.f8(n), r.f8(n))
    elif kind == "dummy":
        p0, p1, seed = r.unpack("<2dQ")
        m = DummyModel((p0, p1), seed)
    else:
        raise ModelFormatError(f"unknown classifier kind {kind!r} in model file")
    r.done()
    return m


def _section(tag, payload):
    return tag + struct.pack("<I", len(payload)) + payload


def save_model(model: TrainedModel) -> bytes:
    meta = dict(model.metadata)
    meta.setdefault("library_version", __version__)
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    body = io.BytesIO()
    body.write(MAGIC + struct.pack("<H", FORMAT_VERSION))
    body.write(_section(b"META", meta_bytes))
    body.write(_section(b"SCAL", struct.pack("<I", model.scaler.means.size)
                        + _f8(model.scaler.means) + _f8(model.scaler.stds)))
    body.write(_section(b"VARI", model.kind.encode("ascii")))
    body.write(_section(b"PAYL", _pack_payload(model.kind, model.model)))
    data = body.getvalue()
    return data + struct.pack("<I", zlib.crc32(data))


def load_model(data: bytes) -> TrainedModel:
    data = bytes(data)
    if len(data) < 6 or data[:4] != MAGIC:
        raise ModelFormatError("not a crackle model file (bad magic)")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"model format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    if len(data) < 10:
        raise IntegrityError("model file is truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise IntegrityError("model file checksum mismatch (truncated or corrupted)")

    r = _Reader(body, "model")
    r.take(6)
    sections = {}
    for tag in (b"META", b"SCAL", b"VARI", b"PAYL"):
        got = r.take(4)
        if got != tag:
            raise IntegrityError(f"expected section {tag!r}, found {got!r}")
        (n,) = r.unpack("<I")
        sections[tag] = r.take(n)
    r.done()

    meta = json.loads(sections[b"META"].decode())
    s = _Reader(sections[b"SCAL"], "SCAL")
    (dim,) = s.unpack("<I")
    scaler = ScalerStats(s.f8(dim), s.f8(dim))
    s.done()
    kind = sections[b"VARI"].decode("ascii")
    return TrainedModel(kind, _unpack_payload(kind, sections[b"PAYL"]), scaler, meta)


def write_model(path, model: TrainedModel):
    from .._io import atomic_write

    atomic_write(path, save_model(model))


def read_model(path) -> TrainedModel:
    from pathlib import Path

    return load_model(Path(path).read_bytes())
