"""WAV decoding and fixed-size overlapping window segmentation."""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DecodeError, EmptyInputError, ParameterError, UnsupportedFormatError

WINDOW_LEN = 4096
OVERLAP = 0.5
REFERENCE_RATE = 44100

FORMAT_PCM = 1
FORMAT_FLOAT = 3


def _frozen(a):
    a = np.asarray(a, dtype=np.float64)
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class AudioRecording:
    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        if int(self.sample_rate) <= 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = _frozen(self.samples)
        if samples.ndim != 1:
            raise ParameterError("samples must be one-dimensional")
        if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
            raise ParameterError("samples must lie in [-1, 1]")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class Window:
    samples: np.ndarray
    start_sample: int
    sample_rate: int = REFERENCE_RATE
    source_id: str = ""

    @property
    def start_time(self):
        return self.start_sample / self.sample_rate

    @property
    def end_time(self):
        return (self.start_sample + self.samples.size) / self.sample_rate

    def __len__(self):
        return self.samples.size


def _chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4].decode("latin-1")
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            # truncated data chunks are common from interrupted recorders
            if cid != "data":
                raise DecodeError(cid, f"declares {size} bytes, only {len(body)} present")
        yield cid, body
        pos += 8 + size + (size & 1)


def decode_wav(data: bytes, source_id: str = "") -> AudioRecording:
    """Decode a RIFF/WAVE byte string to a mono recording in [-1, 1].

    Supports PCM 16/32-bit integer and 32-bit IEEE float, mono or stereo.
    Stereo frames are averaged.
    """
    data = bytes(data)
    if len(data) < 12:
        raise DecodeError("RIFF", f"header needs 12 bytes, got {len(data)}")
    riff, _, wave = struct.unpack_from("<4sI4s", data, 0)
    if riff != b"RIFF":
        raise DecodeError("RIFF", f"bad magic {riff!r}")
    if wave != b"WAVE":
        raise DecodeError("RIFF", f"form type {wave!r} is not WAVE")

    fmt = None
    pcm = None
    for cid, body in _chunks(data):
        if cid == "fmt ":
            if len(body) < 16:
                raise DecodeError("fmt ", f"chunk is {len(body)} bytes, need 16")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == "data":
            pcm = body
            if fmt is not None:
                break
    if fmt is None:
        raise DecodeError("fmt ", "chunk missing")
    if pcm is None:
        raise DecodeError("data", "chunk missing")

    code, channels, rate, _, block_align, bits = fmt
    if code not in (FORMAT_PCM, FORMAT_FLOAT):
        raise UnsupportedFormatError(code)
    if channels not in (1, 2):
        raise UnsupportedFormatError(code, f"{channels} channels")
    if rate == 0:
        raise DecodeError("fmt ", "sample rate is zero")
    if code == FORMAT_PCM and bits == 16:
        dtype, scale = "<i2", 32768.0
    elif code == FORMAT_PCM and bits == 32:
        dtype, scale = "<i4", 2147483648.0
    elif code == FORMAT_FLOAT and bits == 32:
        dtype, scale = "<f4", None
    else:
        raise UnsupportedFormatError(code, f"{bits}-bit samples")

    frame = channels * bits // 8
    if block_align and block_align != frame:
        raise DecodeError("fmt ", f"block align {block_align} != {frame}")
    n_frames = len(pcm) // frame
    raw = np.frombuffer(pcm[:n_frames * frame], dtype=dtype).astype(np.float64)
    if scale is not None:
        raw /= scale
    else:
        raw = np.clip(np.nan_to_num(raw), -1.0, 1.0)
    raw = raw.reshape(n_frames, channels)
    mono = raw[:, 0] if channels == 1 else raw.mean(axis=1)
    return AudioRecording(mono, rate, source_id)


def read_wav(path, source_id=None) -> AudioRecording:
    from pathlib import Path

    path = Path(path)
    return decode_wav(path.read_bytes(), source_id if source_id is not None else path.stem)


def encode_wav(samples, sample_rate, encoding="pcm16", channels=1) -> bytes:
    """Serialize samples to a WAV byte string.

    ``samples`` is 1-D (written to every channel) or ``(frames, channels)``.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = np.repeat(x[:, None], channels, axis=1)
    channels = x.shape[1]
    if encoding == "pcm16":
        code, bits = FORMAT_PCM, 16
        payload = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    elif encoding == "pcm32":
        code, bits = FORMAT_PCM, 32
        payload = np.clip(np.round(x * 2147483648.0), -2147483648, 2147483647).astype("<i4")
    elif encoding == "float32":
        code, bits = FORMAT_FLOAT, 32
        payload = x.astype("<f4")
    else:
        raise ParameterError(f"unknown encoding {encoding!r}")
    body = payload.tobytes()
    align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", code, channels, int(sample_rate),
                      int(sample_rate) * align, align, bits)
    out = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    out += b"data" + struct.pack("<I", len(body)) + body
    if len(body) & 1:
        out += b"\0"
    return b"RIFF" + struct.pack("<I", len(out)) + out


def window_stride(window_len=WINDOW_LEN, overlap_fraction=OVERLAP):
    if window_len <= 0:
        raise ParameterError(f"window_len must be positive, got {window_len}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ParameterError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    return max(1, int(round(window_len * (1.0 - overlap_fraction))))


def window_starts(n_samples, window_len=WINDOW_LEN, overlap_fraction=OVERLAP):
    stride = window_stride(window_len, overlap_fraction)
    if n_samples < window_len:
        raise EmptyInputError(n_samples, window_len)
    return np.arange(0, n_samples - window_len + 1, stride)


def window_matrix(recording, window_len=WINDOW_LEN, overlap_fraction=OVERLAP):
    """All windows as a read-only ``(n_windows, window_len)`` view plus their starts."""
    starts = window_starts(len(recording), window_len, overlap_fraction)
    if recording.sample_rate != REFERENCE_RATE:
        warnings.warn(
            f"{recording.source_id or 'recording'} is sampled at {recording.sample_rate} Hz; "
            f"feature scales were characterized at {REFERENCE_RATE} Hz",
            stacklevel=2,
        )
    view = np.lib.stride_tricks.sliding_window_view(recording.samples, window_len)
    return view[starts], starts


def segment_windows(recording: AudioRecording, window_len: int = WINDOW_LEN,
                    overlap_fraction: float = OVERLAP) -> list[Window]:
    mat, starts = window_matrix(recording, window_len, overlap_fraction)
    return [Window(row, int(s), recording.sample_rate, recording.source_id)
            for row, s in zip(mat, starts)]
