import io
import struct
import wave

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crackle.audio_io import (
    AudioRecording, decode_wav, encode_wav, read_wav, segment_windows, window_starts,
)
from crackle.errors import DecodeError, EmptyInputError, ParameterError, UnsupportedFormatError


def stdlib_wav(frames, rate=44100, channels=1):
    """16-bit PCM via the standard-library writer, independent of encode_wav."""
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(np.asarray(frames, dtype="<i2").tobytes())
    return buf.getvalue()


def raw_wav(fmt_code, channels, bits, payload, rate=8000):
    align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_code, channels, rate, rate * align, align, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_pcm16_scaling():
    rec = decode_wav(stdlib_wav([0, 32767, -32768]))
    assert rec.samples.tolist() == [0.0, 32767 / 32768, -1.0]
    assert rec.sample_rate == 44100


def test_stereo_is_averaged():
    # left 1.0 (float32), right 0.0 at the same frame
    payload = np.array([[1.0, 0.0], [-0.5, 0.25]], dtype="<f4").tobytes()
    rec = decode_wav(raw_wav(3, 2, 32, payload))
    assert rec.samples.tolist() == [0.5, -0.125]


def test_pcm32_scaling():
    payload = np.array([0, 2**31 - 1, -(2**31)], dtype="<i4").tobytes()
    rec = decode_wav(raw_wav(1, 1, 32, payload))
    assert rec.samples.tolist() == [0.0, (2**31 - 1) / 2**31, -1.0]


def test_float_samples_clipped_into_range():
    payload = np.array([1.5, -2.0, 0.25], dtype="<f4").tobytes()
    assert decode_wav(raw_wav(3, 1, 32, payload)).samples.tolist() == [1.0, -1.0, 0.25]


def test_fifteen_seconds_at_44100():
    rec = decode_wav(stdlib_wav(np.zeros(15 * 44100)))
    assert len(rec) == 661500
    assert rec.duration == 15.0


def test_sample_rate_taken_verbatim():
    assert decode_wav(stdlib_wav([1, 2, 3], rate=22050)).sample_rate == 22050


def test_extra_chunks_are_skipped():
    base = stdlib_wav([5, -5])
    junk = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\0"  # odd size, padded
    body = base[12:36] + junk + base[36:]
    data = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
    assert decode_wav(data).samples.tolist() == [5 / 32768, -5 / 32768]


@pytest.mark.parametrize("data, chunk", [
    (b"RIFF\x00\x00", "RIFF"),
    (b"RIFX" + b"\0" * 8, "RIFF"),
    (b"RIFF\x04\x00\x00\x00WAVE", "fmt "),
])
def test_malformed_header_names_chunk(data, chunk):
    with pytest.raises(DecodeError) as exc:
        decode_wav(data)
    assert exc.value.chunk == chunk
    assert repr(chunk) in str(exc.value)


def test_truncated_fmt_chunk_named():
    data = stdlib_wav([1, 2, 3])[:30]
    with pytest.raises(DecodeError) as exc:
        decode_wav(data)
    assert exc.value.chunk == "fmt "


def test_missing_data_chunk():
    data = stdlib_wav([1])[:36]
    with pytest.raises(DecodeError) as exc:
        decode_wav(data)
    assert exc.value.chunk == "data"


def test_truncated_data_chunk_keeps_whole_frames():
    data = stdlib_wav([1, 2, 3, 4])[:-3]
    assert decode_wav(data).samples.tolist() == [1 / 32768, 2 / 32768]


@pytest.mark.parametrize("code, bits", [(2, 16), (0xFFFE, 16), (1, 8), (1, 24), (3, 64)])
def test_unsupported_encoding_reports_code(code, bits):
    with pytest.raises(UnsupportedFormatError) as exc:
        decode_wav(raw_wav(code, 1, bits, b"\0" * 8))
    assert exc.value.format_code == code
    assert str(code) in str(exc.value)


def test_read_wav_uses_stem(tmp_path):
    p = tmp_path / "rec01.wav"
    p.write_bytes(stdlib_wav([0, 100]))
    assert read_wav(p).source_id == "rec01"


@pytest.mark.parametrize("encoding, step", [("pcm16", 1 / 32768), ("pcm32", 1 / 2**31), ("float32", 1e-7)])
def test_round_trip_within_one_quantization_step(rng, encoding, step):
    x = rng.uniform(-1, 1, 5000)
    back = decode_wav(encode_wav(x, 44100, encoding)).samples
    assert np.max(np.abs(back - x)) <= step


def test_encode_matches_stdlib_writer(rng):
    q = rng.integers(-32768, 32768, 777)
    assert decode_wav(encode_wav(q / 32768, 44100)).samples.tolist() == \
        decode_wav(stdlib_wav(q)).samples.tolist()


def test_recording_rejects_out_of_range():
    with pytest.raises(ParameterError):
        AudioRecording(np.array([0.0, 1.5]), 44100)
    with pytest.raises(ParameterError):
        AudioRecording(np.zeros(3), 0)


def test_recording_samples_immutable():
    rec = AudioRecording(np.zeros(4), 44100)
    with pytest.raises(ValueError):
        rec.samples[0] = 1.0


def test_segment_examples():
    rec = AudioRecording(np.zeros(8192), 44100)
    ws = segment_windows(rec)
    assert [w.start_sample for w in ws] == [0, 2048, 4096]
    assert all(len(w) == 4096 for w in ws)
    assert [w.start_sample for w in segment_windows(AudioRecording(np.zeros(4096), 44100))] == [0]


def test_fifteen_second_window_count():
    n = 661500
    brute = [s for s in range(n) if s % 2048 == 0 and s + 4096 <= n]
    # the last start is 320 * 2048 = 655360; one more stride would overrun the end
    assert len(window_starts(n)) == len(brute) == (n - 4096) // 2048 + 1 == 321


def test_window_times_and_contents(rng):
    x = rng.uniform(-1, 1, 10000)
    rec = AudioRecording(x, 44100, "r")
    for w in segment_windows(rec):
        assert w.start_time == w.start_sample / 44100
        assert np.array_equal(w.samples, x[w.start_sample:w.start_sample + 4096])
        assert w.end_time - w.start_time == pytest.approx(4096 / 44100, abs=1e-15)


def test_short_recording_rejected():
    with pytest.raises(EmptyInputError) as exc:
        segment_windows(AudioRecording(np.zeros(4095), 44100))
    assert exc.value.length == 4095


def test_non_reference_rate_warns():
    with pytest.warns(UserWarning, match="8000 Hz"):
        segment_windows(AudioRecording(np.zeros(5000), 8000))


@pytest.mark.parametrize("overlap", [1.0, -0.1])
def test_bad_overlap(overlap):
    with pytest.raises(ParameterError):
        window_starts(10000, 4096, overlap)


@given(n=st.integers(1, 100_000), wl=st.sampled_from([16, 64, 256, 4096]),
       ov=st.sampled_from([0.0, 0.25, 0.5, 0.75]))
def test_window_count_matches_enumeration(n, wl, ov):
    stride = int(wl * (1 - ov))
    if n < wl:
        with pytest.raises(EmptyInputError):
            window_starts(n, wl, ov)
        return
    starts = window_starts(n, wl, ov)
    brute = list(range(0, n - wl + 1, stride))
    assert starts.tolist() == brute
    assert len(starts) == (n - wl) // stride + 1
    # consecutive windows share exactly wl * ov samples
    if len(starts) > 1:
        assert set(np.diff(starts)) == {stride}
        assert wl - stride == wl * ov


@given(st.lists(st.integers(-32768, 32767), min_size=1, max_size=300),
       st.sampled_from([1, 2]))
def test_decode_agrees_with_stdlib_frames(values, channels):
    if len(values) % channels:
        values = values[: len(values) - len(values) % channels] or [0] * channels
    rec = decode_wav(stdlib_wav(values, channels=channels))
    expect = np.asarray(values, dtype=float).reshape(-1, channels).mean(axis=1) / 32768
    assert np.allclose(rec.samples, expect, rtol=0, atol=1e-15)
