import struct
import zlib

import numpy as np
import pytest

from crackle import __version__
from crackle.classifiers import KINDS, fit_classifier
from crackle.classifiers.model import (
    FORMAT_VERSION, MAGIC, TrainedModel, load_model, read_model, save_model, write_model,
)
from crackle.errors import IntegrityError, ModelFormatError, ModelVersionError
from crackle.features import fit_scaler


def make(kind, seed=0):
    r = np.random.default_rng(seed)
    y = np.arange(60) % 2
    X = r.normal(size=(60, 5)) * [1, 2, 3, 4, 5] + 2.0 * y[:, None]
    scaler = fit_scaler(X)
    model = fit_classifier(kind, scaler.transform(X), y, seed=seed)
    return TrainedModel(kind, model, scaler, {"hyperparameters": {}, "trained_at": None})


@pytest.mark.parametrize("kind", KINDS)
def test_round_trip_predictions_identical(kind):
    m = make(kind)
    back = load_model(save_model(m))
    probe = np.random.default_rng(99).normal(size=(100, 5)) * 3
    a, b = m.classify(probe), back.classify(probe)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    assert back.kind == kind
    assert back.version_tag == __version__
    assert np.array_equal(back.scaler.means, m.scaler.means)
    assert save_model(back) == save_model(m)


@pytest.mark.parametrize("kind", ["svm_rbf", "svm_linear"])
def test_svm_fields_bit_identical(kind):
    m = make(kind)
    back = load_model(save_model(m)).model
    for field in ("support_vectors", "dual_coefficients"):
        assert getattr(back, field).tobytes() == getattr(m.model, field).tobytes()
    assert (back.bias, back.C, back.gamma, back.kernel) == (m.model.bias, m.model.C,
                                                             m.model.gamma, m.model.kernel)


def test_layout_header_and_trailer():
    data = save_model(make("knn"))
    assert data[:4] == MAGIC
    assert struct.unpack_from("<H", data, 4)[0] == FORMAT_VERSION
    assert data[6:10] == b"META"
    assert struct.unpack("<I", data[-4:])[0] == zlib.crc32(data[:-4])


def test_version_field_tamper_rejected():
    data = bytearray(save_model(make("dummy")))
    data[4:6] = struct.pack("<H", FORMAT_VERSION + 1)
    with pytest.raises(ModelVersionError):
        load_model(bytes(data))


def test_bad_magic():
    with pytest.raises(ModelFormatError):
        load_model(b"NOPE" + b"\0" * 40)


@pytest.mark.parametrize("cut", [1, 5, 100])
def test_truncation_rejected(cut):
    data = save_model(make("adaboost"))
    with pytest.raises(IntegrityError):
        load_model(data[:-cut])


def test_bit_flip_rejected():
    data = bytearray(save_model(make("svm_rbf")))
    data[len(data) // 2] ^= 0x10
    with pytest.raises(IntegrityError):
        load_model(bytes(data))


def test_file_helpers(tmp_path):
    m = make("knn")
    p = tmp_path / "sub" / "m.cklm"
    write_model(p, m)
    assert p.read_bytes() == save_model(m)
    assert read_model(p).kind == "knn"
    assert not list(p.parent.glob("*.tmp*"))
