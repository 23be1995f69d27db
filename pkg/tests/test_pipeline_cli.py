import csv
import io
import json

import numpy as np
import pytest

from crackle.audio_io import AudioRecording, encode_wav, read_wav, window_starts
from crackle.classifiers.model import read_model
from crackle.cli import main
from crackle.config import RunConfig, load_config, parse_config_text
from crackle.dataset import Annotation, CrackleEvent, synthesize_recording
from crackle.errors import ConfigError
from crackle.features import feature_matrix
from crackle.pipeline import classify_recording, results_to_csv
from crackle.report import envelope, render_html

SMALL = ["--n-recordings", "4", "--n-crackles", "24", "--duration", "5", "--seed", "7"]
FAST_GRID = ["--grid-c", "100,1000", "--grid-gamma", "0.05,0.2"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out", str(d / "data"), *SMALL]) == 0
    assert main(["train", "--annotations", str(d / "data" / "annotations.csv"),
                 "--normal-count", "30", "--model", str(d / "m.cklm"), *FAST_GRID]) == 0
    return d


def rows(path):
    return list(csv.DictReader(open(path, newline="")))


def test_synth_outputs(workdir):
    data = workdir / "data"
    assert sorted(p.name for p in data.glob("*.wav")) == [f"syn00{i}.wav" for i in range(4)]
    assert (data / "annotations.csv").read_text().startswith("source_id,start_time,end_time,label\n")
    assert json.loads((data / "synth_config.json").read_text())["n_crackles"] == 24


def test_train_summary_and_config_echo(workdir, capsys):
    first = (workdir / "m.cklm").read_bytes()
    code = main(["train", "--annotations", str(workdir / "data" / "annotations.csv"),
                 "--normal-count", "30", "--model", str(workdir / "m.cklm"), *FAST_GRID])
    out = capsys.readouterr().out
    assert code == 0
    fields = dict(line.split(": ", 1) for line in out.strip().splitlines())
    assert fields["crackle_windows"] == "24" and fields["normal_windows"] == "30"
    assert fields["grid_fits"] == "12"
    assert float(fields["fit_seconds"]) > 0
    assert (workdir / "m.cklm").read_bytes() == first
    echo = json.loads((workdir / "m.config.json").read_text())
    assert echo["normal_count"] == 30 and echo["grid_c"] == [100.0, 1000.0]
    meta = read_model(workdir / "m.cklm").metadata
    assert meta["config"]["normal_count"] == 30


def test_classify_csv_counts_and_determinism(workdir):
    out1, out2 = workdir / "r1.csv", workdir / "r2.csv"
    for out in (out1, out2):
        assert main(["classify", "--model", str(workdir / "m.cklm"), "--output", str(out),
                     "--html", str(out.with_suffix(".html")), str(workdir / "data")]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    got = rows(out1)
    wavs = sorted((workdir / "data").glob("*.wav"))
    assert len(got) == sum(len(window_starts(len(read_wav(p)))) for p in wavs)
    assert {r["label"] for r in got} <= {"crackle", "normal"}
    assert json.loads(out1.with_suffix(".config.json").read_text())["model"].endswith("m.cklm")
    html = out1.with_suffix(".html").read_text()
    assert html.startswith("<!DOCTYPE html>") and 'id="run-config"' in html


def test_classify_rows_reproduce_on_reextraction(workdir):
    model = read_model(workdir / "m.cklm")
    recs = {p.stem: read_wav(p) for p in (workdir / "data").glob("*.wav")}
    main(["classify", "--model", str(workdir / "m.cklm"), "--output", str(workdir / "r3.csv"),
          str(workdir / "data")])
    for r in rows(workdir / "r3.csv"):
        if r["label"] != "crackle":
            continue
        rec = recs[r["source_id"]]
        s = round(float(r["start_time"]) * rec.sample_rate)
        labels, conf = model.classify(feature_matrix(rec.samples[None, s:s + 4096]))
        assert labels[0] == 1 and repr(float(conf[0])) == r["confidence"]


def test_classify_empty_input_list(workdir):
    out = workdir / "empty.csv"
    assert main(["classify", "--model", str(workdir / "m.cklm"), "--output", str(out)]) == 0
    assert out.read_text() == "source_id,start_time,end_time,label,confidence\n"


def test_classify_per_file_failure(workdir, capsys):
    bad = workdir / "bad.wav"
    bad.write_bytes(b"RIFF1234WAVEjunk")
    out = workdir / "mixed.csv"
    code = main(["classify", "--model", str(workdir / "m.cklm"), "--output", str(out),
                 str(bad), str(workdir / "data" / "syn000.wav")])
    assert code == 3
    assert "bad.wav" in capsys.readouterr().err
    assert {r["source_id"] for r in rows(out)} == {"syn000"}


def test_evaluate_outputs(workdir, capsys):
    out = workdir / "rep"
    code = main(["evaluate", "--annotations", str(workdir / "data" / "annotations.csv"),
                 "--normal-count", "30", "--cycles", "2", "--output", str(out), *FAST_GRID])
    text = capsys.readouterr().out
    assert code == 0
    names = [line[:32].strip() for line in text.strip().splitlines()[1:]]
    assert names == ["SVM (RBF)", "KNN", "AdaBoost (Decision Stump)", "Linear SVM",
                     "Dummy classifier (Stratified)"]
    table = json.loads((out / "table1.json").read_text())
    assert len(table["rows"]) == 5 and table["class_counts"] == {"crackle": 24, "normal": 30}
    for kind in ("svm_rbf", "dummy"):
        rep = json.loads((out / f"report_{kind}.json").read_text())
        agg = rows(out / f"report_{kind}.csv")[-1]
        assert float(agg["f1"]) == rep["table"]["f1"]["mean"]
        assert rep["config"]["run_config"]["cycles"] == 2


@pytest.mark.parametrize("argv, code", [
    (["train", "--annotations", "/nonexistent/a.csv", "--model", "m.cklm"], 2),
    (["train", "--model", "m.cklm"], 1),
    (["train", "--annotations", "a.csv", "--model", "m", "--window-len", "1000"], 1),
    (["classify", "--model", "/nonexistent/m.cklm"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err
    assert err.startswith("error:")
    if code == 2:
        assert "/nonexistent/" in err


def test_dangling_source_exit_code(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("source_id,start_time,end_time,label\nmissing,1,1.01,crackle\n")
    assert main(["train", "--annotations", str(tmp_path / "a.csv"), "--model", "m"]) == 3
    assert "missing" in capsys.readouterr().err


def test_corrupt_model_exit_code(tmp_path):
    (tmp_path / "m.cklm").write_bytes(b"CKLM\x01\x00garbage")
    assert main(["classify", "--model", str(tmp_path / "m.cklm")]) == 3


# --- config ---

def test_config_file_and_override(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\ncycles = 7\nclassifiers = knn, dummy\ngrid-c = 1, 2.5\nseed=4 # trailing\n")
    cfg = load_config(p, {"seed": 9, "cycles": None})
    assert (cfg.cycles, cfg.seed, cfg.classifiers, cfg.grid_c) == (7, 9, ["knn", "dummy"], [1.0, 2.5])
    assert cfg.grid("svm_rbf")["C"] == [1.0, 2.5]
    assert cfg.grid("knn") == {"k": [2, 3, 4]}


@pytest.mark.parametrize("text", ["bogus = 1", "cycles", "cycles = many"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


@pytest.mark.parametrize("field, value", [("window_len", 1000), ("overlap_fraction", 1.0),
                                          ("classifier", "tree"), ("train_fraction", 1.0),
                                          ("folds", 1), ("subwindow_len", 8192)])
def test_config_validation(field, value):
    with pytest.raises(ConfigError):
        RunConfig(**{field: value}).validate()


def test_config_defaults_documented():
    cfg = RunConfig()
    assert (cfg.window_len, cfg.overlap_fraction, cfg.cycles, cfg.train_fraction) == (4096, 0.5, 100, 0.7)
    assert json.loads(cfg.to_json()) == cfg.to_dict()


# --- classify_recording ---

def test_silent_recording_uniform_results(workdir):
    model = read_model(workdir / "m.cklm")
    res = classify_recording(model, AudioRecording(np.zeros(44100 * 2), 44100, "quiet"))
    assert len({(r.label, r.confidence) for r in res}) == 1
    assert all(r.end_time - r.start_time == pytest.approx(4096 / 44100) for r in res)
    assert [r.start_time for r in res] == sorted(r.start_time for r in res)


def test_fifteen_second_result_count(workdir):
    model = read_model(workdir / "m.cklm")
    assert len(classify_recording(model, AudioRecording(np.zeros(661500), 44100))) == 321


def test_inserted_crackle_detected(workdir):
    model = read_model(workdir / "m.cklm")
    ev = CrackleEvent(1.0, 0.020, 0.06, 900.0)
    rec = synthesize_recording(3.0, 44100, 0.02, (ev,), seed=123, source_id="probe")
    res = classify_recording(model, rec)
    covering = [r for r in res if r.start_time <= 1.0 and r.end_time >= 1.02]
    assert covering and all(r.label == "crackle" for r in covering)


def test_results_csv_header_and_repr(workdir):
    model = read_model(workdir / "m.cklm")
    res = classify_recording(model, AudioRecording(np.zeros(8192), 44100, "z"))
    lines = results_to_csv(res).splitlines()
    assert lines[0] == "source_id,start_time,end_time,label,confidence"
    assert lines[2].split(",")[:3] == ["z", repr(2048 / 44100), repr(6144 / 44100)]


# --- report ---

def test_envelope_bounds(rng):
    x = rng.normal(size=100_000)
    idx, val = envelope(x, 4000)
    assert len(val) <= 4000
    assert val.max() == x.max() and val.min() == x.min()
    assert np.all(np.diff(idx) > 0)
    small = np.arange(10.0)
    assert envelope(small)[1].tolist() == small.tolist()


def test_html_escapes_and_embeds_config():
    rec = AudioRecording(np.zeros(5000), 44100, "<rec&1>")
    html = render_html([(rec, [])], {"note": "</script>"})
    assert "&lt;rec&amp;1&gt;" in html
    assert "</script>\"" not in html and "<\\/script>" in html
