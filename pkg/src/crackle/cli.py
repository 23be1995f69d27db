"""Command line: ``crackle {synth,train,evaluate,classify,serve}``.

Exit codes: 0 ok, 1 configuration, 2 I/O, 3 data validation,
4 training/convergence, 5 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from ._io import atomic_write
from .audio_io import encode_wav
from .classifiers import KINDS
from .classifiers.model import read_model, write_model
from .config import RunConfig, load_config
from .dataset import SyntheticConfig, format_annotations, generate_synthetic_corpus
from .errors import CrackleError
from .evaluation import run_protocol, summarize

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA, EXIT_TRAIN, EXIT_INTERNAL = range(6)

log = logging.getLogger("crackle")


def _csv_list(conv):
    def parse(text):
        return [conv(t) for t in text.split(",") if t.strip()]
    return parse


def _add_run_flags(p, *names):
    d = RunConfig()
    flags = {
        "window_len": dict(type=int, help=f"samples per window (default {d.window_len})"),
        "overlap_fraction": dict(type=float, help=f"window overlap (default {d.overlap_fraction})"),
        "subwindow_len": dict(type=int, help=f"sma_fine sub-window (default {d.subwindow_len})"),
        "subwindow_stride": dict(type=int, help=f"sma_fine stride (default {d.subwindow_stride})"),
        "classifier": dict(choices=KINDS, help=f"classifier (default {d.classifier})"),
        "classifiers": dict(type=_csv_list(str), help="comma-separated classifiers to evaluate"),
        "grid_c": dict(type=_csv_list(float), help="SVM C axis, comma-separated"),
        "grid_gamma": dict(type=_csv_list(float), help="RBF gamma axis, comma-separated"),
        "grid_k": dict(type=_csv_list(int), help="KNN k axis, comma-separated"),
        "grid_rounds": dict(type=_csv_list(int), help="AdaBoost rounds axis"),
        "folds": dict(type=int, help=f"grid-search folds (default {d.folds})"),
        "cycles": dict(type=int, help=f"train/validate cycles (default {d.cycles})"),
        "train_fraction": dict(type=float, help=f"training share (default {d.train_fraction})"),
        "seed": dict(type=int, help=f"master seed (default {d.seed})"),
        "normal_count": dict(type=int, help=f"random normal windows (default {d.normal_count})"),
        "annotations": dict(help="annotation CSV (source_id,start_time,end_time,label)"),
        "audio_dir": dict(help="directory holding <source_id>.wav (default: annotation dir)"),
        "model": dict(help="model file (.cklm)"),
        "output": dict(help="output file or directory"),
        "html": dict(help="also write a self-contained HTML report here"),
    }
    for name in names:
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **flags[name])


def build_parser():
    parser = argparse.ArgumentParser(prog="crackle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = ("window_len", "overlap_fraction", "subwindow_len", "subwindow_stride", "seed")
    corpus_flags = ("annotations", "audio_dir", "normal_count")
    grids = ("grid_c", "grid_gamma", "grid_k", "grid_rounds", "folds")

    p = sub.add_parser("synth", help="generate a synthetic corpus (WAV files + annotations.csv)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-recordings", type=int, default=35)
    p.add_argument("--n-crackles", type=int, default=175)
    p.add_argument("--duration", type=float, default=15.0, help="seconds per recording")
    p.add_argument("--noise-level", type=float, default=0.02)
    p.add_argument("--crackle-amplitude", type=float, default=0.06)
    p.add_argument("--encoding", choices=("pcm16", "pcm32", "float32"), default="pcm16")
    p.add_argument("--seed", type=int, default=0)

    for name, helptext, extra in (
        ("train", "build a corpus, grid-search and write a model file",
         ("classifier", "model", *corpus_flags, *grids)),
        ("evaluate", "run the repeated train/validate protocol",
         ("classifiers", "cycles", "train_fraction", "output", *corpus_flags, *grids)),
        ("classify", "classify WAV files into timestamped windows", ("model", "output", "html")),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key = value config file; flags override it")
        if name == "classify":
            _add_run_flags(p, *extra)
            p.add_argument("inputs", nargs="*", help="WAV files or directories")
        else:
            _add_run_flags(p, *common, *extra)

    p = sub.add_parser("serve", help="serve POST /classify and GET /health")
    p.add_argument("--model", default=os.environ.get("CRACKLE_MODEL"),
                   help="model file (env CRACKLE_MODEL)")
    p.add_argument("--addr", default=os.environ.get("CRACKLE_ADDR", "127.0.0.1:8000"),
                   help="host:port (env CRACKLE_ADDR)")
    p.add_argument("--max-body", type=int, default=32 * 1024 * 1024)
    return parser


def _config(args, *exclude):
    skip = {"command", "verbose", "config", "inputs", *exclude}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    return load_config(args.config, overrides)


def _require(cfg, *names):
    from .errors import ConfigError

    for n in names:
        if getattr(cfg, n) is None:
            raise ConfigError(f"--{n.replace('_', '-')} is required")


def _print_structured(doc):
    for k, v in doc.items():
        print(f"{k}: {json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}")


def cmd_synth(args):
    out = Path(args.out)
    cfg = SyntheticConfig(n_recordings=args.n_recordings, n_crackles=args.n_crackles,
                          duration_s=args.duration, noise_level=args.noise_level,
                          crackle_amplitude=args.crackle_amplitude, seed=args.seed)
    recordings, annotations = generate_synthetic_corpus(cfg)
    for rec in recordings:
        atomic_write(out / f"{rec.source_id}.wav", encode_wav(rec.samples, rec.sample_rate, args.encoding))
    atomic_write(out / "annotations.csv", format_annotations(annotations))
    atomic_write(out / "synth_config.json",
                 json.dumps({**vars(cfg), "encoding": args.encoding}, sort_keys=True, indent=2) + "\n")
    _print_structured({"recordings": len(recordings), "crackles": len(annotations),
                       "output": str(out)})
    return EXIT_OK


def cmd_train(args):
    from .pipeline import corpus_from_config, train_model

    cfg = _config(args)
    _require(cfg, "annotations", "model")
    corpus = corpus_from_config(cfg)
    model, summary = train_model(corpus, cfg)
    write_model(cfg.model, model)
    atomic_write(Path(cfg.model).with_suffix(".config.json"), cfg.to_json())
    _print_structured({**summary, "model": cfg.model})
    return EXIT_OK


def cmd_evaluate(args):
    from .pipeline import corpus_from_config

    cfg = _config(args)
    _require(cfg, "annotations")
    out = Path(cfg.output or "reports")
    corpus = corpus_from_config(cfg)
    reports = []
    for kind in cfg.classifiers:
        t0 = time.perf_counter()
        rep = run_protocol(corpus, kind, cfg.grid(kind), cfg.cycles, cfg.train_fraction,
                           cfg.seed, cfg.folds)
        rep.config["run_config"] = cfg.to_dict()
        log.info("%s: %d cycles in %.1f s", kind, cfg.cycles, time.perf_counter() - t0)
        atomic_write(out / f"report_{kind}.csv", rep.to_csv())
        atomic_write(out / f"report_{kind}.json", rep.to_json())
        reports.append(rep)
    table = {"rows": [r.table_row() for r in reports], "config": cfg.to_dict(),
             "class_counts": dict(zip(("crackle", "normal"), corpus.class_counts))}
    atomic_write(out / "table1.json", json.dumps(table, indent=2, sort_keys=True) + "\n")
    atomic_write(out / "run_config.json", cfg.to_json())
    text = summarize(reports)
    atomic_write(out / "summary.txt", text + "\n")
    print(text)
    return EXIT_OK


def _expand_inputs(inputs):
    paths = []
    for item in inputs:
        p = Path(item)
        paths += sorted(p.glob("*.wav")) if p.is_dir() else [p]
    return paths


def cmd_classify(args):
    from .pipeline import classify_paths, results_to_csv
    from .report import render_html

    # windowing comes from the model metadata, not the run config
    cfg = _config(args)
    _require(cfg, "model")
    model = read_model(cfg.model)
    classified, failures = classify_paths(model, _expand_inputs(args.inputs))
    out = Path(cfg.output or "results.csv")
    atomic_write(out, results_to_csv(r for _, rs in classified for r in rs))
    atomic_write(out.with_suffix(".config.json"), cfg.to_json())
    if cfg.html:
        atomic_write(cfg.html, render_html(classified, cfg.to_dict()))
    for path, err in failures:
        print(f"error: {path}: {err}", file=sys.stderr)
    n = sum(len(rs) for _, rs in classified)
    _print_structured({"recordings": len(classified), "windows": n,
                       "crackle_windows": sum(r.label == "crackle" for _, rs in classified for r in rs),
                       "failed": len(failures), "output": str(out)})
    if failures:
        return _exit_code(failures[0][1])
    return EXIT_OK


def cmd_serve(args):
    from .errors import ConfigError
    from .service import ServiceState, serve

    if not args.model:
        raise ConfigError("--model or CRACKLE_MODEL is required")
    state = ServiceState(read_model(args.model), {"model": args.model, "addr": args.addr},
                         args.max_body)
    serve(state, args.addr)
    return EXIT_OK


def _exit_code(err):
    if isinstance(err, CrackleError):
        return err.exit_code
    if isinstance(err, OSError):
        return EXIT_IO
    return EXIT_INTERNAL


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "evaluate": cmd_evaluate,
            "classify": cmd_classify, "serve": cmd_serve}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except OSError as e:
        where = f": {e.filename}" if e.filename else ""
        print(f"error: {e.strerror or e}{where}", file=sys.stderr)
        return EXIT_IO
    except CrackleError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:  # pragma: no cover - last resort
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
