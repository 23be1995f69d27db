"""Run the 100-cycle protocol for every classifier on a synthetic corpus.

    python3 scripts/run_table1.py [--cycles N] [--out DIR] [--seed S]

Writes one CSV/JSON report per classifier plus table1.json and prints a
precision/recall/F1 table (mean ± std, percent).
"""

import argparse
import json
import time
from pathlib import Path

from crackle.classifiers import KINDS
from crackle.dataset import SyntheticConfig, build_corpus, generate_synthetic_corpus
from crackle.evaluation import run_protocol, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--normal-count", type=int, default=208)
    ap.add_argument("--out", default="reports/table1")
    args = ap.parse_args()

    recordings, annotations = generate_synthetic_corpus(SyntheticConfig(seed=args.seed))
    corpus = build_corpus(recordings, annotations, args.seed, args.normal_count)
    print(f"corpus: {corpus.class_counts[0]} crackle, {corpus.class_counts[1]} normal windows")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for kind in KINDS:
        t0 = time.perf_counter()
        rep = run_protocol(corpus, kind, cycles=args.cycles, seed=args.seed)
        print(f"{kind}: {time.perf_counter() - t0:.1f}s")
        (out / f"report_{kind}.csv").write_text(rep.to_csv())
        (out / f"report_{kind}.json").write_text(rep.to_json())
        reports.append(rep)
    (out / "table1.json").write_text(
        json.dumps({"rows": [r.table_row() for r in reports]}, indent=2, sort_keys=True) + "\n")
    print(summarize(reports))


if __name__ == "__main__":
    main()
