"""Single-feature RBF SVM scores versus the full five-feature model.

    python3 scripts/univariate_scores.py [--cycles N] [--seed S]

Shows how much each feature carries on its own; the combined model should
beat every one of them.
"""

import argparse
import time

from crackle.dataset import SyntheticConfig, build_corpus, generate_synthetic_corpus
from crackle.evaluation import run_protocol, univariate_feature_scores


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--classifier", default="svm_rbf")
    args = ap.parse_args()

    recordings, annotations = generate_synthetic_corpus(SyntheticConfig(seed=args.seed))
    corpus = build_corpus(recordings, annotations, args.seed, 208)

    t0 = time.perf_counter()
    scores = univariate_feature_scores(corpus, args.classifier, args.cycles, args.seed)
    full = run_protocol(corpus, args.classifier, cycles=args.cycles, seed=args.seed)
    dummy = run_protocol(corpus, "dummy", cycles=args.cycles, seed=args.seed)
    print(f"{'feature':<16}{'F1 mean':>10}{'F1 std':>10}")
    for name, rep in [*scores.items(), ("all five", full), ("dummy", dummy)]:
        m, s = rep.aggregate["f1"]
        print(f"{name:<16}{m:>10.3f}{s:>10.3f}")
    print(f"({args.cycles} cycles, {time.perf_counter() - t0:.0f}s)")


if __name__ == "__main__":
    main()
