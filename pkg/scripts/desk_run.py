"""Run the desk-scale pipeline on the planted-signal generator and print a timing table.

    python3 scripts/desk_run.py --out desk_out --seed 0 --workers 1
"""
import argparse
import json
from pathlib import Path

from rgsearch.desk import DESK_SEARCHES, SUBSET_METHOD, run_desk
from rgsearch.synthetic import PlantedSignal


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="desk_out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--explain-cases", type=int, default=40)
    args = p.parse_args()

    gen = PlantedSignal(seed=args.seed)
    run = run_desk(args.out, args.seed, args.workers, args.explain_cases, gen)
    print(f"\nBayes-optimal AUC of the generator: {gen.bayes_auc():.3f}")
    print(f"{'search':<10}{'mean-test':>10}{'validation':>12}{'seconds':>10}")
    names = [(m, False) for m, _ in DESK_SEARCHES] + [(SUBSET_METHOD, True)]
    for method, subset in names:
        s = json.loads((run.search_dir(method, subset) / "summary.json").read_text())
        label = method + ("_RF" if subset else "")
        v = s["validation_auc"]
        print(f"{label:<10}{s['best_mean_test_auc']:>10.3f}{(f'{v:.3f}' if v is not None else 'n/a'):>12}"
              f"{run.seconds['search ' + label]:>10.1f}")
    print(f"total {sum(run.seconds.values()) / 60:.2f} minutes; outputs under {Path(args.out).resolve()}")


if __name__ == "__main__":
    main()
