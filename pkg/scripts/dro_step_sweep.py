"""Sweep the step-size multiplier on the robust logistic regression instance.

CBA+ needs no step size, so it is run once and shown as a reference row.
"""
import argparse

from cbasolve.cli import ExperimentConfig, run_experiment


def final_metric(summary):
    last = summary["checkpoints"][-1]
    if last["instances"] == 0:
        return "diverged"
    return f"{last['geometric_mean']:.4g}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=50, help="features")
    parser.add_argument("--m", type=int, default=50, help="samples")
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--instances", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dist", default="normal", choices=["normal", "uniform"])
    parser.add_argument("--data", default=None, help="libsvm file instead of synthetic data")
    parser.add_argument("--alphas", type=float, nargs="+", default=[1, 10, 100, 1000, 10000])
    parser.add_argument("--algos", nargs="+", default=["omd", "oomd", "ftrl", "oftrl"])
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    common = dict(problem="dro", n=args.n, m=args.m, steps=args.steps, instances=args.instances,
                  seed=args.seed, dist=args.dist, data=args.data, workers=args.workers,
                  averaging="linear")
    _, reference = run_experiment(ExperimentConfig(algo="cba+", mode="alternation", **common))
    print(f"worst-case loss of the averaged iterate after {args.steps} iterations")
    print(f"{'cba+':8s} {final_metric(reference):>10s}  (no step size)")
    print(f"{'alpha':8s} " + " ".join(f"{a:>10s}" for a in args.algos))
    for alpha in args.alphas:
        cells = []
        for algo in args.algos:
            config = ExperimentConfig(algo=algo, mode="simultaneous",
                                      step_mode=f"multiplier:{alpha!r}", **common)
            cells.append(final_metric(run_experiment(config)[1]))
        print(f"{alpha:<8g} " + " ".join(f"{c:>10s}" for c in cells))


if __name__ == "__main__":
    main()
