"""Compare solvers on random matrix games and print the median final duality gap."""
import argparse

from cbasolve.cli import ExperimentConfig, run_experiment

SETUPS = {
    "cba+": dict(algo="cba+", mode="alternation", averaging="linear"),
    "cba": dict(algo="cba", mode="simultaneous", averaging="uniform"),
    "rm+": dict(algo="rm+", mode="alternation", averaging="linear"),
    "rm": dict(algo="rm", mode="simultaneous", averaging="uniform"),
    "oftrl": dict(algo="oftrl", mode="simultaneous", averaging="uniform"),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", type=int, default=70)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--size", type=int, default=10)
    parser.add_argument("--dist", default="uniform01", choices=["uniform01", "normal01"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--solvers", nargs="+", default=list(SETUPS), choices=list(SETUPS))
    args = parser.parse_args()

    print(f"{args.games} games of size {args.size}x{args.size}, T={args.steps}")
    print(f"{'solver':8s} {'iteration':>9s} {'median gap':>12s} {'geo mean':>12s}")
    for name in args.solvers:
        config = ExperimentConfig(problem="matrix-game", steps=args.steps, instances=args.games,
                                  seed=args.seed, n=args.size, m=args.size, dist=args.dist,
                                  workers=args.workers, **SETUPS[name])
        _, summary = run_experiment(config)
        shown = {args.steps // 8, args.steps // 2, args.steps}
        for entry in summary["checkpoints"]:
            if entry["iteration"] in shown:
                print(f"{name:8s} {entry['iteration']:9d} {entry['median']:12.3e} "
                      f"{entry['geometric_mean']:12.3e}")


if __name__ == "__main__":
    main()
