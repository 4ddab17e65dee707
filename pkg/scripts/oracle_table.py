"""Print closed-form divergence, Hellinger rate and Monte Carlo estimates for every built-in model."""
import argparse

from levy_mmm import models
from levy_mmm.montecarlo import SimulationConfig, UnsupportedMeasure, mc_divergence, simulate
from levy_mmm.solver import solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    print(f"{'model':32s} {'closed form':>14s} {'MC mean':>14s} {'SE':>10s} {'z':>7s} {'hellinger':>10s}")
    for label, t, spec in models.catalogue():
        sol = solve(t, spec)
        try:
            batch = simulate(t, SimulationConfig(n_paths=args.paths, seed=args.seed))
        except UnsupportedMeasure:
            print(f"{label:32s} {sol.divergence_value:14.6g} {'n/a':>14s}")
            continue
        est = mc_divergence(batch, t, spec, sol.params)
        print(f"{label:32s} {sol.divergence_value:14.6g} {est.mean:14.6g} {est.se:10.2e} "
              f"{est.z_score(sol.divergence_value):+7.2f} {sol.hellinger_rate:10.4g}")


if __name__ == "__main__":
    main()
