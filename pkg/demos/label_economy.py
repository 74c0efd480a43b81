"""Why the active learner eventually stops buying labels almost entirely.

Two diagnostics on a noiseless shortest-path world where every conditional
mean cost sits a fixed distance away from any decision boundary:

1. Run the stream with hard rejection (no safety coin). Once the fitted
   model is accurate and the shrinking threshold drops below that distance,
   no point ever looks ambiguous again and labeling stops outright.
2. Profile that distance directly: the near-degeneracy curve measures the
   fraction of conditional means within margin b of a decision change. The
   curve is exactly zero below the world's margin floor, and on a synthetic
   power-law world the fitted exponent recovers the ground truth.
"""

from __future__ import annotations

import argparse

import numpy as np

from mbal_clo import (
    SPOPLUS,
    MbalConfig,
    TrainerConfig,
    estimate_near_degeneracy,
    gen_shortest_path_scenario,
    labeled_fraction,
    psi_from_costs,
    run_stream,
    sample_degeneracy_profile_cost,
)
from mbal_clo.cli import trial_seed


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", type=int, default=1000, help="stream length")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--profile-samples", type=int, default=20000)
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    scenario = gen_shortest_path_scenario(42, sigma_m2=0.0)
    poly = scenario.polytope()

    print("part 1: hard rejection on a noiseless world")
    cfg = MbalConfig(
        p_tilde=0.0,
        surrogate=SPOPLUS,
        trainer=TrainerConfig(step_size=0.1, epochs_per_update=10),
        seed=trial_seed(args.seed, 0),
        warmup_trainer=TrainerConfig(step_size=0.1, epochs_per_update=300),
    )
    trace = run_stream(cfg, scenario, args.T, None)
    labeled_ts = [rec.t for rec in trace.records if rec.labeled and rec.t >= 1]
    half = args.T // 2
    print(f"  labels bought in the first half of the stream:  {sum(t <= half for t in labeled_ts)}")
    print(f"  labels bought in the second half of the stream: {sum(t > half for t in labeled_ts)}")
    print(f"  last label at t={max(labeled_ts)}; fraction over [{half}, {args.T}]: "
          f"{labeled_fraction(trace, half, args.T):.3f}")

    print("\npart 2: the margin floor the learner runs into")
    rng = np.random.default_rng([42, 3])
    grid = np.geomspace(1e-3, 2.0, 14)
    est = estimate_near_degeneracy(scenario, grid, args.profile_samples, rng=rng)
    floor = next((float(b) for b, p in zip(est.b_grid, est.psi) if p > 0), None)
    print(f"  profile over {est.M} conditional means; first margin with any mass: {floor:.3f}")
    for b, p in zip(est.b_grid, est.psi):
        bar = "#" * int(round(40 * p))
        print(f"    b={b:7.3f}  psi={p:5.3f} {bar}")

    print("\npart 3: exponent recovery on a synthetic power-law world")
    costs = sample_degeneracy_profile_cost(poly, 1.0, args.profile_samples, np.random.default_rng([42, 3]))
    fit = psi_from_costs(poly, costs, np.geomspace(1e-3, 0.05, 12))
    print(f"  ground-truth exponent 1.0, fitted {fit.kappa_hat:.3f} from {fit.M} draws")


if __name__ == "__main__":
    main()
