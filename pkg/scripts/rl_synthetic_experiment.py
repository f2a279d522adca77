"""Train the next-emotion policy on the synthetic valence oracle and report
how the reward and the action distribution move.

The oracle environment has one catalog emotion whose valence-arousal entry
lifts the simulated speaker toward positive valence; every other choice
leaves them flat or worse.  A working learner should concentrate its action
histogram on that emotion and push the mean empathy valence toward the
closed-form optimum.

Writes per-seed reward curves and before/after histograms under --out.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from cheerbot.rl import (
    RlConfig,
    SoftmaxPolicy,
    UniformPolicy,
    evaluate_policy,
    greedy_q_policy,
    save_curve,
    train_rl,
)
from cheerbot.synthetic import make_synthetic_rl_setup, optimal_action_id, optimal_reward

EVAL_EPISODES = 200


def run_seed(algo: str, seed: int, episodes: int, out_dir: Path) -> dict:
    setup = make_synthetic_rl_setup(seed=seed)
    n_actions = len(setup.catalog)
    uplift = optimal_action_id(setup.catalog)

    def evaluate(policy):
        return evaluate_policy(
            policy, setup.predictor, setup.responder, setup.env,
            n_turns=3, episodes=EVAL_EPISODES, rng=np.random.default_rng(seed),
        )

    before_policy = SoftmaxPolicy(setup.predictor)
    before = evaluate(before_policy).action_histogram(n_actions)

    if algo == "dqn":
        config = RlConfig(algorithm="dqn", seed=seed, n_episodes=episodes,
                          lr=5e-3, target_sync_freq=50)
    else:
        config = RlConfig(algorithm="pg", seed=seed, n_episodes=episodes, lr=2e-2)
    result = train_rl(config, setup.predictor, setup.responder, setup.env)
    policy = greedy_q_policy(result.qnet) if algo == "dqn" else SoftmaxPolicy(setup.predictor)

    stats = evaluate(policy)
    after = stats.action_histogram(n_actions)
    uniform = evaluate(UniformPolicy(n_actions))

    save_curve(result, out_dir / f"{algo}_seed{seed}_curve.csv")
    with open(out_dir / f"{algo}_seed{seed}_hist.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["action_id", "emotion", "count_before", "count_after"])
        for i in range(n_actions):
            writer.writerow([i, setup.catalog.by_id(i).name, int(before[i]), int(after[i])])

    return {
        "mean": stats.mean_reward(),
        "uniform": uniform.mean_reward(),
        "uplift_mass": float(after[uplift] / after.sum()),
        "uplift_mass_before": float(before[uplift] / before.sum()),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--algo", choices=["pg", "dqn", "both"], default="both")
    parser.add_argument("--seeds", type=int, default=3, help="number of seeds, 0..N-1")
    parser.add_argument("--episodes", type=int, default=None,
                        help="training episodes (default: 300 dqn, 400 pg)")
    parser.add_argument("--out", type=Path, default=Path("runs/synthetic"))
    args = parser.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    algos = ["dqn", "pg"] if args.algo == "both" else [args.algo]
    target = optimal_reward(0.5, -0.5, 3)
    print(f"closed-form optimum over 3 turns: {target:.3f}")

    for algo in algos:
        episodes = args.episodes or (300 if algo == "dqn" else 400)
        rows = []
        for seed in range(args.seeds):
            row = run_seed(algo, seed, episodes, args.out)
            rows.append(row)
            print(
                f"{algo} seed {seed}: mean {row['mean']:+.3f} "
                f"(uniform {row['uniform']:+.3f}), optimal-emotion mass "
                f"{row['uplift_mass_before']:.2f} -> {row['uplift_mass']:.2f}"
            )
        means = [r["mean"] for r in rows]
        print(f"{algo} aggregate over {args.seeds} seeds: "
              f"{np.mean(means):+.3f} +- {np.std(means):.3f}\n")
    print(f"curves and histograms written to {args.out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
