"""End-to-end walkthrough on generated data: build a toy corpus, run every
training stage through the CLI, then print the evaluation metrics.

Budgets are deliberately small so the whole thing finishes in well under a
minute; pass --episodes / --epochs-scale to train longer.
"""

import argparse
import sys
from pathlib import Path

from cheerbot import cli
from cheerbot.catalog import load_default_catalog
from cheerbot.synthetic import ed_style_records, write_ed_csv


def run(workdir: Path, argv: list[str]) -> None:
    full = ["--workdir", str(workdir)] + argv
    print(f"$ cheerbot {' '.join(full)}")
    rc = cli.main(full)
    if rc != 0:
        print(f"stage failed with exit code {rc}", file=sys.stderr)
        raise SystemExit(rc)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", type=Path, default=Path("runs/demo"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-convs", type=int, default=60)
    parser.add_argument("--episodes", type=int, default=150)
    parser.add_argument("--epochs-scale", type=float, default=1.0,
                        help="multiplier on every per-stage epoch budget")
    args = parser.parse_args(argv)

    args.workdir.mkdir(parents=True, exist_ok=True)
    csv_path = args.workdir / "toy_ed.csv"
    records = ed_style_records(load_default_catalog(), n_convs=args.n_convs)
    write_ed_csv(records, csv_path)
    print(f"wrote {len(records)} utterances to {csv_path}")

    def epochs(n: int) -> str:
        return str(max(1, int(n * args.epochs_scale)))

    seed = ["--seed", str(args.seed)]
    run(args.workdir, ["ingest", "--csv", str(csv_path)])
    run(args.workdir, ["bootstrap-va", *seed, "--epochs", epochs(400)])
    run(args.workdir, ["train-detector", *seed, "--epochs", epochs(120)])
    run(args.workdir, ["train-predictor", *seed, "--epochs", epochs(30)])
    run(args.workdir, ["train-retrieval", *seed, "--epochs", epochs(60)])
    run(args.workdir, ["train-gen", *seed, "--epochs", epochs(12)])
    run(args.workdir, ["train-rl", *seed, "--algo", "dqn", "--backend", "oracle",
                       "--episodes", str(args.episodes), "--lr", "0.005",
                       "--target-sync-freq", "50"])
    for metric in ["p@1,100", "bleu", "ppl", "reward"]:
        run(args.workdir, ["eval", *seed, "--metric", metric])

    print(f"\ndone; chat against it with:\n  cheerbot --workdir {args.workdir} chat")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
