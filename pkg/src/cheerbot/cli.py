"""Command line entry points; every subcommand is a thin veneer over
pipeline stage functions.

Training subcommands require --seed; the CHEERBOT_SEED environment
variable, when set, overrides any seed given on the command line.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalog import CatalogError, load_catalog
from .checkpoint import CheckpointError
from .corpus import CorpusError
from . import pipeline
from .pipeline import StageError

METRICS = ("bleu", "p@1,100", "ppl", "reward")


def resolve_seed(seed: int | None) -> int | None:
    env = os.environ.get("CHEERBOT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"CHEERBOT_SEED must be an integer, got {env!r}") from None
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cheerbot", description="empathetic dialogue toolkit"
    )
    parser.add_argument("--workdir", type=Path, default=Path("workdir"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a conversation CSV into the workdir")
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--catalog", type=Path, default=None)

    p = sub.add_parser("bootstrap-va", help="complete the catalog VA table")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("train-detector", help="train the emotion detector")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("train-predictor", help="train the next-emotion predictor")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("train-retrieval", help="train the response bi-encoder")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=16)

    p = sub.add_parser("train-gen", help="train the toy generator")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=30)

    p = sub.add_parser("train-rl", help="train the next-emotion policy")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--algo", choices=("pg", "dqn"), default="dqn")
    p.add_argument("--backend", choices=("oracle", "corpus"), default="oracle")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--target-sync-freq", type=int, default=None)

    p = sub.add_parser("eval", help="compute a metric report")
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=100)

    p = sub.add_parser("chat", help="talk to the bot on stdin/stdout")

    p = sub.add_parser("serve", help="run the chat HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--idle-timeout", type=float, default=1800.0)

    return parser


def _chat_repl(workdir: Path, stdin=None, stdout=None) -> int:
    from .service import ChatEngine, ChatState

    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    components = pipeline.load_chat_components(workdir)
    engine = ChatEngine(components)
    state = ChatState()
    stdout.write("type a message (EOF to quit)\n")
    stdout.flush()
    for line in stdin:
        text = line.strip()
        if not text:
            continue
        try:
            payload = engine.turn(state, text)
        except ValueError as exc:
            stdout.write(f"error: {exc}\n")
            stdout.flush()
            continue
        stdout.write(
            f"[{payload['detected_emotion']} "
            f"v={payload['detected_valence']:+.2f} "
            f"a={payload['detected_arousal']:+.2f} "
            f"next={payload['predicted_next_emotion']} "
            f"empathy={payload['empathy_valence_so_far']:+.2f}]\n"
        )
        stdout.write(f"bot> {payload['reply_text']}\n")
        stdout.flush()
    return 0


def main(argv: list[str] | None = None, stdin=None, stdout=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "ingest":
            catalog = load_catalog(args.catalog) if args.catalog else None
            n = pipeline.ingest(args.workdir, args.csv, catalog=catalog)
            print(f"ingested {n} records into {args.workdir}")
        elif args.command == "bootstrap-va":
            seed = resolve_seed(args.seed)
            pipeline.bootstrap_va(
                args.workdir, seed, epochs=args.epochs, batch_size=args.batch_size
            )
            print("catalog VA table complete")
        elif args.command == "train-detector":
            seed = resolve_seed(args.seed)
            path = pipeline.train_detector(
                args.workdir, seed, epochs=args.epochs, batch_size=args.batch_size
            )
            print(f"saved {path}")
        elif args.command == "train-predictor":
            seed = resolve_seed(args.seed)
            path = pipeline.train_predictor(
                args.workdir, seed, epochs=args.epochs, batch_size=args.batch_size
            )
            print(f"saved {path}")
        elif args.command == "train-retrieval":
            seed = resolve_seed(args.seed)
            path = pipeline.train_retrieval(
                args.workdir, seed, epochs=args.epochs, batch_size=args.batch_size
            )
            print(f"saved {path}")
        elif args.command == "train-gen":
            seed = resolve_seed(args.seed)
            path = pipeline.train_gen(args.workdir, seed, epochs=args.epochs)
            print(f"saved {path}")
        elif args.command == "train-rl":
            seed = resolve_seed(args.seed)
            result = pipeline.run_train_rl(
                args.workdir,
                seed,
                algorithm=args.algo,
                backend=args.backend,
                n_episodes=args.episodes,
                lr=args.lr,
                target_sync_freq=args.target_sync_freq,
            )
            last = result.curve[-1][1] if result.curve else float("nan")
            print(
                f"trained {args.algo}: mean reward (last window) {last:.4f}; "
                f"curve {pipeline.curve_path(args.workdir)}"
            )
        elif args.command == "eval":
            seed = resolve_seed(args.seed)
            reports = pipeline.evaluate(
                args.workdir, args.metric, seed=seed, episodes=args.episodes
            )
            for r in reports:
                print(f"{r.metric} = {r.value!r} (n={r.n_items})")
        elif args.command == "chat":
            return _chat_repl(args.workdir, stdin=stdin, stdout=stdout)
        elif args.command == "serve":
            import uvicorn

            from .service import create_app

            components = pipeline.load_chat_components(args.workdir)
            app = create_app(components, idle_timeout_s=args.idle_timeout)
            uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except (StageError, CheckpointError, CatalogError, CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
