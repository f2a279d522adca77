"""Shared fixtures and reference oracles.

The expensive fixture is `trained_workdir`: a deterministic toy corpus
pushed through every CLI training stage once per session.  Tests that
mutate a workdir must build their own instead of touching this one.
"""

import math
from collections import Counter

import pytest

from cheerbot import cli
from cheerbot.catalog import load_default_catalog
from cheerbot.synthetic import ed_style_records, write_ed_csv

# sized so the md5 split leaves every emotion label in the train slice
TOY_CONVS = 116


def bleu_counting_oracle(hyp, ref, max_n=4):
    """Sentence BLEU re-derived independently: clipped n-gram overlaps via
    Counter intersection, product-form geometric mean."""
    if not ref:
        raise ValueError("empty reference")
    if not hyp:
        return 0.0
    precisions = []
    for n in range(1, max_n + 1):
        h = Counter(tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1))
        r = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        overlap = sum((h & r).values())
        total = max(len(hyp) - n + 1, 0)
        if n == 1:
            if overlap == 0:
                return 0.0
            precisions.append(overlap / total)
        else:
            precisions.append((overlap + 1) / (total + 1))
    geo = math.prod(precisions) ** (1.0 / max_n)
    penalty = 1.0 if len(hyp) >= len(ref) else math.exp(1.0 - len(ref) / len(hyp))
    return penalty * geo


BLEU_FIXTURES = [
    ("identical", "the cat sat on the mat", "the cat sat on the mat"),
    ("short hyp", "the cat", "the cat sat on the mat"),
    ("long hyp", "the cat sat on the mat today again", "the cat sat"),
    ("partial", "a cat sat on a mat", "the cat sat on the mat"),
    ("repeat clip", "the the the the the", "the cat sat on the mat"),
    ("single token", "cat", "cat"),
    ("single vs long", "cat", "the cat sat"),
    ("scrambled", "mat the on sat cat the", "the cat sat on the mat"),
    ("two tokens", "sat cat", "the cat sat on the mat here"),
    ("digits", "1 2 3 4 5", "1 2 3 9 5"),
]


@pytest.fixture(scope="session")
def full_catalog():
    return load_default_catalog()


@pytest.fixture(scope="session")
def toy_csv(tmp_path_factory, full_catalog):
    records = ed_style_records(full_catalog, n_convs=TOY_CONVS, turns_per_conv=4)
    path = tmp_path_factory.mktemp("corpus") / "toy.csv"
    write_ed_csv(records, path)
    return path


def run_stages(work, stages):
    for args in stages:
        rc = cli.main(["--workdir", str(work)] + args)
        assert rc == 0, f"stage {args[0]} exited {rc}"


@pytest.fixture(scope="session")
def trained_workdir(tmp_path_factory, toy_csv):
    work = tmp_path_factory.mktemp("workdir")
    run_stages(
        work,
        [
            ["ingest", "--csv", str(toy_csv)],
            ["bootstrap-va", "--seed", "5", "--epochs", "400"],
            ["train-detector", "--seed", "5", "--epochs", "120"],
            ["train-predictor", "--seed", "5", "--epochs", "30"],
            ["train-retrieval", "--seed", "5", "--epochs", "60"],
            ["train-gen", "--seed", "5", "--epochs", "12"],
            [
                "train-rl",
                "--seed", "7",
                "--algo", "dqn",
                "--episodes", "120",
                "--lr", "0.005",
                "--target-sync-freq", "50",
            ],
        ],
    )
    return work
