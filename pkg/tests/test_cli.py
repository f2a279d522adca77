"""Command line surface: argument rules, exit codes, stream output."""

import io
import re

import pytest

from cheerbot import cli
from cheerbot.pipeline import curve_path

from conftest import TOY_CONVS


@pytest.mark.parametrize(
    "command",
    ["bootstrap-va", "train-detector", "train-predictor", "train-retrieval", "train-gen",
     "train-rl"],
)
def test_training_commands_require_seed(tmp_path, command, capsys):
    rc = cli.main(["--workdir", str(tmp_path), command])
    assert rc == 2
    assert "--seed" in capsys.readouterr().err


def test_unknown_command_and_metric_rejected(tmp_path, capsys):
    assert cli.main(["--workdir", str(tmp_path), "polish"]) == 2
    assert cli.main(["--workdir", str(tmp_path), "eval", "--metric", "rouge"]) == 2
    assert "--metric" in capsys.readouterr().err


def test_ingest_reports_count(tmp_path, toy_csv, capsys):
    rc = cli.main(["--workdir", str(tmp_path), "ingest", "--csv", str(toy_csv)])
    assert rc == 0
    out = capsys.readouterr().out
    assert f"ingested {TOY_CONVS * 4} records into {tmp_path}" in out


def test_ingest_missing_csv_is_an_error(tmp_path, capsys):
    rc = cli.main(["--workdir", str(tmp_path), "ingest", "--csv", str(tmp_path / "no.csv")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_training_before_ingest_fails_with_hint(tmp_path, capsys):
    rc = cli.main(["--workdir", str(tmp_path), "train-detector", "--seed", "1"])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "run ingest first" in err


def test_eval_before_training_fails_with_hint(tmp_path, capsys):
    rc = cli.main(["--workdir", str(tmp_path), "eval", "--metric", "reward"])
    assert rc == 2
    assert "run train-rl first" in capsys.readouterr().err


def test_chat_needs_a_populated_workdir(tmp_path, capsys):
    rc = cli.main(["--workdir", str(tmp_path), "chat"], stdin=io.StringIO(""))
    assert rc == 2
    assert "run ingest first" in capsys.readouterr().err


RL_ARGS = ["train-rl", "--algo", "dqn", "--episodes", "10", "--lr", "0.005",
           "--target-sync-freq", "50"]


def test_train_rl_same_seed_same_curve(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["--workdir", str(a), *RL_ARGS, "--seed", "21"]) == 0
    assert cli.main(["--workdir", str(b), *RL_ARGS, "--seed", "21"]) == 0
    assert curve_path(a).read_bytes() == curve_path(b).read_bytes()
    assert "trained dqn: mean reward (last window)" in capsys.readouterr().out


def test_env_seed_overrides_flag(tmp_path, capsys, monkeypatch):
    env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"
    monkeypatch.setenv("CHEERBOT_SEED", "13")
    assert cli.main(["--workdir", str(env_dir), *RL_ARGS, "--seed", "99"]) == 0
    monkeypatch.delenv("CHEERBOT_SEED")
    assert cli.main(["--workdir", str(flag_dir), *RL_ARGS, "--seed", "13"]) == 0
    assert curve_path(env_dir).read_bytes() == curve_path(flag_dir).read_bytes()


def test_bad_env_seed_is_an_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CHEERBOT_SEED", "lucky")
    rc = cli.main(["--workdir", str(tmp_path), *RL_ARGS, "--seed", "1"])
    assert rc == 2
    assert "CHEERBOT_SEED must be an integer" in capsys.readouterr().err


def test_eval_prints_metric_lines(trained_workdir, capsys):
    rc = cli.main(["--workdir", str(trained_workdir), "eval", "--metric", "ppl"])
    assert rc == 0
    out = capsys.readouterr().out
    assert re.search(r"^ppl = \d+(\.\d+)? \(n=\d+\)$", out, flags=re.M)


BRACKET = re.compile(
    r"^\[[a-z_]+ v=[+-]\d\.\d{2} a=[+-]\d\.\d{2} next=[a-z_]+ empathy=[+-]\d\.\d{2}\]$",
    flags=re.M,
)


def test_chat_repl_round_trip(trained_workdir):
    out = io.StringIO()
    rc = cli.main(
        ["--workdir", str(trained_workdir), "chat"],
        stdin=io.StringIO("kw0 mark0 sample today\nkw4 mark4 sample\n"),
        stdout=out,
    )
    assert rc == 0
    text = out.getvalue()
    assert text.startswith("type a message (EOF to quit)\n")
    assert len(BRACKET.findall(text)) == 2
    assert text.count("bot> ") == 2


def test_chat_repl_skips_blank_lines(trained_workdir):
    out = io.StringIO()
    rc = cli.main(
        ["--workdir", str(trained_workdir), "chat"],
        stdin=io.StringIO("\n   \nkw1 mark1 sample\n"),
        stdout=out,
    )
    assert rc == 0
    assert len(BRACKET.findall(out.getvalue())) == 1
