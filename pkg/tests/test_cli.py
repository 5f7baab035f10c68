import csv
import shutil
from pathlib import Path

import pytest

from perturb_repair import cli
from perturb_repair.corpus import read_jsonl
from perturb_repair.lang import parse
from perturb_repair.lang.edit import region_stmts

SEEDS = Path(cli.__file__).parent / "seeds"

TINY = """\
# tiny model for fast tests
vocab_size = 420
encoder_layers = 1
decoder_layers = 1
d_model = 16
num_heads = 2
ffn_dim = 32
max_input_tokens = 128
max_output_tokens = 48
epochs = 1
batch_size = 32
"""


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    seeds = root / "seeds"
    seeds.mkdir()
    for name in ("stats", "stack"):
        shutil.copy(SEEDS / f"{name}.mj", seeds)
    (root / "tiny.cfg").write_text(TINY)
    assert cli.main(["gen", "--seeds", str(seeds), "--out", str(root / "c.jsonl"), "--rounds", "1",
                     "--held-out", "stack"]) == 0
    assert cli.main(["train", str(root / "c.train.jsonl"), "--out", str(root / "m.ckpt"),
                     "--config", str(root / "tiny.cfg")]) == 0
    return root


def test_gen_artifacts(work):
    for suffix in (".jsonl", ".stats.csv", ".stats.png", ".manifest.json", ".train.jsonl", ".test.jsonl"):
        assert (work / f"c{suffix}").stat().st_size > 0
    kinds = {s.kind for s in read_jsonl(work / "c.jsonl")}
    assert kinds == {"CE", "FE"}
    assert {s.program_id for s in read_jsonl(work / "c.test.jsonl")} == {"stack"}
    assert (work / "c.stats.csv").read_text().startswith("error_type,count\n")


def test_gen_is_byte_reproducible(work, tmp_path):
    assert cli.main(["gen", "--seeds", str(work / "seeds"), "--out", str(tmp_path / "c.jsonl"),
                     "--rounds", "1", "--held-out", "stack"]) == 0
    for suffix in (".jsonl", ".stats.csv", ".manifest.json", ".train.jsonl", ".test.jsonl"):
        assert (tmp_path / f"c{suffix}").read_bytes() == (work / f"c{suffix}").read_bytes()


def test_train_artifacts(work):
    rows = list(csv.reader((work / "m.loss.csv").open()))
    assert rows[0] == ["epoch", "loss"] and [r[0] for r in rows[1:]] == ["0", "1"]
    for name in ("m.vocab", "m.merges", "m.loss.png"):
        assert (work / name).stat().st_size > 0


def test_train_with_validation(work, tmp_path, capsys):
    ckpt = tmp_path / "v.ckpt"
    assert cli.main(["train", str(work / "c.train.jsonl"), "--out", str(ckpt), "--config", str(work / "tiny.cfg"),
                     "--vocab", str(work / "m.vocab"), "--valid", str(work / "c.test.jsonl"), "--epochs", "2"]) == 0
    assert "kept epoch" in capsys.readouterr().out
    rows = list(csv.reader((tmp_path / "v.valid.csv").open()))
    assert rows[0] == ["epoch", "loss"] and [r[0] for r in rows[1:]] == ["0", "1", "2"]


def test_empty_seed_dir(tmp_path, capsys):
    assert cli.main(["gen", "--seeds", str(tmp_path), "--out", str(tmp_path / "c.jsonl")]) == 2
    assert "no seed programs" in capsys.readouterr().err


def test_incorrect_seed(tmp_path):
    (tmp_path / "bad.mj").write_text((SEEDS / "stats.mj").read_text().replace("count = count + 1;", "count = count + 2;", 1))
    assert cli.main(["gen", "--seeds", str(tmp_path), "--out", str(tmp_path / "c.jsonl")]) == 2


def test_unknown_held_out_id(work, tmp_path):
    assert cli.main(["gen", "--seeds", str(work / "seeds"), "--out", str(tmp_path / "c.jsonl"),
                     "--rounds", "1", "--held-out", "nosuch"]) == 2


def test_fe_only_without_fe_samples(work, tmp_path):
    ce = tmp_path / "ce.jsonl"
    ce.write_text("".join(l + "\n" for l in (work / "c.jsonl").read_text().splitlines() if '"kind": "CE"' in l))
    assert ce.stat().st_size > 0
    assert cli.main(["train", str(ce), "--out", str(tmp_path / "m.ckpt"), "--variant", "fe-only",
                     "--vocab", str(work / "m.vocab"), "--config", str(work / "tiny.cfg")]) == 2


def test_config_errors(work, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 1\n")
    assert cli.main(["stats", str(work / "c.jsonl"), "--config", str(bad)]) == 2
    bad.write_text("epochs = many\n")
    assert cli.main(["stats", str(work / "c.jsonl"), "--config", str(bad)]) == 2


def test_flags_override_config(work):
    args = cli.build_parser().parse_args(["train", "x", "--out", "y", "--config", str(work / "tiny.cfg"),
                                          "--epochs", "7", "--seed", "9"])
    s = cli.settings(args)
    assert (s["epochs"], s["seed"], s["d_model"], s["beam"]) == (7, 9, 16, 10)


def test_missing_file_is_io_error(tmp_path):
    assert cli.main(["stats", str(tmp_path / "absent.jsonl")]) == 1


def test_malformed_corpus(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"buggy": 1}\n')
    assert cli.main(["stats", str(bad)]) == 2


def test_stats(work, tmp_path, capsys):
    assert cli.main(["stats", str(work / "c.jsonl"), "--out", str(tmp_path / "s")]) == 0
    out = capsys.readouterr().out
    assert out == (tmp_path / "s.stats.csv").read_text()
    assert (tmp_path / "s.stats.png").stat().st_size > 0


def test_eval_report(work, tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert cli.main(["eval", str(work / "c.test.jsonl"), "--ckpt", str(work / "m.ckpt"), "--label", "tiny",
                     "--beam", "2", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["model", "sample_id", "action", "kind", "candidates",
                       "exact@1", "exact@2", "plausible@1", "plausible@2"]
    assert len(rows) - 1 == len(read_jsonl(work / "c.test.jsonl"))
    summary = list(csv.reader((tmp_path / "e.summary.csv").open()))
    assert summary[0] == ["model", "metric", "k", "samples", "rate"]
    assert (tmp_path / "e.png").stat().st_size > 0


def test_eval_empty_corpus(work, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert cli.main(["eval", str(empty), "--ckpt", str(work / "m.ckpt"), "--out", str(tmp_path / "e.csv")]) == 0
    summary = list(csv.reader((tmp_path / "e.summary.csv").open()))
    assert len(summary) > 1 and all(r[-1] == "n/a" for r in summary[1:])


def test_eval_missing_checkpoint(work, tmp_path):
    assert cli.main(["eval", str(work / "c.test.jsonl"), "--ckpt", str(tmp_path / "none.ckpt"),
                     "--out", str(tmp_path / "e.csv")]) == 1


def _buggy_file(work, tmp_path):
    sample = next(s for s in read_jsonl(work / "c.test.jsonl") if s.tag in ("P1", "P3", "P5", "P6"))
    path = tmp_path / "buggy.mj"
    path.write_text(sample.meta["perturbed"])
    stmt = region_stmts(parse(sample.meta["perturbed"]), sample.region)[0]
    return path, stmt.span.line


def test_repair_lists_ranked_candidates(work, tmp_path, capsys):
    path, line = _buggy_file(work, tmp_path)
    code = cli.main(["repair", str(path), f"{path}:{line}", "--ckpt", str(work / "m.ckpt"), "--beam", "3", "-n", "2"])
    assert code in (0, 3)
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("diagnostic: [") and out[1].startswith("buggy: ")
    ranked = out[2:]
    assert 1 <= len(ranked) <= 2
    assert [r.split("\t")[0] for r in ranked] == [str(i) for i in range(1, len(ranked) + 1)]
    assert code == (0 if any("\tplausible\t" in r for r in ranked) else 3)


def test_repair_correct_program(work, capsys):
    src = SEEDS / "stats.mj"
    line = next(n for n, t in enumerate(src.read_text().splitlines(), 1) if "count = count + 1;" in t)
    assert cli.main(["repair", str(src), f"{src}:{line}", "--ckpt", str(work / "m.ckpt"), "--beam", "2"]) == 2
    assert "already checks and passes" in capsys.readouterr().err


def test_repair_bad_locator(work, tmp_path):
    path, _ = _buggy_file(work, tmp_path)
    assert cli.main(["repair", str(path), "elsewhere.mj:3", "--ckpt", str(work / "m.ckpt")]) == 2
    assert cli.main(["repair", str(path), f"{path}:9999", "--ckpt", str(work / "m.ckpt")]) == 2
    assert cli.main(["repair", str(path), f"{path}", "--ckpt", str(work / "m.ckpt")]) == 2
