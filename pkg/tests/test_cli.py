import json
from pathlib import Path

import numpy as np
import pytest

from polytok.adaptation import EmbeddingTable, save_embeddings
from polytok.bpe import Tokenizer
from polytok.cli import main
from polytok.metrics import escape_field

from .oracles import naive_bpe_merges

DATA = Path(__file__).parents[1] / "data"


def run(*argv):
    return main(list(argv))


def test_weights_pinned_english_row(tmp_path):
    out = tmp_path / "out"
    code = run(
        "weights",
        "--registry", str(DATA / "languages_62.tsv"),
        "--mode", "universal",
        "--pin", "eng=0.30",
        "--out", str(out),
    )
    assert code == 0
    rows = dict(
        line.split("\t")
        for line in (out / "weights.tsv").read_text().rstrip("\n").split("\n")
    )
    assert float(rows["eng"]) == 0.30
    assert len(rows) == 62
    assert abs(sum(float(v) for v in rows.values()) - 1.0) < 1e-9
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "weights"
    assert "registry" in manifest["inputs"]


def test_weights_uniform_two_languages(tmp_path):
    registry = tmp_path / "two.tsv"
    registry.write_text(
        "aaa\tA\tLatin\tIndo-European\tx\tEuro\t10\n"
        "bbb\tB\tLatin\tIndo-European\tx\tEuro\t99\n"
    )
    out = tmp_path / "out"
    assert run("weights", "--registry", str(registry), "--mode", "uniform",
               "--out", str(out)) == 0
    rows = dict(
        line.split("\t")
        for line in (out / "weights.tsv").read_text().rstrip("\n").split("\n")
    )
    assert float(rows["aaa"]) == 0.5
    assert float(rows["bbb"]) == 0.5


def test_missing_registry_exits_2(tmp_path, capsys):
    code = run(
        "weights", "--registry", str(tmp_path / "nope.tsv"), "--out", str(tmp_path / "o")
    )
    assert code == 2
    assert "nope.tsv" in capsys.readouterr().err


def test_bad_pin_spec_exits_2(tmp_path):
    code = run(
        "weights",
        "--registry", str(DATA / "languages_62.tsv"),
        "--pin", "eng",
        "--out", str(tmp_path / "o"),
    )
    assert code == 2


def test_train_matches_oracle_golden(tmp_path):
    docs = ["common words repeat here"] * 9 + ["rare line once"]
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("\n".join(docs) + "\n")
    out = tmp_path / "out"
    code = run(
        "train",
        "--corpus", str(corpus),
        "--vocab-size", "300",
        "--min-frequency", "5",
        "--out", str(out),
    )
    assert code == 0
    tok = Tokenizer.load(out / "tokenizer.json")
    expected = naive_bpe_merges(docs, 300, 5, n_special=8)
    assert tok.merges == expected


def test_encode_round_trip_via_cli(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("hello world\nhello again\n" * 6)
    tok_out = tmp_path / "tok"
    assert run("train", "--corpus", str(corpus), "--vocab-size", "280",
               "--min-frequency", "2", "--out", str(tok_out)) == 0
    enc_out = tmp_path / "enc"
    doc = tmp_path / "doc.txt"
    doc.write_text("hello world\n")
    assert run("encode", "--tokenizer", str(tok_out / "tokenizer.json"),
               "--input", str(doc), "--out", str(enc_out)) == 0
    ids = [int(x) for x in (enc_out / "ids.txt").read_text().split()]
    tok = Tokenizer.load(tok_out / "tokenizer.json")
    assert tok.decode(ids) == b"hello world"


def test_compress_self_reference_all_ones(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("compress me please\n" * 10)
    tok_out = tmp_path / "tok"
    run("train", "--corpus", str(corpus), "--vocab-size", "280",
        "--min-frequency", "2", "--out", str(tok_out))
    store = tmp_path / "store"
    (store / "aaa").mkdir(parents=True)
    (store / "aaa" / "d.txt").write_text("compress me\n")
    out = tmp_path / "cmp"
    tok_file = str(tok_out / "tokenizer.json")
    assert run("compress", "--candidate", tok_file, "--reference", tok_file,
               "--store", str(store), "--out", str(out)) == 0
    for line in (out / "compression.tsv").read_text().rstrip("\n").split("\n"):
        fields = line.split("\t")
        assert float(fields[3]) == 1.0


def test_adapt_writes_plan_and_embeddings(tmp_path):
    c1 = tmp_path / "c1.txt"
    c1.write_text("alpha beta gamma\n" * 10)
    c2 = tmp_path / "c2.txt"
    c2.write_text("alpha beta gamma delta epsilon\n" * 10)
    t1, t2 = tmp_path / "t1", tmp_path / "t2"
    run("train", "--corpus", str(c1), "--vocab-size", "280", "--min-frequency", "2",
        "--out", str(t1))
    run("train", "--corpus", str(c2), "--vocab-size", "300", "--min-frequency", "2",
        "--out", str(t2))
    old_tok = Tokenizer.load(t1 / "tokenizer.json")
    emb = tmp_path / "old.emb"
    rng = np.random.default_rng(0)
    save_embeddings(
        EmbeddingTable(rng.standard_normal((old_tok.vocab_size, 8)).astype(np.float32)),
        emb,
    )
    out = tmp_path / "adapted"
    code = run(
        "adapt",
        "--old-tokenizer", str(t1 / "tokenizer.json"),
        "--new-tokenizer", str(t2 / "tokenizer.json"),
        "--old-embeddings", str(emb),
        "--init", "mean",
        "--out", str(out),
    )
    assert code == 0
    assert (out / "plan.tsv").exists()
    assert (out / "adapted.emb").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"plan.tsv", "adapted.emb"}


def test_judge_prompts_and_winrate_pipeline(tmp_path):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text(
        "e1\tdeu\t" + "\t".join(
            escape_field(s) for s in ("Translate to German", "Hallo", "Guten Tag")
        ) + "\n"
    )
    out = tmp_path / "prompts"
    assert run("judge-prompts", "--pairs", str(pairs), "--out", str(out)) == 0
    line = (out / "prompts.tsv").read_text().rstrip("\n")
    fields = line.split("\t")
    assert fields[0] == "e1" and fields[1] == "deu"
    assert "Translate to German" in fields[3]

    verdicts = tmp_path / "verdicts.tsv"
    verdicts.write_text(
        "e1\tdeu\t" + escape_field("Preferred: Answer (A)") + "\n"
        "e2\tdeu\t" + escape_field("Preferred: Answer (A)") + "\n"
        "e3\tdeu\t" + escape_field("Preferred: Answer (B)") + "\n"
        "e4\tdeu\t" + escape_field("Preferred: TIE") + "\n"
    )
    wr_out = tmp_path / "wr"
    assert run("winrate", "--verdicts", str(verdicts), "--subset", "all=deu",
               "--out", str(wr_out)) == 0
    content = (wr_out / "winrate.tsv").read_text()
    assert content.startswith("# win_rate = wins / (wins + losses + ties)")
    row = [l for l in content.split("\n") if l.startswith("deu\t")][0]
    assert row.split("\t")[5] == "0.5"
    assert "SUBSET\tall\t0.5" in content


def test_speedup_fixture_cli(tmp_path, capsys):
    baseline = tmp_path / "b.tsv"
    baseline.write_text("500\t0.10\n1500\t0.22\n2500\t0.30\n")
    candidate = tmp_path / "c.tsv"
    candidate.write_text("100\t0.12\n300\t0.30\n1000\t0.41\n")
    out = tmp_path / "s"
    assert run("speedup", "--candidate", str(candidate), "--baseline", str(baseline),
               "--out", str(out)) == 0
    assert "factor=8.33" in capsys.readouterr().out
    fields = (out / "speedup.tsv").read_text().split("\n")[1].split("\t")
    assert float(fields[0]) == pytest.approx(2500 / 300)


def test_never_reaches_is_validation_error(tmp_path):
    baseline = tmp_path / "b.tsv"
    baseline.write_text("2500\t0.30\n")
    candidate = tmp_path / "c.tsv"
    candidate.write_text("100\t0.05\n200\t0.10\n")
    code = run("speedup", "--candidate", str(candidate), "--baseline", str(baseline),
               "--out", str(tmp_path / "s"))
    assert code == 2


def test_subcommands_do_not_mutate_inputs(tmp_path):
    registry = DATA / "languages_62.tsv"
    before = registry.read_bytes()
    run("weights", "--registry", str(registry), "--out", str(tmp_path / "o"))
    assert registry.read_bytes() == before


def test_reruns_are_idempotent_manifest_equal(tmp_path):
    registry = DATA / "languages_62.tsv"
    for name in ("first", "second"):
        assert run("weights", "--registry", str(registry), "--mode", "universal",
                   "--pin", "eng=0.30", "--out", str(tmp_path / name)) == 0
    assert (tmp_path / "first" / "manifest.json").read_bytes() == (
        tmp_path / "second" / "manifest.json"
    ).read_bytes()
    assert (tmp_path / "first" / "weights.tsv").read_bytes() == (
        tmp_path / "second" / "weights.tsv"
    ).read_bytes()
