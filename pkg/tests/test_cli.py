"""CLI subcommands: outputs, equivalences with the service, exit codes."""
from __future__ import annotations

import csv
import json
import math

import pytest
from fastapi.testclient import TestClient

from figura.cli import main
from figura.config import Config
from figura.events import append_events
from figura.pipeline import read_records
from figura.service import ChatEngine, create_app

from conftest import (
    CHATLOG_PATH,
    CONCRETENESS_PATH,
    CORPUS_PATH,
    EMBEDDINGS_PATH,
    FREQ_PATH,
    POS_PATH,
    THEMES_PATH,
)
from test_dialogue import synthetic_event_log


def run(*argv) -> int:
    return main(list(argv))


def test_freq_counts_containment(tmp_path, capsys):
    out = tmp_path / "freq.tsv"
    assert run("freq", "--chatlog", str(CHATLOG_PATH), "--out", str(out)) == 0
    assert "freq:" in capsys.readouterr().out
    table = {}
    for line in out.read_text().splitlines():
        token, value = line.split("\t")
        table[token] = float(value)
    # 6 utterances; 'love' appears in 3, 'scream' in 1, 'the' in 1
    assert table["love"] == pytest.approx(3 / 6)
    assert table["scream"] == pytest.approx(1 / 6)
    assert table["the"] == pytest.approx(1 / 6)
    assert "sweet" in table


def test_lexicon_builds_both_lists(tmp_path, capsys):
    out_t = tmp_path / "targets.txt"
    out_s = tmp_path / "sources.txt"
    code = run(
        "lexicon",
        "--themes", str(THEMES_PATH),
        "--embeddings", str(EMBEDDINGS_PATH),
        "--freq", str(FREQ_PATH),
        "--pos", str(POS_PATH),
        "--concreteness", str(CONCRETENESS_PATH),
        "--out-targets", str(out_t),
        "--out-sources", str(out_s),
        "--top-by-freq", "15",
        "--top-by-conc", "8",
    )
    assert code == 0
    targets = out_t.read_text().split()
    sources = out_s.read_text().split()
    assert targets[0] == "love"  # highest frequency
    assert len(sources) == 8
    assert "sugar" in sources


def test_connect_prints_breakdowns_ascending(capsys):
    code = run(
        "connect",
        "--embeddings", str(EMBEDDINGS_PATH),
        "--pos-table", str(POS_PATH),
        "--target", "love",
        "--source", "math",
        "--pos", "adjective",
        "--k", "5",
    )
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    rows = [line.split("\t") for line in out if "\t" in line]
    assert len(rows) == 5
    totals = [float(r[4]) for r in rows]
    assert totals == sorted(totals)
    # printed columns are rounded to 6 decimals; ln() magnifies that by 1/beta
    for word, dist_t, dist_v, imbalance, total in rows:
        assert float(total) == pytest.approx(
            float(dist_t) + float(dist_v) + math.log(float(imbalance) + 0.01), abs=1e-4
        )


def _generate(tmp_path, name="metaphors.jsonl"):
    targets = tmp_path / "targets.txt"
    sources = tmp_path / "sources.txt"
    targets.write_text("love\nsoul\n")
    sources.write_text("sugar\nsalary\nfan\n")
    out = tmp_path / name
    code = run(
        "generate",
        "--targets", str(targets),
        "--sources", str(sources),
        "--corpus", str(CORPUS_PATH),
        "--embeddings", str(EMBEDDINGS_PATH),
        "--pos-table", str(POS_PATH),
        "--out", str(out),
    )
    assert code == 0
    return out


def test_generate_matches_service_batch_endpoint(tmp_path, store, inventory, stopwords, corpus, pos_table):
    out = _generate(tmp_path)
    records = [json.loads(line) for line in out.read_text().splitlines()]

    engine = ChatEngine(
        config=Config(),
        store=store,
        inventory=inventory,
        stopwords=stopwords,
        corpus=corpus,
        pos_table=pos_table,
        event_log_path=tmp_path / "events.jsonl",
    )
    client = TestClient(create_app(engine))
    res = client.post(
        "/generate", json={"targets": ["love", "soul"], "sources": ["sugar", "salary", "fan"]}
    )
    assert records == res.json()["metaphors"]
    assert all(r["schema_version"] == 1 for r in records)


def test_generate_is_idempotent_byte_identical(tmp_path):
    a = _generate(tmp_path, "a.jsonl")
    b = _generate(tmp_path, "b.jsonl")
    assert a.read_bytes() == b.read_bytes()


def test_generated_records_round_trip(tmp_path):
    out = _generate(tmp_path)
    records = read_records(out)
    assert len(records) == 3
    poses = {r.metaphor.triplet.pos for r in records}
    assert poses == {"adjective", "verb", "noun"}


def test_export_annotations_header_and_rows(tmp_path, capsys):
    generated = _generate(tmp_path)
    sheet = tmp_path / "sheet.csv"
    assert run("export-annotations", "--in", str(generated), "--out", str(sheet)) == 0
    with open(sheet, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "text", "smoothness", "properness", "novelty"]
    assert len(rows) == 4
    for row in rows[1:]:
        assert row[2] == row[3] == row[4] == ""


def test_replay_matches_service_metrics(tmp_path, capsys):
    log = tmp_path / "events.jsonl"
    append_events(log, synthetic_event_log())
    assert run("replay", "--log", str(log)) == 0
    out = capsys.readouterr().out
    assert "literal=22/100 (0.22)" in out
    assert "one_round=27/100 (0.27)" in out
    assert "two_round=41/100 (0.41)" in out


def test_unknown_flag_is_usage_error(capsys):
    assert run("replay", "--nonsense", "x") == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower() or "error" in err.lower()


def test_unknown_subcommand_is_usage_error():
    assert run("frobnicate") == 1


def test_missing_input_is_data_error(tmp_path, capsys):
    assert run("replay", "--log", str(tmp_path / "absent.jsonl")) == 2
    err = capsys.readouterr().err
    assert "absent.jsonl" in err


def test_config_file_feeds_defaults(tmp_path, capsys):
    cfg = tmp_path / "figura.conf"
    cfg.write_text(
        f"embeddings_path = {EMBEDDINGS_PATH}\npos_path = {POS_PATH}\nbeta = 0.02\n"
    )
    targets = tmp_path / "t.txt"
    targets.write_text("love\n")
    sources = tmp_path / "s.txt"
    sources.write_text("sugar\n")
    out = tmp_path / "m.jsonl"
    code = run(
        "--config", str(cfg),
        "generate",
        "--targets", str(targets),
        "--sources", str(sources),
        "--corpus", str(CORPUS_PATH),
        "--out", str(out),
    )
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records and all(r["score"]["beta"] == 0.02 for r in records)


def test_env_overrides_file_and_cli_overrides_env(tmp_path, monkeypatch):
    from figura.config import load_config

    cfg = tmp_path / "c.conf"
    cfg.write_text("beta = 0.5\nseed = 1\n")
    monkeypatch.setenv("FIGURA_BETA", "0.25")
    config = load_config(cfg)
    assert config.beta == 0.25  # env beats file
    config = load_config(cfg, overrides={"beta": 0.125})
    assert config.beta == 0.125  # CLI beats env
    assert config.seed == 1


def test_config_template_override_changes_rendering(tmp_path):
    template_file = tmp_path / "templates.txt"
    template_file.write_text("as_as\t{T} is truly as {ADJ} as {ART}{V}.\n")
    cfg = tmp_path / "figura.conf"
    cfg.write_text(
        f"embeddings_path = {EMBEDDINGS_PATH}\n"
        f"pos_path = {POS_PATH}\n"
        f"templates_path = {template_file}\n"
    )
    targets = tmp_path / "t.txt"
    targets.write_text("love\n")
    sources = tmp_path / "s.txt"
    sources.write_text("sugar\n")
    out = tmp_path / "m.jsonl"
    code = run(
        "--config", str(cfg),
        "generate",
        "--targets", str(targets),
        "--sources", str(sources),
        "--corpus", str(CORPUS_PATH),
        "--pos", "adjective",
        "--out", str(out),
    )
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records[0]["text"] == "Love is truly as sweet as sugar."
