import json

import pytest

from gscsim.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def run_config(tmp_path):
    return write_json(tmp_path / "config.json", {
        "corpus": "bundled",
        "methods": ["GroundTruth"],
        "channels": ["AWGN"],
        "snr_db": [8.0],
        "n_top": [9],
    })


def test_validate_bundled(capsys):
    assert main(["validate", "--corpus", "bundled"]) == 0
    out = capsys.readouterr().out
    assert "24 scenes" in out and "120 questions" in out


def test_validate_bad_corpus(tmp_path, capsys):
    bad = write_json(tmp_path / "bad.json", {"scenes": [{"image_index": 0}]})
    assert main(["validate", "--corpus", str(bad)]) == 3
    assert "corpus error" in capsys.readouterr().err


def test_run_writes_csv(tmp_path, run_config, capsys):
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(run_config), "--out", str(out_dir)]) == 0
    msg = capsys.readouterr().out
    assert "results.csv" in msg
    lines = (out_dir / "results.csv").read_text().splitlines()
    assert lines[0].startswith("method,channel,snr_db")
    assert len(lines) >= 2


def test_run_writes_json(tmp_path, run_config):
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(run_config), "--out", str(out_dir),
                 "--format", "json"]) == 0
    doc = json.loads((out_dir / "results.json").read_text())
    assert doc and doc[0]["method"] == "GroundTruth"


def test_run_cli_overrides(tmp_path, run_config):
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(run_config), "--out", str(out_dir),
                 "--snr", "6", "--format", "json"]) == 0
    doc = json.loads((out_dir / "results.json").read_text())
    assert {row["snr_db"] for row in doc} == {6.0}


def test_run_rejects_bad_config(tmp_path, capsys):
    missing = tmp_path / "nothing.json"
    assert main(["run", "--config", str(missing), "--out", str(tmp_path)]) == 2

    invalid = tmp_path / "invalid.json"
    invalid.write_text("{broken")
    assert main(["run", "--config", str(invalid), "--out", str(tmp_path)]) == 2

    unknown_key = write_json(tmp_path / "k.json", {"coprus": "bundled"})
    assert main(["run", "--config", str(unknown_key), "--out", str(tmp_path)]) == 2
    assert "unknown config keys" in capsys.readouterr().err

    bad_method = write_json(tmp_path / "m.json", {"methods": ["Telepathy"]})
    assert main(["run", "--config", str(bad_method), "--out", str(tmp_path)]) == 2

    bad_channel = write_json(tmp_path / "c.json", {"channels": ["Underwater"]})
    assert main(["run", "--config", str(bad_channel), "--out", str(tmp_path)]) == 2


def test_run_missing_corpus_file(tmp_path):
    cfg = write_json(tmp_path / "config.json", {"corpus": str(tmp_path / "no.json")})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_ged_command(tmp_path, capsys):
    g1 = write_json(tmp_path / "g1.json",
                    {"nodes": ["car", "tree"], "edges": [[0, "near", 1]]})
    g2 = write_json(tmp_path / "g2.json",
                    {"nodes": ["car", "tree"], "edges": [[0, "under", 1]]})
    assert main(["ged", "--g1", str(g1), "--g2", str(g2)]) == 0
    assert capsys.readouterr().out.strip() == "1.0"
    assert main(["ged", "--g1", str(g1), "--g2", str(g1)]) == 0
    assert capsys.readouterr().out.strip() == "0.0"


def test_ged_bad_graph_file(tmp_path, capsys):
    g1 = write_json(tmp_path / "g1.json", {"nodes": ["a"]})
    assert main(["ged", "--g1", str(g1), "--g2", str(tmp_path / "no.json")]) == 2
    assert "config error" in capsys.readouterr().err
