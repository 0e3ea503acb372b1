import json

import pytest

from blimpsim.cli import main


def test_run_preset_writes_outputs(tmp_path, capsys):
    code = main(["run", "--preset", "tune", "--duration", "2",
                 "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["scenario"] == "tune"
    assert (tmp_path / "tune.csv").exists()
    assert (tmp_path / "tune.summary.json").exists()
    assert (tmp_path / "tune.spec.json").exists()


def test_run_scenario_file(tmp_path, capsys):
    doc = {"name": "filecase", "mode": "loiter", "duration": 1.0,
           "loiter": {"hold_position": [10.0, 0.0, 0.0], "gain": 0.06}}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    code = main(["run", str(path), "--seed", "5"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["seed"] == 5


def test_summarize_log(tmp_path, capsys):
    main(["run", "--preset", "tune", "--duration", "1",
          "--out", str(tmp_path)])
    capsys.readouterr()
    code = main(["summarize", str(tmp_path / "tune.csv")])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 50


def test_unknown_preset_fails_cleanly(capsys):
    code = main(["run", "--preset", "nope"])
    assert code == 1
    assert "unknown preset" in capsys.readouterr().err


def test_missing_scenario_fails_cleanly(capsys):
    code = main(["run"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_bad_json_fails_cleanly(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    code = main(["run", str(path)])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
