import json
from pathlib import Path

import pytest

from lclab.cli import main
from lclab.experiments import REGISTRY, RegistryEntry
from lclab.records import ResultRecord, read_records

GOOD_CONFIG = """
experiment = cap-bound
n = 3
eps_grid = 0.1, 0.3, 0.5
root_seed = 17
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_writes_records_and_exits_zero(tmp_path, capsys):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = str(tmp_path / "cap.jsonl")
    assert main(["run", cfg, "--out", out]) == 0
    records = read_records(out)
    assert records and all(r.experiment == "cap-bound" for r in records)
    assert "empirical_C" in capsys.readouterr().out


def test_run_unknown_experiment_exits_two(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.cfg", "experiment = unknown-experiment\n")
    assert main(["run", cfg]) == 2


def test_run_bad_file_exits_two(tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_run_seed_override(tmp_path):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = str(tmp_path / "cap.jsonl")
    assert main(["run", cfg, "--out", out, "--seed", "99"]) == 0
    assert all(r.seed == 99 for r in read_records(out))


def test_run_assertion_failure_exits_one(tmp_path):
    def failing(cfg, threads):
        return [
            ResultRecord(experiment="always-fails", metric="m", estimate=0.0,
                         samples=1, seed=cfg.root_seed, params=cfg.params(), passed=False)
        ]

    REGISTRY["always-fails"] = RegistryEntry(failing, "test-only failing entry", (), {})
    try:
        cfg = _write(tmp_path, "fail.cfg", "experiment = always-fails\n")
        assert main(["run", cfg, "--out", str(tmp_path / "f.jsonl")]) == 1
    finally:
        del REGISTRY["always-fails"]


def test_replay_round_trip(tmp_path):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = str(tmp_path / "cap.jsonl")
    assert main(["run", cfg, "--out", out]) == 0
    assert main(["replay", out]) == 0


def test_replay_detects_corruption(tmp_path):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = tmp_path / "cap.jsonl"
    assert main(["run", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    doc = json.loads(lines[0])
    doc["estimate"] += 1e-9
    lines[0] = json.dumps(doc, sort_keys=True)
    out.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(out)]) == 1


def test_replay_schema_error_exits_two(tmp_path):
    out = tmp_path / "broken.jsonl"
    out.write_text('{"experiment": "cap-bound"}\n')
    assert main(["replay", str(out)]) == 2


def test_export_csv_and_figures(tmp_path):
    cfg = _write(tmp_path, "dev.cfg",
                 "experiment = deviation-curve\nfamily = gaussian\nn = 4\n"
                 "trials = 20000\nt_grid = 0, 0.5, 1.0\nroot_seed = 3\n")
    out = str(tmp_path / "dev.jsonl")
    assert main(["run", cfg, "--out", out]) == 0
    csv_path = tmp_path / "dev.csv"
    assert main(["export", out, str(csv_path)]) == 0
    assert csv_path.exists()
    figures = list(tmp_path.glob("dev_*.png"))
    assert figures, "figures should be rendered next to the CSV"


def test_export_no_figures_flag(tmp_path):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = str(tmp_path / "cap.jsonl")
    main(["run", cfg, "--out", out])
    csv_path = tmp_path / "cap.csv"
    assert main(["export", out, str(csv_path), "--no-figures"]) == 0
    assert csv_path.exists()
    assert not list(tmp_path.glob("cap_*.png"))


def test_export_figdir(tmp_path):
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG)
    out = str(tmp_path / "cap.jsonl")
    main(["run", cfg, "--out", out])
    figdir = tmp_path / "figs"
    assert main(["export", out, str(tmp_path / "cap.csv"), "--figdir", str(figdir)]) == 0
    assert list(Path(figdir).glob("cap_*.png"))


def test_list_prints_registry(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in REGISTRY:
        assert name in out


def test_run_out_path_from_config(tmp_path):
    out = tmp_path / "from_config.jsonl"
    cfg = _write(tmp_path, "cap.cfg", GOOD_CONFIG + f"out_path = {out}\n")
    assert main(["run", cfg]) == 0
    assert out.exists()
