import json

import numpy as np
import pytest

from featuregraph.cli import main
from featuregraph.errors import NumericError


def run(*argv):
    return main(list(argv))


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def test_train_synthetic_loss_opt(tmp_path, capsys):
    out = tmp_path / "out"
    code = run(
        "train", "--synthetic", "D=8,p=2,m=120", "--n-train", "80", "--group-size", "2",
        "--strategy", "loss-opt", "--seed", "7", "--out", str(out), "--no-plots",
        "--timestamp", "fixed",
    )
    assert code == 0
    for name in ("svm_model.json", "fga_model.json", "train_report.json", "train_summary.csv", "pred_vs_actual.csv"):
        assert (out / name).exists(), name
    header, rows = read_csv(out / "train_summary.csv")
    by_method = {r[0]: r for r in rows}
    svm_train = float(by_method["tuned-svm"][header.index("train_sse")])
    fga_train = float(by_method["fga-loss-opt"][header.index("train_sse")])
    assert fga_train <= svm_train
    report = json.loads((out / "train_report.json").read_text())
    assert report["report"]["final_error"] <= report["report"]["initial_error"]


def test_train_is_deterministic(tmp_path):
    out = tmp_path / "out"
    argv = (
        "train", "--synthetic", "D=6,p=2,m=60", "--n-train", "40", "--group-size", "2",
        "--seed", "3", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    )
    names = ("svm_model.json", "fga_model.json", "train_report.json", "train_summary.csv")
    assert run(*argv) == 0
    first = {name: (out / name).read_bytes() for name in names}
    assert run(*argv) == 0
    for name in names:
        assert (out / name).read_bytes() == first[name], name


def test_missing_data_file_exits_2(tmp_path, capsys):
    code = run("train", "--data", str(tmp_path / "nope.svm"), "--out", str(tmp_path / "o"))
    assert code == 2
    assert "nope.svm" in capsys.readouterr().err


def test_bad_flag_exits_1(tmp_path):
    assert run("train", "--strategy", "wrong", "--out", str(tmp_path / "o")) == 1
    assert run("train", "--out", str(tmp_path / "o")) == 1  # no dataset given


def test_numeric_failure_exits_3(monkeypatch, tmp_path):
    import featuregraph.cli as cli

    def boom(args):
        raise NumericError("synthetic blow-up")

    monkeypatch.setitem(cli._COMMANDS, "train", boom)
    assert run("train", "--synthetic", "D=4,p=2,m=20") == 3


def test_bound_command_and_nodes_override(tmp_path):
    out = tmp_path / "out"
    assert run(
        "train", "--synthetic", "D=8,p=2,m=120", "--n-train", "80", "--group-size", "2",
        "--seed", "7", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    ) == 0
    code = run(
        "bound", "--synthetic", "D=8,p=2,m=120", "--n-train", "80", "--seed", "7",
        "--svm", str(out / "svm_model.json"), "--fga", str(out / "fga_model.json"),
        "--out", str(out), "--timestamp", "fixed",
    )
    assert code == 0
    report = json.loads((out / "bound_report.json").read_text())
    assert report["satisfied"] is True
    # |V| = 0 degenerates the rhs to the training-loss difference
    code = run(
        "bound", "--synthetic", "D=8,p=2,m=120", "--n-train", "80", "--seed", "7",
        "--svm", str(out / "svm_model.json"), "--fga", str(out / "fga_model.json"),
        "--out", str(out), "--nodes", "0", "--timestamp", "fixed",
    )
    assert code == 0
    report = json.loads((out / "bound_report.json").read_text())
    assert report["rhs_diff"] == pytest.approx(report["train_loss_fga"] - report["train_loss_svm"])
    # invalid delta is a configuration error
    assert run(
        "bound", "--synthetic", "D=8,p=2,m=120", "--n-train", "80", "--seed", "7",
        "--svm", str(out / "svm_model.json"), "--fga", str(out / "fga_model.json"),
        "--out", str(out), "--delta", "1.5",
    ) == 1


def test_stability_command(tmp_path):
    out = tmp_path / "out"
    code = run(
        "stability", "--synthetic", "D=8,p=2,m=40", "--n-train", "16", "--group-size", "2",
        "--seed", "2", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    )
    assert code == 0
    header, rows = read_csv(out / "stability.csv")
    assert header[:2] == ["L", "M"]
    assert len(rows) == 1
    assert (out / "stability_removals.csv").exists()
    # a probe split is required
    assert run("stability", "--synthetic", "D=8,p=2,m=40", "--out", str(out)) == 1
    # n_train=1 leaves a single row: not enough for leave-one-out
    assert run(
        "stability", "--synthetic", "D=8,p=2,m=40", "--n-train", "1", "--out", str(out)
    ) == 1


def test_permute_command(tmp_path):
    out = tmp_path / "out"
    code = run(
        "permute", "--synthetic", "D=8,p=2,m=60", "--group-size", "2", "--perms", "4",
        "--seed", "5", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    )
    assert code == 0
    header, rows = read_csv(out / "perm_trace.csv")
    best = [float(r[header.index("best_train_sse")]) for r in rows]
    assert best == sorted(best, reverse=True)
    report = json.loads((out / "perm_report.json").read_text())
    assert len(report["trials"]) == 4
    assert report["best_train_sse"] <= min(t["train_sse"] for t in report["trials"]) + 1e-12


def test_permute_single_trial(tmp_path):
    out = tmp_path / "out"
    code = run(
        "permute", "--synthetic", "D=6,p=2,m=40", "--group-size", "2", "--perms", "1",
        "--seed", "5", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    )
    assert code == 0
    _, rows = read_csv(out / "perm_trace.csv")
    assert len(rows) == 1


def test_bench_command(tmp_path):
    out = tmp_path / "out"
    code = run(
        "bench", "--synthetic", "D=8,p=2,m=90", "--n-train", "60", "--group-size", "2",
        "--perms", "2", "--seed", "1", "--out", str(out), "--no-plots", "--timestamp", "fixed",
    )
    assert code == 0
    header, rows = read_csv(out / "bench.csv")
    assert [r[0] for r in rows] == ["lr", "tuned-svm", "fga-loss-opt", "fga-perm-search"]
    ph, prow = read_csv(out / "pred_vs_actual.csv")
    assert ph == ["actual", "svm_pred", "fga_pred"]
    assert len(prow) == 30  # m_test rows


def test_plots_rendered_by_default(tmp_path):
    out = tmp_path / "out"
    code = run(
        "bench", "--synthetic", "D=6,p=2,m=60", "--n-train", "40", "--group-size", "2",
        "--perms", "1", "--seed", "1", "--out", str(out), "--timestamp", "fixed",
    )
    assert code == 0
    png = out / "pred_vs_actual.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_help_exits_zero():
    assert run("--help") == 0


def test_train_reference_invocation(tmp_path):
    # the documented loss-opt invocation on the full synthetic set (no split)
    out = tmp_path / "out"
    code = run(
        "train", "--synthetic", "D=25,p=2,m=200", "--group-size", "5",
        "--strategy", "loss-opt", "--seed", "7", "--out", str(out),
        "--no-plots", "--timestamp", "fixed",
    )
    assert code == 0
    header, rows = read_csv(out / "train_summary.csv")
    by_method = {r[0]: r for r in rows}
    svm_train = float(by_method["tuned-svm"][header.index("train_sse")])
    fga_train = float(by_method["fga-loss-opt"][header.index("train_sse")])
    assert fga_train <= svm_train
    assert "test_sse" not in header  # no split requested


def test_console_script_entry_point():
    import subprocess

    proc = subprocess.run(["featuregraph", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "subcommands" in proc.stdout.lower() or "usage" in proc.stdout.lower()
