import gzip
import json

import pytest

from bayesforest.cli import main
from bayesforest.libsvm import emit_libsvm
from conftest import make_blob_dataset


@pytest.fixture(scope="module")
def svm_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    train = make_blob_dataset([80, 30, 30, 30], seed=21)
    test = make_blob_dataset([40, 15, 15, 15], seed=22)
    train_path = root / "train.svm"
    test_path = root / "test.svm"
    with open(train_path, "w") as fh:
        emit_libsvm(train, fh)
    with open(test_path, "w") as fh:
        emit_libsvm(test, fh)
    return train_path, test_path


def run(argv):
    return main([str(a) for a in argv])


class TestTrain:
    def test_happy_path_prints_summary(self, svm_files, tmp_path, capsys):
        train, _ = svm_files
        model = tmp_path / "m.model"
        rc = run(["train", "--train", train, "--model", model, "--trees", 4, "--seed", 1])
        assert rc == 0
        out = capsys.readouterr().out
        assert "trained 4 trees" in out
        assert "4 classes" in out
        assert "OOB sizes" in out
        assert model.exists()

    def test_merge_classes_reduces_k(self, svm_files, tmp_path, capsys):
        train, _ = svm_files
        model = tmp_path / "m.model"
        rc = run(["train", "--train", train, "--model", model, "--trees", 2, "--merge-classes", 2])
        assert rc == 0
        assert "2 classes" in capsys.readouterr().out

    def test_missing_train_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            run(["train", "--model", tmp_path / "m.model"])
        assert exc_info.value.code == 2

    def test_zero_trees_is_usage_error(self, svm_files, tmp_path):
        train, _ = svm_files
        with pytest.raises(SystemExit) as exc_info:
            run(["train", "--train", train, "--model", tmp_path / "m", "--trees", 0])
        assert exc_info.value.code == 2

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        rc = run(["train", "--train", tmp_path / "absent.svm", "--model", tmp_path / "m"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_gzip_input(self, svm_files, tmp_path):
        train, _ = svm_files
        gz = tmp_path / "train.svm.gz"
        with gzip.open(gz, "wt") as fh:
            fh.write(train.read_text())
        rc = run(["train", "--train", gz, "--model", tmp_path / "m.model", "--trees", 2])
        assert rc == 0


@pytest.fixture(scope="module")
def model_path(svm_files, tmp_path_factory):
    train, _ = svm_files
    path = tmp_path_factory.mktemp("model") / "m.model"
    assert run(["train", "--train", train, "--model", path, "--trees", 6, "--seed", 3]) == 0
    return path


class TestEvaluate:
    def test_strategies_produce_reports(self, svm_files, model_path, tmp_path, capsys):
        _, test = svm_files
        for strategy in ("mv", "bta-eps", "bta-b"):
            rc = run(["evaluate", "--model", model_path, "--test", test, "--strategy", strategy])
            assert rc == 0
            assert "macro precision=" in capsys.readouterr().out

    def test_report_json(self, svm_files, model_path, tmp_path):
        _, test = svm_files
        report = tmp_path / "report.json"
        rc = run(["evaluate", "--model", model_path, "--test", test, "--report", report])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert "macro" in doc and "per_class" in doc

    def test_predictions_file(self, svm_files, model_path, tmp_path):
        _, test = svm_files
        preds = tmp_path / "preds.tsv"
        rc = run(["evaluate", "--model", model_path, "--test", test, "--predictions", preds])
        assert rc == 0
        lines = preds.read_text().splitlines()
        assert lines[0].startswith("index\tlabel")
        assert len(lines) == 85 + 1  # test split size + header

    def test_unknown_strategy_is_usage_error(self, svm_files, model_path):
        _, test = svm_files
        with pytest.raises(SystemExit) as exc_info:
            run(["evaluate", "--model", model_path, "--test", test, "--strategy", "bogus"])
        assert exc_info.value.code == 2

    def test_merge_classes_mismatch_is_config_error(self, svm_files, model_path, capsys):
        _, test = svm_files
        rc = run(["evaluate", "--model", model_path, "--test", test, "--merge-classes", 2])
        assert rc == 1
        assert "does not match" in capsys.readouterr().err

    def test_unknown_test_label_fails(self, model_path, tmp_path, capsys):
        bad = tmp_path / "bad.svm"
        bad.write_text("99 1:0.5\n")
        rc = run(["evaluate", "--model", model_path, "--test", bad])
        assert rc == 1


class TestBench:
    def test_table_and_report(self, svm_files, tmp_path, capsys):
        train, test = svm_files
        report = tmp_path / "bench.json"
        rc = run([
            "bench", "--train", train, "--test", test, "--repeats", 2, "--trees", 4,
            "--strategies", "mv,bta-eps,bta-b0.5", "--report", report,
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mv" in out and "bta-eps" in out and "bta-b0.5" in out
        doc = json.loads(report.read_text())
        assert doc["repeats"] == 2
        assert len(doc["strategies"]) == 3
        assert {"mean", "std"} == set(doc["strategies"][0]["fscore"])

    def test_rerun_reproduces_table(self, svm_files, capsys):
        train, test = svm_files
        argv = ["bench", "--train", train, "--test", test, "--repeats", 2,
                "--trees", 3, "--seed-base", 9]
        assert run(argv) == 0
        first = capsys.readouterr().out
        assert run(argv) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_unknown_strategy_token_is_usage_error(self, svm_files):
        train, test = svm_files
        with pytest.raises(SystemExit) as exc_info:
            run(["bench", "--train", train, "--test", test, "--strategies", "nope"])
        assert exc_info.value.code == 2
