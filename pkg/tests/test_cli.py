import numpy as np
import pytest
from click.testing import CliRunner

from rkhspp.cli import main
from rkhspp.spectral import features_from_csv


@pytest.fixture
def runner():
    return CliRunner()


def _simulate(runner, tmp_path, scenario="hppp-50-100", seed=1, name="patterns.csv"):
    path = tmp_path / name
    result = runner.invoke(main, ["simulate", scenario, "--seed", str(seed),
                                  "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


def _features(runner, tmp_path, patterns, name="features.csv", extra=()):
    path = tmp_path / name
    result = runner.invoke(
        main,
        ["features", str(patterns), "--out", str(path),
         "--h", "0.1", "--r", "5", "--cache-dir", str(tmp_path / "cache"),
         *extra],
    )
    assert result.exit_code == 0, result.output
    return path


class TestSimulate:
    def test_list_scenarios(self, runner):
        result = runner.invoke(main, ["simulate", "list"])
        assert result.exit_code == 0
        assert len(result.output.strip().splitlines()) == 3
        assert "hppp-pcpp-36" in result.output

    def test_unknown_scenario_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["simulate", "nope", "--out",
                                      str(tmp_path / "x.csv")])
        assert result.exit_code == 2

    def test_deterministic_output(self, runner, tmp_path):
        a = _simulate(runner, tmp_path, seed=7, name="a.csv")
        b = _simulate(runner, tmp_path, seed=7, name="b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_writes_labeled_patterns(self, runner, tmp_path):
        path = _simulate(runner, tmp_path)
        text = path.read_text()
        assert text.startswith("#window,")
        assert "class1" in text and "class2" in text


class TestFeatures:
    def test_feature_csv_written(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        features = _features(runner, tmp_path, patterns)
        ids, labels, mu = features_from_csv(features)
        assert mu.shape == (40, 5)
        assert set(labels) == {"class1", "class2"}

    def test_cache_hit_logged(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        _features(runner, tmp_path, patterns, name="f1.csv")
        path = tmp_path / "f2.csv"
        result = runner.invoke(
            main,
            ["features", str(patterns), "--out", str(path), "--h", "0.1",
             "--r", "5", "--cache-dir", str(tmp_path / "cache")],
        )
        assert result.exit_code == 0
        assert "cache hit" in result.output + result.stderr

    def test_rerun_byte_identical(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        f1 = _features(runner, tmp_path, patterns, name="f1.csv")
        f2 = _features(runner, tmp_path, patterns, name="f2.csv")
        assert f1.read_bytes() == f2.read_bytes()

    def test_config_file(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        cfg = tmp_path / "pipeline.cfg"
        cfg.write_text(
            "# pipeline settings\nkernel.sigma=0.05\ngrid.h=0.1\n"
            "smooth.gamma=0.0001\nfeatures.r=4\n"
        )
        out = tmp_path / "f.csv"
        result = runner.invoke(
            main, ["features", str(patterns), "--config", str(cfg),
                   "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        _, _, mu = features_from_csv(out)
        assert mu.shape[1] == 4

    def test_unknown_config_key_exit_2(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("kernel.shape=0.05\n")
        result = runner.invoke(
            main, ["features", str(patterns), "--config", str(cfg),
                   "--out", str(tmp_path / "f.csv")],
        )
        assert result.exit_code == 2


class TestAnova:
    def test_results_table(self, runner, tmp_path):
        # 31 patterns in 3 groups with p=6 reproduces the reference df
        from rkhspp import LabeledPatternSet, UNIT_WINDOW, simulate_hppp
        from rkhspp.pointpat import save_patterns

        sizes = {"normal": 12, "schizoaffective": 9, "schizophrenic": 10}
        pats, s = [], 0
        for label, n in sizes.items():
            for i in range(n):
                pats.append(simulate_hppp(60, UNIT_WINDOW, s, label=label,
                                          id=f"{label}-{i}"))
                s += 1
        patterns = tmp_path / "patterns.csv"
        save_patterns(LabeledPatternSet(pats), patterns)
        features = tmp_path / "features.csv"
        result = runner.invoke(
            main, ["features", str(patterns), "--out", str(features),
                   "--h", "0.1", "--r", "6"],
        )
        assert result.exit_code == 0, result.output
        out = tmp_path / "results.csv"
        result = runner.invoke(main, ["anova", str(features), "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "method,statistic,df1,df2,p_value"
        table = {r.split(",")[0]: r.split(",") for r in rows[1:]}
        assert float(table["boxm"][2]) == 42.0
        assert (float(table["manova-pillai"][2]),
                float(table["manova-pillai"][3])) == (12.0, 48.0)
        assert {f"anova-mu{q}" for q in range(1, 7)} <= set(table)
        assert len(rows) == 1 + 3 + 6  # 3 multivariate + 6 univariate

    def test_single_group_exit_2(self, runner, tmp_path):
        features = tmp_path / "f.csv"
        features.write_text(
            "pattern_id,label,mu1\np1,a,0.1\np2,a,0.2\np3,a,0.3\n"
        )
        result = runner.invoke(main, ["anova", str(features),
                                      "--out", str(tmp_path / "r.csv")])
        assert result.exit_code == 2


class TestClassify:
    def test_loocv_separable(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)  # lambda 50 vs 100
        features = _features(runner, tmp_path, patterns)
        out = tmp_path / "pred.csv"
        result = runner.invoke(
            main, ["classify", str(features), "--loocv", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "loocv error: 0.0000" in result.output
        rows = out.read_text().strip().splitlines()
        assert rows[0].startswith("pattern_id,predicted,true,posterior_")
        assert len(rows) == 41

    def test_posteriors_sum_to_one(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        features = _features(runner, tmp_path, patterns)
        out = tmp_path / "pred.csv"
        runner.invoke(main, ["classify", str(features), "--loocv",
                             "--out", str(out)])
        data = np.loadtxt(out, delimiter=",", skiprows=1, usecols=(3, 4))
        assert np.allclose(data.sum(axis=1), 1.0, atol=1e-12)

    def test_train_and_predict(self, runner, tmp_path):
        train_p = _simulate(runner, tmp_path, seed=1, name="train.csv")
        test_p = _simulate(runner, tmp_path, seed=2, name="test.csv")
        train_f = _features(runner, tmp_path, train_p, name="ftrain.csv")
        test_f = _features(runner, tmp_path, test_p, name="ftest.csv")
        out = tmp_path / "pred.csv"
        result = runner.invoke(
            main, ["classify", str(train_f), "--test", str(test_f),
                   "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "test error" in result.output

    def test_unseen_class_exit_2(self, runner, tmp_path):
        train_f = tmp_path / "train.csv"
        train_f.write_text(
            "pattern_id,label,mu1\n"
            + "".join(f"a{i},a,{i}.0\n" for i in range(5))
            + "".join(f"b{i},b,{i + 10}.0\n" for i in range(5))
        )
        test_f = tmp_path / "test.csv"
        test_f.write_text("pattern_id,label,mu1\nt1,c,1.0\n")
        result = runner.invoke(
            main, ["classify", str(train_f), "--test", str(test_f),
                   "--out", str(tmp_path / "p.csv")],
        )
        assert result.exit_code == 2


class TestReproduce:
    def test_report_format(self, runner, tmp_path):
        out = tmp_path / "rep"
        result = runner.invoke(
            main,
            ["reproduce", "table2", "--seeds", "1..2", "--out", str(out),
             "--h", "0.1", "--r", "5"],
        )
        assert result.exit_code == 0, result.output
        report = (out / "report.csv").read_text().strip().splitlines()
        assert len(report) == 4  # header + 3 experiments
        refs = {r.split(",")[0]: r.split(",")[-2:] for r in report[1:]}
        assert [float(v) for v in refs["hppp-90-100"]] == [0.1, 0.1755]
        assert [float(v) for v in refs["hppp-pcpp-36"]] == [0.05, 0.117]
        assert [float(v) for v in refs["hppp-50-100"]] == [0.0, 0.0]

    def test_unknown_experiment_exit_2(self, runner, tmp_path):
        result = runner.invoke(
            main, ["reproduce", "nope", "--out", str(tmp_path / "rep")],
        )
        assert result.exit_code == 2

    def test_seed_list_syntax(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["reproduce", "hppp-50-100", "--seeds", "3,5", "--out",
             str(tmp_path / "rep"), "--h", "0.1", "--r", "5"],
        )
        assert result.exit_code == 0, result.output


class TestExportField:
    def test_single_pattern_field(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        out = tmp_path / "field.csv"
        result = runner.invoke(
            main,
            ["export-field", str(patterns), "--pattern-id", "c1-000",
             "--out", str(out), "--h", "0.1"],
        )
        assert result.exit_code == 0, result.output
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "x,y,value"
        assert len(rows) == 1 + 121

    def test_mean_field(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        out = tmp_path / "mean.csv"
        result = runner.invoke(
            main,
            ["export-field", str(patterns), "--mean-of", "class2",
             "--out", str(out), "--h", "0.1"],
        )
        assert result.exit_code == 0, result.output

    def test_requires_exactly_one_selector(self, runner, tmp_path):
        patterns = _simulate(runner, tmp_path)
        result = runner.invoke(
            main, ["export-field", str(patterns), "--out",
                   str(tmp_path / "f.csv")],
        )
        assert result.exit_code == 2
