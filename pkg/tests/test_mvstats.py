import numpy as np
import pytest
from scipy import stats

from rkhspp import (
    GroupedFeatures,
    SingularSystemError,
    ValidationError,
    anova_univariate,
    boxm_test,
    manova_pillai,
    manova_wilks,
)
from rkhspp.mvstats import results_to_csv, results_to_json


def gaussian_groups(rng, sizes, p, shift=0.0):
    rows, labels = [], []
    for k, n_k in enumerate(sizes):
        rows.append(rng.normal(size=(n_k, p)) + shift * k)
        labels += [f"g{k}"] * n_k
    return GroupedFeatures(np.vstack(rows), labels)


@pytest.fixture
def null_data():
    return gaussian_groups(np.random.default_rng(0), [12, 9, 10], 6)


class TestGroupedFeatures:
    def test_shape_accessors(self, null_data):
        assert (null_data.n, null_data.p, null_data.g) == (31, 6, 3)
        assert null_data.group_sizes() == {"g0": 12, "g1": 9, "g2": 10}

    def test_single_group_rejected(self):
        with pytest.raises(ValidationError):
            GroupedFeatures(np.zeros((4, 2)), ["a"] * 4)

    def test_unlabeled_rejected(self):
        with pytest.raises(ValidationError):
            GroupedFeatures(np.zeros((4, 2)), ["a", "b", None, "b"])


class TestBoxM:
    def test_reference_df(self, null_data):
        # g=3, p=6 -> (g-1) p (p+1) / 2 = 42
        res = boxm_test(null_data)
        assert res.df1 == 42
        assert res.df2 is None

    def test_identical_groups_zero_statistic(self):
        block = np.random.default_rng(1).normal(size=(10, 3))
        data = GroupedFeatures(
            np.vstack([block, block, block]), ["a"] * 10 + ["b"] * 10 + ["c"] * 10
        )
        res = boxm_test(data)
        assert res.statistic == pytest.approx(0.0, abs=1e-10)
        assert res.p_value == pytest.approx(1.0)

    def test_scalar_oracle_two_groups_p1(self):
        # p=1: M reduces to a log-variance-ratio statistic
        rng = np.random.default_rng(2)
        x1, x2 = rng.normal(size=14), 2.0 * rng.normal(size=11)
        data = GroupedFeatures(
            np.concatenate([x1, x2]).reshape(-1, 1), ["a"] * 14 + ["b"] * 11
        )
        n1, n2 = 14, 11
        n, g, p = n1 + n2, 2, 1
        v1, v2 = x1.var(ddof=1), x2.var(ddof=1)
        pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n - g)
        m = (n - g) * np.log(pooled) - (n1 - 1) * np.log(v1) - (n2 - 1) * np.log(v2)
        c = (1 / (n1 - 1) + 1 / (n2 - 1) - 1 / (n - g)) * (
            2 * p**2 + 3 * p - 1
        ) / (6 * (p + 1) * (g - 1))
        res = boxm_test(data)
        assert res.statistic == pytest.approx(m * (1 - c), rel=1e-10)
        assert res.p_value == pytest.approx(stats.chi2.sf(m * (1 - c), 1), rel=1e-10)

    def test_linear_map_invariance(self, null_data):
        rng = np.random.default_rng(3)
        base = boxm_test(null_data).statistic
        for _ in range(5):
            a = rng.normal(size=(6, 6))
            while abs(np.linalg.det(a)) < 1e-3:
                a = rng.normal(size=(6, 6))
            mapped = GroupedFeatures(null_data.features @ a.T, null_data.labels)
            assert boxm_test(mapped).statistic == pytest.approx(base, rel=1e-6)

    def test_small_group_rejected(self):
        rng = np.random.default_rng(4)
        data_rows = np.vstack([rng.normal(size=(3, 6)), rng.normal(size=(10, 6))])
        data = GroupedFeatures(data_rows, ["a"] * 3 + ["b"] * 10)
        with pytest.raises(ValidationError):
            boxm_test(data)


class TestManovaPillai:
    def test_reference_df(self, null_data):
        # p=6, g=3, n=31 -> approximate-F df (12, 48)
        res = manova_pillai(null_data)
        assert (res.df1, res.df2) == (12, 48)

    def test_identical_means(self):
        rng = np.random.default_rng(5)
        block = rng.normal(size=(9, 4))
        data = GroupedFeatures(
            np.vstack([block, block, block]), ["a"] * 9 + ["b"] * 9 + ["c"] * 9
        )
        res = manova_pillai(data)
        assert res.statistic == pytest.approx(0.0, abs=1e-9)
        assert res.p_value == pytest.approx(1.0)

    def test_p1_equals_univariate_anova(self):
        rng = np.random.default_rng(6)
        data = gaussian_groups(rng, [8, 12, 7], 1, shift=0.5)
        pillai = manova_pillai(data)
        anova = anova_univariate(data, 0)
        assert pillai.statistic == pytest.approx(anova.statistic, rel=1e-10)
        assert pillai.p_value == pytest.approx(anova.p_value, rel=1e-10)
        assert (pillai.df1, pillai.df2) == (anova.df1, anova.df2)

    def test_insufficient_df_rejected(self):
        rng = np.random.default_rng(7)
        data = gaussian_groups(rng, [4, 4], 8)
        with pytest.raises(ValidationError):
            manova_pillai(data)

    def test_statistic_bounds(self):
        rng = np.random.default_rng(8)
        for seed in range(10):
            data = gaussian_groups(np.random.default_rng(seed), [10, 10, 10], 4,
                                   shift=rng.uniform(0, 2))
            res = manova_pillai(data)
            assert 0.0 <= res.p_value <= 1.0


class TestManovaWilks:
    def test_identical_means_lambda_one(self):
        block = np.random.default_rng(9).normal(size=(9, 4))
        data = GroupedFeatures(
            np.vstack([block, block]), ["a"] * 9 + ["b"] * 9
        )
        res = manova_wilks(data)
        assert res.statistic == pytest.approx(1.0, abs=1e-9)
        assert res.p_value == pytest.approx(1.0, abs=1e-9)

    def test_p1_equals_univariate_anova(self):
        data = gaussian_groups(np.random.default_rng(10), [9, 11, 8], 1, shift=0.4)
        wilks = manova_wilks(data)
        anova = anova_univariate(data, 0)
        lam = wilks.statistic
        f_from_lambda = (1 - lam) / lam * wilks.df2 / wilks.df1
        assert f_from_lambda == pytest.approx(anova.statistic, rel=1e-10)
        assert wilks.p_value == pytest.approx(anova.p_value, rel=1e-10)

    def test_lambda_in_unit_interval(self):
        for seed in range(10):
            data = gaussian_groups(np.random.default_rng(seed), [12, 12], 3,
                                   shift=0.3 * seed)
            assert 0.0 < manova_wilks(data).statistic <= 1.0


class TestAnovaUnivariate:
    def test_identical_groups(self):
        block = np.random.default_rng(11).normal(size=(8, 2))
        data = GroupedFeatures(np.vstack([block, block]), ["a"] * 8 + ["b"] * 8)
        res = anova_univariate(data, 0)
        assert res.statistic == pytest.approx(0.0, abs=1e-12)
        assert res.p_value == pytest.approx(1.0)

    def test_balanced_two_groups_equals_t_squared(self):
        rng = np.random.default_rng(12)
        x1, x2 = rng.normal(size=10), rng.normal(size=10) + 0.8
        data = GroupedFeatures(
            np.concatenate([x1, x2]).reshape(-1, 1), ["a"] * 10 + ["b"] * 10
        )
        t_stat, t_p = stats.ttest_ind(x1, x2)
        res = anova_univariate(data, 0)
        assert res.statistic == pytest.approx(t_stat**2, rel=1e-10)
        assert res.p_value == pytest.approx(t_p, rel=1e-10)

    def test_zero_within_variance(self):
        data = GroupedFeatures(
            np.array([[1.0], [1.0], [2.0], [2.0]]), ["a", "a", "b", "b"]
        )
        with pytest.raises(SingularSystemError):
            anova_univariate(data, 0)

    def test_index_range(self, null_data):
        with pytest.raises(ValidationError):
            anova_univariate(null_data, 6)


class TestCalibration:
    def test_permutation_rejection_rate(self):
        # on null data, random label permutations should reject at ~5%
        rng = np.random.default_rng(13)
        features = rng.normal(size=(60, 3))
        labels = ["a"] * 20 + ["b"] * 20 + ["c"] * 20
        rejections = 0
        n_perm = 2000
        for _ in range(n_perm):
            perm = rng.permutation(60)
            data = GroupedFeatures(features, [labels[i] for i in perm])
            rejections += manova_pillai(data).p_value < 0.05
        assert 0.02 <= rejections / n_perm <= 0.08


class TestSerialization:
    def test_csv_round_trip(self, null_data, tmp_path):
        results = [boxm_test(null_data), manova_pillai(null_data),
                   manova_wilks(null_data), anova_univariate(null_data, 0)]
        path = tmp_path / "results.csv"
        results_to_csv(results, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "method,statistic,df1,df2,p_value"
        assert len(rows) == 5
        fields = rows[1].split(",")
        assert fields[0] == "boxm"
        assert float(fields[1]) == pytest.approx(results[0].statistic)
        assert fields[3] == ""  # chi-square test has a single df

    def test_json(self, null_data):
        import json

        text = results_to_json([boxm_test(null_data)])
        record = json.loads(text)[0]
        assert record["method"] == "boxm"
        assert 0 <= record["p_value"] <= 1
