import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.spatial.transform import Rotation

from accusketch.synthdata import (
    BimodalConfig,
    dense_cdf,
    dense_inverse_cdf,
    f_star,
    g_scalar,
    gen_bimodal,
    load_csv,
    make_dataset,
)


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestBimodalConfig:
    def test_dense_weight(self):
        cfg = BimodalConfig(n=4000, gamma=0.6)
        assert cfg.dense_weight == pytest.approx(4000**0.6 / (4000 + 4000**0.6), rel=1e-15)

    @pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 10, "gamma": 0.0}, {"n": 10, "gamma": 1.0}, {"n": 10, "dim": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            BimodalConfig(**kwargs)

    @given(st.integers(1, 10**7), st.floats(0.01, 0.99))
    def test_weight_in_unit_interval(self, n, gamma):
        assert 0 < BimodalConfig(n=n, gamma=gamma).dense_weight < 1


class TestDenseSampler:
    def test_endpoints(self):
        assert dense_inverse_cdf(0.0) == 2.0
        assert dense_inverse_cdf(1.0) == 2.5

    def test_three_quarters(self):
        assert dense_inverse_cdf(0.75) == pytest.approx(2.25, rel=1e-15)

    @given(st.floats(0.0, 1.0))
    def test_cdf_round_trip(self, u):
        assert dense_cdf(dense_inverse_cdf(u)) == pytest.approx(u, abs=1e-12)

    def test_kolmogorov_smirnov(self):
        draws = dense_inverse_cdf(np.random.default_rng(0).random(100_000))
        assert stats.kstest(draws, dense_cdf).statistic < 0.01

    def test_density_integrates_to_one(self):
        x = np.linspace(2.0, 2.5, 20001)
        assert np.trapezoid(4 * (5 - 2 * x), x) == pytest.approx(1.0, abs=1e-9)


class TestGenBimodal:
    def test_shape_and_support(self):
        X = gen_bimodal(BimodalConfig(n=500), np.random.default_rng(1))
        assert X.shape == (500, 3)
        dense = np.all(X >= 2.0, axis=1)
        assert np.all((X[dense] <= 2.5))
        assert np.all((X[~dense] >= 0) & (X[~dense] < 1))

    def test_mixture_proportion(self):
        cfg = BimodalConfig(n=4000, gamma=0.6)
        X = gen_bimodal(cfg, np.random.default_rng(2))
        frac = np.all(X >= 2.0, axis=1).mean()
        p = cfg.dense_weight
        assert abs(frac - p) <= 3 * np.sqrt(p * (1 - p) / cfg.n)

    def test_deterministic(self):
        cfg = BimodalConfig(n=100)
        a = gen_bimodal(cfg, np.random.default_rng(3))
        b = gen_bimodal(cfg, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)

    def test_dimension(self):
        X = gen_bimodal(BimodalConfig(n=20, dim=5), np.random.default_rng(4))
        assert X.shape == (20, 5)


class TestTrueFunction:
    @pytest.mark.parametrize("t,expected", [(0.4, -0.884), (0.0, -0.116), (1.0, -0.116)])
    def test_g_values(self, t, expected):
        assert g_scalar(t) == pytest.approx(expected, abs=1e-14)

    def test_origin(self):
        assert f_star(np.zeros(3)) == pytest.approx(-0.116, abs=1e-14)

    def test_norm_one_point_two(self):
        assert f_star([1.2, 0.0, 0.0]) == pytest.approx(-0.884, abs=1e-14)
        assert f_star([0.0, 0.72, 0.96]) == pytest.approx(-0.884, abs=1e-13)

    def test_rows_compose(self):
        X = np.random.default_rng(5).normal(size=(20, 3))
        expected = [g_scalar(np.sqrt(sum(v * v for v in row)) / 3) for row in X.tolist()]
        np.testing.assert_allclose(f_star(X), expected, rtol=1e-13)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.integers(0, 2**32 - 1))
    def test_rotation_invariance(self, x, seed):
        Q = Rotation.random(random_state=seed).as_matrix()
        x = np.array(x)
        assert abs(f_star(Q @ x) - f_star(x)) <= 1e-12 * max(1.0, abs(f_star(x)))


class TestMakeDataset:
    def test_noiseless(self):
        ds = make_dataset(BimodalConfig(n=50), 0.0, np.random.default_rng(6))
        np.testing.assert_array_equal(ds.Y, ds.f_star)

    def test_noise_variance(self):
        n, sd = 10_000, 0.5
        ds = make_dataset(BimodalConfig(n=n), sd, np.random.default_rng(7))
        var = np.var(ds.Y - ds.f_star, ddof=1)
        assert abs(var - sd**2) <= 3 * sd**2 * np.sqrt(2 / (n - 1))

    def test_deterministic(self):
        a = make_dataset(BimodalConfig(n=30), 0.5, np.random.default_rng(8))
        b = make_dataset(BimodalConfig(n=30), 0.5, np.random.default_rng(8))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.Y, b.Y)

    def test_negative_noise(self):
        with pytest.raises(ValueError):
            make_dataset(BimodalConfig(n=10), -0.1, np.random.default_rng(0))


class TestLoadCsv:
    def test_five_rows(self, tmp_path):
        path = write_csv(tmp_path / "toy.csv", ["a", "b", "y"],
                         [[1, 5, 0], [2, 3, 1], [4, 1, 2], [3, 2, 3], [5, 4, 4]])
        train, test = load_csv(path, "y", 0.2, np.random.default_rng(0))
        assert (train.n, test.n) == (4, 1)
        assert train.X.shape == (4, 2)

    def test_unit_variance(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = np.column_stack([rng.normal(size=200) * 7, rng.uniform(size=200) * 0.1, rng.normal(size=200)])
        path = write_csv(tmp_path / "d.csv", ["u", "v", "target"], rows.tolist())
        train, test = load_csv(path, "target", 0.25, np.random.default_rng(2))
        np.testing.assert_allclose(train.X.var(axis=0), 1.0, atol=1e-10)

    def test_partition(self, tmp_path):
        rows = [[float(i), float(i * i % 7), i] for i in range(40)]
        path = write_csv(tmp_path / "p.csv", ["a", "b", "id"], rows)
        train, test = load_csv(path, 2, 0.3, np.random.default_rng(3))
        ids_train, ids_test = set(train.Y.tolist()), set(test.Y.tolist())
        assert ids_train.isdisjoint(ids_test)
        assert ids_train | ids_test == set(range(40))
        again, _ = load_csv(path, 2, 0.3, np.random.default_rng(3))
        np.testing.assert_array_equal(train.Y, again.Y)

    def test_scaling_uses_training_rows(self, tmp_path):
        rows = [[float(i), float(i % 3), float(i)] for i in range(30)]
        path = write_csv(tmp_path / "s.csv", ["a", "b", "y"], rows)
        train, test = load_csv(path, "y", 0.2, np.random.default_rng(4))
        # column a equals the target, so the scale factor is recoverable
        scale = train.Y.std()
        np.testing.assert_allclose(test.X[:, 0], test.Y / scale, rtol=1e-12)

    def test_digit_string_target(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ["a", "y"], [[1, 2], [2, 3], [3, 5]])
        train, _ = load_csv(path, "-1", 0.3, np.random.default_rng(0))
        assert train.X.shape[1] == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError):
            load_csv(tmp_path / "nope.csv", 0, 0.2, np.random.default_rng(0))

    def test_non_numeric(self, tmp_path):
        path = write_csv(tmp_path / "n.csv", ["a", "y"], [[1, 2], ["x", 3], [3, 4]])
        with pytest.raises(ValueError):
            load_csv(path, "y", 0.3, np.random.default_rng(0))

    def test_constant_column(self, tmp_path):
        path = write_csv(tmp_path / "c.csv", ["a", "b", "y"], [[1, i, i] for i in range(10)])
        with pytest.raises(ValueError):
            load_csv(path, "y", 0.2, np.random.default_rng(0))

    def test_unknown_target(self, tmp_path):
        path = write_csv(tmp_path / "u.csv", ["a", "y"], [[1, 2], [2, 3]])
        with pytest.raises(ValueError):
            load_csv(path, "z", 0.5, np.random.default_rng(0))

    @pytest.mark.parametrize("tf", [0.0, 1.0])
    def test_bad_fraction(self, tmp_path, tf):
        path = write_csv(tmp_path / "f.csv", ["a", "y"], [[1, 2], [2, 3]])
        with pytest.raises(ValueError):
            load_csv(path, "y", tf, np.random.default_rng(0))
