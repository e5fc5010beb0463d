import numpy as np
import pytest

from gmkit.data import (
    Dataset,
    SyntheticSpec,
    generate,
    load_dataset,
    load_matrix,
    save_dataset,
    save_matrix,
)
from gmkit.errors import ConfigError, ParseError


def spec(**overrides):
    base = dict(num_identities=10, samples_per_identity=2, dim=8, noise_sigma=0.1, impostor_fraction=0.3, seed=0)
    base.update(overrides)
    return SyntheticSpec(**base)


class TestGenerate:
    def test_deterministic_under_seed(self):
        a = generate(spec())
        b = generate(spec())
        assert np.array_equal(a.enrolled.data, b.enrolled.data)
        assert all(np.array_equal(x[0], y[0]) and x[1] == y[1] for x, y in zip(a.genuine_queries, b.genuine_queries))
        assert all(np.array_equal(x, y) for x, y in zip(a.impostors, b.impostors))

    def test_different_seed_changes_data(self):
        a = generate(spec())
        b = generate(spec(seed=1))
        assert not np.array_equal(a.enrolled.data, b.enrolled.data)

    def test_zero_noise_samples_equal_identity_mean(self):
        ds = generate(spec(noise_sigma=0.0, samples_per_identity=3))
        for vec, idx in ds.genuine_queries:
            assert np.allclose(vec, ds.enrolled.column(idx))

    def test_two_samples_give_one_genuine_query_per_identity(self):
        ds = generate(spec(samples_per_identity=2))
        assert len(ds.genuine_queries) == 10
        assert sorted(idx for _, idx in ds.genuine_queries) == list(range(10))

    def test_impostor_count_follows_fraction(self):
        ds = generate(spec(impostor_fraction=0.3, samples_per_identity=2))
        assert len(ds.impostors) == 3 * 2  # round(10 * 0.3) identities, 2 samples each

    def test_all_outputs_unit_norm(self):
        ds = generate(spec(noise_sigma=0.5))
        assert np.allclose(np.linalg.norm(ds.enrolled.data, axis=0), 1.0)
        assert all(abs(np.linalg.norm(v) - 1.0) < 1e-9 for v, _ in ds.genuine_queries)
        assert all(abs(np.linalg.norm(v) - 1.0) < 1e-9 for v in ds.impostors)

    def test_within_identity_cosine_beats_between(self):
        ds = generate(spec(num_identities=30, dim=64, noise_sigma=0.1, samples_per_identity=2, seed=5))
        within = [float(np.dot(v, ds.enrolled.column(i))) for v, i in ds.genuine_queries]
        rng = np.random.default_rng(0)
        between = []
        for v, i in ds.genuine_queries:
            j = int(rng.integers(30))
            if j != i:
                between.append(float(np.dot(v, ds.enrolled.column(j))))
        assert np.mean(within) > np.mean(between)

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            spec(samples_per_identity=1)
        with pytest.raises(ConfigError):
            spec(impostor_fraction=0.0)
        with pytest.raises(ConfigError):
            spec(noise_sigma=-0.1)


class TestMatrixIO:
    def test_round_trip_is_bitwise(self, tmp_path):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((5, 3))
        path = tmp_path / "m.csv"
        save_matrix(str(path), m)
        back = load_matrix(str(path))
        assert back.shape == (5, 3)
        assert np.array_equal(back, m)  # exact, not approx

    def test_header_line_written_and_skipped(self, tmp_path):
        path = tmp_path / "m.csv"
        save_matrix(str(path), np.eye(2))
        first = path.read_text().splitlines()[0]
        assert first == "# d=2 n=2"

    def test_headerless_files_load(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        assert load_matrix(str(path)).tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_empty_file_is_parse_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            load_matrix(str(path))

    def test_ragged_rows_name_the_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ParseError, match="row 2"):
            load_matrix(str(path))

    def test_bad_token_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,oops\n")
        with pytest.raises(ParseError, match="row 2, column 2"):
            load_matrix(str(path))


class TestDatasetBundle:
    def test_round_trip(self, tmp_path):
        ds = generate(spec())
        save_dataset(str(tmp_path), ds)
        back = load_dataset(str(tmp_path))
        assert np.array_equal(back.enrolled.data, ds.enrolled.data)
        assert len(back.genuine_queries) == len(ds.genuine_queries)
        for (va, ia), (vb, ib) in zip(back.genuine_queries, ds.genuine_queries):
            assert ia == ib
            assert np.array_equal(va, vb)
        assert all(np.array_equal(a, b) for a, b in zip(back.impostors, ds.impostors))

    def test_bundle_bytes_deterministic(self, tmp_path):
        d1 = tmp_path / "a"
        d2 = tmp_path / "b"
        save_dataset(str(d1), generate(spec()))
        save_dataset(str(d2), generate(spec()))
        for name in ("enrolled.csv", "genuine.csv", "impostors.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_dataset_validates_identity_range(self):
        ds = generate(spec())
        with pytest.raises(ConfigError):
            Dataset(ds.enrolled, ((ds.genuine_queries[0][0], 99),), ds.impostors)
