"""CSV dataset loading, generation and round-trips."""

import numpy as np
import pytest

from eigp import Dataset, DatasetError, load_dataset, toy_stream, write_dataset


def test_rows_load_in_file_order(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,y1\n0.5,1.0\n-0.25,2.0\n0.125,3.0\n")
    ds = load_dataset(path, 1, 1)
    assert len(ds) == 3
    assert ds.X[:, 0].tolist() == [0.5, -0.25, 0.125]
    assert ds.Y[:, 0].tolist() == [1.0, 2.0, 3.0]


def test_non_numeric_cell_names_row_and_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,y1\n0.5,1.0\noops,2.0\n")
    with pytest.raises(DatasetError) as exc:
        load_dataset(path, 1, 1)
    assert "row 3" in str(exc.value)  # line numbers count the header
    assert "column 1" in str(exc.value)


def test_non_finite_value_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,y1\n0.5,inf\n")
    with pytest.raises(DatasetError) as exc:
        load_dataset(path, 1, 1)
    assert "non-finite" in str(exc.value)


def test_wrong_column_count_is_schema_error(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,x2,y1\n0.5,0.5,1.0\n")
    with pytest.raises(DatasetError) as exc:
        load_dataset(path, 1, 1)
    assert "columns" in str(exc.value)


def test_short_row_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,y1\n0.5,1.0\n0.5\n")
    with pytest.raises(DatasetError) as exc:
        load_dataset(path, 1, 1)
    assert "row 3" in str(exc.value)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("")
    with pytest.raises(DatasetError):
        load_dataset(path, 1, 1)
    path.write_text("x1,y1\n")
    with pytest.raises(DatasetError):
        load_dataset(path, 1, 1)


def test_box_matches_generator_bounds(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(-2.0, 3.0, size=(500, 2))
    Y = rng.normal(size=(500, 1))
    path = tmp_path / "d.csv"
    write_dataset(path, X, Y)
    ds = load_dataset(path, 2, 1)
    assert np.array_equal(ds.lower, X.min(axis=0))
    assert np.array_equal(ds.upper, X.max(axis=0))


def test_write_load_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 1))
    Y = rng.normal(size=(40, 2))
    path = tmp_path / "d.csv"
    write_dataset(path, X, Y)
    ds = load_dataset(path, 1, 2)
    assert np.array_equal(ds.X, X)  # repr round-trips doubles exactly
    assert np.array_equal(ds.Y, Y)


def test_toy_stream_seeded_and_boxed():
    a = toy_stream(100, np.random.default_rng(5))
    b = toy_stream(100, np.random.default_rng(5))
    assert isinstance(a, Dataset)
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.Y, b.Y)
    assert a.X.min() >= -1.2 and a.X.max() <= 1.2
