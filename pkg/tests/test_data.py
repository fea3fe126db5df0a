import numpy as np
import pytest

from svrfuzzy import Dataset, DatasetFormatError, load_dataset, save_dataset


def test_dataset_validation():
    ds = Dataset(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 2.0]))
    assert ds.n_samples == 2 and ds.n_features == 2

    with pytest.raises(ValueError, match="empty"):
        Dataset(np.empty((0, 2)), np.empty(0))
    with pytest.raises(ValueError, match="non-finite"):
        Dataset(np.array([[np.nan]]), np.array([1.0]))
    with pytest.raises(ValueError, match="mismatch"):
        Dataset(np.array([[1.0], [2.0]]), np.array([1.0]))


def test_dataset_is_immutable():
    ds = Dataset(np.array([[1.0]]), np.array([2.0]))
    with pytest.raises(ValueError):
        ds.x[0, 0] = 5.0


def test_roundtrip(tmp_path):
    ds = Dataset(np.array([[0.125, -3.5], [1e-9, 2.0]]), np.array([7.25, -1.0]))
    path = tmp_path / "data.txt"
    save_dataset(ds, path)
    loaded = load_dataset(path)
    assert np.array_equal(loaded.x, ds.x)
    assert np.array_equal(loaded.y, ds.y)


def test_comments_and_blank_lines(tmp_path):
    path = tmp_path / "data.txt"
    path.write_text("# header\n\n1.0 2.0 3.0\n# trailing comment\n4,5,6\n")
    ds = load_dataset(path)
    assert ds.n_samples == 2 and ds.n_features == 2
    assert ds.y[1] == 6.0


def test_parse_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1.0 2.0\n1.0 oops\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_dataset(path)

    path.write_text("1.0 2.0\n1.0 2.0 3.0\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_dataset(path)

    path.write_text("# only comments\n")
    with pytest.raises(DatasetFormatError, match="no samples"):
        load_dataset(path)
