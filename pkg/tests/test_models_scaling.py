import numpy as np
import pytest

from drowse.models import (
    ZeroVarianceColumn,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
)


def test_two_point_column():
    std = fit_standardizer([[1.0], [3.0]])
    assert std.mean == (2.0,)
    assert std.sd == (1.0,)
    out = apply_standardizer(std, [[1.0], [3.0]])
    assert out.tolist() == [[-1.0], [1.0]]


def test_zero_variance_column_named():
    with pytest.raises(ZeroVarianceColumn) as excinfo:
        fit_standardizer([[1.0, 5.0], [2.0, 5.0]], column_names=["a", "b"])
    assert excinfo.value.column == 1
    assert "b" in str(excinfo.value)


def test_standardized_moments():
    rng = np.random.default_rng(11)
    X = rng.normal(3.0, 7.0, size=(200, 4))
    std = fit_standardizer(X)
    Z = apply_standardizer(std, X)
    assert np.abs(Z.mean(axis=0)).max() < 1e-9
    assert np.abs(np.sqrt((Z**2).mean(axis=0)) - 1.0).max() < 1e-9


def test_apply_invert_round_trip():
    rng = np.random.default_rng(5)
    X = rng.normal(0, 10, size=(50, 3))
    std = fit_standardizer(X)
    back = invert_standardizer(std, apply_standardizer(std, X))
    assert np.abs(back - X).max() < 1e-9
