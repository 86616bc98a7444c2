"""Log-log slope fitting and series verdicts."""

import numpy as np
import pytest

from wicklab.convergence import ConvergenceSeries, fit_slope
from wicklab.errors import DegenerateInput


def test_fit_slope_exact_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, resid = fit_slope(list(zip(x, x ** 2)))
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert resid <= 1e-12
    slope, _ = fit_slope(list(zip(x, 3.0 / x)))
    assert slope == pytest.approx(-1.0, abs=1e-12)


def test_fit_slope_constant():
    slope, resid = fit_slope([(1.0, 5.0), (2.0, 5.0), (4.0, 5.0)])
    assert slope == pytest.approx(0.0, abs=1e-14)
    assert resid <= 1e-14


def test_fit_slope_rejects_bad_data():
    with pytest.raises(DegenerateInput):
        fit_slope([(1.0, 2.0)])
    with pytest.raises(DegenerateInput):
        fit_slope([(1.0, 0.0), (2.0, 1.0)])
    with pytest.raises(DegenerateInput):
        fit_slope([(1.0, -1.0), (2.0, 1.0)])
    with pytest.raises(DegenerateInput):
        fit_slope([(1.0, np.nan), (2.0, 1.0)])


def series(defects, band):
    data = [(n, 1.0 / n, d) for n, d in zip((4, 8, 16, 32), defects)]
    return ConvergenceSeries("t", data, band)


def test_series_slope_and_band():
    s = series([1.0, 0.25, 0.0625, 0.015625], (1.8, 2.2))
    assert s.slope == pytest.approx(2.0, abs=1e-12)
    assert s.passed
    assert not series([1.0, 0.5, 0.25, 0.125], (1.8, 2.2)).passed
    assert series([1.0, 0.5, 0.25, 0.125], (0.8, None)).passed


def test_series_all_zero_counts_as_converged():
    s = series([0.0, 0.0, 0.0, 0.0], (1.8, 2.2))
    assert s.slope is None
    assert s.passed


def test_series_too_few_usable_points():
    s = series([1.0, 0.5, 0.0, 0.0], (0.8, 1.2))
    assert s.slope is None
    assert not s.passed
