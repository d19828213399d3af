"""Tests for the least-squares fitters."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cavity_memory.exceptions import FitError
from cavity_memory.models.results import FitResult
from cavity_memory.services.analysis.fitting import (
    FITTERS,
    axis_scale_from_vacuum,
    fit_cat_cut,
    fit_cosine,
    fit_exp_cos,
    fit_exponential,
    fit_gaussian,
    fit_linear_through_origin,
)


@pytest.fixture
def decay_axis() -> np.ndarray:
    """Delay axis spanning three decay times of 3."""
    return np.linspace(0.0, 9.0, 61)


class TestFitExponential:
    """Test suite for exponential decays."""

    def test_falling_with_baseline(self, decay_axis: np.ndarray) -> None:
        """A decay onto an offset recovers all three parameters."""
        y = 2.0 * np.exp(-decay_axis / 3.0) + 0.5
        result = fit_exponential(decay_axis, y)
        assert result.value("tau") == pytest.approx(3.0, rel=1e-6)
        assert result.value("amplitude") == pytest.approx(2.0, rel=1e-6)
        assert result.value("offset") == pytest.approx(0.5, abs=1e-6)

    def test_rising(self, decay_axis: np.ndarray) -> None:
        """A rise towards a ceiling has negative amplitude."""
        y = 1.0 - np.exp(-decay_axis / 3.0)
        result = fit_exponential(decay_axis, y)
        assert result.value("tau") == pytest.approx(3.0, rel=1e-6)
        assert result.value("amplitude") == pytest.approx(-1.0, rel=1e-6)

    def test_without_baseline(self, decay_axis: np.ndarray) -> None:
        """baseline=False fits A exp(-x/tau) only."""
        y = 0.8 * np.exp(-decay_axis / 3.0)
        result = fit_exponential(decay_axis, y, baseline=False)
        assert result.value("tau") == pytest.approx(3.0, rel=1e-6)
        assert "offset" not in result.parameters

    def test_noisy_data(self, decay_axis: np.ndarray) -> None:
        """Noise leaves tau within a few percent and gives a finite error."""
        rng = np.random.default_rng(7)
        y = np.exp(-decay_axis / 3.0) + rng.normal(0.0, 0.005, decay_axis.size)
        result = fit_exponential(decay_axis, y)
        assert result.value("tau") == pytest.approx(3.0, rel=0.05)
        assert 0.0 < result.uncertainties["tau"] < 0.5


class TestOscillatingFits:
    """Test suite for exp_cos and cosine fits."""

    def test_exp_cos(self) -> None:
        """A damped 50 Hz fringe is recovered."""
        x = np.linspace(0.0, 0.1, 101)
        y = 0.5 * np.exp(-x / 0.033) * np.cos(2.0 * np.pi * 50.0 * x) + 0.5
        result = fit_exp_cos(x, y)
        assert result.value("tau") == pytest.approx(0.033, rel=1e-4)
        assert result.value("frequency") == pytest.approx(50.0, rel=1e-6)
        assert result.value("amplitude") == pytest.approx(0.5, rel=1e-4)

    def test_exp_cos_without_fringe(self, decay_axis: np.ndarray) -> None:
        """A plain decay has no spectral peak."""
        y = np.exp(-decay_axis / 30.0)
        with pytest.raises(FitError, match="spectral peak"):
            fit_exp_cos(decay_axis, y)

    def test_exp_cos_fallback(self, decay_axis: np.ndarray) -> None:
        """The fallback reports a plain decay with frequency 0."""
        y = np.exp(-decay_axis / 30.0) + 0.1
        result = fit_exp_cos(decay_axis, y, fallback_to_exponential=True)
        assert result.value("frequency") == 0.0
        assert result.value("tau") == pytest.approx(30.0, rel=1e-4)

    def test_cosine(self) -> None:
        """Period, amplitude and offset of a fringe are recovered."""
        x = np.linspace(0.0, 100.0, 201)
        y = 0.5 + 0.5 * np.cos(2.0 * np.pi * x / 21.0 + 0.3)
        result = fit_cosine(x, y)
        assert result.value("period") == pytest.approx(21.0, rel=1e-6)
        assert result.value("amplitude") == pytest.approx(0.5, rel=1e-6)
        assert result.value("phase") == pytest.approx(0.3, abs=1e-6)


class TestPhaseSpaceFits:
    """Test suite for Gaussian, vacuum-calibration and cat-cut fits."""

    def test_gaussian(self) -> None:
        """Width and centre of a Gaussian are recovered."""
        x = np.linspace(-3.0, 3.0, 121)
        y = np.exp(-((x - 0.2) ** 2) / (2.0 * 0.5**2))
        result = fit_gaussian(x, y)
        assert result.value("sigma") == pytest.approx(0.5, rel=1e-6)
        assert result.value("mean") == pytest.approx(0.2, abs=1e-6)

    def test_axis_scale(self) -> None:
        """A vacuum cut of width 1/4 needs the axis doubled."""
        x = np.linspace(-1.0, 1.0, 81)
        w = np.exp(-2.0 * (2.0 * x) ** 2)
        assert axis_scale_from_vacuum(x, w) == pytest.approx(2.0, rel=1e-6)

    def test_cat_cut(self) -> None:
        """An even-cat cut of size 16 gives S = 16."""
        y = np.linspace(-1.5, 1.5, 301)
        w = np.exp(-2.0 * y**2) * np.cos(8.0 * y)
        result = fit_cat_cut(y, w)
        assert result.value("cat_size") == pytest.approx(16.0, rel=1e-4)
        assert result.value("sigma") == pytest.approx(0.5, rel=1e-4)

    def test_linear_origin(self) -> None:
        """The slope of exact data has zero uncertainty."""
        result = fit_linear_through_origin([4.0, 16.0, 36.0], [2.0, 8.0, 18.0])
        assert result.value("slope") == pytest.approx(0.5)
        assert result.uncertainties["slope"] == pytest.approx(0.0, abs=1e-12)


class TestFitErrors:
    """Test suite for rejected inputs."""

    def test_too_few_points(self) -> None:
        """Exponential fits need four points."""
        with pytest.raises(FitError, match="at least 4"):
            fit_exponential([0.0, 1.0, 2.0], [1.0, 0.5, 0.25])

    def test_constant_data(self) -> None:
        """Flat data cannot be fitted."""
        with pytest.raises(FitError, match="zero variance"):
            fit_exponential([0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 1.0, 1.0])

    def test_non_increasing_x(self) -> None:
        """x must be strictly increasing."""
        with pytest.raises(FitError, match="strictly increasing"):
            fit_gaussian([0.0, 2.0, 1.0, 3.0, 4.0], [0.1, 0.5, 1.0, 0.5, 0.1])

    def test_non_finite(self) -> None:
        """NaN values are rejected."""
        with pytest.raises(FitError, match="non-finite"):
            fit_exponential([0.0, 1.0, 2.0, 3.0], [1.0, math.nan, 0.2, 0.1])

    def test_linear_all_zero_x(self) -> None:
        """A line through the origin needs a non-zero x."""
        with pytest.raises(FitError):
            fit_linear_through_origin([0.0, 0.0], [1.0, 2.0])

    def test_unconverged_value(self) -> None:
        """Reading a parameter of an unconverged fit raises."""
        result = FitResult("exponential", {"tau": math.nan}, {"tau": math.inf}, 0.0, converged=False)
        assert not result.usable
        with pytest.raises(FitError, match="did not converge"):
            result.value("tau")

    def test_registry(self) -> None:
        """Every fitter is reachable by name."""
        assert set(FITTERS) == {
            "exponential",
            "exp_cos",
            "cosine",
            "gaussian",
            "cat_cut",
            "linear_origin",
        }
