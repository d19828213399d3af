"""Tests for cavity parity measurement and the parity-drive calibration."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.services.hilbert import FockSpace, cat_state, coherent_state, fock_state
from cavity_memory.services.protocols.parity import (
    EVEN,
    ODD,
    ParityOutcome,
    ReadoutModel,
    calibrate_parity_drive,
    parity_channel,
    parity_expectation,
    parity_measure,
    parity_wait_time,
)


@pytest.fixture
def small_cavity() -> FockSpace:
    """Three-level cavity for Fock-state checks."""
    return FockSpace((3,), ("cavity",))


class TestIdealParity:
    """Test suite for projective parity."""

    def test_even_cat(self, params: SystemParams, cavity_space: FockSpace) -> None:
        """An even cat has parity +1."""
        state = cat_state(cavity_space, "cavity", 2.0, parity=1)
        assert parity_expectation(state, params) == pytest.approx(1.0, abs=1e-9)

    def test_odd_cat(self, params: SystemParams, cavity_space: FockSpace) -> None:
        """An odd cat has parity -1."""
        state = cat_state(cavity_space, "cavity", 2.0, parity=-1)
        assert parity_expectation(state, params) == pytest.approx(-1.0, abs=1e-9)

    def test_coherent_state(self, params: SystemParams, cavity_space: FockSpace) -> None:
        """<P> of |alpha> is exp(-2|alpha|^2)."""
        state = coherent_state(cavity_space, "cavity", 1.0)
        assert parity_expectation(state, params) == pytest.approx(math.exp(-2.0), rel=1e-6)

    def test_branches_sum_to_state(self, params: SystemParams, cavity_space: FockSpace) -> None:
        """Without readout error the branch traces add up to one."""
        state = coherent_state(cavity_space, "cavity", 1.5)
        branches = parity_channel(state, params)
        assert branches[EVEN].trace() + branches[ODD].trace() == pytest.approx(1.0)

    def test_post_selected_even_is_cat(self, params: SystemParams, cavity_space: FockSpace) -> None:
        """Post-selecting even on |alpha> leaves the even cat."""
        state = coherent_state(cavity_space, "cavity", 1.0)
        result = parity_measure(state, params, outcome=EVEN)
        assert result.outcome == EVEN
        assert result.probability == pytest.approx((1.0 + math.exp(-2.0)) / 2.0, rel=1e-6)
        target = cat_state(cavity_space, "cavity", 1.0, parity=1)
        assert target.fidelity(result.post_state) == pytest.approx(1.0, abs=1e-6)

    def test_most_probable_outcome(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """Without rng or post-selection the likelier outcome is reported."""
        result = parity_measure(fock_state(small_cavity, {"cavity": 1}), params)
        assert result.outcome == ODD
        assert result.probability == pytest.approx(1.0)

    def test_sampled_outcome(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """A sampled outcome on a Fock state is deterministic."""
        rng = np.random.default_rng(1)
        result = parity_measure(fock_state(small_cavity, {"cavity": 2}), params, rng=rng)
        assert result.outcome == EVEN

    def test_zero_probability_outcome(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """Post-selecting an impossible outcome raises."""
        with pytest.raises(UnphysicalInputError, match="zero probability"):
            parity_measure(fock_state(small_cavity, {"cavity": 1}), params, outcome=EVEN)

    def test_composite_state_is_traced(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """Other modes are traced out before measuring."""
        state = fock_state(encoding_space, {"cavity": 1, "transmon": 1})
        assert parity_expectation(state, params) == pytest.approx(-1.0)

    def test_unknown_mode(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """Unknown modes raise ValueError."""
        with pytest.raises(ValueError, match="Unknown parity mode"):
            parity_expectation(fock_state(small_cavity, {"cavity": 0}), params, mode="oracle")  # type: ignore[arg-type]


class TestReadoutModel:
    """Test suite for assignment error."""

    def test_contrast(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """95% fidelity reports vacuum parity as 0.9."""
        readout = ReadoutModel(0.95)
        assert readout.contrast == pytest.approx(0.9)
        vacuum = fock_state(small_cavity, {"cavity": 0})
        assert parity_expectation(vacuum, params, readout=readout) == pytest.approx(0.9)

    def test_fidelity_below_half(self) -> None:
        """Fidelities under 0.5 are rejected."""
        with pytest.raises(UnphysicalInputError):
            ReadoutModel(0.4)

    def test_outcome_validation(self, small_cavity: FockSpace) -> None:
        """ParityOutcome only takes +1 or -1."""
        with pytest.raises(UnphysicalInputError):
            ParityOutcome(0, 0.5, fock_state(small_cavity, {"cavity": 0}))


class TestSimulatedParity:
    """Test suite for the ancilla-based parity sequence."""

    def test_wait_time(self, params: SystemParams) -> None:
        """The conditional wait is pi/chi."""
        assert parity_wait_time(params) == pytest.approx(math.pi / params.chi)

    def test_wait_time_needs_chi(self, params: SystemParams) -> None:
        """chi = 0 cannot map parity onto the transmon."""
        with pytest.raises(UnphysicalInputError):
            parity_wait_time(params.replace(chi=0.0))

    @pytest.mark.parametrize(("level", "expected"), [(0, 1.0), (1, -1.0), (2, 1.0)])
    def test_noiseless_fock_states(
        self, params: SystemParams, small_cavity: FockSpace, level: int, expected: float
    ) -> None:
        """Noiseless simulation reproduces projective parity on Fock states."""
        state = fock_state(small_cavity, {"cavity": level})
        value = parity_expectation(state, params, mode="simulated", with_noise=False)
        assert value == pytest.approx(expected, abs=1e-6)

    def test_noise_reduces_contrast(self, params: SystemParams, small_cavity: FockSpace) -> None:
        """Transmon dephasing during the wait washes out the vacuum signal."""
        vacuum = fock_state(small_cavity, {"cavity": 0})
        value = parity_expectation(vacuum, params, mode="simulated")
        assert 0.0 < value < 0.99


class TestCalibration:
    """Test suite for the parity-drive detuning sweep."""

    def test_ideal_optimum_without_fit(self, params: SystemParams) -> None:
        """The optimum sits at n-bar chi for n-bar = 16."""
        grid = TWO_PI * np.linspace(600e3, 750e3, 31)
        result = calibrate_parity_drive(params, 4.0, grid, mode="ideal", fit=False)
        expected = 16.0 * params.chi / TWO_PI
        assert result.derived["optimal_detuning_hz"] == pytest.approx(expected, rel=1e-9)
        assert result.derived["expected_shift_hz"] == pytest.approx(expected)

    def test_ideal_optimum_with_fit(self, params: SystemParams) -> None:
        """The cosine fit recovers the same optimum and period."""
        grid = TWO_PI * np.linspace(600e3, 750e3, 151)
        result = calibrate_parity_drive(params, 4.0, grid, mode="ideal")
        chi_hz = params.chi / TWO_PI
        assert result.derived["period_hz"] == pytest.approx(chi_hz, rel=1e-3)
        assert result.derived["optimal_detuning_hz"] == pytest.approx(16.0 * chi_hz, rel=1e-3)

    def test_result_is_probability(self, params: SystemParams) -> None:
        """P_e values stay in [0, 1]."""
        grid = TWO_PI * np.linspace(0.0, 100e3, 11)
        result = calibrate_parity_drive(params, 1.0, grid, mode="ideal", fit=False)
        assert result.kind == "probability"
        assert all(0.0 <= p <= 1.0 for p in result.observable)

    @pytest.mark.slow
    def test_simulated_noiseless_matches_ideal(self, params: SystemParams) -> None:
        """The noiseless ancilla sequence follows the closed-form fringe."""
        grid = TWO_PI * np.linspace(0.0, 100e3, 11)
        ideal = calibrate_parity_drive(params, 1.0, grid, mode="ideal", fit=False)
        simulated = calibrate_parity_drive(
            params, 1.0, grid, mode="simulated", with_noise=False, fit=False
        )
        np.testing.assert_allclose(simulated.observable, ideal.observable, atol=1e-6)
