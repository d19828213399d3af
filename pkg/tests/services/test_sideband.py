"""Tests for sideband encode/decode and the cavity reset."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cavity_memory.exceptions import SubsystemError, UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.services.hilbert import FockSpace, basis_projector
from cavity_memory.services.protocols.sideband import (
    DEFAULT_SIDEBAND_RATE,
    decode_qubit,
    encode_qubit,
    encoded_target,
    passive_reset_wait,
    reset_rate,
    reset_xi_for_decay_time,
    sideband_pulse_spec,
    sideband_rate,
    simulate_reset,
    swap_time,
    xi_for_rate,
)


class TestRates:
    """Test suite for sideband and reset rate conversions."""

    def test_sideband_rate_round_trip(self, params: SystemParams) -> None:
        """xi_for_rate inverts sideband_rate."""
        xi = xi_for_rate(DEFAULT_SIDEBAND_RATE, params)
        assert sideband_rate(xi, params) == pytest.approx(DEFAULT_SIDEBAND_RATE)

    def test_swap_time(self) -> None:
        """A pi-swap at 476 kHz takes about 1.05 us."""
        assert swap_time(DEFAULT_SIDEBAND_RATE) == pytest.approx(1.0 / (2.0 * 476e3))

    def test_negative_displacement(self, params: SystemParams) -> None:
        """Negative drive displacements are rejected."""
        with pytest.raises(UnphysicalInputError):
            sideband_rate(-0.1, params)

    def test_reset_target_decay_time(self, params: SystemParams) -> None:
        """The reset drive for a 1 ms target gives a 1 ms total decay time."""
        xi = reset_xi_for_decay_time(1e-3, params)
        _, kappa_driven = reset_rate(xi, params)
        assert 1.0 / (kappa_driven + 1.0 / params.T1_c) == pytest.approx(1e-3)

    def test_reset_target_longer_than_lifetime(self, params: SystemParams) -> None:
        """A target slower than free decay is impossible."""
        with pytest.raises(UnphysicalInputError, match="not shorter"):
            reset_xi_for_decay_time(2.0 * params.T1_c, params)

    def test_passive_wait(self, params: SystemParams) -> None:
        """Passive reset from 1024 photons to 1e-3 takes T1 ln(1.024e6)."""
        wait = passive_reset_wait(1024.0, 1e-3, params.T1_c)
        assert wait == pytest.approx(params.T1_c * math.log(1.024e6))
        assert wait == pytest.approx(0.354, rel=1e-2)

    def test_passive_wait_rejects_growth(self, params: SystemParams) -> None:
        """Final photon number above the initial one is rejected."""
        with pytest.raises(UnphysicalInputError):
            passive_reset_wait(1.0, 2.0, params.T1_c)


class TestEncodeDecode:
    """Test suite for the single-photon sideband encoding."""

    def test_noiseless_encode_of_f(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """|0,f> maps to -i|1,g>."""
        state = encode_qubit(0.0, 1.0, params, with_noise=False, space=encoding_space)
        target = encoded_target(encoding_space, 0.0, 1.0)
        assert target.fidelity(state) > 0.999

    def test_noiseless_encode_of_superposition(
        self, params: SystemParams, encoding_space: FockSpace
    ) -> None:
        """Superpositions keep their relative phase up to the -i factor."""
        a = b = 1.0 / math.sqrt(2.0)
        state = encode_qubit(a, b, params, with_noise=False, space=encoding_space)
        assert encoded_target(encoding_space, a, b).fidelity(state) > 0.999

    def test_noise_lowers_fidelity(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """Decoherence during the pulse costs a little fidelity."""
        target = encoded_target(encoding_space, 0.0, 1.0)
        clean = target.fidelity(
            encode_qubit(0.0, 1.0, params, with_noise=False, space=encoding_space)
        )
        noisy = target.fidelity(encode_qubit(0.0, 1.0, params, with_noise=True, space=encoding_space))
        assert noisy < clean
        assert noisy == pytest.approx(0.98, abs=0.01)

    def test_ladder_f_level_underestimates_fidelity(
        self, params: SystemParams, encoding_space: FockSpace
    ) -> None:
        """Ladder-only f rates dephase |f> too fast and miss the measured ~98%."""
        target = encoded_target(encoding_space, 0.0, 1.0)
        ladder = target.fidelity(
            encode_qubit(
                0.0, 1.0, params, with_noise=True, space=encoding_space, f_level="ladder"
            )
        )
        assert ladder == pytest.approx(0.934, abs=0.01)

    def test_decode_returns_to_f(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """Encode then decode puts the excitation back in the f level."""
        encoded = encode_qubit(0.0, 1.0, params, with_noise=False, space=encoding_space)
        decoded = decode_qubit(encoded, params, with_noise=False)
        f = basis_projector(encoding_space, "transmon", [0.0, 0.0, 1.0])
        assert decoded.expect_real(f) > 0.999

    def test_unnormalised_amplitudes(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """|a|^2 + |b|^2 must be 1."""
        with pytest.raises(UnphysicalInputError, match="is not 1"):
            encode_qubit(1.0, 1.0, params, space=encoding_space)

    def test_needs_f_level(self, params: SystemParams) -> None:
        """A two-level transmon cannot host the sideband."""
        with pytest.raises(UnphysicalInputError, match="f level"):
            sideband_pulse_spec(params, FockSpace.cavity_transmon(4, 2))

    def test_needs_transmon(self, params: SystemParams) -> None:
        """The sideband needs a transmon subsystem."""
        with pytest.raises(SubsystemError):
            sideband_pulse_spec(params, FockSpace((4,), ("cavity",)))

    def test_pulse_duration(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """The pulse lasts pi/Omega plus one ramp."""
        spec = sideband_pulse_spec(params, encoding_space, ramp=10e-9)
        assert spec.duration == pytest.approx(swap_time(DEFAULT_SIDEBAND_RATE) + 10e-9)

    def test_tolerances_threaded(self, params: SystemParams, encoding_space: FockSpace) -> None:
        """Integrator tolerances reach the evolution spec."""
        spec = sideband_pulse_spec(params, encoding_space, tolerances=(1e-6, 1e-8))
        assert spec.tolerances == (1e-6, 1e-8)


class TestReset:
    """Test suite for the driven cavity reset."""

    def test_reset_decay_time(self, params: SystemParams) -> None:
        """One photon decays to 1/e in the target decay time."""
        xi = reset_xi_for_decay_time(1e-3, params)
        result = simulate_reset(params, xi, [0.0, 1e-3, 2e-3])
        assert result.observable[0] == pytest.approx(1.0)
        assert result.observable[1] == pytest.approx(math.exp(-1.0), rel=0.05)
        assert result.observable[2] == pytest.approx(math.exp(-2.0), rel=0.1)
        assert result.derived["expected_decay_time_s"] == pytest.approx(1e-3)

    def test_no_drive_is_free_decay(self, params: SystemParams) -> None:
        """With xi = 0 the cavity decays at T1_c."""
        result = simulate_reset(params, 0.0, [params.T1_c])
        assert result.observable[0] == pytest.approx(math.exp(-1.0), rel=1e-6)

    def test_reset_metadata(self, params: SystemParams) -> None:
        """The result records the drive in Hz."""
        xi = reset_xi_for_decay_time(1e-3, params)
        result = simulate_reset(params, xi, np.linspace(0.0, 1e-3, 5).tolist())
        omega_cr, _ = reset_rate(xi, params)
        assert result.derived["omega_cr_over_2pi_hz"] == pytest.approx(omega_cr / TWO_PI)
        assert result.sweep_name == "time_s"
        assert len(result) == 5
