"""Sideband encode/decode of a single-photon qubit and cavity reset.

The four-wave-mixing sideband q²c† swaps |0,f⟩ ↔ |1,g⟩ at rate Ω/2 per
matrix element, so a π-swap takes π/Ω. The reset tone c r† hybridises the
cavity with the lossy readout resonator and adds a decay rate Ωcr²·T1_r.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection, Sequence

import numpy as np

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import ExperimentResult
from cavity_memory.services.dynamics import (
    DEFAULT_RAMP_S,
    DEFAULT_TOLERANCES,
    ConstantEnvelope,
    EvolutionSpec,
    FLevelModel,
    IdlePropagator,
    SquareEnvelope,
    build_drive,
    build_static_hamiltonian,
    collapse_channels,
    evolve,
    evolve_observable,
)
from cavity_memory.services.hilbert import (
    FockSpace,
    Operator,
    QuantumState,
    number,
    product_state,
)


logger = logging.getLogger(__name__)

# Sideband Rabi rate of the reference device
DEFAULT_SIDEBAND_RATE = TWO_PI * 476e3

NORMALISATION_TOL = 1e-9


# =============================================================================
# Rates
# =============================================================================


def sideband_rate(xi: float, params: SystemParams) -> float:
    """Ω = 2ξ√(K_q χ) for a driven transmon displacement ξ.

    Args:
        xi: Dimensionless driven displacement (≥ 0)
        params: Device parameters

    Returns:
        Sideband rate Ω (rad/s)
    """
    if xi < 0.0:
        raise UnphysicalInputError(f"Driven displacement must be >= 0, got {xi}")
    return 2.0 * xi * math.sqrt(params.K_q * params.chi)


def xi_for_rate(omega: float, params: SystemParams) -> float:
    """Displacement ξ needed for a sideband rate Ω (inverse of sideband_rate)."""
    if omega < 0.0:
        raise UnphysicalInputError(f"Sideband rate must be >= 0, got {omega}")
    return omega / (2.0 * math.sqrt(params.K_q * params.chi))


def swap_time(omega: float) -> float:
    """π-swap time π/Ω of the |0,f⟩ ↔ |1,g⟩ transition."""
    if omega <= 0.0:
        raise UnphysicalInputError("Sideband rate must be > 0")
    return math.pi / omega


def reset_rate(xi_cr: float, params: SystemParams) -> tuple[float, float]:
    """Beam-splitter rate Ωcr = 2ξcr²√(χqr χ) and induced decay Ωcr²·T1_r.

    Returns:
        (Ωcr in rad/s, κ_driven in 1/s)
    """
    if xi_cr < 0.0:
        raise UnphysicalInputError(f"Reset displacement must be >= 0, got {xi_cr}")
    omega_cr = 2.0 * xi_cr**2 * math.sqrt(params.chi_qr * params.chi)
    return omega_cr, omega_cr**2 * params.T1_r


def reset_xi_for_decay_time(decay_time: float, params: SystemParams) -> float:
    """ξcr giving a total cavity single-photon decay time ``decay_time``.

    Raises:
        UnphysicalInputError: If the target is not shorter than T1_c
    """
    kappa_driven = 1.0 / decay_time - 1.0 / params.T1_c
    if kappa_driven <= 0.0:
        raise UnphysicalInputError(
            f"Target decay time {decay_time} s is not shorter than T1_c = {params.T1_c} s"
        )
    omega_cr = math.sqrt(kappa_driven / params.T1_r)
    return math.sqrt(omega_cr / (2.0 * math.sqrt(params.chi_qr * params.chi)))


def passive_reset_wait(nbar_initial: float, nbar_final: float, T1_c: float) -> float:
    """Time T1_c·ln(n̄_i/n̄_f) for free decay from n̄_i to n̄_f photons."""
    if nbar_initial <= 0.0 or nbar_final <= 0.0:
        raise UnphysicalInputError("Photon numbers must be > 0")
    if nbar_final > nbar_initial:
        raise UnphysicalInputError("Final photon number exceeds the initial one")
    return T1_c * math.log(nbar_initial / nbar_final)


# =============================================================================
# Encode / decode
# =============================================================================


def encoding_space(cavity_dim: int = 4, transmon_dim: int = 3) -> FockSpace:
    return FockSpace.cavity_transmon(cavity_dim, transmon_dim)


def sideband_pulse_spec(
    params: SystemParams,
    space: FockSpace,
    omega: float = DEFAULT_SIDEBAND_RATE,
    with_noise: bool = True,
    ramp: float = DEFAULT_RAMP_S,
    f_level: FLevelModel = "measured",
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> EvolutionSpec:
    """Evolution spec of one sideband π-swap (duration π/Ω + ramp).

    Args:
        params: Device parameters
        space: Cavity ⊗ transmon space (transmon dim ≥ 3)
        omega: Sideband rate Ω (rad/s)
        with_noise: Include the collapse channels
        ramp: Cosine ramp length (s)
        f_level: Transmon f-level model
        tolerances: Integrator (rel, abs)
    """
    if space.dim("transmon") < 3:
        raise UnphysicalInputError("The sideband needs the transmon f level (dim >= 3)")
    duration = swap_time(omega) + ramp
    drive = build_drive("sideband_qq_c", params, SquareEnvelope(omega, duration, ramp))
    channels = collapse_channels(params, space, f_level=f_level) if with_noise else []
    return EvolutionSpec(
        hamiltonian=build_static_hamiltonian(params, space),
        drives=(drive,),
        collapse_ops=tuple(channels),
        t_span=(0.0, duration),
        tolerances=tolerances,
    )


def _transmon_superposition(space: FockSpace, a: complex, b: complex) -> QuantumState:
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > NORMALISATION_TOL:
        raise UnphysicalInputError(f"|a|^2 + |b|^2 = {abs(a)**2 + abs(b)**2:.12f} is not 1")
    transmon = np.zeros(space.dim("transmon"), dtype=complex)
    transmon[0] = a
    transmon[2] = b
    return product_state(space, {"transmon": transmon})


def encoded_target(space: FockSpace, a: complex, b: complex) -> QuantumState:
    """Noiseless encode result a|0,g⟩ − i·b|1,g⟩."""
    cavity = np.zeros(space.dim("cavity"), dtype=complex)
    cavity[0] = a
    cavity[1] = -1j * b
    return product_state(space, {"cavity": cavity})


def encode_qubit(
    a: complex,
    b: complex,
    params: SystemParams,
    with_noise: bool = True,
    omega: float = DEFAULT_SIDEBAND_RATE,
    space: FockSpace | None = None,
    f_level: FLevelModel = "measured",
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> QuantumState:
    """Map |0⟩(a|g⟩ + b|f⟩) to (a|0⟩ − i·b|1⟩)|g⟩ with one sideband π-swap.

    Args:
        a, b: Qubit amplitudes, |a|² + |b|² = 1
        params: Device parameters
        with_noise: Include decoherence during the pulse
        omega: Sideband rate (rad/s)
        space: Cavity ⊗ transmon space (default 4 × 3)
        f_level: Transmon f-level model
        tolerances: Integrator (rel, abs)

    Returns:
        Density matrix after the pulse
    """
    space = space or encoding_space()
    initial = _transmon_superposition(space, a, b)
    spec = sideband_pulse_spec(params, space, omega, with_noise, f_level=f_level, tolerances=tolerances)
    return evolve(initial, spec).state


def decode_qubit(
    state: QuantumState,
    params: SystemParams,
    with_noise: bool = True,
    omega: float = DEFAULT_SIDEBAND_RATE,
    f_level: FLevelModel = "measured",
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> QuantumState:
    """Map the cavity qubit back onto the transmon g/f levels."""
    spec = sideband_pulse_spec(
        params, state.space, omega, with_noise, f_level=f_level, tolerances=tolerances
    )
    return evolve(state, spec).state


def decode_measurement(
    projector: Operator,
    params: SystemParams,
    with_noise: bool = True,
    omega: float = DEFAULT_SIDEBAND_RATE,
    f_level: FLevelModel = "measured",
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> Operator:
    """Heisenberg-picture observable of "decode, then measure ``projector``"."""
    spec = sideband_pulse_spec(
        params, projector.space, omega, with_noise, f_level=f_level, tolerances=tolerances
    )
    return evolve_observable(projector, spec)


# =============================================================================
# Reset
# =============================================================================


def simulate_reset(
    params: SystemParams,
    xi_cr: float,
    durations: Sequence[float],
    initial_photons: int = 1,
    cavity_dim: int | None = None,
    readout_dim: int = 2,
    include: Collection[str] | None = None,
) -> ExperimentResult:
    """Mean cavity photon number under a constant reset tone.

    The cavity starts in Fock |initial_photons⟩ with the readout resonator
    empty; the tone is held on for the whole sweep.

    Returns:
        ExperimentResult of ⟨c†c⟩ versus time
    """
    dim = cavity_dim or initial_photons + 3
    space = FockSpace((dim, readout_dim), ("cavity", "readout"))
    omega_cr, kappa_driven = reset_rate(xi_cr, params)
    span = max(durations) if len(durations) else 0.0
    drive = build_drive("reset_c_r", params, ConstantEnvelope(omega_cr, max(span, 1.0)))
    propagator = IdlePropagator.build(
        build_static_hamiltonian(params, space),
        collapse_channels(params, space, include=include),
        (drive,),
    )
    cavity = np.zeros(dim, dtype=complex)
    cavity[initial_photons] = 1.0
    initial = product_state(space, {"cavity": cavity})
    n_c = number(space, "cavity")
    populations = [s.expect_real(n_c) for s in propagator.series(initial, durations)]
    logger.info(
        "Reset tone: Omega_cr/2pi=%.4g Hz, driven decay time %.4g s",
        omega_cr / TWO_PI,
        1.0 / (kappa_driven + 1.0 / params.T1_c),
    )
    return ExperimentResult(
        sweep_name="time_s",
        sweep_values=list(durations),
        observable=populations,
        observable_name="mean_photons",
        kind="value",
        metadata={"protocol": "reset", "xi_cr": xi_cr, "params": params.to_hz_dict()},
        derived={
            "omega_cr_over_2pi_hz": omega_cr / TWO_PI,
            "kappa_driven_per_s": kappa_driven,
            "expected_decay_time_s": 1.0 / (kappa_driven + 1.0 / params.T1_c),
        },
    )
