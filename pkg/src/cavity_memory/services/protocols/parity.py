"""Photon-number parity measurement and its drive-frequency calibration.

Two modes are offered:

- ``ideal``: Kraus projectors (I ± P)/2 on the cavity
- ``simulated``: a transmon ancilla (g, e) runs π/2 – wait π/χ – π/2 under
  the dispersive Hamiltonian and the selected collapse channels; transmon e
  reports even parity, g reports odd

Both modes accept a :class:`ReadoutModel` that mixes the two conditional
states with the assignment fidelity F.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import ExperimentResult
from cavity_memory.services.analysis.fitting import fit_cosine
from cavity_memory.services.dynamics import (
    IdlePropagator,
    build_static_hamiltonian,
    collapse_channels,
)
from cavity_memory.services.hilbert import (
    FockSpace,
    QuantumState,
    coherent_state,
    local_operator,
    required_dim,
)


logger = logging.getLogger(__name__)

ParityMode = Literal["ideal", "simulated"]

EVEN = 1
ODD = -1

# exp(−iπ/4·σx) in the g–e manifold
HALF_PI_ROTATION = np.array([[1.0, -1.0j], [-1.0j, 1.0]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class ParityOutcome:
    """Result of one parity measurement.

    Attributes:
        outcome: +1 (even) or −1 (odd)
        probability: Probability of reporting this outcome
        post_state: Normalised cavity state after the measurement
    """

    outcome: int
    probability: float
    post_state: QuantumState

    def __post_init__(self) -> None:
        if self.outcome not in (EVEN, ODD):
            raise UnphysicalInputError(f"Parity outcome must be ±1, got {self.outcome}")
        if not -1e-9 <= self.probability <= 1.0 + 1e-9:
            raise UnphysicalInputError(f"Outcome probability {self.probability} outside [0, 1]")


@dataclass(frozen=True)
class ReadoutModel:
    """Classical assignment error: each outcome is reported correctly with probability F."""

    fidelity: float = 0.95

    def __post_init__(self) -> None:
        if not 0.5 <= self.fidelity <= 1.0:
            raise UnphysicalInputError(f"Readout fidelity must lie in [0.5, 1], got {self.fidelity}")

    @property
    def contrast(self) -> float:
        return 2.0 * self.fidelity - 1.0

    def mix(self, even: np.ndarray, odd: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        f = self.fidelity
        return f * even + (1.0 - f) * odd, f * odd + (1.0 - f) * even


PERFECT_READOUT = ReadoutModel(1.0)


# =============================================================================
# Conditional maps
# =============================================================================


def _cavity_only(state: QuantumState) -> QuantumState:
    if state.space.labels == ("cavity",):
        return state
    return state.ptrace(["cavity"])


def parity_wait_time(params: SystemParams) -> float:
    """Free-evolution time π/χ of the parity sequence."""
    if params.chi <= 0.0:
        raise UnphysicalInputError("Parity measurement needs chi > 0")
    return math.pi / params.chi


@lru_cache(maxsize=16)
def _ancilla_propagator(
    params: SystemParams, cavity_dim: int, channels: frozenset[str] | None
) -> IdlePropagator:
    space = FockSpace((cavity_dim, 2), ("cavity", "transmon"))
    noise = collapse_channels(params, space, include=channels) if channels != frozenset() else []
    return IdlePropagator.build(build_static_hamiltonian(params, space), noise)


def _ideal_branches(rho: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    signs = (-1.0) ** np.arange(dim)
    even_mask = signs > 0
    even = rho * np.outer(even_mask, even_mask)
    odd = rho * np.outer(~even_mask, ~even_mask)
    return even, odd


def _simulated_branches(
    rho: np.ndarray,
    dim: int,
    params: SystemParams,
    channels: frozenset[str] | None,
) -> tuple[np.ndarray, np.ndarray]:
    propagator = _ancilla_propagator(params, dim, channels)
    space = propagator.space
    ground = np.zeros((2, 2), dtype=complex)
    ground[0, 0] = 1.0
    joint = QuantumState(space, np.kron(rho, ground), pure=False)
    rotation = local_operator(space, "transmon", HALF_PI_ROTATION)
    joint = joint.apply(rotation)
    joint = propagator.evolve_state(joint, parity_wait_time(params))
    joint = joint.apply(rotation)
    blocks = joint.density().reshape(dim, 2, dim, 2)
    return blocks[:, 1, :, 1].copy(), blocks[:, 0, :, 0].copy()


def parity_channel(
    state: QuantumState,
    params: SystemParams,
    mode: ParityMode = "ideal",
    with_noise: bool = True,
    readout: ReadoutModel | None = None,
    include: Collection[str] | None = None,
) -> dict[int, QuantumState]:
    """Unnormalised cavity states conditioned on each reported outcome.

    Args:
        state: State with a cavity mode; other modes are traced out
        params: Device parameters
        mode: "ideal" (projectors) or "simulated" (ancilla sequence)
        with_noise: Simulated mode only; False disables every channel
        readout: Assignment-error model (None for perfect readout)
        include: Channel names to keep in simulated mode (None keeps all)

    Returns:
        {+1: ρ_even, −1: ρ_odd}; traces are the outcome probabilities
    """
    cavity = _cavity_only(state)
    dim = cavity.space.total_dim
    rho = cavity.density()
    if mode == "ideal":
        even, odd = _ideal_branches(rho, dim)
    elif mode == "simulated":
        if not with_noise:
            channels: frozenset[str] | None = frozenset()
        else:
            channels = None if include is None else frozenset(include)
        even, odd = _simulated_branches(rho, dim, params, channels)
    else:
        raise ValueError(f"Unknown parity mode '{mode}'")
    if readout is not None:
        even, odd = readout.mix(even, odd)
    return {
        EVEN: QuantumState(cavity.space, even, pure=False),
        ODD: QuantumState(cavity.space, odd, pure=False),
    }


def parity_expectation(
    state: QuantumState,
    params: SystemParams,
    mode: ParityMode = "ideal",
    with_noise: bool = True,
    readout: ReadoutModel | None = None,
    include: Collection[str] | None = None,
) -> float:
    """Reported mean parity p(+1) − p(−1)."""
    branches = parity_channel(state, params, mode, with_noise, readout, include)
    return branches[EVEN].trace() - branches[ODD].trace()


def parity_measure(
    state: QuantumState,
    params: SystemParams,
    mode: ParityMode = "ideal",
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
    with_noise: bool = True,
    readout: ReadoutModel | None = None,
    include: Collection[str] | None = None,
) -> ParityOutcome:
    """Measure cavity parity and return the reported outcome and post-state.

    The outcome is ``outcome`` if given (post-selection), otherwise sampled
    from ``rng``, otherwise the more probable one (even on a tie).

    Raises:
        UnphysicalInputError: If the post-selected outcome has probability 0
    """
    branches = parity_channel(state, params, mode, with_noise, readout, include)
    probabilities = {k: max(v.trace(), 0.0) for k, v in branches.items()}
    total = probabilities[EVEN] + probabilities[ODD]
    probabilities = {k: p / total for k, p in probabilities.items()}
    if outcome is None:
        if rng is not None:
            outcome = EVEN if rng.random() < probabilities[EVEN] else ODD
        else:
            outcome = EVEN if probabilities[EVEN] >= probabilities[ODD] else ODD
    elif outcome not in (EVEN, ODD):
        raise UnphysicalInputError(f"Parity outcome must be ±1, got {outcome}")
    if probabilities[outcome] <= 1e-12:
        raise UnphysicalInputError(f"Parity outcome {outcome:+d} has zero probability")
    post = branches[outcome].normalized()
    logger.debug("Parity %s: outcome %+d with p=%.6f", mode, outcome, probabilities[outcome])
    return ParityOutcome(outcome, min(probabilities[outcome], 1.0), post)


# =============================================================================
# Calibration
# =============================================================================


def _revival_excited_probability(sigma: np.ndarray, phase: float) -> float:
    """P_e after a virtual transmon phase and the closing π/2 pulse."""
    u = np.diag([1.0, np.exp(-1j * phase)])
    final = HALF_PI_ROTATION @ u @ sigma @ u.conj().T @ HALF_PI_ROTATION.conj().T
    return float(np.real(final[1, 1]))


def calibrate_parity_drive(
    params: SystemParams,
    alpha: complex,
    detuning_grid: Sequence[float],
    mode: ParityMode = "simulated",
    with_noise: bool = True,
    cavity_dim: int | None = None,
    fit: bool = True,
) -> ExperimentResult:
    """P_e versus transmon drive detuning after a revival wait 2T = 2π/χ.

    Every photon number picks up a phase 2πn during the wait, so P_e(Δω) =
    ½ + ½·cos(Δω·2T) for any cavity state; the optimum detuning is the
    fringe maximum nearest the mean shift n̄χ.

    Args:
        params: Device parameters
        alpha: Coherent amplitude in the cavity
        detuning_grid: Drive detunings Δω (rad/s)
        mode: "ideal" (closed form) or "simulated" (ancilla evolution)
        with_noise: Include collapse channels in simulated mode
        cavity_dim: Cavity truncation (default from the guard)
        fit: Fit a cosine to locate the fringe maximum

    Returns:
        ExperimentResult over Δω/2π (Hz) with the optimum in ``derived``
    """
    grid = np.asarray(detuning_grid, dtype=float)
    wait = 2.0 * parity_wait_time(params)
    nbar = abs(alpha) ** 2
    if mode == "ideal":
        p_excited = 0.5 + 0.5 * np.cos(grid * wait)
    elif mode == "simulated":
        dim = cavity_dim or required_dim(abs(alpha))
        cavity = coherent_state(FockSpace((dim,), ("cavity",)), "cavity", alpha)
        channels: frozenset[str] | None = None if with_noise else frozenset()
        propagator = _ancilla_propagator(params, dim, channels)
        space = propagator.space
        ground = np.zeros((2, 2), dtype=complex)
        ground[0, 0] = 1.0
        joint = QuantumState(space, np.kron(cavity.density(), ground), pure=False)
        joint = joint.apply(local_operator(space, "transmon", HALF_PI_ROTATION))
        joint = propagator.evolve_state(joint, wait)
        sigma = joint.ptrace(["transmon"]).density()
        p_excited = np.array([_revival_excited_probability(sigma, d * wait) for d in grid])
    else:
        raise ValueError(f"Unknown parity mode '{mode}'")

    hz = grid / TWO_PI
    derived: dict[str, float] = {"expected_shift_hz": nbar * params.chi / TWO_PI}
    target_hz = nbar * params.chi / TWO_PI
    if fit and hz.size >= 5:
        result = fit_cosine(hz, p_excited)
        period = result.value("period")
        phase = result.value("phase")
        k = round(target_hz / period + phase / TWO_PI)
        optimum_hz = (k - phase / TWO_PI) * period
        derived.update(
            period_hz=period,
            period_uncertainty_hz=result.uncertainties["period"],
            amplitude=result.value("amplitude"),
            offset=result.value("offset"),
        )
    else:
        period = params.chi / TWO_PI
        optimum_hz = round(target_hz / period) * period
    derived["optimal_detuning_hz"] = optimum_hz
    derived["optimal_detuning_rad_s"] = optimum_hz * TWO_PI
    logger.info("Parity drive optimum %.6g Hz (n̄χ/2π = %.6g Hz)", optimum_hz, target_hz)
    return ExperimentResult(
        sweep_name="detuning_over_2pi_hz",
        sweep_values=hz.tolist(),
        observable=np.clip(p_excited, 0.0, 1.0).tolist(),
        observable_name="p_excited",
        kind="probability",
        metadata={
            "protocol": "parity_calibration",
            "mode": mode,
            "alpha": [float(np.real(alpha)), float(np.imag(alpha))],
            "wait_s": wait,
            "params": params.to_hz_dict(),
        },
        derived=derived,
    )
