"""Cavity T1 and T2 experiments on the sideband-encoded single-photon qubit.

Each delay point needs the same encode and the same decode, so the encode
is integrated once, the idle is applied in closed form for every delay, and
the decode plus transmon projection is folded into one Heisenberg-picture
observable.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import ExperimentResult
from cavity_memory.services.analysis.fitting import fit_exp_cos, fit_exponential
from cavity_memory.services.dynamics import (
    DEFAULT_TOLERANCES,
    FLevelModel,
    IdlePropagator,
    build_static_hamiltonian,
    collapse_channels,
)
from cavity_memory.services.hilbert import (
    FockSpace,
    Operator,
    basis_projector,
    diagonal_operator,
)
from cavity_memory.services.protocols.sideband import (
    DEFAULT_SIDEBAND_RATE,
    decode_measurement,
    decode_qubit,
    encode_qubit,
    encoding_space,
)


logger = logging.getLogger(__name__)

DEFAULT_DELAYS = np.linspace(0.0, 100e-3, 201)
DEFAULT_FRINGE = TWO_PI * 50.0


def _delays(delays: Sequence[float] | None) -> np.ndarray:
    values = np.asarray(DEFAULT_DELAYS if delays is None else delays, dtype=float)
    if np.any(values < 0.0):
        raise UnphysicalInputError("Delays must be >= 0")
    return values


def _idle_propagator(params: SystemParams, space: FockSpace, f_level: FLevelModel) -> IdlePropagator:
    return IdlePropagator.build(
        build_static_hamiltonian(params, space),
        collapse_channels(params, space, f_level=f_level),
    )


def _transmon_f_projector(space: FockSpace) -> Operator:
    f = np.zeros(space.dim("transmon"), dtype=complex)
    f[2] = 1.0
    return basis_projector(space, "transmon", f)


def measure_T1_experiment(
    params: SystemParams,
    delays: Sequence[float] | None = None,
    cavity_dim: int = 4,
    transmon_dim: int = 3,
    omega: float = DEFAULT_SIDEBAND_RATE,
    f_level: FLevelModel = "measured",
    fit: bool = True,
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> ExperimentResult:
    """Encode |1⟩, idle, decode and report P(transmon in f) versus delay.

    Args:
        params: Device parameters
        delays: Idle times (s), default 201 points up to 100 ms
        cavity_dim: Cavity truncation
        transmon_dim: Transmon truncation (≥ 3)
        omega: Sideband rate (rad/s)
        f_level: Transmon f-level model
        fit: Fit an exponential and report T1 in ``derived``
        tolerances: Integrator (rel, abs) for the sideband pulses

    Returns:
        ExperimentResult of P(1) versus delay
    """
    times = _delays(delays)
    space = encoding_space(cavity_dim, transmon_dim)
    encoded = encode_qubit(
        0.0, 1.0, params, omega=omega, space=space, f_level=f_level, tolerances=tolerances
    )
    measurement = decode_measurement(
        _transmon_f_projector(space), params, omega=omega, f_level=f_level, tolerances=tolerances
    )
    states = _idle_propagator(params, space, f_level).series(encoded, times.tolist())
    populations = np.clip([s.expect_real(measurement) for s in states], 0.0, 1.0)

    derived: dict[str, float] = {}
    if fit:
        result = fit_exponential(times, populations)
        derived = {
            "T1_s": result.value("tau"),
            "T1_uncertainty_s": result.uncertainties["tau"],
            "amplitude": result.value("amplitude"),
            "offset": result.value("offset"),
        }
        logger.info("T1 experiment: fitted T1 = %.6g s", derived["T1_s"])
    return ExperimentResult(
        sweep_name="delay_s",
        sweep_values=times.tolist(),
        observable=populations.tolist(),
        observable_name="p_one",
        kind="probability",
        metadata={
            "protocol": "t1",
            "cavity_dim": cavity_dim,
            "transmon_dim": transmon_dim,
            "f_level": f_level,
            "params": params.to_hz_dict(),
        },
        derived=derived,
    )


def _measurement_axis(
    params: SystemParams,
    a: complex,
    b: complex,
    space: FockSpace,
    omega: float = DEFAULT_SIDEBAND_RATE,
) -> Operator:
    """Projector onto the transmon state a noiseless zero-delay encode/decode returns."""
    encoded = encode_qubit(a, b, params, with_noise=False, omega=omega, space=space)
    returned = decode_qubit(encoded, params, with_noise=False, omega=omega)
    evals, evecs = np.linalg.eigh(returned.ptrace(["transmon"]).density())
    return basis_projector(space, "transmon", evecs[:, int(np.argmax(evals))])


def measure_T2_experiment(
    params: SystemParams,
    delays: Sequence[float] | None = None,
    fringe_detuning: float = DEFAULT_FRINGE,
    cavity_dim: int = 4,
    transmon_dim: int = 3,
    omega: float = DEFAULT_SIDEBAND_RATE,
    f_level: FLevelModel = "measured",
    fit: bool = True,
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES,
) -> ExperimentResult:
    """Encode (|0⟩+|1⟩)/√2, idle, decode along the encode axis; Ramsey fringe.

    A virtual cavity phase e^{−iδt·c†c} with δ = ``fringe_detuning`` is
    applied before the decode so the fringe oscillates at δ/2π.

    Returns:
        ExperimentResult of P(axis) versus delay; ``derived`` holds T2 and
        the rate prediction 1/(1/2T1 + n̄th_q/T1_q)
    """
    times = _delays(delays)
    space = encoding_space(cavity_dim, transmon_dim)
    amplitude = 1.0 / math.sqrt(2.0)
    encoded = encode_qubit(
        amplitude, amplitude, params, omega=omega, space=space, f_level=f_level, tolerances=tolerances
    )
    axis = _measurement_axis(params, amplitude, amplitude, space, omega)
    measurement = decode_measurement(axis, params, omega=omega, f_level=f_level, tolerances=tolerances)
    states = _idle_propagator(params, space, f_level).series(encoded, times.tolist())
    levels = np.arange(cavity_dim)
    values = []
    for t, state in zip(times, states, strict=True):
        rotation = diagonal_operator(space, "cavity", np.exp(-1j * fringe_detuning * t * levels))
        values.append(state.apply(rotation).expect_real(measurement))
    signal = np.clip(values, 0.0, 1.0)

    rate = 0.5 / params.T1_c + params.heating_rate_q
    predicted = math.inf if rate == 0.0 else 1.0 / rate
    derived: dict[str, float] = {"T2_predicted_s": predicted}
    if fit:
        result = fit_exp_cos(times, signal)
        derived.update(
            T2_s=result.value("tau"),
            T2_uncertainty_s=result.uncertainties["tau"],
            fringe_hz=result.value("frequency"),
        )
        logger.info("T2 experiment: fitted T2 = %.6g s (predicted %.6g s)", derived["T2_s"], predicted)
    return ExperimentResult(
        sweep_name="delay_s",
        sweep_values=times.tolist(),
        observable=signal.tolist(),
        observable_name="p_axis",
        kind="probability",
        metadata={
            "protocol": "t2",
            "fringe_detuning_hz": fringe_detuning / TWO_PI,
            "cavity_dim": cavity_dim,
            "transmon_dim": transmon_dim,
            "f_level": f_level,
            "params": params.to_hz_dict(),
        },
        derived=derived,
    )
