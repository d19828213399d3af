"""Cat-state preparation, Wigner cuts, cat decoherence and the SPAM budget.

A cat is prepared by displacing the vacuum to |α⟩ and measuring parity;
the post-state is N(|α⟩ ± |−α⟩) with size S = |2α|². Its phase-space
interference decays at T_d⁻¹ = S/(2T1_c), which the scaling sweep checks
at cat sizes small enough for full density-matrix simulation.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import SystemParams
from cavity_memory.models.results import ExperimentResult, SpamBudget
from cavity_memory.services.analysis.fitting import fit_exponential, fit_linear_through_origin
from cavity_memory.services.dynamics import (
    IdlePropagator,
    build_static_hamiltonian,
    collapse_channels,
)
from cavity_memory.services.hilbert import (
    FockSpace,
    QuantumState,
    cat_state,
    check_truncation,
    coherent_state,
    displacement,
    required_dim,
    wigner,
)
from cavity_memory.services.protocols.parity import (
    EVEN,
    ODD,
    ParityMode,
    ParityOutcome,
    ReadoutModel,
    parity_expectation,
    parity_measure,
)
from cavity_memory.services.sweep import parallel_map


logger = logging.getLogger(__name__)

DEFAULT_CUT = np.linspace(-1.5, 1.5, 301)
DEFAULT_DECAY_POINTS = 41
DEFAULT_SCALING_SIZES = (4.0, 16.0, 36.0, 64.0)
EXTRAPOLATION_SIZE = 1024.0


def cat_size(alpha: complex) -> float:
    """S = |2α|²."""
    return 4.0 * abs(alpha) ** 2


def alpha_for_size(size: float) -> float:
    """Real amplitude √S/2 of a cat of size S."""
    if size < 0.0:
        raise UnphysicalInputError(f"Cat size must be >= 0, got {size}")
    return math.sqrt(size) / 2.0


def cavity_space(alpha: complex, cavity_dim: int | None = None) -> FockSpace:
    """Cavity-only space sized by the truncation guard for |α|."""
    dim = cavity_dim or required_dim(abs(alpha))
    check_truncation(abs(alpha), dim)
    return FockSpace((dim,), ("cavity",))


# =============================================================================
# Preparation and tomography
# =============================================================================


def prepare_cat(
    alpha: complex,
    params: SystemParams,
    mode: ParityMode = "ideal",
    parity: int | None = EVEN,
    rng: np.random.Generator | None = None,
    cavity_dim: int | None = None,
    with_noise: bool = True,
    readout: ReadoutModel | None = None,
) -> ParityOutcome:
    """Displace the vacuum to |α⟩ and measure parity.

    Args:
        alpha: Coherent amplitude
        params: Device parameters
        mode: Parity measurement mode
        parity: Post-selected outcome (+1 even, −1 odd); None samples or
            takes the likelier outcome
        rng: Random generator used when ``parity`` is None
        cavity_dim: Cavity truncation (default from the guard)
        with_noise: Noise in simulated mode
        readout: Assignment-error model

    Returns:
        ParityOutcome whose post_state is the prepared cat
    """
    space = cavity_space(alpha, cavity_dim)
    coherent = coherent_state(space, "cavity", alpha)
    return parity_measure(
        coherent,
        params,
        mode=mode,
        outcome=parity,
        rng=rng,
        with_noise=with_noise,
        readout=readout,
    )


def wigner_cut_experiment(
    state: QuantumState,
    params: SystemParams,
    axis_points: Sequence[float] | None = None,
    mode: ParityMode = "ideal",
    with_noise: bool = True,
    readout: ReadoutModel | None = None,
    threads: int | None = None,
) -> ExperimentResult:
    """Displaced parity along the imaginary axis, unit normalisation (range [−1, 1]).

    Args:
        state: State with a cavity mode
        params: Device parameters
        axis_points: Im β values (default 301 points on [−1.5, 1.5])
        mode: "ideal" evaluates Tr[ρ D P D†]; "simulated" displaces by −β
            and runs the ancilla parity sequence
        with_noise: Noise in simulated mode
        readout: Assignment-error model (simulated mode)
        threads: Worker count for the simulated sweep

    Returns:
        ExperimentResult of W versus Im β

    Raises:
        TruncationError: If max|β| + √n̄ exceeds the cavity truncation
    """
    points = np.asarray(DEFAULT_CUT if axis_points is None else axis_points, dtype=float)
    cavity = state if state.space.labels == ("cavity",) else state.ptrace(["cavity"])
    dim = cavity.space.total_dim
    nbar = float(np.real(np.sum(np.arange(dim) * np.diag(cavity.density()))))
    reach = float(np.max(np.abs(points))) + math.sqrt(max(nbar, 0.0)) if points.size else 0.0
    check_truncation(reach, dim)

    if mode == "ideal":
        values = wigner(cavity, "cavity", 1j * points, convention="unit")
        if readout is not None:
            values = readout.contrast * values
    elif mode == "simulated":

        def measure(y: float) -> float:
            shifted = cavity.apply(displacement(cavity.space, "cavity", -1j * y))
            return parity_expectation(shifted, params, "simulated", with_noise, readout)

        values = np.array(parallel_map(measure, points.tolist(), threads))
    else:
        raise ValueError(f"Unknown parity mode '{mode}'")

    return ExperimentResult(
        sweep_name="im_beta",
        sweep_values=points.tolist(),
        observable=np.clip(values, -1.0, 1.0).tolist(),
        observable_name="wigner",
        kind="parity",
        metadata={"protocol": "wigner_cut", "mode": mode, "nbar": nbar, "cavity_dim": dim},
    )


# =============================================================================
# Cat decoherence
# =============================================================================


def default_decay_window(size: float, T1_c: float) -> float:
    """Short-time window min(2·(2T1/S), T1/20) over which the decay is fitted."""
    if size <= 0.0:
        return T1_c / 20.0
    return min(2.0 * (2.0 * T1_c / size), T1_c / 20.0)


def fringe_visibility(parity_even: np.ndarray, parity_odd: np.ndarray, nbar: float) -> np.ndarray:
    """Interference visibility [(1+e^{−2n̄})P_even − (1−e^{−2n̄})P_odd]/2."""
    overlap = math.exp(-2.0 * nbar)
    return 0.5 * ((1.0 + overlap) * parity_even - (1.0 - overlap) * parity_odd)


def cat_decoherence_experiment(
    alpha: complex,
    params: SystemParams,
    delays: Sequence[float] | None = None,
    mode: ParityMode = "ideal",
    cavity_dim: int | None = None,
    fit: bool = True,
) -> ExperimentResult:
    """Parity at the origin of decaying even and odd cats versus delay.

    The even and odd cats idle under cavity loss; the combination
    :func:`fringe_visibility` isolates the interference term, which decays
    as e^{−2n̄(1−e^{−t/T1})} ≈ e^{−t/T_d}. A pure exponential fitted over
    the short-time window gives T_d.

    Returns:
        ExperimentResult of visibility versus delay; ``derived`` holds the
        fitted and model T_d
    """
    size = cat_size(alpha)
    nbar = abs(alpha) ** 2
    span = default_decay_window(size, params.T1_c)
    times = np.asarray(
        np.linspace(0.0, span, DEFAULT_DECAY_POINTS) if delays is None else delays, dtype=float
    )
    if np.any(times < 0.0):
        raise UnphysicalInputError("Delays must be >= 0")
    model_td = math.inf if size == 0.0 else 2.0 * params.T1_c / size
    derived: dict[str, float] = {"cat_size": size, "T_d_model_s": model_td}

    if alpha == 0:
        visibility = np.ones_like(times)
        even = np.ones_like(times)
        odd = np.ones_like(times)
        derived["T_d_s"] = math.inf
    else:
        space = cavity_space(alpha, cavity_dim)
        propagator = IdlePropagator.build(
            build_static_hamiltonian(params, space), collapse_channels(params, space)
        )
        branches = {}
        for parity in (EVEN, ODD):
            states = propagator.series(cat_state(space, "cavity", alpha, parity), times.tolist())
            branches[parity] = np.array([parity_expectation(s, params, mode) for s in states])
        even, odd = branches[EVEN], branches[ODD]
        visibility = fringe_visibility(even, odd, nbar)
        if fit:
            result = fit_exponential(times, visibility, baseline=False)
            derived["T_d_s"] = result.value("tau")
            derived["T_d_uncertainty_s"] = result.uncertainties["tau"]
            logger.info(
                "Cat S=%.4g: T_d=%.4g s (model %.4g s)", size, derived["T_d_s"], model_td
            )

    return ExperimentResult(
        sweep_name="delay_s",
        sweep_values=times.tolist(),
        observable=visibility.tolist(),
        observable_name="visibility",
        kind="value",
        metadata={
            "protocol": "cat_decoherence",
            "mode": mode,
            "alpha": [float(np.real(alpha)), float(np.imag(alpha))],
            "params": params.to_hz_dict(),
        },
        columns={"parity_even": list(even), "parity_odd": list(odd)},
        derived=derived,
    )


def cat_decoherence_scaling(
    sizes: Sequence[float] = DEFAULT_SCALING_SIZES,
    params: SystemParams | None = None,
    mode: ParityMode = "ideal",
    threads: int | None = None,
    extrapolate_to: float = EXTRAPOLATION_SIZE,
) -> ExperimentResult:
    """T_d⁻¹ versus cat size, fitted to a line through the origin.

    Each size runs :func:`cat_decoherence_experiment` in the worker pool.
    The fitted slope is compared with 1/(2T1_c) and extrapolated to
    ``extrapolate_to``.

    Returns:
        ExperimentResult of T_d⁻¹ (1/s) versus S with the linear-law overlay
    """
    params = params or SystemParams.table_one()
    if any(s <= 0.0 for s in sizes):
        raise UnphysicalInputError("Cat sizes must be > 0")

    def run(size: float) -> float:
        result = cat_decoherence_experiment(alpha_for_size(size), params, mode=mode)
        return 1.0 / float(result.derived["T_d_s"])

    inverse = np.array(parallel_map(run, list(sizes), threads))
    fit = fit_linear_through_origin(list(sizes), inverse)
    slope = fit.value("slope")
    model_slope = 1.0 / (2.0 * params.T1_c)
    overlay = [model_slope * s for s in sizes]
    logger.info("T_d^-1 slope %.5g /s per photon (model %.5g)", slope, model_slope)
    return ExperimentResult(
        sweep_name="cat_size",
        sweep_values=list(sizes),
        observable=inverse.tolist(),
        observable_name="inverse_T_d_per_s",
        kind="value",
        metadata={"protocol": "cat_decoherence_scaling", "mode": mode, "params": params.to_hz_dict()},
        columns={"model_inverse_T_d_per_s": overlay},
        derived={
            "slope_per_s": slope,
            "slope_uncertainty_per_s": fit.uncertainties["slope"],
            "model_slope_per_s": model_slope,
            "extrapolated_size": extrapolate_to,
            "T_d_extrapolated_s": 1.0 / (slope * extrapolate_to),
            "T_d_model_extrapolated_s": 1.0 / (model_slope * extrapolate_to),
        },
    )


# =============================================================================
# SPAM budget
# =============================================================================


@dataclass(frozen=True)
class SpamConfiguration:
    """Noise toggles for one row of the SPAM budget.

    Attributes:
        channels: Collapse channels kept during both parity measurements;
            an empty set disables noise, None keeps every channel
        readout: Apply the assignment-error model
    """

    channels: frozenset[str] | None
    readout: bool = False


SPAM_CONFIGURATIONS: dict[str, SpamConfiguration] = {
    "all_off": SpamConfiguration(frozenset()),
    "transmon_decay": SpamConfiguration(frozenset({"transmon_decay"})),
    "transmon_dephasing": SpamConfiguration(frozenset({"transmon_dephasing"})),
    "cavity_loss": SpamConfiguration(frozenset({"cavity_decay", "cavity_heating"})),
    "readout_error": SpamConfiguration(frozenset(), readout=True),
    "all_on": SpamConfiguration(None, readout=True),
}


def _prep_and_measure(
    coherent: QuantumState,
    params: SystemParams,
    config: SpamConfiguration,
    readout: ReadoutModel,
    parity: int,
) -> float:
    noisy = config.channels != frozenset()
    model = readout if config.readout else None
    prepared = parity_measure(
        coherent,
        params,
        mode="simulated",
        outcome=parity,
        with_noise=noisy,
        readout=model,
        include=config.channels,
    )
    return parity_expectation(
        prepared.post_state,
        params,
        mode="simulated",
        with_noise=noisy,
        readout=model,
        include=config.channels,
    )


def spam_error_budget(
    alpha: complex,
    params: SystemParams,
    configurations: Mapping[str, SpamConfiguration] | None = None,
    readout_fidelity: float = 0.95,
    cavity_dim: int | None = None,
    threads: int | None = None,
) -> SpamBudget:
    """Fringe visibility under selectively enabled noise channels.

    For each configuration an even and an odd cat are prepared from |α⟩ by
    the simulated parity measurement and their origin parity is measured
    with the same noisy sequence; the visibility is
    (⟨P⟩_even-prep − ⟨P⟩_odd-prep)/2.

    Raises:
        UnphysicalInputError: For α = 0 (no odd cat exists)
    """
    if alpha == 0:
        raise UnphysicalInputError("SPAM budget needs alpha != 0")
    configurations = configurations or SPAM_CONFIGURATIONS
    readout = ReadoutModel(readout_fidelity)
    coherent = coherent_state(cavity_space(alpha, cavity_dim), "cavity", alpha)

    def visibility(name: str) -> float:
        config = configurations[name]
        even = _prep_and_measure(coherent, params, config, readout, EVEN)
        odd = _prep_and_measure(coherent, params, config, readout, ODD)
        return 0.5 * (even - odd)

    names = list(configurations)
    values = parallel_map(visibility, names, threads)
    budget = SpamBudget(nbar=abs(alpha) ** 2, visibilities=dict(zip(names, values, strict=True)))
    logger.info(
        "SPAM budget n̄=%.3g: %s",
        budget.nbar,
        ", ".join(f"{k}={v:.4f}" for k, v in budget.visibilities.items()),
    )
    return budget
