"""Closed-form models: thermal dephasing, coherence decomposition, cat decay, Kerr.

These evaluate at any photon number, including the large cats that are out
of reach for density-matrix simulation.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import CooldownRecord, DephasingBudget


logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-12


# =============================================================================
# Thermal dephasing
# =============================================================================


def thermal_dephasing_rate(chi: float, gamma_down_q: float, nth_q: float) -> float:
    """Cavity dephasing from thermal transmon jumps (rad/s).

    Γφ = (Γ↓/2)·Re[√((1 + iχ/Γ↓)² + 4iχ·n̄th/Γ↓) − 1], principal root.

    Args:
        chi: Dispersive shift (rad/s)
        gamma_down_q: Transmon decay rate Γ↓ (1/s)
        nth_q: Transmon thermal population

    Raises:
        UnphysicalInputError: On negative inputs or Γ↓ = 0
    """
    if chi < 0.0 or nth_q < 0.0:
        raise UnphysicalInputError("chi and nth_q must be >= 0")
    if gamma_down_q <= 0.0:
        raise UnphysicalInputError("gamma_down_q must be > 0")
    ratio = chi / gamma_down_q
    root = cmath.sqrt((1.0 + 1j * ratio) ** 2 + 4j * ratio * nth_q)
    return 0.5 * gamma_down_q * (root - 1.0).real


def predicted_T2(T1_c: float, chi: float, gamma_down_q: float, nth_q: float) -> float:
    """1 / (1/(2T1_c) + Γφ_thermal)."""
    return 1.0 / (0.5 / T1_c + thermal_dephasing_rate(chi, gamma_down_q, nth_q))


# Measured rows: (name, n̄th_q, T2_c, T1_c, Γ↓/2π Hz, χ/2π Hz)
COOLDOWNS: tuple[tuple[str, float, float, float, float, float], ...] = (
    ("Cooldown I", 7.2e-2, 1.2e-3, 25.7e-3, 1.88e3, 197.0e3),
    ("Cooldown II", 2.9e-2, 1.2e-3, 22.3e-3, 3.75e3, 36.1e3),
    ("Cooldown III", 1.0e-3, 34.0e-3, 25.6e-3, 1.45e3, 42.0e3),
)


def cooldown_table() -> list[CooldownRecord]:
    """The three cooldown rows with their predicted cavity T2."""
    records = []
    for name, nth, t2, t1, gamma_hz, chi_hz in COOLDOWNS:
        predicted = predicted_T2(t1, TWO_PI * chi_hz, TWO_PI * gamma_hz, nth)
        records.append(CooldownRecord(name, nth, t2, t1, gamma_hz, chi_hz, predicted))
        logger.debug("%s: predicted T2 %.4g s, measured %.4g s", name, predicted, t2)
    return records


# =============================================================================
# Coherence decomposition
# =============================================================================


def t2_decomposition(
    T1_c: float,
    T2_c: float,
    T_up_q: float,
    sigma_T1: float = 0.0,
    sigma_T2: float = 0.0,
    sigma_T_up: float = 0.0,
) -> DephasingBudget:
    """Split 1/T2 into 1/(2T1) + 1/T↑ + 1/Tφ.

    The residual 1/Tφ is clamped to 0 when it is negative but within its
    propagated 1σ uncertainty; in that case, and whenever the residual is
    not resolved from zero, a lower bound 1/(max(r, 0) + σ_r) on Tφ is
    reported.

    Args:
        T1_c, T2_c: Cavity lifetime and coherence time (s)
        T_up_q: Mean time between transmon heating events (s), inf allowed
        sigma_T1, sigma_T2, sigma_T_up: 1σ uncertainties (s)

    Raises:
        UnphysicalInputError: On non-positive inputs or a residual below
            zero beyond its uncertainty
    """
    for name, value in (("T1_c", T1_c), ("T2_c", T2_c), ("T_up_q", T_up_q)):
        if not value > 0.0:
            raise UnphysicalInputError(f"{name} must be > 0, got {value}")
    lifetime_rate = 0.5 / T1_c
    heating = 0.0 if math.isinf(T_up_q) else 1.0 / T_up_q
    residual = 1.0 / T2_c - lifetime_rate - heating
    sigma = math.sqrt(
        (sigma_T2 / T2_c**2) ** 2
        + (sigma_T1 / (2.0 * T1_c**2)) ** 2
        + (0.0 if math.isinf(T_up_q) else sigma_T_up / T_up_q**2) ** 2
    )
    if residual < -(sigma + RESIDUAL_TOLERANCE / T2_c):
        raise UnphysicalInputError(
            f"1/T2 = {1 / T2_c:.6g}/s is below 1/(2T1) + 1/T_up = "
            f"{lifetime_rate + heating:.6g}/s beyond the uncertainty {sigma:.3g}/s"
        )
    clamped = max(residual, 0.0)
    bound = None
    if sigma > 0.0 and residual <= sigma:
        bound = 1.0 / (clamped + sigma)
    total = lifetime_rate + heating + clamped
    return DephasingBudget(
        one_over_2T1=lifetime_rate,
        heating_rate=heating,
        residual_rate=clamped,
        predicted_T2=math.inf if total == 0.0 else 1.0 / total,
        residual_lower_bound_s=bound,
    )


# =============================================================================
# Cat states
# =============================================================================


def cat_parity_vs_time(
    nbar: float, parity_sign: int, T1_c: float, dt: float | np.ndarray
) -> float | np.ndarray:
    """Wigner value at the origin of a decaying cat.

    W±(0, Δt) = 4/(π(1 ± e^{−2n̄}))·{exp[−2n̄e^{−Δt/T1}] ± exp[−2n̄(1 − e^{−Δt/T1})]}

    Raises:
        UnphysicalInputError: On negative n̄ or Δt, or an odd cat with n̄ = 0
    """
    if parity_sign not in (1, -1):
        raise UnphysicalInputError(f"Parity sign must be ±1, got {parity_sign}")
    if nbar < 0.0:
        raise UnphysicalInputError("nbar must be >= 0")
    if parity_sign == -1 and nbar == 0.0:
        raise UnphysicalInputError("Odd cat with nbar=0 does not exist")
    t = np.asarray(dt, dtype=float)
    if np.any(t < 0.0):
        raise UnphysicalInputError("dt must be >= 0")
    decay = np.exp(-t / T1_c)
    prefactor = 4.0 / (math.pi * (1.0 + parity_sign * math.exp(-2.0 * nbar)))
    value = prefactor * (
        np.exp(-2.0 * nbar * decay) + parity_sign * np.exp(-2.0 * nbar * (1.0 - decay))
    )
    return float(value) if np.ndim(value) == 0 else value


def cat_parity_limit(
    nbar: float, parity_sign: int, T1_c: float, dt: float | np.ndarray
) -> float | np.ndarray:
    """Short-time, large-cat limit ±(4/π)·e^{−2n̄Δt/T1}."""
    value = parity_sign * 4.0 / math.pi * np.exp(-2.0 * nbar * np.asarray(dt, dtype=float) / T1_c)
    return float(value) if np.ndim(value) == 0 else value


def cat_cut_model(y: float | np.ndarray, alpha: complex, parity: int = 1) -> float | np.ndarray:
    """Ideal cat Wigner values along β = i·y in the [−1, 1] convention.

    W(β) = N²[e^{−2|β−α|²} + e^{−2|β+α|²} ± 2e^{−2|β|²}·cos(4·Im(βα*))],
    N² = 1/(2(1 ± e^{−2|α|²})).
    """
    if parity not in (1, -1):
        raise UnphysicalInputError(f"Cat parity must be ±1, got {parity}")
    if parity == -1 and alpha == 0:
        raise UnphysicalInputError("Odd cat with alpha=0 does not exist")
    beta = 1j * np.asarray(y, dtype=float)
    norm = 1.0 / (2.0 * (1.0 + parity * math.exp(-2.0 * abs(alpha) ** 2)))
    value = norm * (
        np.exp(-2.0 * np.abs(beta - alpha) ** 2)
        + np.exp(-2.0 * np.abs(beta + alpha) ** 2)
        + parity * 2.0 * np.exp(-2.0 * np.abs(beta) ** 2) * np.cos(4.0 * np.imag(beta * np.conj(alpha)))
    )
    return float(value) if np.ndim(value) == 0 else value


# =============================================================================
# Kerr and dispersive limits
# =============================================================================


@dataclass(frozen=True)
class KerrEstimates:
    """Kerr figures of merit (rates in rad/s, times in s).

    Attributes:
        K_c_estimate: χ²/(4K_q)
        T_collapse: π/(2√n̄·K_c) with the device K_c
        n_crit: K_q/(6χ)
        T_gate_min: 1/(√n_crit·χ)
        parity_time_over_collapse: (π/χ)/T_collapse
    """

    K_c_estimate: float
    T_collapse: float
    n_crit: float
    T_gate_min: float
    parity_time_over_collapse: float

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["K_c_estimate_over_2pi_hz"] = self.K_c_estimate / TWO_PI
        return data


def kerr_estimates(params: SystemParams, nbar: float) -> KerrEstimates:
    """Self-Kerr estimate, phase-collapse time, critical photon number, minimum gate time.

    Raises:
        UnphysicalInputError: For negative n̄ or vanishing χ / K_q
    """
    if nbar < 0.0:
        raise UnphysicalInputError("nbar must be >= 0")
    if params.chi <= 0.0 or params.K_q <= 0.0:
        raise UnphysicalInputError("kerr_estimates needs chi > 0 and K_q > 0")
    k_c_estimate = params.chi**2 / (4.0 * params.K_q)
    if nbar == 0.0 or params.K_c == 0.0:
        collapse = math.inf
    else:
        collapse = math.pi / (2.0 * math.sqrt(nbar) * params.K_c)
    n_crit = params.K_q / (6.0 * params.chi)
    gate = 1.0 / (math.sqrt(n_crit) * params.chi)
    parity_time = math.pi / params.chi
    return KerrEstimates(
        K_c_estimate=k_c_estimate,
        T_collapse=collapse,
        n_crit=n_crit,
        T_gate_min=gate,
        parity_time_over_collapse=parity_time / collapse,
    )


# =============================================================================
# Device report
# =============================================================================


def system_table(params: SystemParams) -> list[dict[str, Any]]:
    """Device parameters in Hz and seconds plus derived rates, one row per quantity."""
    units = {name: "Hz" for name in ("omega_c", "omega_q", "omega_r", "K_c", "K_q", "K_r")}
    units.update(chi="Hz", chi_qr="Hz", chi_cr="Hz")
    rows: list[dict[str, Any]] = []
    for name, value in params.to_hz_dict().items():
        if value is None:
            continue
        unit = units.get(name, "" if name.startswith("nth") else "s")
        key = f"{name}_over_2pi" if unit == "Hz" else name
        rows.append({"quantity": key, "value": float(value), "unit": unit})

    def derived(name: str, value: float, unit: str = "s") -> None:
        rows.append({"quantity": name, "value": value, "unit": unit})

    gamma_q = params.transmon_dephasing_rate
    gamma_c = params.cavity_dephasing_rate
    derived("transmon_pure_dephasing_time", math.inf if gamma_q == 0.0 else 1.0 / gamma_q)
    derived("cavity_pure_dephasing_time", math.inf if gamma_c == 0.0 else 1.0 / gamma_c)
    heating = params.heating_rate_q
    derived("transmon_heating_time", math.inf if heating == 0.0 else 1.0 / heating)
    if params.chi > 0.0:
        derived("inverse_purcell_lifetime", params.K_q / params.chi * params.T2E_q)
    return rows
