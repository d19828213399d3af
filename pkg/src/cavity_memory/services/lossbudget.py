"""Cavity photon-loss budget and ring-down conversions.

Every channel returns an angular rate κ (rad/s); :class:`LossChannel`
stores κ/2π in Hz for the report. Participation ratios, the geometry
factor, the seam admittance and the external coupling are inputs (they
come from electromagnetic simulation elsewhere).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from scipy.constants import hbar, k as k_B

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import LossBudget, LossChannel


logger = logging.getLogger(__name__)

MITIGATIONS = {
    "oxide": "Filling-factor reduction; chemical etching",
    "inverse_purcell": "Weak cavity-transmon coupling; high-coherence transmon",
    "seam": "Seam located in narrow waveguide; indium gasket",
    "bulk": "Minor protrusion of the chip into the cavity",
    "surface": "Minor protrusion of the chip into the cavity",
    "magnetic": "Two magnetic shields",
    "external": "RF ports undercoupled to cavity mode",
    "residual_resistance": "Upper bound from the measured quality factor",
}


@dataclass(frozen=True)
class CavityGeometry:
    """Geometry inputs of the loss budget.

    Attributes:
        omega_c: Cavity frequency (rad/s)
        filling_factor: Fraction of electric energy in the surface oxide
        geometry_factor: G (Ω)
        seam_admittance: y_seam (1/(Ω·m))
        p_bulk: Sapphire bulk participation
        p_MA, p_MS, p_SA: Interface participations (solved defaults,
            non-authoritative)
        kappa_ext: External coupling rate (rad/s)
    """

    omega_c: float = TWO_PI * 4.301e9
    filling_factor: float = 1.4e-8
    geometry_factor: float = 210.0
    seam_admittance: float = 3.3e-7
    p_bulk: float = 1.0e-4
    p_MA: float = 2.61e-10
    p_MS: float = 2.61e-10
    p_SA: float = 2.61e-10
    kappa_ext: float = TWO_PI * 0.096

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if value < 0.0:
                raise UnphysicalInputError(f"Geometry field {name} must be >= 0, got {value}")
        for name in ("filling_factor", "p_bulk", "p_MA", "p_MS", "p_SA"):
            if getattr(self, name) >= 1.0:
                raise UnphysicalInputError(f"{name} must be < 1")

    def replace(self, **changes: Any) -> CavityGeometry:
        return replace(self, **changes)


@dataclass(frozen=True)
class MaterialParams:
    """Material inputs of the loss budget.

    Attributes:
        tan_delta_ox, tan_delta_bulk: Oxide and sapphire loss tangents
        tan_delta_MA, tan_delta_MS, tan_delta_SA: Interface loss tangents
        g_seam: Seam conductance per unit length (1/(Ω·m))
        R_s_per_mG: Surface resistance per trapped milligauss (Ω)
        ambient_field_mG: Field before shielding (mG)
        shield_attenuations: Attenuation factor of each shield (≥ 1)
        R_res_bound: Optional residual surface resistance (Ω) added as a channel
        temperature: Cavity temperature (K)
    """

    tan_delta_ox: float = 1e-2
    tan_delta_bulk: float = 6e-8
    tan_delta_MA: float = 2.1e-2
    tan_delta_MS: float = 2.6e-3
    tan_delta_SA: float = 2.2e-3
    g_seam: float = 1e6
    R_s_per_mG: float = 2e-9
    ambient_field_mG: float = 500.0
    shield_attenuations: tuple[float, ...] = field(default=(1e2, 1e3))
    R_res_bound: float | None = None
    temperature: float = 10e-3

    def __post_init__(self) -> None:
        object.__setattr__(self, "shield_attenuations", tuple(self.shield_attenuations))
        for name in ("tan_delta_ox", "tan_delta_bulk", "tan_delta_MA", "tan_delta_MS", "tan_delta_SA"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise UnphysicalInputError(f"{name} must lie in (0, 1), got {value}")
        if any(a < 1.0 for a in self.shield_attenuations):
            raise UnphysicalInputError("Shield attenuations must be >= 1")
        if self.g_seam <= 0.0:
            raise UnphysicalInputError("g_seam must be > 0")
        if self.temperature <= 0.0:
            raise UnphysicalInputError("temperature must be > 0")
        if self.R_s_per_mG < 0.0 or self.ambient_field_mG < 0.0:
            raise UnphysicalInputError("Resistance and field inputs must be >= 0")

    def replace(self, **changes: Any) -> MaterialParams:
        return replace(self, **changes)


# =============================================================================
# Channels (rad/s)
# =============================================================================


def thermal_factor(omega: float, temperature: float) -> float:
    """tanh(ħω/2k_BT); 1 at T → 0 and ħω/2k_BT at high temperature."""
    if temperature <= 0.0:
        raise UnphysicalInputError("temperature must be > 0")
    return math.tanh(hbar * omega / (2.0 * k_B * temperature))


def oxide_loss(geom: CavityGeometry, mat: MaterialParams) -> float:
    """κ_ox = ω F tanδ_ox tanh(ħω/2k_BT)."""
    return (
        geom.omega_c
        * geom.filling_factor
        * mat.tan_delta_ox
        * thermal_factor(geom.omega_c, mat.temperature)
    )


def inverse_purcell(chi: float, K_q: float, T2E_q: float) -> float:
    """κ = (χ/K_q)/T2E, the loss inherited from the transmon (echo coherence)."""
    if T2E_q <= 0.0:
        raise UnphysicalInputError("T2E_q must be > 0")
    if K_q <= 0.0:
        raise UnphysicalInputError("K_q must be > 0")
    return chi / K_q / T2E_q


def seam_loss(geom: CavityGeometry, mat: MaterialParams) -> float:
    """κ = ω·y_seam/g_seam."""
    return geom.omega_c * geom.seam_admittance / mat.g_seam


def conductive_loss(geom: CavityGeometry, R_s: float) -> float:
    """κ = ω·R_s/G."""
    if geom.geometry_factor <= 0.0:
        raise UnphysicalInputError("Geometry factor must be > 0")
    if R_s < 0.0:
        raise UnphysicalInputError("Surface resistance must be >= 0")
    return geom.omega_c * R_s / geom.geometry_factor


def trapped_field(mat: MaterialParams) -> float:
    """Field left after every shield (mG)."""
    return mat.ambient_field_mG / math.prod(mat.shield_attenuations)


def magnetic_vortex_loss(geom: CavityGeometry, mat: MaterialParams) -> float:
    """Conductive loss from vortices trapped by the residual field."""
    return conductive_loss(geom, mat.R_s_per_mG * trapped_field(mat))


def residual_resistance_bound(geometry_factor: float, Q0: float) -> float:
    """Upper bound G/Q0 on the residual surface resistance (Ω)."""
    if Q0 <= 0.0:
        raise UnphysicalInputError("Q0 must be > 0")
    return geometry_factor / Q0


def dielectric_chip_losses(geom: CavityGeometry, mat: MaterialParams) -> tuple[float, float]:
    """(bulk, surface) = (ω p_bulk tanδ_bulk, ω Σ p_i tanδ_i) over MA, MS, SA."""
    bulk = geom.omega_c * geom.p_bulk * mat.tan_delta_bulk
    surface = geom.omega_c * math.fsum(
        (
            geom.p_MA * mat.tan_delta_MA,
            geom.p_MS * mat.tan_delta_MS,
            geom.p_SA * mat.tan_delta_SA,
        )
    )
    return bulk, surface


# =============================================================================
# Budget
# =============================================================================


def _channel(name: str, kappa: float) -> LossChannel:
    return LossChannel(name, kappa / TWO_PI, MITIGATIONS.get(name, ""))


def assemble_budget(
    geom: CavityGeometry,
    mat: MaterialParams,
    chip_params: SystemParams,
) -> LossBudget:
    """Evaluate every channel and collect them in table order.

    Args:
        geom: Geometry inputs
        mat: Material inputs
        chip_params: Device parameters (χ, K_q, T2E_q for inverse Purcell)

    Returns:
        LossBudget with rates over 2π in Hz
    """
    bulk, surface = dielectric_chip_losses(geom, mat)
    channels = [
        _channel("oxide", oxide_loss(geom, mat)),
        _channel("inverse_purcell", inverse_purcell(chip_params.chi, chip_params.K_q, chip_params.T2E_q)),
        _channel("seam", seam_loss(geom, mat)),
        _channel("bulk", bulk),
        _channel("surface", surface),
        _channel("magnetic", magnetic_vortex_loss(geom, mat)),
        _channel("external", geom.kappa_ext),
    ]
    if mat.R_res_bound is not None:
        channels.append(_channel("residual_resistance", conductive_loss(geom, mat.R_res_bound)))
    budget = LossBudget(channels)
    logger.info(
        "Loss budget: total %.4g Hz -> lifetime %.4g s",
        budget.total_kappa_over_2pi_hz,
        budget.total_lifetime_s,
    )
    return budget


def table_three_reference() -> LossBudget:
    """Published per-channel rates (Hz) for comparison."""
    published = {
        "oxide": 6.0e-1,
        "inverse_purcell": 5.7e-1,
        "seam": 7.5e-4,
        "bulk": 2.7e-2,
        "surface": 2.9e-2,
        "magnetic": 2.0e-4,
        "external": 9.6e-2,
    }
    return LossBudget([LossChannel(n, v, MITIGATIONS[n]) for n, v in published.items()])


def compare_to_reference(budget: LossBudget, reference: LossBudget | None = None) -> list[dict[str, Any]]:
    """Computed versus published rate per channel, with their ratio."""
    reference = reference or table_three_reference()
    rows = []
    for channel in budget.channels:
        try:
            published = reference.channel(channel.name).kappa_over_2pi_hz
        except KeyError:
            published = math.nan
        ratio = channel.kappa_over_2pi_hz / published if published else math.nan
        rows.append(
            {
                "name": channel.name,
                "computed_hz": channel.kappa_over_2pi_hz,
                "reference_hz": published,
                "ratio": ratio,
            }
        )
    return rows


def budget_to_rows(budget: LossBudget) -> list[dict[str, Any]]:
    """Table rows: channel, mitigation, κ/2π (Hz), lifetime (s), then the total."""
    rows = [c.to_dict() for c in budget.channels]
    rows.append(
        {
            "name": "total",
            "mitigation": "",
            "kappa_over_2pi_hz": budget.total_kappa_over_2pi_hz,
            "lifetime_s": budget.total_lifetime_s,
        }
    )
    return rows


# =============================================================================
# Ring-down
# =============================================================================


def quality_factor(omega: float, tau: float) -> float:
    """Q = ω·τ."""
    if omega <= 0.0 or tau <= 0.0:
        raise UnphysicalInputError("omega and tau must be > 0")
    return omega * tau


def decay_time(omega: float, Q: float) -> float:
    """τ = Q/ω."""
    if omega <= 0.0 or Q <= 0.0:
        raise UnphysicalInputError("omega and Q must be > 0")
    return Q / omega


@dataclass(frozen=True)
class RingdownReport:
    """Loaded, external and intrinsic figures of one ring-down."""

    tau_loaded: float
    Q_loaded: float
    tau_external: float
    Q_external: float
    tau_intrinsic: float
    Q_intrinsic: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def ringdown_conversions(
    omega: float,
    tau_loaded: float,
    Q_ext: float | None = None,
    tau_ext: float | None = None,
) -> RingdownReport:
    """Convert a loaded decay time into Q and split off the external coupling.

    1/τ_int = 1/τ_loaded − 1/τ_ext; without an external value τ_int = τ_loaded.

    Raises:
        UnphysicalInputError: If the external decay is faster than the loaded one
    """
    if Q_ext is not None and tau_ext is not None:
        raise UnphysicalInputError("Give either Q_ext or tau_ext, not both")
    q_loaded = quality_factor(omega, tau_loaded)
    if Q_ext is not None:
        tau_ext = decay_time(omega, Q_ext)
    if tau_ext is None or math.isinf(tau_ext):
        tau_ext = math.inf
        tau_int = tau_loaded
    else:
        if tau_ext <= 0.0:
            raise UnphysicalInputError("tau_ext must be > 0")
        internal_rate = 1.0 / tau_loaded - 1.0 / tau_ext
        if internal_rate <= 0.0:
            raise UnphysicalInputError(
                f"External decay ({tau_ext:.4g} s) is faster than the loaded ring-down "
                f"({tau_loaded:.4g} s)"
            )
        tau_int = 1.0 / internal_rate
    return RingdownReport(
        tau_loaded=tau_loaded,
        Q_loaded=q_loaded,
        tau_external=tau_ext,
        Q_external=math.inf if math.isinf(tau_ext) else omega * tau_ext,
        tau_intrinsic=tau_int,
        Q_intrinsic=omega * tau_int,
    )
