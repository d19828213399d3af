"""Pydantic models for run configuration and environment settings.

Run documents (JSON or YAML) carry explicit units in every field name:
frequencies are given over 2π in Hz (``chi_over_2pi_hz``), times in seconds
(``T1_c_s``). Conversion to the angular units used by the services happens
in the ``to_*`` methods only.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from cavity_memory.exceptions import CavityMemoryError, ConfigValidationError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.services.lossbudget import CavityGeometry, MaterialParams


logger = logging.getLogger(__name__)


class _Document(BaseModel):
    """Base for every block of a run document (unknown keys are errors)."""

    model_config = ConfigDict(extra="forbid", frozen=True)


# =============================================================================
# Device and loss-budget inputs
# =============================================================================


class DeviceConfig(_Document):
    """Device parameters as tabulated (frequencies over 2π in Hz).

    Defaults are the measured reference device with the cavity thermal
    population set to 0 (only an upper bound is known).
    """

    omega_c_over_2pi_hz: float = Field(4.301e9, gt=0, description="Cavity frequency")
    omega_q_over_2pi_hz: float = Field(3.099e9, gt=0, description="Transmon frequency")
    omega_r_over_2pi_hz: float = Field(7.889e9, gt=0, description="Readout frequency")
    K_c_over_2pi_hz: float = Field(3.6, ge=0, description="Cavity self-Kerr")
    K_q_over_2pi_hz: float = Field(146e6, ge=0, description="Transmon anharmonicity")
    K_r_over_2pi_hz: float = Field(2.3e3, ge=0, description="Readout self-Kerr")
    chi_over_2pi_hz: float = Field(42e3, ge=0, description="Cavity-transmon dispersive shift")
    chi_qr_over_2pi_hz: float = Field(1.3e6, ge=0, description="Transmon-readout dispersive shift")
    chi_cr_over_2pi_hz: float = Field(0.2e3, ge=0, description="Cavity-readout dispersive shift")
    T1_c_s: float = Field(25.6e-3, gt=0, description="Cavity lifetime")
    T2_c_s: float = Field(34e-3, gt=0, description="Cavity coherence time")
    T1_q_s: float = Field(110e-6, gt=0, description="Transmon lifetime")
    T2_q_s: float = Field(16e-6, gt=0, description="Transmon Ramsey time")
    T2E_q_s: float = Field(80e-6, gt=0, description="Transmon echo time")
    T1_r_s: float = Field(0.38e-6, gt=0, description="Readout lifetime")
    nth_c: float = Field(0.0, ge=0, lt=1, description="Cavity thermal population")
    nth_q: float = Field(1.2e-3, ge=0, lt=1, description="Transmon thermal population")
    T1_f_s: float | None = Field(50e-6, gt=0, description="Transmon f-level lifetime")
    T2_gf_s: float | None = Field(45e-6, gt=0, description="g-f coherence time")

    @model_validator(mode="after")
    def check_physical(self) -> DeviceConfig:
        try:
            self.to_params()
        except CavityMemoryError as e:
            raise ValueError(str(e)) from e
        return self

    def to_params(self) -> SystemParams:
        """Convert to :class:`SystemParams` (angular units)."""
        return SystemParams(
            omega_c=TWO_PI * self.omega_c_over_2pi_hz,
            omega_q=TWO_PI * self.omega_q_over_2pi_hz,
            omega_r=TWO_PI * self.omega_r_over_2pi_hz,
            K_c=TWO_PI * self.K_c_over_2pi_hz,
            K_q=TWO_PI * self.K_q_over_2pi_hz,
            K_r=TWO_PI * self.K_r_over_2pi_hz,
            chi=TWO_PI * self.chi_over_2pi_hz,
            chi_qr=TWO_PI * self.chi_qr_over_2pi_hz,
            chi_cr=TWO_PI * self.chi_cr_over_2pi_hz,
            T1_c=self.T1_c_s,
            T2_c=self.T2_c_s,
            T1_q=self.T1_q_s,
            T2_q=self.T2_q_s,
            T2E_q=self.T2E_q_s,
            T1_r=self.T1_r_s,
            nth_c=self.nth_c,
            nth_q=self.nth_q,
            T1_f=self.T1_f_s,
            T2_gf=self.T2_gf_s,
        )


class GeometryConfig(_Document):
    """Electromagnetic-simulation inputs of the loss budget.

    The three interface participations are solved values, not published ones.
    """

    omega_c_over_2pi_hz: float = Field(4.301e9, gt=0, description="Cavity frequency")
    filling_factor: float = Field(1.4e-8, ge=0, lt=1, description="Oxide filling factor F")
    geometry_factor_ohm: float = Field(210.0, gt=0, description="Geometry factor G")
    seam_admittance_per_ohm_m: float = Field(3.3e-7, ge=0, description="Seam admittance y")
    p_bulk: float = Field(1.0e-4, ge=0, lt=1, description="Sapphire bulk participation")
    p_MA: float = Field(2.61e-10, ge=0, lt=1, description="Metal-air participation")
    p_MS: float = Field(2.61e-10, ge=0, lt=1, description="Metal-substrate participation")
    p_SA: float = Field(2.61e-10, ge=0, lt=1, description="Substrate-air participation")
    kappa_ext_over_2pi_hz: float = Field(0.096, ge=0, description="External coupling rate")

    def to_geometry(self) -> CavityGeometry:
        return CavityGeometry(
            omega_c=TWO_PI * self.omega_c_over_2pi_hz,
            filling_factor=self.filling_factor,
            geometry_factor=self.geometry_factor_ohm,
            seam_admittance=self.seam_admittance_per_ohm_m,
            p_bulk=self.p_bulk,
            p_MA=self.p_MA,
            p_MS=self.p_MS,
            p_SA=self.p_SA,
            kappa_ext=TWO_PI * self.kappa_ext_over_2pi_hz,
        )


class MaterialConfig(_Document):
    """Material inputs of the loss budget."""

    tan_delta_ox: float = Field(1e-2, gt=0, lt=1)
    tan_delta_bulk: float = Field(6e-8, gt=0, lt=1)
    tan_delta_MA: float = Field(2.1e-2, gt=0, lt=1)
    tan_delta_MS: float = Field(2.6e-3, gt=0, lt=1)
    tan_delta_SA: float = Field(2.2e-3, gt=0, lt=1)
    g_seam_per_ohm_m: float = Field(1e6, gt=0, description="Seam conductance per unit length")
    R_s_per_mG_ohm: float = Field(2e-9, ge=0, description="Surface resistance per trapped mG")
    ambient_field_mG: float = Field(500.0, ge=0)
    shield_attenuations: list[float] = Field(default_factory=lambda: [1e2, 1e3])
    R_res_bound_ohm: float | None = Field(None, ge=0, description="Optional residual resistance row")
    temperature_k: float = Field(10e-3, gt=0)

    @field_validator("shield_attenuations")
    @classmethod
    def check_attenuations(cls, v: list[float]) -> list[float]:
        if any(a < 1.0 for a in v):
            raise ValueError("Shield attenuations must be >= 1")
        return v

    def to_material(self) -> MaterialParams:
        return MaterialParams(
            tan_delta_ox=self.tan_delta_ox,
            tan_delta_bulk=self.tan_delta_bulk,
            tan_delta_MA=self.tan_delta_MA,
            tan_delta_MS=self.tan_delta_MS,
            tan_delta_SA=self.tan_delta_SA,
            g_seam=self.g_seam_per_ohm_m,
            R_s_per_mG=self.R_s_per_mG_ohm,
            ambient_field_mG=self.ambient_field_mG,
            shield_attenuations=tuple(self.shield_attenuations),
            R_res_bound=self.R_res_bound_ohm,
            temperature=self.temperature_k,
        )


# =============================================================================
# Sweeps
# =============================================================================


class LinearSweep(_Document):
    """Evenly spaced points from ``start`` to ``stop`` inclusive."""

    start: float
    stop: float
    points: int = Field(..., ge=2)

    def values(self) -> list[float]:
        return np.linspace(self.start, self.stop, self.points).tolist()


Sweep = LinearSweep | list[float]


def sweep_values(sweep: Sweep) -> list[float]:
    return sweep.values() if isinstance(sweep, LinearSweep) else list(sweep)


def _non_negative(sweep: Sweep | None) -> Sweep | None:
    if sweep is not None and any(v < 0.0 for v in sweep_values(sweep)):
        raise ValueError("Sweep values must be >= 0")
    return sweep


# =============================================================================
# Experiments (discriminated on ``protocol``)
# =============================================================================


class _Experiment(_Document):
    name: str | None = Field(None, description="Output file stem (defaults to the protocol)")

    @property
    def stem(self) -> str:
        return self.name or str(getattr(self, "protocol"))


class RingdownExperiment(_Experiment):
    """Q/τ conversions, optionally with a noisy synthetic ring-down to fit."""

    protocol: Literal["ringdown"] = "ringdown"
    tau_loaded_s: float = Field(0.110, gt=0)
    Q_ext: float | None = Field(1.3e10, gt=0)
    tau_ext_s: float | None = Field(None, gt=0)
    synthetic_points: int = Field(0, ge=0, description="Points of synthetic ring-down data (0: none)")
    noise: float = Field(0.0, ge=0, description="Gaussian noise on the normalised amplitude")

    @model_validator(mode="after")
    def check_external(self) -> RingdownExperiment:
        if self.Q_ext is not None and self.tau_ext_s is not None:
            raise ValueError("Give either Q_ext or tau_ext_s, not both")
        if 0 < self.synthetic_points < 4:
            raise ValueError("synthetic_points must be 0 or >= 4")
        return self


class SystemTableExperiment(_Experiment):
    protocol: Literal["system_table"] = "system_table"


class _Sideband(_Experiment):
    sideband_rate_over_2pi_hz: float = Field(476e3, gt=0)
    cavity_dim: int = Field(4, ge=2)
    transmon_dim: int = Field(3, ge=3)
    f_level: Literal["measured", "ladder"] = "measured"


class SidebandEncodeExperiment(_Sideband):
    """Encode fidelity, with and without noise, for real amplitude pairs (a, b)."""

    protocol: Literal["sideband_encode"] = "sideband_encode"
    amplitudes: list[tuple[float, float]] = Field(
        default_factory=lambda: [(0.0, 1.0), (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))],
        min_length=1,
    )

    @field_validator("amplitudes")
    @classmethod
    def check_normalised(cls, v: list[tuple[float, float]]) -> list[tuple[float, float]]:
        for a, b in v:
            if abs(a * a + b * b - 1.0) > 1e-9:
                raise ValueError(f"Amplitudes ({a}, {b}) are not normalised")
        return v


class T1Experiment(_Sideband):
    protocol: Literal["t1"] = "t1"
    delays_s: Sweep = Field(default_factory=lambda: LinearSweep(start=0.0, stop=0.1, points=201))

    @field_validator("delays_s")
    @classmethod
    def check_delays(cls, v: Sweep) -> Sweep:
        return _non_negative(v)


class T2Experiment(_Sideband):
    protocol: Literal["t2"] = "t2"
    delays_s: Sweep = Field(default_factory=lambda: LinearSweep(start=0.0, stop=0.1, points=201))
    fringe_detuning_over_2pi_hz: float = Field(50.0, gt=0)

    @field_validator("delays_s")
    @classmethod
    def check_delays(cls, v: Sweep) -> Sweep:
        return _non_negative(v)


class ParityCalibrationExperiment(_Experiment):
    """Revival fringe versus drive detuning; the default grid spans n̄χ ± 1.5χ."""

    protocol: Literal["parity_calibration"] = "parity_calibration"
    nbar: float = Field(16.0, ge=0)
    detuning_over_2pi_hz: Sweep | None = None
    mode: Literal["ideal", "simulated"] = "simulated"
    with_noise: bool = True
    cavity_dim: int | None = Field(None, ge=2)


class WignerCutExperiment(_Experiment):
    """Cuts of even cats along Im β, fitted for size; plus a vacuum calibration."""

    protocol: Literal["wigner_cut"] = "wigner_cut"
    cat_sizes: list[float] = Field(default_factory=lambda: [16.0, 64.0, 144.0], min_length=1)
    axis: Sweep = Field(default_factory=lambda: LinearSweep(start=-1.5, stop=1.5, points=301))
    mode: Literal["ideal", "simulated"] = "ideal"
    with_noise: bool = True
    vacuum_calibration: bool = True

    @field_validator("cat_sizes")
    @classmethod
    def check_positive(cls, v: list[float]) -> list[float]:
        if any(s <= 0.0 for s in v):
            raise ValueError("Cat sizes must be > 0")
        return v


class CatDecoherenceExperiment(_Experiment):
    protocol: Literal["cat_decoherence"] = "cat_decoherence"
    cat_sizes: list[float] = Field(default_factory=lambda: [4.0, 16.0, 36.0, 64.0], min_length=1)
    mode: Literal["ideal", "simulated"] = "ideal"
    extrapolate_to: float = Field(1024.0, gt=0)

    @field_validator("cat_sizes")
    @classmethod
    def check_positive(cls, v: list[float]) -> list[float]:
        if any(s <= 0.0 for s in v):
            raise ValueError("Cat sizes must be > 0")
        return v


class SpamBudgetExperiment(_Experiment):
    protocol: Literal["spam_budget"] = "spam_budget"
    nbars: list[float] = Field(default_factory=lambda: [1.0, 4.0, 9.0, 16.0], min_length=1)
    readout_fidelity: float = Field(0.95, ge=0.5, le=1.0)

    @field_validator("nbars")
    @classmethod
    def check_positive(cls, v: list[float]) -> list[float]:
        if any(n <= 0.0 for n in v):
            raise ValueError("Photon numbers must be > 0")
        return v


class ResetExperiment(_Experiment):
    """Driven cavity reset; give ``xi_cr`` or a target ``decay_time_s``."""

    protocol: Literal["reset"] = "reset"
    xi_cr: float | None = Field(None, ge=0)
    decay_time_s: float | None = Field(None, gt=0)
    durations_s: Sweep = Field(default_factory=lambda: LinearSweep(start=0.0, stop=5e-3, points=51))
    initial_photons: int = Field(1, ge=0)
    readout_dim: int = Field(2, ge=2)
    passive_nbar_initial: float = Field(1024.0, gt=0)
    passive_nbar_final: float = Field(1e-3, gt=0)

    @field_validator("durations_s")
    @classmethod
    def check_durations(cls, v: Sweep) -> Sweep:
        return _non_negative(v)

    @model_validator(mode="after")
    def check_drive(self) -> ResetExperiment:
        if (self.xi_cr is None) == (self.decay_time_s is None):
            raise ValueError("Give exactly one of xi_cr or decay_time_s")
        return self


class LossBudgetExperiment(_Experiment):
    protocol: Literal["loss_budget"] = "loss_budget"
    compare_reference: bool = True
    residual_Q0: float | None = Field(3e9, gt=0, description="Q0 for the residual-resistance bound")


class CooldownsExperiment(_Experiment):
    protocol: Literal["cooldowns"] = "cooldowns"


class KerrExperiment(_Experiment):
    protocol: Literal["kerr"] = "kerr"
    nbars: list[float] = Field(default_factory=lambda: [256.0], min_length=1)


class DephasingBudgetExperiment(_Experiment):
    """1/T2 decomposition plus the thermal-dephasing curve versus n̄th_q."""

    protocol: Literal["dephasing_budget"] = "dephasing_budget"
    T1_c_s: float | None = Field(None, gt=0, description="Defaults to the device value")
    T2_c_s: float | None = Field(None, gt=0, description="Defaults to the device value")
    T_up_q_s: float | None = Field(None, gt=0, description="Defaults to T1_q/nth_q")
    sigma_T1_s: float = Field(0.0, ge=0)
    sigma_T2_s: float = Field(0.0, ge=0)
    sigma_T_up_s: float = Field(0.0, ge=0)
    nth_q_values: Sweep = Field(default_factory=lambda: LinearSweep(start=0.0, stop=0.1, points=101))

    @field_validator("nth_q_values")
    @classmethod
    def check_nth(cls, v: Sweep) -> Sweep:
        return _non_negative(v)


ExperimentConfig = Annotated[
    RingdownExperiment
    | SystemTableExperiment
    | SidebandEncodeExperiment
    | T1Experiment
    | T2Experiment
    | ParityCalibrationExperiment
    | WignerCutExperiment
    | CatDecoherenceExperiment
    | SpamBudgetExperiment
    | ResetExperiment
    | LossBudgetExperiment
    | CooldownsExperiment
    | KerrExperiment
    | DephasingBudgetExperiment,
    Field(discriminator="protocol"),
]


# =============================================================================
# Run document
# =============================================================================


class OutputConfig(_Document):
    """Where results go and in which formats.

    Attributes:
        directory: Output directory (None defers to settings / --out)
        formats: Series as "csv", reports as "json"
    """

    directory: Path | None = None
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class RunConfig(_Document):
    """A complete run: device, loss-budget inputs, experiments, output."""

    name: str = Field("run", min_length=1)
    description: str = Field("", description="One-line summary shown by the targets listing")
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    material: MaterialConfig = Field(default_factory=MaterialConfig)
    seed: int = Field(0, ge=0, lt=2**64, description="Seed for synthetic measurement noise")
    tolerance_scale: float = Field(1.0, gt=0, description="Multiplier on integrator tolerances")
    experiments: list[ExperimentConfig] = Field(..., min_length=1)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def check_unique_names(self) -> RunConfig:
        stems = [e.stem for e in self.experiments]
        duplicates = sorted({s for s in stems if stems.count(s) > 1})
        if duplicates:
            raise ValueError(f"Duplicate experiment names: {', '.join(duplicates)} (set 'name')")
        return self

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Validate a parsed document.

        Raises:
            ConfigValidationError: With the dotted path of every bad field
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            locations = [".".join(str(p) for p in err["loc"]) or "<root>" for err in e.errors()]
            details = "; ".join(
                f"{loc}: {err['msg']}" for loc, err in zip(locations, e.errors(), strict=True)
            )
            raise ConfigValidationError(f"Invalid configuration: {details}", locations) from e

    @classmethod
    def load(cls, path: Path) -> RunConfig:
        """Parse a JSON or YAML document and validate it.

        Raises:
            ValueError: If the file cannot be parsed
            ConfigValidationError: If validation fails
        """
        return cls.from_dict(read_document(path))

    def canonical_json(self) -> str:
        """Key-sorted JSON used for the manifest hash."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


class CavityMemorySettings(BaseSettings):
    """Environment settings (``CAVITY_MEMORY_*``).

    Attributes:
        output_dir: Default output directory
        threads: Default worker count (None: CPU count)
        debug: Verbose logging
    """

    output_dir: Path = Field(Path("results"), description="Default output directory")
    threads: int | None = Field(None, ge=1, description="Worker threads for sweeps")
    debug: bool = Field(False, description="Enable debug logging")

    model_config = SettingsConfigDict(
        env_prefix="CAVITY_MEMORY_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


def read_document(path: Path) -> dict[str, Any]:
    """Parse a JSON (or ``.yaml``/``.yml``) file into a mapping without validating it.

    Raises:
        ValueError: If the file cannot be read or parsed, or is not a mapping
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ValueError(f"Cannot read {path}: {e}") from e
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ValueError(f"Cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping at the top level")
    logger.debug("Loaded document %s", path)
    return data
