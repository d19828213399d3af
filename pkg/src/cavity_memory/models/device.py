"""Device parameter record: the single source of truth for a simulated device.

All frequencies and rates are angular (rad/s), all times in seconds. The
tabulated device numbers are quoted over 2π in Hz; use
:meth:`SystemParams.from_hz` and :meth:`SystemParams.to_hz_dict` at the I/O
boundary.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any

from cavity_memory.exceptions import UnphysicalInputError


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Fields holding angular frequencies (rad/s)
FREQUENCY_FIELDS: tuple[str, ...] = (
    "omega_c",
    "omega_q",
    "omega_r",
    "K_c",
    "K_q",
    "K_r",
    "chi",
    "chi_qr",
    "chi_cr",
)

TIME_FIELDS: tuple[str, ...] = ("T1_c", "T2_c", "T1_q", "T2_q", "T2E_q", "T1_r")

DEPHASING_TOLERANCE = 1e-9


def pure_dephasing_rate(T1: float, T2: float, label: str = "") -> float:
    """1/T2 − 1/(2T1), clamped to 0 when negative within tolerance.

    Raises:
        UnphysicalInputError: If 1/T2 < 1/(2T1) beyond tolerance
    """
    rate = 1.0 / T2 - 0.5 / T1
    if rate < 0.0:
        if rate < -DEPHASING_TOLERANCE * max(1.0, 1.0 / T2):
            raise UnphysicalInputError(
                f"{label or 'mode'}: 1/T2 = {1 / T2:.6g}/s is below 1/(2T1) = "
                f"{0.5 / T1:.6g}/s (T2 > 2T1)"
            )
        logger.debug("Clamping %s dephasing rate %.3e to 0", label, rate)
        return 0.0
    return rate


@dataclass(frozen=True)
class SystemParams:
    """Hamiltonian and coherence parameters of the cavity–transmon–readout device.

    Attributes:
        omega_c, omega_q, omega_r: Mode frequencies (rad/s)
        K_c, K_q, K_r: Self-Kerr rates (rad/s), K_q is the anharmonicity
        chi, chi_qr, chi_cr: Dispersive shifts (rad/s)
        T1_c, T2_c: Cavity lifetime and coherence time (s)
        T1_q, T2_q, T2E_q: Transmon lifetime, Ramsey and echo times (s)
        T1_r: Readout resonator lifetime (s)
        nth_c, nth_q: Thermal populations
        T1_f: Lifetime of the transmon f level (s), None to use the ladder model
        T2_gf: Coherence time of g–f superpositions (s), None likewise
    """

    omega_c: float
    omega_q: float
    omega_r: float
    K_c: float
    K_q: float
    K_r: float
    chi: float
    chi_qr: float
    chi_cr: float
    T1_c: float
    T2_c: float
    T1_q: float
    T2_q: float
    T2E_q: float
    T1_r: float
    nth_c: float = 0.0
    nth_q: float = 0.0
    T1_f: float | None = None
    T2_gf: float | None = None

    def __post_init__(self) -> None:
        for name in TIME_FIELDS:
            value = getattr(self, name)
            if not value > 0.0:
                raise UnphysicalInputError(f"{name} must be > 0, got {value}")
        for name in ("T1_f", "T2_gf"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise UnphysicalInputError(f"{name} must be > 0, got {value}")
        for name in ("nth_c", "nth_q"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise UnphysicalInputError(f"{name} must lie in [0, 1), got {value}")
        for name in FREQUENCY_FIELDS:
            if getattr(self, name) < 0.0:
                raise UnphysicalInputError(f"{name} must be >= 0")
        # Raises on unphysical (T1, T2) pairs
        self.cavity_dephasing_rate  # noqa: B018
        self.transmon_dephasing_rate  # noqa: B018

    # -- constructors -------------------------------------------------------

    @classmethod
    def table_one(cls) -> SystemParams:
        """Measured device parameters (cavity thermal population set to 0).

        Returns:
            SystemParams of the reference device
        """
        return cls.from_hz(
            omega_c=4.301e9,
            omega_q=3.099e9,
            omega_r=7.889e9,
            K_c=3.6,
            K_q=146e6,
            K_r=2.3e3,
            chi=42e3,
            chi_qr=1.3e6,
            chi_cr=0.2e3,
            T1_c=25.6e-3,
            T2_c=34e-3,
            T1_q=110e-6,
            T2_q=16e-6,
            T2E_q=80e-6,
            T1_r=0.38e-6,
            nth_c=0.0,
            nth_q=1.2e-3,
            T1_f=50e-6,
            T2_gf=45e-6,
        )

    @classmethod
    def from_hz(cls, **values: Any) -> SystemParams:
        """Build from frequencies given over 2π in Hz; other fields as-is."""
        converted = {
            key: (TWO_PI * float(value) if key in FREQUENCY_FIELDS else value)
            for key, value in values.items()
        }
        return cls(**converted)

    def replace(self, **changes: Any) -> SystemParams:
        return dataclasses.replace(self, **changes)

    # -- derived rates ------------------------------------------------------

    @property
    def cavity_dephasing_rate(self) -> float:
        return pure_dephasing_rate(self.T1_c, self.T2_c, "cavity")

    @property
    def transmon_dephasing_rate(self) -> float:
        """Ramsey pure dephasing 1/T2_q − 1/(2T1_q) (echo time is not used)."""
        return pure_dephasing_rate(self.T1_q, self.T2_q, "transmon")

    @property
    def gamma_down_q(self) -> float:
        return 1.0 / self.T1_q

    @property
    def heating_rate_q(self) -> float:
        """nth_q/T1_q, the inverse mean time between thermal transmon excitations."""
        return self.nth_q / self.T1_q

    @property
    def has_f_level_data(self) -> bool:
        return self.T1_f is not None and self.T2_gf is not None

    # -- serialisation ------------------------------------------------------

    def to_hz_dict(self) -> dict[str, Any]:
        """Frequencies over 2π in Hz, everything else unchanged."""
        data = asdict(self)
        for key in FREQUENCY_FIELDS:
            data[key] = data[key] / TWO_PI
        return data

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SystemParams:
        return cls(**data)
