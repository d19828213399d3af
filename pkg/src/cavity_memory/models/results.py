"""Result records produced by protocols, fits and budgets.

Every record serialises to plain JSON types with ``to_dict`` and can be
rebuilt with ``from_dict``; the CLI writes these as the report files.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

from cavity_memory.exceptions import FitError, UnphysicalInputError


ObservableKind = Literal["probability", "parity", "value"]

RANGE_TOL = 1e-9


def _floats(values: Sequence[float]) -> list[float]:
    return [float(v) for v in values]


@dataclass
class ExperimentResult:
    """Sampled observable-vs-parameter curve with metadata for fitting.

    Attributes:
        sweep_name: Name of the swept parameter (e.g. "delay_s")
        sweep_values: Swept values
        observable: Measured values, one per sweep value
        observable_name: Column header for the observable
        kind: "probability" (in [0, 1]), "parity" (in [-1, 1]) or "value"
        metadata: Device snapshot and protocol settings
        columns: Extra aligned series (e.g. even/odd branches)
        derived: Scalars derived from the curve (fitted times, optimum)
    """

    sweep_name: str
    sweep_values: list[float]
    observable: list[float]
    observable_name: str = "value"
    kind: ObservableKind = "value"
    metadata: dict[str, Any] = field(default_factory=dict)
    columns: dict[str, list[float]] = field(default_factory=dict)
    derived: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.sweep_values = _floats(self.sweep_values)
        self.observable = _floats(self.observable)
        self.columns = {k: _floats(v) for k, v in self.columns.items()}
        n = len(self.sweep_values)
        if len(self.observable) != n:
            raise UnphysicalInputError(
                f"{len(self.observable)} observable values for {n} sweep values"
            )
        for name, column in self.columns.items():
            if len(column) != n:
                raise UnphysicalInputError(f"Column '{name}' has {len(column)} values, need {n}")
        bounds = {"probability": (0.0, 1.0), "parity": (-1.0, 1.0)}.get(self.kind)
        if bounds is not None:
            lo, hi = bounds
            for value in self.observable:
                if not lo - RANGE_TOL <= value <= hi + RANGE_TOL:
                    raise UnphysicalInputError(
                        f"{self.kind} value {value} outside [{lo}, {hi}]"
                    )
            self.observable = [min(max(v, lo), hi) for v in self.observable]

    def __len__(self) -> int:
        return len(self.sweep_values)

    def header(self) -> list[str]:
        return [self.sweep_name, self.observable_name, *self.columns]

    def rows(self) -> list[list[float]]:
        extra = list(self.columns.values())
        return [
            [x, y, *(column[i] for column in extra)]
            for i, (x, y) in enumerate(zip(self.sweep_values, self.observable, strict=True))
        ]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentResult:
        return cls(**data)


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    Attributes:
        model: Model name (e.g. "exponential", "exp_cos")
        parameters: Best-fit values by name
        uncertainties: 1σ uncertainties by name (≥ 0)
        residual_norm: Euclidean norm of the residual vector
        converged: False marks the parameters as unusable
        derived: Quantities computed from the parameters (e.g. cat size)
    """

    model: str
    parameters: dict[str, float]
    uncertainties: dict[str, float]
    residual_norm: float
    converged: bool = True
    derived: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.parameters = {k: float(v) for k, v in self.parameters.items()}
        self.uncertainties = {
            k: (abs(float(v)) if math.isfinite(float(v)) else math.inf)
            for k, v in self.uncertainties.items()
        }
        self.derived = {k: float(v) for k, v in self.derived.items()}
        self.residual_norm = float(self.residual_norm)

    @property
    def usable(self) -> bool:
        return self.converged

    def value(self, name: str) -> float:
        """Parameter or derived value, refusing unconverged fits.

        Raises:
            FitError: If the fit did not converge
            KeyError: If the name is unknown
        """
        if not self.converged:
            raise FitError(f"{self.model} fit did not converge; '{name}' is unusable")
        if name in self.parameters:
            return self.parameters[name]
        return self.derived[name]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FitResult:
        return cls(**data)


@dataclass
class DephasingBudget:
    """Decomposition 1/T2 = 1/(2T1) + 1/T↑ + 1/Tφ of a cavity coherence time.

    Attributes:
        one_over_2T1: Lifetime-limited rate (1/s)
        heating_rate: Transmon heating rate 1/T↑ (1/s)
        residual_rate: Remaining dephasing 1/Tφ (1/s), clamped at 0
        predicted_T2: 1 / (sum of the three rates) (s)
        residual_lower_bound_s: Lower bound on Tφ when the residual is
            compatible with zero (None when Tφ is resolved)
    """

    one_over_2T1: float
    heating_rate: float
    residual_rate: float
    predicted_T2: float
    residual_lower_bound_s: float | None = None

    @property
    def residual_time(self) -> float:
        return math.inf if self.residual_rate == 0.0 else 1.0 / self.residual_rate

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DephasingBudget:
        return cls(**data)


@dataclass
class LossChannel:
    """One row of the cavity loss budget (rates over 2π in Hz)."""

    name: str
    kappa_over_2pi_hz: float
    mitigation: str = ""

    @property
    def lifetime_s(self) -> float:
        if self.kappa_over_2pi_hz == 0.0:
            return math.inf
        return 1.0 / (2.0 * math.pi * self.kappa_over_2pi_hz)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "mitigation": self.mitigation,
            "kappa_over_2pi_hz": self.kappa_over_2pi_hz,
            "lifetime_s": self.lifetime_s,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LossChannel:
        return cls(
            name=data["name"],
            kappa_over_2pi_hz=float(data["kappa_over_2pi_hz"]),
            mitigation=data.get("mitigation", ""),
        )


@dataclass
class LossBudget:
    """Per-channel loss rates and the total, mirroring the loss table."""

    channels: list[LossChannel]

    @property
    def total_kappa_over_2pi_hz(self) -> float:
        return math.fsum(c.kappa_over_2pi_hz for c in self.channels)

    @property
    def total_lifetime_s(self) -> float:
        total = self.total_kappa_over_2pi_hz
        return math.inf if total == 0.0 else 1.0 / (2.0 * math.pi * total)

    def channel(self, name: str) -> LossChannel:
        for c in self.channels:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "channels": [c.to_dict() for c in self.channels],
            "total_kappa_over_2pi_hz": self.total_kappa_over_2pi_hz,
            "total_lifetime_s": self.total_lifetime_s,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LossBudget:
        return cls([LossChannel.from_dict(c) for c in data["channels"]])


@dataclass
class SpamBudget:
    """Fringe visibility per noise configuration at one photon number.

    Attributes:
        nbar: Mean photon number |α|² of the prepared cat
        visibilities: Configuration name → visibility
    """

    nbar: float
    visibilities: dict[str, float]

    def loss(self, configuration: str) -> float:
        """Visibility lost relative to the noiseless configuration."""
        return self.visibilities["all_off"] - self.visibilities[configuration]

    def to_dict(self) -> dict[str, Any]:
        return {
            "nbar": self.nbar,
            "visibilities": dict(self.visibilities),
            "losses": {name: self.loss(name) for name in self.visibilities},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SpamBudget:
        return cls(nbar=float(data["nbar"]), visibilities=dict(data["visibilities"]))


@dataclass
class CooldownRecord:
    """One cooldown row: measured inputs and the predicted cavity T2."""

    name: str
    nth_q: float
    T2_c_measured_s: float
    T1_c_s: float
    gamma_down_over_2pi_hz: float
    chi_over_2pi_hz: float
    predicted_T2_c_s: float = math.nan

    @property
    def relative_error(self) -> float:
        return abs(self.predicted_T2_c_s - self.T2_c_measured_s) / self.T2_c_measured_s

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["relative_error"] = self.relative_error
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CooldownRecord:
        data = {k: v for k, v in data.items() if k != "relative_error"}
        return cls(**data)
