"""Dispersive Hamiltonian, drives, collapse channels and Lindblad evolution.

Design Decision: Vectorised Liouvillian with a complex ODE state

Rationale: With ρ flattened row-major, every term of the master equation
becomes a sparse matrix acting on vec(ρ): vec(AρB) = (A ⊗ Bᵀ)vec(ρ). The
static part is assembled once; each drive contributes two sparse
superoperators scaled by its complex coefficient f(t) and f(t)*. The right
hand side is then a handful of sparse mat-vecs, integrated with
``scipy.integrate.solve_ivp`` (DOP853 by default) on a complex state.

Trade-offs:
- Memory: the Liouvillian has dim² rows, fine for the desk-scale spaces
  (a few thousand rows) and the reason full 1024-photon cats are out of reach
- Idle periods: delays up to 100 ms would cost millions of RK steps, so
  ``idle`` exponentiates the (time-independent) Liouvillian instead

Frame: every mode rotates at its own frequency, so the static Hamiltonian
only carries the Kerr and cross-Kerr terms. A drive with kind k contributes
f(t)·A_k + h.c. with f(t) = prefactor·envelope(t)·exp(−i(frame_offset + Δ)t).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Collection, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Literal, Protocol

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from cavity_memory.exceptions import (
    IntegratorError,
    SubsystemError,
    TraceDriftError,
    UnphysicalInputError,
)
from cavity_memory.models.device import SystemParams
from cavity_memory.services.hilbert import (
    FockSpace,
    Operator,
    QuantumState,
    annihilation,
    creation,
    diagonal_operator,
    identity,
    number,
    transition_operator,
)


logger = logging.getLogger(__name__)

KNOWN_SUBSYSTEMS = ("cavity", "transmon", "readout")

DriveKind = Literal[
    "cavity_displacement",
    "readout_measurement",
    "transmon_drive",
    "sideband_qq_c",
    "reset_c_r",
]
FLevelModel = Literal["measured", "ladder"]

TRACE_DRIFT_LIMIT = 1e-6
DENSE_PROPAGATOR_LIMIT = 1024
DEFAULT_RAMP_S = 10e-9
# (relative, absolute)
DEFAULT_TOLERANCES: tuple[float, float] = (1e-8, 1e-10)


# =============================================================================
# Envelopes
# =============================================================================


class Envelope(Protocol):
    """Real or complex drive amplitude (rad/s) as a function of time."""

    def __call__(self, t: float) -> complex: ...

    @property
    def support(self) -> tuple[float, float]: ...

    @property
    def area(self) -> float: ...

    @property
    def peak(self) -> float: ...


@dataclass(frozen=True)
class SquareEnvelope:
    """Flat-top pulse with raised-cosine ramps of length ``ramp``.

    The area is amplitude × (duration − ramp); each ramp contributes half
    its length at full amplitude.
    """

    amplitude: complex
    duration: float
    ramp: float = DEFAULT_RAMP_S
    start: float = 0.0

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise UnphysicalInputError(f"Pulse duration must be > 0, got {self.duration}")
        if self.ramp < 0.0 or 2.0 * self.ramp > self.duration:
            raise UnphysicalInputError(
                f"Ramp {self.ramp} s does not fit in a {self.duration} s pulse"
            )

    def __call__(self, t: float) -> complex:
        tau = t - self.start
        if tau < 0.0 or tau > self.duration:
            return 0.0
        edge = min(tau, self.duration - tau)
        if self.ramp > 0.0 and edge < self.ramp:
            return self.amplitude * 0.5 * (1.0 - math.cos(math.pi * edge / self.ramp))
        return self.amplitude

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.duration)

    @property
    def area(self) -> float:
        return float(abs(self.amplitude)) * (self.duration - self.ramp)

    @property
    def peak(self) -> float:
        return float(abs(self.amplitude))


@dataclass(frozen=True)
class ConstantEnvelope:
    """Constant amplitude on [start, start + duration]."""

    amplitude: complex
    duration: float
    start: float = 0.0

    def __call__(self, t: float) -> complex:
        tau = t - self.start
        return self.amplitude if 0.0 <= tau <= self.duration else 0.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.start, self.start + self.duration)

    @property
    def area(self) -> float:
        return float(abs(self.amplitude)) * self.duration

    @property
    def peak(self) -> float:
        return float(abs(self.amplitude))


@dataclass(frozen=True)
class ZeroEnvelope:
    """Drive switched off."""

    def __call__(self, t: float) -> complex:
        return 0.0

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 0.0)

    @property
    def area(self) -> float:
        return 0.0

    @property
    def peak(self) -> float:
        return 0.0


# =============================================================================
# Hamiltonian and drives
# =============================================================================


def _check_space(space: FockSpace) -> None:
    unknown = [label for label in space.labels if label not in KNOWN_SUBSYSTEMS]
    if unknown:
        raise SubsystemError(
            f"Subsystems {unknown} have no parameters; expected a subset of {KNOWN_SUBSYSTEMS}"
        )


def build_static_hamiltonian(
    params: SystemParams,
    space: FockSpace,
    frame_detunings: Mapping[str, float] | None = None,
) -> Operator:
    """Interaction-frame Hamiltonian of the dispersive device.

    Self-Kerr −(K/2)x†²x² for each mode present, cross-Kerr −χ c†c q†q,
    −χqr r†r q†q and −χcr r†r c†c for each pair present. Bare frequencies
    are removed; ``frame_detunings`` adds δ·x†x for a frame rotating at
    ω − δ instead of ω.

    Args:
        params: Device parameters (rad/s)
        space: Space with subsystems among cavity/transmon/readout
        frame_detunings: Optional per-mode frame offsets (rad/s)

    Returns:
        Diagonal Hermitian Operator

    Raises:
        SubsystemError: If the space has a subsystem with no parameters
    """
    _check_space(space)
    kerr = {"cavity": params.K_c, "transmon": params.K_q, "readout": params.K_r}
    cross = [
        ("cavity", "transmon", params.chi),
        ("readout", "transmon", params.chi_qr),
        ("readout", "cavity", params.chi_cr),
    ]
    diag = np.zeros(space.total_dim)
    numbers = {label: number(space, label).matrix.diagonal().real for label in space.labels}
    for label, n in numbers.items():
        diag -= 0.5 * kerr[label] * n * (n - 1.0)
    for first, second, rate in cross:
        if first in numbers and second in numbers:
            diag -= rate * numbers[first] * numbers[second]
    for label, delta in (frame_detunings or {}).items():
        space.index(label)
        diag += delta * numbers[label]
    return Operator(space, sp.diags(diag.astype(complex), format="csr"), hermitian_hint=True)


@dataclass(frozen=True)
class _DriveShape:
    subsystems: tuple[str, ...]
    prefactor: float
    operator: Callable[[FockSpace], Operator]
    frame_offset: Callable[[SystemParams], float]


_DRIVES: dict[str, _DriveShape] = {
    "cavity_displacement": _DriveShape(
        ("cavity",), 0.5, lambda s: creation(s, "cavity"), lambda p: 0.0
    ),
    "readout_measurement": _DriveShape(
        ("readout",), 0.5, lambda s: creation(s, "readout"), lambda p: 0.0
    ),
    "transmon_drive": _DriveShape(
        ("transmon",), 0.5, lambda s: creation(s, "transmon"), lambda p: 0.0
    ),
    # |0,f⟩ → |1,g⟩ sits K_q away in the Kerr frame
    "sideband_qq_c": _DriveShape(
        ("cavity", "transmon"),
        1.0 / (2.0 * math.sqrt(2.0)),
        lambda s: creation(s, "cavity") @ annihilation(s, "transmon") @ annihilation(s, "transmon"),
        lambda p: p.K_q,
    ),
    "reset_c_r": _DriveShape(
        ("cavity", "readout"),
        0.5,
        lambda s: creation(s, "readout") @ annihilation(s, "cavity"),
        lambda p: 0.0,
    ),
}


@dataclass(frozen=True)
class DriveTerm:
    """One driven term f(t)·A + h.c. of the rotating-frame Hamiltonian.

    Attributes:
        kind: Which driven interaction (see ``DriveKind``)
        envelope: Drive rate versus time (rad/s)
        detuning: Offset from the nominal drive frequency (rad/s)
        prefactor: Numeric factor in front of the envelope
        frame_offset: Residual frame frequency of the term (rad/s)
    """

    kind: DriveKind
    envelope: Envelope
    detuning: float = 0.0
    prefactor: float = 0.5
    frame_offset: float = 0.0

    def coefficient(self, t: float) -> complex:
        phase = (self.frame_offset + self.detuning) * t
        return self.prefactor * complex(self.envelope(t)) * complex(math.cos(phase), -math.sin(phase))

    @property
    def is_static(self) -> bool:
        """True when the coefficient does not depend on time over its support."""
        return isinstance(self.envelope, (ConstantEnvelope, ZeroEnvelope)) and (
            self.frame_offset + self.detuning == 0.0
        )

    def operator(self, space: FockSpace) -> Operator:
        shape = _DRIVES[self.kind]
        missing = [label for label in shape.subsystems if not space.has(label)]
        if missing:
            raise SubsystemError(f"Drive '{self.kind}' needs subsystems {missing}")
        return shape.operator(space)


def build_drive(
    kind: str,
    params: SystemParams,
    envelope: Envelope,
    detuning: float = 0.0,
) -> DriveTerm:
    """Create a drive term of the given kind.

    Args:
        kind: cavity_displacement, readout_measurement, transmon_drive,
            sideband_qq_c or reset_c_r
        params: Device parameters (fixes the residual frame frequency)
        envelope: Rate versus time (rad/s)
        detuning: Offset Δ applied as an e^{−iΔt} phase

    Returns:
        DriveTerm (Hermitian conjugate implied)

    Raises:
        ValueError: If the kind is unknown
    """
    if kind not in _DRIVES:
        raise ValueError(f"Unknown drive kind '{kind}'; choose from {sorted(_DRIVES)}")
    if not math.isfinite(envelope.peak):
        raise UnphysicalInputError(f"Drive '{kind}' envelope is not finite")
    shape = _DRIVES[kind]
    return DriveTerm(
        kind=kind,  # type: ignore[arg-type]
        envelope=envelope,
        detuning=float(detuning),
        prefactor=shape.prefactor,
        frame_offset=shape.frame_offset(params),
    )


# =============================================================================
# Collapse channels
# =============================================================================


@dataclass(frozen=True)
class CollapseChannel:
    """Jump operator with its rate (1/s)."""

    operator: Operator
    rate: float
    name: str = ""

    def __post_init__(self) -> None:
        if self.rate < 0.0:
            raise UnphysicalInputError(f"Collapse rate of '{self.name}' is negative")


def _f_level_corrections(params: SystemParams) -> tuple[float, float]:
    """Excess f→e decay rate and f eigenvalue of the dephasing operator."""
    assert params.T1_f is not None and params.T2_gf is not None
    ladder_f_decay = 2.0 * (1.0 + params.nth_q) / params.T1_q
    excess = 1.0 / params.T1_f - ladder_f_decay
    if excess < 0.0:
        logger.warning(
            "f-level lifetime %.3g s is longer than the ladder prediction; "
            "no excess decay added",
            params.T1_f,
        )
        excess = 0.0
    gamma_ge = params.transmon_dephasing_rate
    gamma_gf = max(1.0 / params.T2_gf - 0.5 / params.T1_f, 0.0)
    d_f = math.sqrt(gamma_gf / gamma_ge) if gamma_ge > 0.0 else 0.0
    return excess, d_f


def collapse_channels(
    params: SystemParams,
    space: FockSpace,
    f_level: FLevelModel = "measured",
    include: Collection[str] | None = None,
) -> list[CollapseChannel]:
    """Lindblad jump operators for the modes in ``space``.

    Cavity and transmon relax at (1+nth)/T1 and heat at nth/T1; the
    transmon dephases through q†q at rate 2(1/T2 − 1/(2T1)) (Ramsey T2);
    the readout resonator decays at 1/T1_r. With ``f_level="measured"``
    and a transmon of dim ≥ 3, an extra |e⟩⟨f| channel makes the f level
    decay at 1/T1_f and the f entry of the dephasing operator is scaled so
    g–f superpositions dephase at 1/T2_gf − 1/(2T1_f). Zero-rate channels
    are dropped.

    Args:
        params: Device parameters
        space: Space the operators act on
        f_level: "measured" or "ladder"
        include: Optional channel names to keep (others are dropped)

    Returns:
        List of CollapseChannel

    Raises:
        UnphysicalInputError: If a derived dephasing rate is negative
    """
    _check_space(space)
    channels: list[CollapseChannel] = []

    def add(name: str, op: Operator, rate: float) -> None:
        if rate > 0.0 and (include is None or name in include):
            channels.append(CollapseChannel(op, rate, name))

    if space.has("cavity"):
        a = annihilation(space, "cavity")
        add("cavity_decay", a, (1.0 + params.nth_c) / params.T1_c)
        add("cavity_heating", a.dag(), params.nth_c / params.T1_c)

    if space.has("transmon"):
        q = annihilation(space, "transmon")
        add("transmon_decay", q, (1.0 + params.nth_q) / params.T1_q)
        add("transmon_heating", q.dag(), params.nth_q / params.T1_q)
        dim_q = space.dim("transmon")
        dephasing_values = np.arange(dim_q, dtype=float)
        if f_level == "measured" and dim_q >= 3 and params.has_f_level_data:
            excess, d_f = _f_level_corrections(params)
            add("transmon_f_decay", transition_operator(space, "transmon", 1, 2), excess)
            dephasing_values[2] = d_f
        elif f_level not in ("measured", "ladder"):
            raise ValueError(f"Unknown f-level model '{f_level}'")
        add(
            "transmon_dephasing",
            diagonal_operator(space, "transmon", dephasing_values),
            2.0 * params.transmon_dephasing_rate,
        )

    if space.has("readout"):
        add("readout_decay", annihilation(space, "readout"), 1.0 / params.T1_r)

    logger.debug(
        "Collapse channels: %s",
        ", ".join(f"{c.name}={c.rate:.4g}/s" for c in channels),
    )
    return channels


def _as_channels(collapse_ops: Iterable[CollapseChannel | tuple[Operator, float]]) -> tuple[CollapseChannel, ...]:
    result = []
    for item in collapse_ops:
        if isinstance(item, CollapseChannel):
            result.append(item)
        else:
            op, rate = item
            result.append(CollapseChannel(op, float(rate)))
    return tuple(result)


# =============================================================================
# Superoperators
# =============================================================================


def _left(a: sp.spmatrix, n: int) -> sp.csr_matrix:
    return sp.kron(a, sp.identity(n, format="csr"), format="csr")


def _right(b: sp.spmatrix, n: int) -> sp.csr_matrix:
    """Superoperator of ρ → ρB in row-major vectorisation."""
    return sp.kron(sp.identity(n, format="csr"), b.T, format="csr")


def commutator_superop(h: sp.spmatrix) -> sp.csr_matrix:
    """−i[H, ·] as a matrix on vec(ρ)."""
    n = h.shape[0]
    return (-1j * (_left(h, n) - _right(h, n))).tocsr()


def dissipator_superop(op: sp.spmatrix) -> sp.csr_matrix:
    """D[L]ρ = LρL† − ½{L†L, ρ} as a matrix on vec(ρ)."""
    n = op.shape[0]
    ldl = (op.getH() @ op).tocsr()
    jump = sp.kron(op, op.conj(), format="csr")
    return (jump - 0.5 * _left(ldl, n) - 0.5 * _right(ldl, n)).tocsr()


def liouvillian(
    hamiltonian: Operator,
    collapse_ops: Iterable[CollapseChannel | tuple[Operator, float]],
) -> sp.csr_matrix:
    """Sparse generator L with d vec(ρ)/dt = L vec(ρ) (row-major vec)."""
    generator = commutator_superop(hamiltonian.matrix)
    for channel in _as_channels(collapse_ops):
        if channel.operator.space != hamiltonian.space:
            raise SubsystemError(f"Collapse operator '{channel.name}' is on another space")
        generator = generator + channel.rate * dissipator_superop(channel.operator.matrix)
    return generator.tocsr()


def _drive_superops(drive: DriveTerm, space: FockSpace) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = drive.operator(space).matrix
    return commutator_superop(a), commutator_superop(a.getH().tocsr())


# =============================================================================
# Evolution
# =============================================================================


@dataclass(frozen=True)
class EvolutionSpec:
    """Everything needed to integrate the master equation over one span.

    Attributes:
        hamiltonian: Static Hamiltonian
        drives: Time-dependent drive terms
        collapse_ops: Jump operators with rates
        t_span: (t0, t1) in seconds
        tolerances: (relative, absolute) integrator tolerances
        max_step: Largest integrator step (s); None picks
            min(1/(10·max drive rate), span/100)
        method: solve_ivp method ("DOP853" or "RK45")
    """

    hamiltonian: Operator
    drives: tuple[DriveTerm, ...] = ()
    collapse_ops: tuple[CollapseChannel, ...] = ()
    t_span: tuple[float, float] = (0.0, 1.0)
    tolerances: tuple[float, float] = DEFAULT_TOLERANCES
    max_step: float | None = None
    method: Literal["DOP853", "RK45"] = "DOP853"

    def __post_init__(self) -> None:
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "collapse_ops", _as_channels(self.collapse_ops))
        t0, t1 = self.t_span
        if not t1 > t0:
            raise UnphysicalInputError(f"t_span must satisfy t1 > t0, got {self.t_span}")
        rtol, atol = self.tolerances
        if rtol <= 0.0 or atol <= 0.0:
            raise UnphysicalInputError("Integrator tolerances must be > 0")
        if self.method not in ("DOP853", "RK45"):
            raise ValueError(f"Unsupported integrator '{self.method}'")

    @property
    def space(self) -> FockSpace:
        return self.hamiltonian.space

    @property
    def duration(self) -> float:
        return self.t_span[1] - self.t_span[0]

    def effective_max_step(self) -> float:
        if self.max_step is not None:
            return self.max_step
        step = self.duration / 100.0
        peak = max((abs(d.prefactor) * d.envelope.peak for d in self.drives), default=0.0)
        if peak > 0.0:
            step = min(step, 1.0 / (10.0 * peak))
        return step

    def scaled(self, factor: float) -> EvolutionSpec:
        """Copy with both tolerances multiplied by ``factor``."""
        rtol, atol = self.tolerances
        return EvolutionSpec(
            self.hamiltonian,
            self.drives,
            self.collapse_ops,
            self.t_span,
            (rtol * factor, atol * factor),
            self.max_step,
            self.method,
        )


@dataclass
class EvolutionResult:
    """Final state of an evolution plus the optional trajectory.

    Attributes:
        state: State at t1
        times: Sample times (empty unless requested)
        expectations: Observable name → values at the sample times
        stats: Solver statistics (nfev, status, message, trace_drift)
    """

    state: QuantumState
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    expectations: dict[str, np.ndarray] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)


class _Generator:
    """Static Liouvillian plus drive superoperators, forward or adjoint."""

    def __init__(self, spec: EvolutionSpec, adjoint: bool = False) -> None:
        self.n = spec.space.total_dim
        self.adjoint = adjoint
        static = liouvillian(spec.hamiltonian, spec.collapse_ops)
        self.drives = spec.drives
        pairs = [_drive_superops(d, spec.space) for d in spec.drives]
        if adjoint:
            static = static.getH().tocsr()
            pairs = [(s.getH().tocsr(), sd.getH().tocsr()) for s, sd in pairs]
        self.static = static
        self.pairs = pairs

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        rho = y.reshape(self.n, self.n)
        y = (0.5 * (rho + rho.conj().T)).reshape(-1)
        out = self.static @ y
        for drive, (s, s_dag) in zip(self.drives, self.pairs, strict=True):
            f = drive.coefficient(t)
            if f == 0.0:
                continue
            if self.adjoint:
                # (f S)^H = f* S^H
                out = out + np.conj(f) * (s @ y) + f * (s_dag @ y)
            else:
                out = out + f * (s @ y) + np.conj(f) * (s_dag @ y)
        return out


def _symmetrize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def evolve(
    state: QuantumState,
    spec: EvolutionSpec,
    sample_times: Sequence[float] | None = None,
    observables: Mapping[str, Operator] | None = None,
) -> EvolutionResult:
    """Integrate dρ/dt = −i[H(t), ρ] + Σ κ D[L]ρ over ``spec.t_span``.

    Args:
        state: Initial state (pure states are converted to ρ)
        spec: Hamiltonian, drives, channels and integrator settings
        sample_times: Optional times at which to record ``observables``
        observables: Optional name → Operator map for the trajectory

    Returns:
        EvolutionResult with the final state and the trajectory

    Raises:
        SubsystemError: If state and spec live on different spaces
        IntegratorError: On step-size underflow or tolerance failure
        TraceDriftError: If the trace drifts by more than 1e-6
    """
    if state.space != spec.space:
        raise SubsystemError("State and evolution spec live on different spaces")
    n = spec.space.total_dim
    t0, t1 = spec.t_span
    times = np.asarray(sample_times if sample_times is not None else [], dtype=float)
    if times.size and (times.min() < t0 or times.max() > t1):
        raise UnphysicalInputError("Sample times must lie inside t_span")
    t_eval = np.unique(np.concatenate([times, [t1]]))

    rhs = _Generator(spec)
    rtol, atol = spec.tolerances
    y0 = state.density().reshape(-1).astype(complex)
    solution = solve_ivp(
        rhs,
        (t0, t1),
        y0,
        method=spec.method,
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
        max_step=spec.effective_max_step(),
    )
    if solution.status != 0:
        raise IntegratorError(f"Master-equation integration failed: {solution.message}")

    samples = solution.y.T.reshape(-1, n, n)
    traces = np.real(np.trace(samples, axis1=1, axis2=2))
    drift = float(np.max(np.abs(traces - state.trace())))
    if drift > TRACE_DRIFT_LIMIT:
        raise TraceDriftError(f"Trace drifted by {drift:.3e} (limit {TRACE_DRIFT_LIMIT:.0e})")
    logger.debug(
        "evolve %s over %.3e s: nfev=%d status=%d drift=%.2e",
        spec.method,
        spec.duration,
        solution.nfev,
        solution.status,
        drift,
    )

    final = QuantumState(spec.space, _symmetrize(samples[-1]), pure=False)
    expectations: dict[str, np.ndarray] = {}
    if times.size and observables:
        index = np.searchsorted(t_eval, times)
        for name, op in observables.items():
            expectations[name] = np.array(
                [
                    QuantumState(spec.space, _symmetrize(samples[i]), pure=False).expect_real(op)
                    for i in index
                ]
            )
    return EvolutionResult(
        state=final,
        times=times,
        expectations=expectations,
        stats={
            "nfev": int(solution.nfev),
            "status": int(solution.status),
            "message": str(solution.message),
            "trace_drift": drift,
        },
    )


def evolve_observable(observable: Operator, spec: EvolutionSpec) -> Operator:
    """Heisenberg-picture observable M with Tr[M ρ(t0)] = Tr[Π ρ(t1)].

    Integrates the adjoint equation dw/ds = −L(s)^H w backwards from
    w(t1) = vec(Π†), so one integration serves every initial state.

    Raises:
        IntegratorError: On integration failure
    """
    if observable.space != spec.space:
        raise SubsystemError("Observable and evolution spec live on different spaces")
    n = spec.space.total_dim
    t0, t1 = spec.t_span
    adjoint = _Generator(spec, adjoint=True)
    rtol, atol = spec.tolerances

    def backward(t: float, y: np.ndarray) -> np.ndarray:
        return -adjoint(t, y)

    y1 = observable.matrix.getH().toarray().reshape(-1)
    solution = solve_ivp(
        backward,
        (t1, t0),
        y1,
        method=spec.method,
        t_eval=[t0],
        rtol=rtol,
        atol=atol,
        max_step=spec.effective_max_step(),
    )
    if solution.status != 0:
        raise IntegratorError(f"Adjoint integration failed: {solution.message}")
    logger.debug("evolve_observable nfev=%d", solution.nfev)
    heisenberg_dag = solution.y[:, -1].reshape(n, n)
    return Operator(spec.space, sp.csr_matrix(_symmetrize(heisenberg_dag.conj().T)))


# =============================================================================
# Closed-form idle evolution
# =============================================================================


class IdlePropagator:
    """exp(L·t) for a time-independent Liouvillian, applied to vec(ρ).

    Small generators (≤ 1024 rows) are exponentiated densely and cached by
    step length; larger ones go through ``expm_multiply``.
    """

    def __init__(self, generator: sp.csr_matrix, space: FockSpace) -> None:
        self.generator = generator.tocsr()
        self.space = space
        self.dense = generator.shape[0] <= DENSE_PROPAGATOR_LIMIT
        self._dense_generator = self.generator.toarray() if self.dense else None
        self._cache: dict[tuple[float, bool], np.ndarray] = {}

    @classmethod
    def build(
        cls,
        hamiltonian: Operator,
        collapse_ops: Iterable[CollapseChannel | tuple[Operator, float]],
        drives: Sequence[DriveTerm] = (),
    ) -> IdlePropagator:
        """Propagator for H plus constant drives and the given channels.

        Raises:
            UnphysicalInputError: If a drive has a time-dependent coefficient
        """
        total = hamiltonian
        for drive in drives:
            if not drive.is_static:
                raise UnphysicalInputError(
                    f"Drive '{drive.kind}' is time dependent; use evolve instead"
                )
            f = drive.coefficient(drive.envelope.support[0])
            a = drive.operator(hamiltonian.space)
            total = total + (a * f + a.dag() * np.conj(f))
        return cls(liouvillian(total, collapse_ops), hamiltonian.space)

    def _matrix(self, dt: float, adjoint: bool) -> np.ndarray:
        key = (round(dt, 15), adjoint)
        if key not in self._cache:
            assert self._dense_generator is not None
            gen = self._dense_generator.conj().T if adjoint else self._dense_generator
            self._cache[key] = scipy.linalg.expm(gen * dt)
        return self._cache[key]

    def step(self, vector: np.ndarray, dt: float, adjoint: bool = False) -> np.ndarray:
        if dt == 0.0:
            return vector
        if dt < 0.0:
            raise UnphysicalInputError(f"Idle duration must be >= 0, got {dt}")
        if self.dense:
            return self._matrix(dt, adjoint) @ vector
        gen = self.generator.getH() if adjoint else self.generator
        return expm_multiply(gen * dt, vector)

    def series(self, state: QuantumState, durations: Sequence[float]) -> list[QuantumState]:
        """States after each duration, computed by stepping through sorted times."""
        if state.space != self.space:
            raise SubsystemError("State and propagator live on different spaces")
        n = self.space.total_dim
        order = np.argsort(durations, kind="stable")
        results: list[QuantumState | None] = [None] * len(durations)
        vector = state.density().reshape(-1).astype(complex)
        elapsed = 0.0
        for i in order:
            target = float(durations[i])
            vector = self.step(vector, target - elapsed)
            elapsed = target
            rho = _symmetrize(vector.reshape(n, n))
            results[i] = QuantumState(self.space, rho, pure=False)
        return [r for r in results if r is not None]

    def evolve_state(self, state: QuantumState, duration: float) -> QuantumState:
        return self.series(state, [duration])[0]

    def evolve_observable(self, observable: Operator, duration: float) -> Operator:
        """Heisenberg picture over an idle period: M = exp(L^H t)(Π)."""
        n = self.space.total_dim
        w = observable.matrix.getH().toarray().reshape(-1)
        w = self.step(w, duration, adjoint=True)
        return Operator(self.space, sp.csr_matrix(_symmetrize(w.reshape(n, n).conj().T)))


def idle(
    state: QuantumState,
    params: SystemParams,
    durations: Sequence[float],
    drives: Sequence[DriveTerm] = (),
    f_level: FLevelModel = "measured",
    include: Collection[str] | None = None,
) -> list[QuantumState]:
    """Evolve under the static Hamiltonian and collapse channels in closed form.

    Args:
        state: Initial state
        params: Device parameters
        durations: Idle times (s), any order, ≥ 0
        drives: Constant-coefficient drives (e.g. a reset tone)
        f_level: Transmon f-level model for the channels
        include: Optional channel names to keep

    Returns:
        One state per duration, in input order
    """
    space = state.space
    propagator = IdlePropagator.build(
        build_static_hamiltonian(params, space),
        collapse_channels(params, space, f_level=f_level, include=include),
        drives,
    )
    return propagator.series(state, durations)


def zero_hamiltonian(space: FockSpace) -> Operator:
    """H = 0 on ``space`` (pure dissipation or a no-op evolution)."""
    return identity(space) * 0.0


def scaled_tolerances(scale: float, base: tuple[float, float] = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Multiply both integrator tolerances by ``scale`` (> 0)."""
    if not scale > 0.0:
        raise UnphysicalInputError(f"Tolerance scale must be > 0, got {scale}")
    return (base[0] * scale, base[1] * scale)
