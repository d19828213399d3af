"""Truncated Fock spaces, mode operators, states and phase-space functions.

Design Decision: Sparse operators, dense exponentials

Rationale: Every Hamiltonian and collapse operator of the device is a
product of ladder operators, so it has O(dim) non-zeros. Storing them as
CSR matrices keeps Liouvillian assembly and matrix-vector products cheap.
The displacement operator is the exception: exp(αa† − α*a) is dense, so it
is built on the single mode with ``scipy.linalg.expm`` (scaling and
squaring with a Padé approximant) and only then embedded.

Trade-offs:
- Accuracy: the truncated exponential is exactly unitary but wrong near the
  top of the ladder, hence the truncation guard n̄ + 5√n̄ + 10 ≤ dim
- Memory: dense single-mode blocks up to a few hundred levels are fine

Subsystem order is fixed when a ``FockSpace`` is built; every operator and
state built on that space uses the same Kronecker order.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.special import gammaln

from cavity_memory.exceptions import (
    SubsystemError,
    TruncationError,
    UnphysicalInputError,
)


logger = logging.getLogger(__name__)

WignerConvention = Literal["standard", "unit", "paper"]

# Spellings of the c = 1 convention
UNIT_CONVENTIONS = frozenset({"unit", "paper"})

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-6
STATE_HERMITIAN_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8


# =============================================================================
# Spaces
# =============================================================================


@dataclass(frozen=True)
class FockSpace:
    """Ordered tensor product of truncated oscillator spaces.

    Attributes:
        dims: Truncation dimension of each subsystem (cavity, transmon, ...)
        labels: Subsystem names, same order as dims

    Example:
        >>> space = FockSpace((20, 3), ("cavity", "transmon"))
        >>> space.total_dim
        60
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise SubsystemError(
                f"{len(self.dims)} dims given for {len(self.labels)} labels"
            )
        if not self.dims:
            raise SubsystemError("A Fock space needs at least one subsystem")
        if len(set(self.labels)) != len(self.labels):
            raise SubsystemError(f"Duplicate subsystem labels: {self.labels}")
        for label, dim in zip(self.labels, self.dims, strict=True):
            if dim < 2:
                raise SubsystemError(f"Subsystem '{label}' needs dim >= 2, got {dim}")

    @classmethod
    def cavity_transmon(
        cls,
        cavity_dim: int,
        transmon_dim: int | None = 3,
        readout_dim: int | None = None,
    ) -> FockSpace:
        """Build the usual cavity ⊗ transmon (⊗ readout) space."""
        dims: list[int] = [cavity_dim]
        labels: list[str] = ["cavity"]
        if transmon_dim is not None:
            dims.append(transmon_dim)
            labels.append("transmon")
        if readout_dim is not None:
            dims.append(readout_dim)
            labels.append("readout")
        return cls(tuple(dims), tuple(labels))

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def has(self, label: str) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        """Position of a subsystem in the Kronecker order.

        Raises:
            SubsystemError: If the label is not part of this space
        """
        try:
            return self.labels.index(label)
        except ValueError:
            raise SubsystemError(
                f"Unknown subsystem '{label}'; space has {list(self.labels)}"
            ) from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def subspace(self, labels: Sequence[str]) -> FockSpace:
        """Space made of the given subsystems, kept in this space's order."""
        keep = sorted(self.index(label) for label in labels)
        return FockSpace(
            tuple(self.dims[i] for i in keep), tuple(self.labels[i] for i in keep)
        )


def required_dim(amplitude: float) -> int:
    """Smallest truncation passing the guard for a coherent amplitude.

    The guard is |α|² + 5|α| + 10 ≤ dim, i.e. mean photon number plus five
    standard deviations of the Poisson distribution plus a margin.
    """
    r = abs(amplitude)
    return int(math.ceil(r * r + 5.0 * r + 10.0 - 1e-9))


def check_truncation(amplitude: float, dim: int) -> None:
    """Raise TruncationError if ``dim`` cannot hold amplitude ``amplitude``."""
    needed = required_dim(amplitude)
    if needed > dim:
        raise TruncationError(abs(amplitude), dim, needed)


# =============================================================================
# Operators
# =============================================================================


@dataclass(frozen=True)
class Operator:
    """Sparse operator on a full ``FockSpace``.

    Attributes:
        space: Space the matrix acts on
        matrix: CSR matrix of shape (total_dim, total_dim)
        hermitian_hint: Caller asserts A = A†; checked to 1e-12
    """

    space: FockSpace
    matrix: sp.csr_matrix
    hermitian_hint: bool = False

    def __post_init__(self) -> None:
        matrix = sp.csr_matrix(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        n = self.space.total_dim
        if matrix.shape != (n, n):
            raise SubsystemError(
                f"Operator shape {matrix.shape} does not match space dim {n}"
            )
        if self.hermitian_hint:
            diff = matrix - matrix.getH()
            worst = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
            if worst >= HERMITIAN_TOL:
                raise UnphysicalInputError(
                    f"Operator flagged Hermitian but max |A - A†| = {worst:.3e}"
                )

    def dag(self) -> Operator:
        return Operator(self.space, self.matrix.getH().tocsr(), self.hermitian_hint)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def _check_space(self, other: Operator) -> None:
        if other.space != self.space:
            raise SubsystemError("Operators live on different spaces")

    def __matmul__(self, other: Operator) -> Operator:
        self._check_space(other)
        return Operator(self.space, (self.matrix @ other.matrix).tocsr())

    def __add__(self, other: Operator) -> Operator:
        self._check_space(other)
        return Operator(
            self.space,
            (self.matrix + other.matrix).tocsr(),
            self.hermitian_hint and other.hermitian_hint,
        )

    def __sub__(self, other: Operator) -> Operator:
        self._check_space(other)
        return Operator(
            self.space,
            (self.matrix - other.matrix).tocsr(),
            self.hermitian_hint and other.hermitian_hint,
        )

    def __mul__(self, scalar: complex) -> Operator:
        hermitian = self.hermitian_hint and complex(scalar).imag == 0.0
        return Operator(self.space, (self.matrix * scalar).tocsr(), hermitian)

    __rmul__ = __mul__

    def __neg__(self) -> Operator:
        return self * -1.0


def _embed(space: FockSpace, subsystem: str, local: sp.spmatrix | np.ndarray) -> sp.csr_matrix:
    """Kronecker-embed a single-mode matrix, identity on the other factors."""
    position = space.index(subsystem)
    if local.shape != (space.dims[position],) * 2:
        raise SubsystemError(
            f"Local matrix {local.shape} does not fit '{subsystem}' "
            f"(dim {space.dims[position]})"
        )
    result = sp.identity(1, dtype=complex, format="csr")
    for i, d in enumerate(space.dims):
        factor = sp.csr_matrix(local) if i == position else sp.identity(d, format="csr")
        result = sp.kron(result, factor, format="csr")
    return result


def _local_annihilation(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), offsets=1, format="csr").astype(
        complex
    )


def identity(space: FockSpace) -> Operator:
    return Operator(space, sp.identity(space.total_dim, dtype=complex, format="csr"), True)


def annihilation(space: FockSpace, subsystem: str) -> Operator:
    """Lowering operator of one mode embedded in the full space.

    a|n⟩ = √n|n−1⟩ on the chosen factor, identity on every other factor.

    Args:
        space: Full composite space
        subsystem: Label of the mode ("cavity", "transmon", "readout")

    Returns:
        Sparse Operator

    Raises:
        SubsystemError: If the label is unknown
    """
    dim = space.dim(subsystem)
    return Operator(space, _embed(space, subsystem, _local_annihilation(dim)))


def creation(space: FockSpace, subsystem: str) -> Operator:
    return annihilation(space, subsystem).dag()


def number(space: FockSpace, subsystem: str) -> Operator:
    dim = space.dim(subsystem)
    local = sp.diags(np.arange(dim, dtype=float), format="csr")
    return Operator(space, _embed(space, subsystem, local), True)


def parity_operator(space: FockSpace, subsystem: str) -> Operator:
    """Photon-number parity (−1)^n of one mode."""
    dim = space.dim(subsystem)
    local = sp.diags((-1.0) ** np.arange(dim), format="csr")
    return Operator(space, _embed(space, subsystem, local), True)


def diagonal_operator(space: FockSpace, subsystem: str, values: Sequence[float]) -> Operator:
    """Operator diagonal in the Fock basis of one mode with given entries."""
    dim = space.dim(subsystem)
    if len(values) != dim:
        raise SubsystemError(f"Need {dim} diagonal entries for '{subsystem}'")
    local = sp.diags(np.asarray(values, dtype=complex), format="csr")
    return Operator(space, _embed(space, subsystem, local))


def transition_operator(space: FockSpace, subsystem: str, to: int, frm: int) -> Operator:
    """|to⟩⟨frm| on one mode."""
    dim = space.dim(subsystem)
    local = sp.csr_matrix(([1.0], ([to], [frm])), shape=(dim, dim), dtype=complex)
    return Operator(space, _embed(space, subsystem, local))


def local_operator(space: FockSpace, subsystem: str, matrix: np.ndarray) -> Operator:
    """Embed an arbitrary single-mode matrix (e.g. a qubit rotation)."""
    return Operator(space, _embed(space, subsystem, np.asarray(matrix, dtype=complex)))


def basis_projector(space: FockSpace, subsystem: str, vector: Sequence[complex]) -> Operator:
    """Projector |v⟩⟨v| on one mode (v normalised here), identity elsewhere."""
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    local = np.outer(v, v.conj())
    return Operator(space, _embed(space, subsystem, local), True)


def local_displacement(dim: int, alpha: complex) -> np.ndarray:
    """Dense D(α) on a single mode of dimension ``dim`` (no guard)."""
    a = _local_annihilation(dim).toarray()
    generator = alpha * a.conj().T - np.conj(alpha) * a
    return scipy.linalg.expm(generator)


def displacement(space: FockSpace, subsystem: str, alpha: complex) -> Operator:
    """Displacement operator D(α) = exp(αa† − α*a) on one mode.

    Args:
        space: Full composite space
        subsystem: Mode to displace
        alpha: Complex displacement amplitude

    Returns:
        Unitary Operator (dense block embedded sparsely)

    Raises:
        TruncationError: If |α|² + 5|α| + 10 exceeds the mode dimension
    """
    dim = space.dim(subsystem)
    check_truncation(abs(alpha), dim)
    return Operator(space, _embed(space, subsystem, local_displacement(dim, alpha)))


# =============================================================================
# States
# =============================================================================


@dataclass(frozen=True)
class QuantumState:
    """Pure or mixed state on a ``FockSpace``.

    Pure states keep their state vector (``pure=True``); mixed states keep
    the density matrix. Use :meth:`density` when a matrix is needed.

    Attributes:
        space: Space of the state
        data: State vector (pure) or density matrix (mixed)
        pure: True when ``data`` is a vector
    """

    space: FockSpace
    data: np.ndarray = field(repr=False)
    pure: bool = False

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        n = self.space.total_dim
        expected = (n,) if self.pure else (n, n)
        if data.shape != expected:
            raise SubsystemError(f"State data shape {data.shape}, expected {expected}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_vector(cls, space: FockSpace, vector: np.ndarray) -> QuantumState:
        vector = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(vector)
        if abs(norm - 1.0) > TRACE_TOL:
            raise UnphysicalInputError(f"State vector norm {norm:.8f} is not 1")
        return cls(space, vector, pure=True)

    @classmethod
    def from_density(
        cls, space: FockSpace, rho: np.ndarray, validate: bool = True
    ) -> QuantumState:
        """Wrap a density matrix, symmetrising it first.

        Raises:
            UnphysicalInputError: If trace, Hermiticity or positivity fail
        """
        rho = np.asarray(rho, dtype=complex)
        if validate:
            asym = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
            if asym > 1e-6:
                raise UnphysicalInputError(f"Density matrix not Hermitian ({asym:.2e})")
        rho = 0.5 * (rho + rho.conj().T)
        state = cls(space, rho, pure=False)
        if validate:
            state.validate()
        return state

    def validate(self) -> None:
        """Check the density-matrix invariants (trace, Hermitian, positive)."""
        if self.pure:
            norm = np.linalg.norm(self.data)
            if abs(norm - 1.0) > TRACE_TOL:
                raise UnphysicalInputError(f"State vector norm {norm:.8f} is not 1")
            return
        rho = self.data
        trace = np.trace(rho).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise UnphysicalInputError(f"Density matrix trace {trace:.8f} is not 1")
        asym = float(np.max(np.abs(rho - rho.conj().T)))
        if asym > STATE_HERMITIAN_TOL:
            raise UnphysicalInputError(f"Density matrix not Hermitian ({asym:.2e})")
        lowest = float(np.linalg.eigvalsh(rho)[0])
        if lowest < EIGENVALUE_FLOOR:
            raise UnphysicalInputError(f"Density matrix eigenvalue {lowest:.2e} < 0")

    # -- views --------------------------------------------------------------

    def density(self) -> np.ndarray:
        if self.pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def as_mixed(self) -> QuantumState:
        return QuantumState(self.space, self.density(), pure=False)

    def trace(self) -> float:
        if self.pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def purity(self) -> float:
        if self.pure:
            return 1.0
        return float(np.real(np.vdot(self.data, self.data)))

    def expect(self, op: Operator) -> complex:
        """⟨A⟩ = Tr[ρA]."""
        if op.space != self.space:
            raise SubsystemError("Operator and state live on different spaces")
        if self.pure:
            return complex(np.vdot(self.data, op.matrix @ self.data))
        return complex(np.sum(op.matrix.multiply(self.data.T)))

    def expect_real(self, op: Operator) -> float:
        return float(self.expect(op).real)

    # -- transformations ----------------------------------------------------

    def apply(self, op: Operator) -> QuantumState:
        """Conjugate by an operator: ρ → AρA† (vector: A|ψ⟩)."""
        if op.space != self.space:
            raise SubsystemError("Operator and state live on different spaces")
        if self.pure:
            return QuantumState(self.space, op.matrix @ self.data, pure=True)
        m = op.matrix
        rho = m @ (m @ self.data.conj().T).conj().T
        return QuantumState(self.space, np.asarray(rho), pure=False)

    def normalized(self) -> QuantumState:
        tr = self.trace()
        if tr <= 0.0:
            raise UnphysicalInputError("Cannot normalise a state with zero trace")
        if self.pure:
            return QuantumState(self.space, self.data / math.sqrt(tr), pure=True)
        return QuantumState(self.space, self.data / tr, pure=False)

    def tensor(self, other: QuantumState) -> QuantumState:
        space = FockSpace(self.space.dims + other.space.dims, self.space.labels + other.space.labels)
        if self.pure and other.pure:
            return QuantumState(space, np.kron(self.data, other.data), pure=True)
        return QuantumState(space, np.kron(self.density(), other.density()), pure=False)

    def ptrace(self, keep: Iterable[str]) -> QuantumState:
        """Reduced state on the kept subsystems (order of this space)."""
        sub = self.space.subspace(list(keep))
        keep_idx = [self.space.index(label) for label in sub.labels]
        dims = self.space.dims
        n = len(dims)
        rho = self.density().reshape(dims + dims)
        # Trace out from the highest axis down so indices stay valid
        for i in reversed(range(n)):
            if i in keep_idx:
                continue
            current_n = rho.ndim // 2
            rho = np.trace(rho, axis1=i, axis2=i + current_n)
        d = sub.total_dim
        return QuantumState(sub, rho.reshape(d, d), pure=False)

    def fidelity(self, other: QuantumState) -> float:
        """Uhlmann fidelity (squared convention, 1 for identical states)."""
        if other.space != self.space:
            raise SubsystemError("States live on different spaces")
        if self.pure and other.pure:
            return float(abs(np.vdot(self.data, other.data)) ** 2)
        if self.pure or other.pure:
            psi, mixed = (self, other) if self.pure else (other, self)
            return float(np.real(np.vdot(psi.data, mixed.data @ psi.data)))
        evals, evecs = np.linalg.eigh(self.data)
        sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
        inner = sqrt_rho @ other.data @ sqrt_rho
        inner_evals = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
        return float(np.sum(np.sqrt(inner_evals)) ** 2)


def fock_state(space: FockSpace, levels: Mapping[str, int] | Sequence[int]) -> QuantumState:
    """Product Fock state, e.g. ``fock_state(space, {"cavity": 1})``.

    Subsystems not named are left in |0⟩.
    """
    if isinstance(levels, Mapping):
        for label in levels:
            space.index(label)
        occupation = [int(levels.get(label, 0)) for label in space.labels]
    else:
        occupation = [int(n) for n in levels]
        if len(occupation) != len(space.dims):
            raise SubsystemError(f"Need {len(space.dims)} occupation numbers")
    vector = np.zeros(1, dtype=complex)
    vector[0] = 1.0
    for n, d, label in zip(occupation, space.dims, space.labels, strict=True):
        if not 0 <= n < d:
            raise SubsystemError(f"Level {n} outside '{label}' truncation {d}")
        local = np.zeros(d, dtype=complex)
        local[n] = 1.0
        vector = np.kron(vector, local)
    return QuantumState(space, vector, pure=True)


def _coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def product_state(space: FockSpace, locals_: Mapping[str, np.ndarray]) -> QuantumState:
    """Pure product state from single-mode vectors; unnamed modes in |0⟩."""
    vector = np.ones(1, dtype=complex)
    for label, d in zip(space.labels, space.dims, strict=True):
        local = locals_.get(label)
        if local is None:
            local = np.zeros(d, dtype=complex)
            local[0] = 1.0
        local = np.asarray(local, dtype=complex)
        if local.shape != (d,):
            raise SubsystemError(f"Vector for '{label}' has shape {local.shape}, need ({d},)")
        vector = np.kron(vector, local)
    return QuantumState(space, vector, pure=True)


def coherent_state(space: FockSpace, subsystem: str, alpha: complex) -> QuantumState:
    """Coherent state |α⟩ on one mode, vacuum elsewhere.

    Amplitudes e^{−|α|²/2}αⁿ/√n! are evaluated in log space; the truncated
    vector is renormalised (the guard keeps the discarded tail below 1e-8).

    Raises:
        TruncationError: If the mode dimension fails the guard
    """
    dim = space.dim(subsystem)
    check_truncation(abs(alpha), dim)
    amps = _coherent_amplitudes(dim, complex(alpha))
    amps /= np.linalg.norm(amps)
    return product_state(space, {subsystem: amps})


def cat_state(space: FockSpace, subsystem: str, alpha: complex, parity: int = 1) -> QuantumState:
    """Analytic cat N(|α⟩ ± |−α⟩) on one mode; parity +1 (even) or −1 (odd)."""
    if parity not in (1, -1):
        raise UnphysicalInputError(f"Cat parity must be +1 or -1, got {parity}")
    dim = space.dim(subsystem)
    check_truncation(abs(alpha), dim)
    if parity == -1 and alpha == 0:
        raise UnphysicalInputError("Odd cat with alpha=0 does not exist")
    plus = _coherent_amplitudes(dim, complex(alpha))
    minus = _coherent_amplitudes(dim, -complex(alpha))
    amps = plus + parity * minus
    amps /= np.linalg.norm(amps)
    return product_state(space, {subsystem: amps})


# =============================================================================
# Phase space
# =============================================================================


def wigner(
    state: QuantumState,
    subsystem: str,
    grid: Sequence[complex] | np.ndarray,
    convention: WignerConvention = "standard",
) -> np.ndarray:
    """Wigner function from displaced parity, W(β) = c·Tr[ρD(β)PD†(β)].

    Args:
        state: State; other subsystems are traced out first
        subsystem: Mode whose phase space is sampled
        grid: Complex points β
        convention: "standard" (c = 2/π) or "unit" (c = 1, values in [−1, 1]);
            "paper" is accepted as another name for "unit"

    Returns:
        Real array of W values, same shape as ``grid``

    Raises:
        TruncationError: If a displaced state would leave the truncation
    """
    if convention != "standard" and convention not in UNIT_CONVENTIONS:
        raise ValueError(f"Unknown Wigner convention '{convention}'")
    scale = 2.0 / math.pi if convention == "standard" else 1.0
    reduced = state if state.space.labels == (subsystem,) else state.ptrace([subsystem])
    dim = reduced.space.dims[0]

    rho = reduced.density()
    nbar = float(np.real(np.sum(np.arange(dim) * np.diag(rho))))
    points = np.asarray(grid, dtype=complex)
    flat = points.ravel()
    reach = float(np.max(np.abs(flat))) + math.sqrt(max(nbar, 0.0)) if flat.size else 0.0
    check_truncation(reach, dim)

    signs = (-1.0) ** np.arange(dim)
    pure_vector = state.data if (state.pure and reduced is state) else None
    values = np.empty(flat.shape, dtype=float)
    for k, beta in enumerate(flat):
        d_minus = local_displacement(dim, -beta)
        if pure_vector is not None:
            shifted = d_minus @ pure_vector
            values[k] = float(np.sum(signs * np.abs(shifted) ** 2))
        else:
            shifted_rho = d_minus @ rho @ d_minus.conj().T
            values[k] = float(np.sum(signs * np.real(np.diag(shifted_rho))))
    logger.debug("Wigner evaluated on %d points (dim %d)", flat.size, dim)
    return scale * values.reshape(points.shape)
