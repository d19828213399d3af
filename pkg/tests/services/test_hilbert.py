"""Tests for Fock spaces, operators, states and the Wigner function."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cavity_memory.exceptions import SubsystemError, TruncationError, UnphysicalInputError
from cavity_memory.services.hilbert import (
    FockSpace,
    Operator,
    QuantumState,
    annihilation,
    cat_state,
    check_truncation,
    coherent_state,
    creation,
    displacement,
    fock_state,
    identity,
    number,
    parity_operator,
    required_dim,
    wigner,
)


class TestFockSpace:
    """Test suite for FockSpace construction and lookup."""

    def test_total_dim(self) -> None:
        """Total dimension is the product of subsystem dimensions."""
        space = FockSpace((20, 3), ("cavity", "transmon"))
        assert space.total_dim == 60

    def test_cavity_transmon_with_readout(self) -> None:
        """Factory keeps cavity, transmon, readout order."""
        space = FockSpace.cavity_transmon(10, 3, readout_dim=2)
        assert space.labels == ("cavity", "transmon", "readout")
        assert space.dims == (10, 3, 2)

    def test_duplicate_labels_rejected(self) -> None:
        """Duplicate labels raise SubsystemError."""
        with pytest.raises(SubsystemError, match="Duplicate"):
            FockSpace((3, 3), ("cavity", "cavity"))

    def test_dimension_below_two_rejected(self) -> None:
        """A one-level subsystem is not allowed."""
        with pytest.raises(SubsystemError):
            FockSpace((1,), ("cavity",))

    def test_unknown_label(self) -> None:
        """Looking up a missing subsystem raises SubsystemError."""
        space = FockSpace((4,), ("cavity",))
        with pytest.raises(SubsystemError, match="Unknown subsystem"):
            space.index("transmon")

    def test_subspace_keeps_order(self) -> None:
        """Subspace keeps the parent Kronecker order."""
        space = FockSpace.cavity_transmon(5, 3, readout_dim=2)
        sub = space.subspace(["readout", "cavity"])
        assert sub.labels == ("cavity", "readout")
        assert sub.dims == (5, 2)


class TestTruncationGuard:
    """Test suite for the truncation guard."""

    def test_required_dim_vacuum(self) -> None:
        """Vacuum needs the fixed margin of 10 levels."""
        assert required_dim(0.0) == 10

    def test_required_dim_amplitude_two(self) -> None:
        """|alpha|=2 needs 4 + 10 + 10 = 24 levels."""
        assert required_dim(2.0) == 24

    def test_check_truncation_raises(self) -> None:
        """A space one level short fails the guard."""
        with pytest.raises(TruncationError) as exc_info:
            check_truncation(2.0, 23)
        assert exc_info.value.required == 24
        assert exc_info.value.dim == 23

    def test_coherent_state_respects_guard(self) -> None:
        """Coherent state construction refuses a too-small cavity."""
        space = FockSpace((12,), ("cavity",))
        with pytest.raises(TruncationError):
            coherent_state(space, "cavity", 2.0)


class TestOperators:
    """Test suite for ladder and derived operators."""

    def test_annihilation_lowers_fock_state(self, cavity_space: FockSpace) -> None:
        """a|3> = sqrt(3)|2>."""
        a = annihilation(cavity_space, "cavity")
        lowered = fock_state(cavity_space, {"cavity": 3}).apply(a)
        expected = np.zeros(cavity_space.total_dim)
        expected[2] = math.sqrt(3.0)
        np.testing.assert_allclose(lowered.data, expected, atol=1e-12)

    def test_commutator_below_cutoff(self, cavity_space: FockSpace) -> None:
        """[a, a+] is the identity except at the truncation edge."""
        a = annihilation(cavity_space, "cavity")
        ad = creation(cavity_space, "cavity")
        comm = (a @ ad - ad @ a).dense()
        n = cavity_space.total_dim
        np.testing.assert_allclose(np.diag(comm)[: n - 1], np.ones(n - 1), atol=1e-12)

    def test_embedding_on_second_factor(self, encoding_space: FockSpace) -> None:
        """Number operator of the transmon counts transmon excitations only."""
        state = fock_state(encoding_space, {"cavity": 2, "transmon": 1})
        assert state.expect_real(number(encoding_space, "transmon")) == pytest.approx(1.0)
        assert state.expect_real(number(encoding_space, "cavity")) == pytest.approx(2.0)

    def test_hermitian_hint_checked(self, cavity_space: FockSpace) -> None:
        """Flagging a non-Hermitian matrix as Hermitian is rejected."""
        a = annihilation(cavity_space, "cavity")
        with pytest.raises(UnphysicalInputError, match="Hermitian"):
            Operator(cavity_space, a.matrix, hermitian_hint=True)

    def test_operators_on_different_spaces(self, cavity_space: FockSpace) -> None:
        """Combining operators across spaces raises SubsystemError."""
        other = FockSpace((5,), ("cavity",))
        with pytest.raises(SubsystemError):
            _ = identity(cavity_space) + identity(other)

    def test_displacement_is_unitary(self, cavity_space: FockSpace) -> None:
        """D(alpha) D(alpha)+ = I on the truncated space."""
        d = displacement(cavity_space, "cavity", 1.0 + 0.5j).dense()
        np.testing.assert_allclose(d @ d.conj().T, np.eye(cavity_space.total_dim), atol=1e-10)

    def test_displacement_of_vacuum_is_coherent(self, cavity_space: FockSpace) -> None:
        """D(alpha)|0> matches the analytic coherent state."""
        alpha = 1.2 - 0.4j
        displaced = fock_state(cavity_space, {"cavity": 0}).apply(
            displacement(cavity_space, "cavity", alpha)
        )
        assert displaced.fidelity(coherent_state(cavity_space, "cavity", alpha)) == pytest.approx(
            1.0, abs=1e-8
        )


class TestStates:
    """Test suite for QuantumState and the state constructors."""

    def test_coherent_mean_photon_number(self, cavity_space: FockSpace) -> None:
        """<n> of |alpha> is |alpha|^2."""
        state = coherent_state(cavity_space, "cavity", 2.0)
        assert state.expect_real(number(cavity_space, "cavity")) == pytest.approx(4.0, abs=1e-6)

    def test_cat_parities(self, cavity_space: FockSpace) -> None:
        """Even cats have parity +1 and odd cats -1."""
        parity = parity_operator(cavity_space, "cavity")
        assert cat_state(cavity_space, "cavity", 1.5, 1).expect_real(parity) == pytest.approx(1.0)
        assert cat_state(cavity_space, "cavity", 1.5, -1).expect_real(parity) == pytest.approx(
            -1.0
        )

    def test_odd_cat_at_zero_amplitude(self, cavity_space: FockSpace) -> None:
        """An odd cat with alpha = 0 does not exist."""
        with pytest.raises(UnphysicalInputError):
            cat_state(cavity_space, "cavity", 0.0, -1)

    def test_unnormalised_vector_rejected(self, cavity_space: FockSpace) -> None:
        """from_vector checks the norm."""
        vector = np.zeros(cavity_space.total_dim)
        vector[0] = 2.0
        with pytest.raises(UnphysicalInputError, match="norm"):
            QuantumState.from_vector(cavity_space, vector)

    def test_non_hermitian_density_rejected(self) -> None:
        """from_density rejects a non-Hermitian matrix."""
        space = FockSpace((2,), ("cavity",))
        rho = np.array([[0.5, 0.5], [0.0, 0.5]])
        with pytest.raises(UnphysicalInputError, match="Hermitian"):
            QuantumState.from_density(space, rho)

    def test_negative_eigenvalue_rejected(self) -> None:
        """from_density rejects a matrix with a negative eigenvalue."""
        space = FockSpace((2,), ("cavity",))
        rho = np.array([[1.5, 0.0], [0.0, -0.5]])
        with pytest.raises(UnphysicalInputError, match="eigenvalue"):
            QuantumState.from_density(space, rho)

    def test_ptrace_of_product_state(self, encoding_space: FockSpace) -> None:
        """Tracing out the transmon leaves the cavity Fock state."""
        state = fock_state(encoding_space, {"cavity": 1, "transmon": 2})
        reduced = state.ptrace(["cavity"])
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0
        np.testing.assert_allclose(reduced.density(), expected, atol=1e-12)
        assert reduced.purity() == pytest.approx(1.0)

    def test_mixed_fidelity_with_itself(self, cavity_space: FockSpace) -> None:
        """Fidelity of a mixed state with itself is 1."""
        state = coherent_state(cavity_space, "cavity", 1.0).as_mixed()
        assert state.fidelity(state) == pytest.approx(1.0, abs=1e-8)

    def test_orthogonal_fidelity(self, cavity_space: FockSpace) -> None:
        """Orthogonal Fock states have fidelity 0."""
        zero = fock_state(cavity_space, {"cavity": 0})
        one = fock_state(cavity_space, {"cavity": 1})
        assert zero.fidelity(one) == pytest.approx(0.0)


class TestWigner:
    """Test suite for the displaced-parity Wigner function."""

    def test_vacuum_origin_standard(self, cavity_space: FockSpace) -> None:
        """Vacuum at the origin is 2/pi in the standard convention."""
        vacuum = fock_state(cavity_space, {"cavity": 0})
        value = wigner(vacuum, "cavity", [0.0])
        assert value[0] == pytest.approx(2.0 / math.pi)

    def test_fock_one_origin_unit(self, cavity_space: FockSpace) -> None:
        """|1> at the origin is -1 in the unit convention."""
        one = fock_state(cavity_space, {"cavity": 1})
        assert wigner(one, "cavity", [0.0], convention="unit")[0] == pytest.approx(-1.0)

    def test_even_cat_origin_unit(self, cavity_space: FockSpace) -> None:
        """An even cat with |alpha|^2 = 4 has W(0) = +1."""
        cat = cat_state(cavity_space, "cavity", 2.0, 1)
        assert wigner(cat, "cavity", [0.0], convention="unit")[0] == pytest.approx(1.0, abs=1e-6)

    def test_unit_convention_alias(self, cavity_space: FockSpace) -> None:
        """The name "paper" selects the unit convention."""
        cat = cat_state(cavity_space, "cavity", 2.0, 1)
        grid = 1j * np.linspace(-1.0, 1.0, 9)
        np.testing.assert_allclose(
            wigner(cat, "cavity", grid, convention="paper"),
            wigner(cat, "cavity", grid, convention="unit"),
        )

    def test_vacuum_gaussian_along_imaginary_axis(self, cavity_space: FockSpace) -> None:
        """Unit-convention vacuum cut is exp(-2 y^2) (standard deviation 1/2)."""
        vacuum = fock_state(cavity_space, {"cavity": 0})
        y = np.linspace(-1.5, 1.5, 31)
        values = wigner(vacuum, "cavity", 1j * y, convention="unit")
        np.testing.assert_allclose(values, np.exp(-2.0 * y**2), atol=1e-8)

    def test_reduced_state_of_composite(self) -> None:
        """Other subsystems are traced out before sampling."""
        space = FockSpace.cavity_transmon(30, 3)
        state = fock_state(space, {"cavity": 1, "transmon": 1})
        assert wigner(state, "cavity", [0.0], convention="unit")[0] == pytest.approx(-1.0)

    def test_small_cavity_fails_guard(self, encoding_space: FockSpace) -> None:
        """A 4-level cavity cannot hold even a single photon under the guard."""
        state = fock_state(encoding_space, {"cavity": 1})
        with pytest.raises(TruncationError):
            wigner(state, "cavity", [0.0])

    def test_vacuum_normalisation(self) -> None:
        """Standard-convention vacuum integrates to 1 over phase space."""
        space = FockSpace((60,), ("cavity",))
        vacuum = fock_state(space, {"cavity": 0})
        axis = np.arange(-3.0, 3.0 + 1e-9, 0.15)
        xx, yy = np.meshgrid(axis, axis)
        values = wigner(vacuum, "cavity", xx + 1j * yy)
        assert float(np.sum(values)) * 0.15**2 == pytest.approx(1.0, abs=1e-3)

    def test_unknown_convention(self, cavity_space: FockSpace) -> None:
        """Unknown conventions raise ValueError."""
        vacuum = fock_state(cavity_space, {"cavity": 0})
        with pytest.raises(ValueError):
            wigner(vacuum, "cavity", [0.0], convention="other")  # type: ignore[arg-type]

    def test_cut_beyond_truncation(self, cavity_space: FockSpace) -> None:
        """A grid reaching past the truncation raises TruncationError."""
        vacuum = fock_state(cavity_space, {"cavity": 0})
        with pytest.raises(TruncationError):
            wigner(vacuum, "cavity", [5.0])
