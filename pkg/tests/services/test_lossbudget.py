"""Tests for the cavity loss budget and ring-down conversions."""

from __future__ import annotations

import math

import pytest

from cavity_memory.exceptions import UnphysicalInputError
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.services.lossbudget import (
    CavityGeometry,
    MaterialParams,
    assemble_budget,
    budget_to_rows,
    compare_to_reference,
    conductive_loss,
    inverse_purcell,
    quality_factor,
    residual_resistance_bound,
    ringdown_conversions,
    table_three_reference,
    thermal_factor,
    trapped_field,
)


@pytest.fixture
def budget(params: SystemParams):
    """Budget of the reference geometry and materials."""
    return assemble_budget(CavityGeometry(), MaterialParams(), params)


class TestChannels:
    """Test suite for the individual loss channels."""

    @pytest.mark.parametrize(
        ("name", "expected_hz", "rel"),
        [
            ("oxide", 0.602, 1e-3),
            ("inverse_purcell", 0.5722, 1e-3),
            ("seam", 1.419e-3, 1e-3),
            ("bulk", 2.58e-2, 1e-2),
            ("surface", 2.896e-2, 1e-3),
            ("magnetic", 2.048e-4, 1e-3),
            ("external", 0.096, 1e-9),
        ],
    )
    def test_reference_rates(self, budget, name: str, expected_hz: float, rel: float) -> None:
        """Each channel matches its hand-computed rate."""
        assert budget.channel(name).kappa_over_2pi_hz == pytest.approx(expected_hz, rel=rel)

    def test_channel_order(self, budget) -> None:
        """Channels are listed in table order."""
        assert [c.name for c in budget.channels] == [
            "oxide",
            "inverse_purcell",
            "seam",
            "bulk",
            "surface",
            "magnetic",
            "external",
        ]

    def test_total(self, budget) -> None:
        """The channels add up to about 1.33 Hz, a lifetime near 0.12 s."""
        assert budget.total_kappa_over_2pi_hz == pytest.approx(1.3266, rel=1e-3)
        assert budget.total_lifetime_s == pytest.approx(0.11997, rel=1e-3)

    def test_inverse_purcell_rate(self) -> None:
        """(chi/K_q)/T2E for the reference transmon is about 3.6/s."""
        rate = inverse_purcell(TWO_PI * 42e3, TWO_PI * 146e6, 80e-6)
        assert rate == pytest.approx(3.596, rel=1e-3)

    def test_thermal_factor(self) -> None:
        """At 10 mK a 4.3 GHz mode is fully frozen out."""
        assert thermal_factor(TWO_PI * 4.301e9, 10e-3) == pytest.approx(1.0)
        assert thermal_factor(TWO_PI * 4.301e9, 10.0) < 0.02

    def test_trapped_field(self) -> None:
        """Two shields of 100 and 1000 leave 5 uG of 500 mG."""
        assert trapped_field(MaterialParams()) == pytest.approx(5e-3)

    def test_residual_resistance_channel(self, params: SystemParams) -> None:
        """An R_res bound adds a conductive channel."""
        bound = residual_resistance_bound(210.0, 3e9)
        assert bound == pytest.approx(7e-8)
        budget = assemble_budget(CavityGeometry(), MaterialParams(R_res_bound=bound), params)
        row = budget.channel("residual_resistance")
        assert row.kappa_over_2pi_hz == pytest.approx(4.301e9 * bound / 210.0)
        assert row.mitigation


class TestReference:
    """Test suite for the published comparison."""

    def test_comparison_rows(self, budget) -> None:
        """Every computed channel has a published partner."""
        rows = {row["name"]: row for row in compare_to_reference(budget)}
        assert set(rows) == {c.name for c in table_three_reference().channels}
        assert rows["oxide"]["ratio"] == pytest.approx(0.602 / 0.6, rel=1e-2)
        assert rows["surface"]["ratio"] == pytest.approx(1.0, rel=0.01)

    def test_missing_reference(self, params: SystemParams) -> None:
        """Channels without a published value report NaN."""
        budget = assemble_budget(
            CavityGeometry(), MaterialParams(R_res_bound=7e-8), params
        )
        rows = {row["name"]: row for row in compare_to_reference(budget)}
        assert math.isnan(rows["residual_resistance"]["ratio"])

    def test_budget_rows_end_with_total(self, budget) -> None:
        """The table ends with the total row."""
        rows = budget_to_rows(budget)
        assert rows[-1]["name"] == "total"
        assert rows[-1]["lifetime_s"] == pytest.approx(budget.total_lifetime_s)


class TestValidation:
    """Test suite for rejected geometry and material inputs."""

    def test_negative_geometry(self) -> None:
        """Geometry values must be non-negative."""
        with pytest.raises(UnphysicalInputError, match="filling_factor"):
            CavityGeometry(filling_factor=-1.0)

    def test_participation_above_one(self) -> None:
        """Participations are fractions."""
        with pytest.raises(UnphysicalInputError, match="p_bulk"):
            CavityGeometry(p_bulk=1.5)

    def test_loss_tangent_range(self) -> None:
        """Loss tangents lie in (0, 1)."""
        with pytest.raises(UnphysicalInputError, match="tan_delta_ox"):
            MaterialParams(tan_delta_ox=0.0)

    def test_shield_attenuation(self) -> None:
        """A shield cannot amplify the field."""
        with pytest.raises(UnphysicalInputError):
            MaterialParams(shield_attenuations=(0.5,))

    def test_zero_geometry_factor(self) -> None:
        """G = 0 makes conductive loss undefined."""
        with pytest.raises(UnphysicalInputError):
            conductive_loss(CavityGeometry(geometry_factor=0.0), 1e-9)

    def test_residual_bound_needs_q(self) -> None:
        """Q0 must be positive."""
        with pytest.raises(UnphysicalInputError):
            residual_resistance_bound(210.0, 0.0)


class TestRingdown:
    """Test suite for loaded, external and intrinsic decay times."""

    omega = TWO_PI * 4.301e9

    def test_loaded_only(self) -> None:
        """Without an external value the intrinsic time is the loaded time."""
        report = ringdown_conversions(self.omega, 0.11)
        assert report.Q_loaded == pytest.approx(2.973e9, rel=1e-3)
        assert report.tau_intrinsic == 0.11
        assert report.Q_external == math.inf

    def test_external_q(self) -> None:
        """An external Q of 1.3e10 leaves about 0.143 s intrinsic."""
        report = ringdown_conversions(self.omega, 0.11, Q_ext=1.3e10)
        assert report.tau_external == pytest.approx(0.481, rel=1e-3)
        assert report.tau_intrinsic == pytest.approx(0.1426, rel=1e-3)
        assert report.Q_intrinsic == pytest.approx(self.omega * report.tau_intrinsic)

    def test_both_external_values(self) -> None:
        """Q_ext and tau_ext are mutually exclusive."""
        with pytest.raises(UnphysicalInputError, match="not both"):
            ringdown_conversions(self.omega, 0.11, Q_ext=1e10, tau_ext=0.5)

    def test_external_faster_than_loaded(self) -> None:
        """An external decay faster than the loaded one is impossible."""
        with pytest.raises(UnphysicalInputError, match="faster"):
            ringdown_conversions(self.omega, 0.11, tau_ext=0.05)

    def test_quality_factor_needs_positive_inputs(self) -> None:
        """Q = omega tau needs both positive."""
        with pytest.raises(UnphysicalInputError):
            quality_factor(self.omega, 0.0)
