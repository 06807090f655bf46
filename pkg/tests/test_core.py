import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sezsim.core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    ParameterMatrix,
    SystemMatrices,
    TimeGrid,
    ValidationError,
    Zone,
    monthly_rate,
    schedule_periods_outside,
    validate_zone,
)

from conftest import make_enterprise, make_zone


class TestRateConversion:
    @given(st.floats(min_value=-0.5, max_value=3.0))
    @settings(max_examples=100)
    def test_compounds_back_to_annual(self, annual):
        r_m = monthly_rate(annual)
        assert (1.0 + r_m) ** 12 == pytest.approx(1.0 + annual, abs=1e-12)

    def test_four_percent_annual(self):
        assert monthly_rate(0.04) == pytest.approx(0.0032737397821989145, abs=1e-15)


class TestTimeGrid:
    def test_periods_are_one_based_contiguous(self):
        grid = TimeGrid(5)
        assert list(grid.periods()) == [1, 2, 3, 4, 5]
        assert grid.contains(1) and grid.contains(5)
        assert not grid.contains(0) and not grid.contains(6)

    @pytest.mark.parametrize("bad", [1, 0, -3])
    def test_rejects_too_short(self, bad):
        with pytest.raises(ValidationError):
            TimeGrid(bad)


class TestControlVector:
    def test_rates_bounded(self):
        with pytest.raises(ValidationError):
            ControlVector(profit_tax_regional=1.5)
        with pytest.raises(ValidationError):
            ControlVector(social_rate=-0.1)

    def test_prices_nonnegative(self):
        with pytest.raises(ValidationError):
            ControlVector(electricity_price=-2.0)

    def test_array_round_trip(self):
        vec = ControlVector(profit_tax_regional=0.17, transport_tariff=0.4,
                            land_rent=35.0)
        assert ControlVector.from_array(vec.to_array()) == vec

    def test_from_array_length_checked(self):
        with pytest.raises(ValidationError):
            ControlVector.from_array([0.1] * 8)


class TestDisturbanceVector:
    def test_dollar_rate_positive(self):
        with pytest.raises(ValidationError):
            DisturbanceVector(dollar_rate=0.0)
        with pytest.raises(ValidationError):
            DisturbanceVector(dollar_rate=-70.0)

    def test_defaults_match_documented_assumptions(self):
        vec = DisturbanceVector()
        assert vec.dollar_rate == 70.0
        assert vec.wage_growth == 0.04
        assert vec.inflation == 0.04

    def test_annual_channels_become_monthly(self):
        vec = DisturbanceVector(wage_growth=0.04, inflation=0.10)
        model = vec.to_model_array()
        assert model[1] == pytest.approx(monthly_rate(0.04), abs=1e-15)
        assert model[8] == pytest.approx(monthly_rate(0.10), abs=1e-15)
        # other channels pass through untouched
        assert model[0] == vec.resource_prices
        assert model[9] == 70.0


class TestEnterpriseConstruction:
    def test_duplicate_parameter_names_rejected(self):
        with pytest.raises(ValidationError, match="unique"):
            make_enterprise(names=("sales", "sales"), kinds=("revenue", "cost"))

    def test_needs_two_parameters(self):
        with pytest.raises(ValidationError):
            make_enterprise(names=("only",), kinds=("revenue",))

    def test_x0_length_must_match(self):
        with pytest.raises(ValidationError, match="x0"):
            make_enterprise(x0=np.zeros(3))

    def test_export_share_bounds(self):
        with pytest.raises(ValidationError, match="export_share"):
            make_enterprise(export_share=1.2)

    def test_unknown_cut_row_rejected(self):
        with pytest.raises(ValidationError, match="distress-cut"):
            make_enterprise(distress_cut_rows=("nosuch",))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError, match="kind"):
            make_enterprise(kinds=("revenue", "weird"))

    def test_cash_weights(self):
        ent = make_enterprise(names=("a", "b", "c"),
                              kinds=("revenue", "cost", "neutral"),
                              x0=np.zeros(3), h=np.array([[1.0, -1.0, 0.0]]))
        assert list(ent.cash_weights()) == [1.0, -1.0, 0.0]


class TestSystemMatrices:
    def test_dimension_checks(self):
        with pytest.raises(ValidationError):
            SystemMatrices(a=np.zeros((2, 3)), b=np.zeros((2, 9)),
                           e=np.zeros((2, 10)), h=np.zeros((1, 2)))
        with pytest.raises(ValidationError):
            SystemMatrices(a=np.zeros((2, 2)), b=np.zeros((2, 8)),
                           e=np.zeros((2, 10)), h=np.zeros((1, 2)))

    def test_overrides_resolved_by_period(self):
        a = np.eye(2)
        a13 = 0.5 * np.eye(2)
        mats = SystemMatrices(a=a, b=np.zeros((2, 9)), e=np.zeros((2, 10)),
                              h=np.ones((1, 2)), a_overrides={13: a13})
        assert np.array_equal(mats.a_at(12), a)
        assert np.array_equal(mats.a_at(13), a13)
        assert np.array_equal(mats.a_at(), a)

    def test_non_finite_rejected(self):
        a = np.eye(2)
        a[0, 0] = np.nan
        with pytest.raises(ValidationError):
            SystemMatrices(a=a, b=np.zeros((2, 9)), e=np.zeros((2, 10)),
                           h=np.ones((1, 2)))


class TestParameterMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            ParameterMatrix("e", ("a", "b"), np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_column_access_one_based(self):
        pm = ParameterMatrix("e", ("a", "b"), np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert list(pm.column(1)) == [1.0, 3.0]
        assert list(pm.column(2)) == [2.0, 4.0]
        with pytest.raises(IndexError):
            pm.column(3)


class TestSchedules:
    def test_override_lookup(self):
        low = ControlVector()
        high = ControlVector(transport_tariff=0.6)
        sched = ControlSchedule(default=low, overrides={13: high})
        assert sched.at(12) == low
        assert sched.at(13) == high

    def test_out_of_grid_periods_reported(self):
        sched = ControlSchedule(overrides={61: ControlVector()})
        assert schedule_periods_outside(sched, TimeGrid(60)) == [61]

    def test_noise_channel_validated(self):
        with pytest.raises(ValidationError):
            DisturbanceSchedule(noise={"v11": 0.1})
        with pytest.raises(ValidationError):
            DisturbanceSchedule(noise={"v5": -0.1})


class TestValidateZone:
    def test_consistent_zone_has_empty_report(self):
        zone = make_zone(make_enterprise())
        assert validate_zone(zone, TimeGrid(60)) == []

    def test_dimension_mismatch_named(self):
        # state has 3 parameters but A is 4x4
        mats = SystemMatrices(a=np.eye(4), b=np.zeros((4, 9)),
                              e=np.zeros((4, 10)), h=np.ones((1, 4)))
        from sezsim.core import Enterprise
        ent = Enterprise(id="bad", parameter_names=("a", "b", "c"),
                         parameter_kinds=("revenue", "cost", "cost"),
                         x0=np.zeros(3), matrices=mats)
        report = validate_zone(make_zone(ent), TimeGrid(60))
        assert any("dimension mismatch" in line for line in report)

    def test_duplicate_ids_named(self):
        zone = make_zone(make_enterprise(ent_id="dup"), make_enterprise(ent_id="dup"))
        report = validate_zone(zone, TimeGrid(60))
        assert any("duplicate" in line and "dup" in line for line in report)

    def test_spectral_radius_guard(self):
        ent = make_enterprise(a=1.2 * np.eye(2))
        report = validate_zone(make_zone(ent), TimeGrid(60))
        assert any("spectral radius" in line for line in report)
        # with a generous delta the same zone passes
        assert validate_zone(make_zone(ent), TimeGrid(60), spectral_delta=0.25) == []

    def test_grp_row_sign_compatibility(self):
        ent = make_enterprise(h=np.array([[-1.0, -1.0]]))  # revenue row weighted < 0
        report = validate_zone(make_zone(ent), TimeGrid(60))
        assert any("revenue row" in line for line in report)

    def test_warehouse_row_must_be_carry_only(self):
        a = np.array([[0.0, 0.0, 0.0],
                      [0.0, 0.0, 0.0],
                      [0.3, 0.0, 1.0]])  # cross term into the stock row
        ent = make_enterprise(names=("sales", "materials", "stock"),
                              kinds=("revenue", "cost", "neutral"),
                              a=a, x0=np.zeros(3),
                              h=np.array([[1.0, -1.0, 0.0]]),
                              warehouse_row="stock")
        report = validate_zone(make_zone(ent), TimeGrid(60))
        assert any("carry-only" in line for line in report)

    def test_empty_zone_rejected_at_construction(self):
        with pytest.raises(ValidationError):
            Zone(id="empty", enterprises=())
