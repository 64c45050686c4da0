import pytest

from sps_norm.analytic import Analytic2lsParams, filtered_population_closed, gn_recursion
from sps_norm.errors import DimensionCapError, UndefinedCorrelationError, ValidationError
from sps_norm.lindblad import build_liouvillian, steady_state, unfiltered_gk
from sps_norm.models import incoherent_2ls, twolevel_in_cavity
from sps_norm.sensors import (
    SensorBank,
    _estimate,
    attach_sensors,
    filtered_gk,
    filtered_population,
    frequency_scan,
)


def test_sensor_bank_validation():
    with pytest.raises(ValidationError):
        SensorBank(0, 0.0, 1.0, 1e-3)
    with pytest.raises(ValidationError):
        SensorBank(2, 0.0, 0.0, 1e-3)
    with pytest.raises(ValidationError):
        SensorBank(2, 0.0, 1.0, -1e-3)


def test_filtered_gk_validation():
    p = incoherent_2ls()
    with pytest.raises(ValidationError):
        filtered_gk(p, None, 1, Gamma=1.0, omega_f=0.0)
    with pytest.raises(ValidationError):
        filtered_gk(p, None, 2, Gamma=1.0, omega_f=0.0, epsilon=0.0)
    with pytest.raises(ValidationError):
        frequency_scan(p, None, 2, 1.0, [])


def test_attach_sensors_respects_the_dimension_cap():
    p = incoherent_2ls()
    with pytest.raises(DimensionCapError, match="beyond the cap"):
        attach_sensors(p, None, SensorBank(2, 0.0, 1.0, 1e-3), max_dim=7)


def test_attach_sensors_structure():
    p = incoherent_2ls()
    bank = SensorBank(2, 0.5, 3.0, 1e-3)
    model = attach_sensors(p, None, bank)
    assert model.space.subsystem_dims == (2, 2, 2)
    layout = model.sector_layout
    assert layout is not None
    assert layout.count == 2
    assert layout.Gamma == 3.0
    assert layout.delta_f == 0.5


def test_resonant_filtered_g2_matches_the_closed_form():
    p = incoherent_2ls(P=1.0, gamma=1.0)
    for Gamma in (0.5, 2.0, 20.0):
        want = gn_recursion(Analytic2lsParams(P=1.0, gamma=1.0, Gamma=Gamma), 2)
        got = filtered_gk(p, None, 2, Gamma=Gamma, omega_f=0.0)
        assert got.converged
        assert got.value == pytest.approx(want, rel=1e-3)


def test_back_action_forces_epsilon_down():
    # a deliberately loud probe: the bound kicks in and halves the coupling
    # until the sensors are passive again, and the answer stays right
    p = incoherent_2ls(P=1.0, gamma=1.0)
    r = filtered_gk(p, None, 2, Gamma=2.0, omega_f=0.0, epsilon=0.1)
    assert r.epsilon < 0.1
    assert r.value == pytest.approx(0.5, rel=1e-6)
    assert r.extrapolated == r.value
    assert len(r.epsilon_pair) == 2


def test_wide_filter_recovers_the_unfiltered_correlator():
    cav = twolevel_in_cavity()
    rho = steady_state(build_liouvillian(cav.model))
    bare = unfiltered_gk(rho, cav.emission("a"), 2)
    wide = filtered_gk(cav, "a", 2, Gamma=1e5, omega_f=0.0)
    assert wide.value == pytest.approx(bare, rel=1e-4)


def test_frequency_scan_is_symmetric_for_a_symmetric_spectrum():
    p = incoherent_2ls(P=1.0, gamma=1.0)
    scan = frequency_scan(p, None, 2, 1.0, [-2.0, 0.0, 2.0])
    assert [s.omega_f for s in scan] == [-2.0, 0.0, 2.0]
    assert scan[0].value == pytest.approx(scan[2].value, rel=1e-10)
    # at line center the closed form applies
    assert scan[1].value == pytest.approx(0.8, rel=1e-3)


def test_filtered_population_transfers_off_the_calibration_point():
    # calibrated at P = gamma = 1; checked at a different pump
    p = incoherent_2ls(P=0.3, gamma=1.0)
    got = filtered_population(p, None, Gamma=2.0, omega_f=0.0)
    want = filtered_population_closed(Analytic2lsParams(P=0.3, gamma=1.0, Gamma=2.0))
    assert got == pytest.approx(want, rel=1e-9)
    with pytest.raises(ValidationError):
        filtered_population(p, None, Gamma=2.0, omega_f=0.0, epsilon=-1.0)


def test_estimate_guards():
    assert _estimate(4e-8, [1e-4, 1e-4]) == pytest.approx(4.0)
    with pytest.raises(RuntimeError, match="differ"):
        _estimate(1.0, [1e-4, 2e-4])
    with pytest.raises(UndefinedCorrelationError):
        _estimate(1.0, [0.0, 0.0])


def test_empty_emitter_has_nothing_to_filter():
    dark = incoherent_2ls(P=0.0, gamma=1.0)
    with pytest.raises(UndefinedCorrelationError):
        filtered_gk(dark, None, 2, Gamma=1.0, omega_f=0.0)
