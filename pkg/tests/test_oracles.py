import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupled_berry.errors import (
    AdiabaticityFailure,
    DegenerateAlongPath,
    DegenerateSchmidt,
    NormDrift,
    TransitionPath,
)
from coupled_berry.model import BRANCHES, Branch, bloch_length
from coupled_berry.oracles import (
    adiabatic_limit_phase,
    adiabatic_propagate,
    composite_from_schmidt,
    mixed_state_phase_numeric,
    schmidt_track,
    singlet_propagate,
    wilson_loop_from_states,
    wilson_loop_phase,
)
from coupled_berry.paths import ConstantPolar, static_loop, transition_loop
from coupled_berry.phases import (
    composite_phase_constant_theta,
    phase_distance,
    schmidt_vector_phase,
    subsystem_phase_constant_theta,
    transition_path_phase,
)

# -- Wilson loops ----------------------------------------------------------------------


def test_wilson_loop_of_a_fixed_state_is_zero():
    assert wilson_loop_phase(static_loop(1.0, 0.3), 1.0, Branch.PLUS, 128) == pytest.approx(0.0, abs=1e-12)


def test_wilson_loop_of_spin_one_circle():
    assert abs(wilson_loop_phase(ConstantPolar(np.pi / 3), 0.0, Branch.PLUS, 4096)) == pytest.approx(np.pi, abs=1e-4)


def test_wilson_loop_converges_at_second_order():
    theta, g = 1.0, 1.0
    exact = composite_phase_constant_theta(theta, g, Branch.PLUS)
    errors = [phase_distance(wilson_loop_phase(ConstantPolar(theta), g, Branch.PLUS, n), exact) for n in (256, 512, 1024)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders > 1.9)


@given(st.lists(st.floats(-np.pi, np.pi), min_size=64, max_size=64))
@settings(max_examples=25)
def test_wilson_loop_is_gauge_invariant(phases):
    n = 64
    t = 2 * np.pi * np.arange(n) / n
    states = np.stack([np.cos(0.5) * np.ones(n), np.sin(0.5) * np.exp(1j * t)], axis=1)
    regauged = states * np.exp(1j * np.array(phases))[:, None]
    assert phase_distance(wilson_loop_from_states(states), wilson_loop_from_states(regauged)) < 1e-12


def test_wilson_loop_rejects_degenerate_loops_and_coarse_grids():
    with pytest.raises(DegenerateAlongPath):
        wilson_loop_phase(transition_loop(), 0.5, Branch.PLUS, 1024)
    with pytest.raises(ValueError):
        wilson_loop_phase(ConstantPolar(1.0), 1.0, Branch.PLUS, 32)


# -- adiabatic ODE -----------------------------------------------------------------


def test_adiabatic_propagation_reproduces_analytic_phase():
    theta, g = np.pi / 3, 1.0
    res = adiabatic_propagate(ConstantPolar(theta), g, Branch.PLUS)
    assert res.populations_drift < 1e-3
    assert res.norm_error < 1e-6
    assert phase_distance(res.geometric_phase, composite_phase_constant_theta(theta, g, Branch.PLUS)) < 1e-2
    assert res.final_state.shape == (4,)


def test_static_field_has_only_dynamical_phase():
    res = adiabatic_propagate(static_loop(1.0), 1.0, Branch.ZERO, T=50.0)
    assert phase_distance(res.total_phase, res.dynamical_phase) < 1e-8
    assert abs(res.geometric_phase) < 1e-8


def test_strong_coupling_quench_in_time_evolution():
    res = adiabatic_propagate(ConstantPolar(np.pi / 6), 100.0, Branch.PLUS)
    assert abs(res.geometric_phase) < 1e-2


def test_short_period_is_flagged_as_nonadiabatic():
    with pytest.raises(AdiabaticityFailure):
        adiabatic_propagate(ConstantPolar(np.pi / 3), 1.0, Branch.PLUS, T=10.0)
    res = adiabatic_propagate(ConstantPolar(np.pi / 3), 1.0, Branch.PLUS, T=10.0, check=False)
    assert res.populations_drift > 0.01


def test_coarse_integration_trips_norm_check():
    with pytest.raises(NormDrift):
        adiabatic_propagate(ConstantPolar(np.pi / 3), 1.0, Branch.PLUS, T=50.0, steps=2, samples=2)


def test_singlet_has_no_geometric_phase():
    for path in (transition_loop(), ConstantPolar(1.0)):
        res = singlet_propagate(path, 2.0, T=200.0)
        assert abs(res.geometric_phase) < 1e-8


@pytest.mark.parametrize("g", [0.5, 2.0])
def test_population_drift_falls_with_period(g):
    path = ConstantPolar(np.pi / 3)
    d1 = adiabatic_propagate(path, g, Branch.PLUS, T=2000.0).populations_drift
    d2 = adiabatic_propagate(path, g, Branch.PLUS, T=4000.0).populations_drift
    assert d2 <= 0.5 * d1 + 1e-9


def test_nonadiabatic_shift_falls_as_inverse_period_and_extrapolates_away():
    theta, g, branch = 9 * np.pi / 20, 1.0, Branch.PLUS
    exact = wilson_loop_phase(ConstantPolar(theta), g, branch, 8192)
    shifts = [
        phase_distance(adiabatic_propagate(ConstantPolar(theta), g, branch, T=T).geometric_phase, exact)
        for T in (1000.0, 2000.0)
    ]
    assert shifts[0] / shifts[1] == pytest.approx(2.0, rel=0.05)
    assert phase_distance(adiabatic_limit_phase(ConstantPolar(theta), g, branch), exact) < 1e-3


def test_pole_to_pole_loop_at_strong_coupling_is_crossed_diabatically():
    # the gap at the equator is about 1 / (2 g); a period of 2000 is far from
    # adiabatic there and the state returns close to its starting point
    path = transition_loop()
    with pytest.raises(AdiabaticityFailure):
        adiabatic_propagate(path, 50.0, Branch.PLUS)
    res = adiabatic_propagate(path, 50.0, Branch.PLUS, check=False)
    assert res.populations_drift > 1.0
    assert abs(res.geometric_phase) < 0.2


# -- Schmidt tracking ------------------------------------------------------------------


def test_constant_theta_is_nontransition_and_pole_loop_is_not():
    assert schmidt_track(ConstantPolar(1.0), 1.0, Branch.PLUS, 512).nontransition
    assert not schmidt_track(transition_loop(), 1.0, Branch.PLUS, 512).nontransition


@pytest.mark.parametrize("branch", BRANCHES)
def test_tracked_schmidt_phases_match_closed_form(branch):
    theta, g = 1.0, 1.5
    track = schmidt_track(ConstantPolar(theta), g, branch, 4096)
    gamma1, gamma2 = schmidt_vector_phase(theta, g, branch)
    k = 0 if bloch_length(theta, g, branch) >= 0 else 1
    assert phase_distance(track.Gamma_a[k], gamma1) < 1e-4
    assert phase_distance(track.Gamma_a[1 - k], gamma2) < 1e-4
    assert phase_distance(track.Gamma_b[k], gamma1) < 1e-4
    assert track.point(0).r == pytest.approx(abs(bloch_length(theta, g, branch)), abs=1e-9)


def test_tracked_schmidt_phase_without_coupling():
    track = schmidt_track(ConstantPolar(np.pi / 3), 0.0, Branch.PLUS, 4096)
    assert phase_distance(track.Gamma_a[0], -np.pi / 2) < 1e-4


@pytest.mark.parametrize("path", [ConstantPolar(1.2), transition_loop()], ids=["circle", "pole-to-pole"])
@pytest.mark.parametrize("g", [0.0, 1.0, 3.0])
def test_composite_rebuilt_from_schmidt_data(path, g):
    try:
        track = schmidt_track(path, g, Branch.PLUS, 8192)
    except DegenerateSchmidt:
        pytest.skip("Schmidt coefficients meet on this loop")
    assert phase_distance(composite_from_schmidt(track), wilson_loop_phase(path, g, Branch.PLUS, 8192)) < 1e-3


def test_mixed_state_phase_numeric():
    theta, g = 1.0, 1.0
    for branch in (Branch.MINUS, Branch.PLUS):
        ga, gb = mixed_state_phase_numeric(schmidt_track(ConstantPolar(theta), g, branch, 4096))
        assert phase_distance(ga, gb) < 1e-6
        assert phase_distance(ga, subsystem_phase_constant_theta(theta, g, branch)) < 1e-3
    with pytest.raises(TransitionPath):
        mixed_state_phase_numeric(schmidt_track(transition_loop(), 1.0, Branch.PLUS, 512))


def test_line_integral_matches_tracked_holonomy_on_pole_loop():
    path = transition_loop()
    for branch in BRANCHES:
        wil = wilson_loop_phase(path, 2.0, branch, 8192)
        assert phase_distance(transition_path_phase(path, 2.0, branch), wil) < 1e-3
