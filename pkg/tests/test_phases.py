import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coupled_berry.errors import (
    DegenerateSchmidt,
    NonconvergentQuadrature,
    SingularScaleFactor,
    UndefinedPhase,
)
from coupled_berry.model import BRANCHES, Branch, ModelParams, bloch_length
from coupled_berry.oracles import wilson_loop_from_states, wilson_loop_phase
from coupled_berry.paths import ConstantPolar, constant_theta_as_parametrized, transition_loop
from coupled_berry.phases import (
    PhaseResult,
    composite_phase_constant_theta,
    constant_theta_phases,
    degenerate_zero_g_subsystem_phase,
    phase_distance,
    scale_factor,
    schmidt_vector_phase,
    solid_angle,
    subsystem_phase_constant_theta,
    transition_path_phase,
    transition_path_quadrature,
    weighted_principal_phase,
    wrap_phase,
    zero_coupling_phase,
)

thetas = st.floats(0.05, np.pi - 0.05)
northern = st.floats(0.05, np.pi / 2 - 0.05)


def mod_pi(x):
    return abs((x + np.pi / 2) % np.pi - np.pi / 2)


@given(st.floats(-1e3, 1e3))
def test_wrap_phase_range_and_congruence(x):
    w = wrap_phase(x)
    assert -np.pi < w <= np.pi
    assert phase_distance(w, x) < 1e-9


def test_solid_angle_closed_forms():
    assert solid_angle(ConstantPolar(np.pi / 2)) == pytest.approx(2 * np.pi)
    assert solid_angle(ConstantPolar(np.pi / 3)) == pytest.approx(np.pi)


def test_solid_angle_of_pole_to_pole_loop_converges():
    path = transition_loop()
    coarse, fine = solid_angle(path, 2**14), solid_angle(path, 2**15)
    assert abs(fine - coarse) / abs(fine) < 1e-8
    with pytest.raises(ValueError):
        solid_angle(path, 100)


# -- zero coupling -------------------------------------------------------------------


def test_zero_coupling_phase_values():
    res = zero_coupling_phase(1, np.pi)
    assert res.gamma_ab == pytest.approx(-np.pi)
    assert res.gamma_a == pytest.approx(-np.pi / 2)
    assert zero_coupling_phase(0, 1.234).gamma_ab == 0.0
    res = zero_coupling_phase(-1, 2 * np.pi)
    assert res.gamma_ab == pytest.approx(2 * np.pi)
    assert res.wrapped().gamma_ab == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        zero_coupling_phase(2, 1.0)


@given(northern)
def test_zero_coupling_composite_is_standard_berry_phase(theta):
    omega = 2 * np.pi * (1 - np.cos(theta))
    value = composite_phase_constant_theta(theta, 0.0, Branch.PLUS)
    assert value == pytest.approx(-omega, abs=1e-12)
    assert value == pytest.approx(zero_coupling_phase(1, omega).gamma_ab, abs=1e-12)


def test_degenerate_pair_subsystem_phase():
    ga, gb = degenerate_zero_g_subsystem_phase(1 / np.sqrt(2), 1 / np.sqrt(2), np.pi / 2)
    assert ga == pytest.approx(-np.pi / 4)
    assert gb == pytest.approx(np.pi / 4)
    with pytest.raises(UndefinedPhase):
        degenerate_zero_g_subsystem_phase(1 / np.sqrt(2), 1j / np.sqrt(2), 0.8)
    with pytest.raises(UndefinedPhase):
        degenerate_zero_g_subsystem_phase(1.0, 0.0, 0.8)
    with pytest.raises(ValueError):
        degenerate_zero_g_subsystem_phase(1.0, 1.0, 0.8)


def _mixed_phase_numeric(psi, axis_swap=False):
    """arg sum_k p_k exp(i Gamma_k) from Wilson loops of reduced eigenvectors.

    ``psi[:, i, j]`` is the amplitude of qubit a in state ``i`` and b in ``j``.
    """
    if axis_swap:
        psi = np.swapaxes(psi, 1, 2)
    rho = psi @ np.conj(np.swapaxes(psi, 1, 2))
    vals, vecs = np.linalg.eigh(rho)
    gammas = [wilson_loop_from_states(vecs[:, :, k]) for k in range(2)]
    return float(np.angle(np.sum(vals[0] * np.exp(1j * np.array(gammas)))))


@pytest.mark.parametrize("theta", [0.4, 1.1])
def test_degenerate_pair_formula_against_numeric_transport(theta):
    # alpha |1;0> + beta |0;0> carried around a circle at zero coupling, built from
    # single-spin kets along n so the relative phase of the two terms is fixed
    alpha, beta = np.cos(0.3), np.sin(0.3) * np.exp(0.4j)
    n = 4096
    phi = 2 * np.pi * np.arange(n) / n
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    up = np.stack([np.full(n, c), np.exp(1j * phi) * s], axis=1)
    down = np.stack([-np.exp(-1j * phi) * s, np.full(n, c)], axis=1)
    psi = ((alpha + beta) * np.einsum("ki,kj->kij", up, down) + (alpha - beta) * np.einsum("ki,kj->kij", down, up)) / np.sqrt(2)
    omega = 2 * np.pi * (1 - np.cos(theta))
    ga, gb = degenerate_zero_g_subsystem_phase(alpha, beta, omega)
    assert mod_pi(_mixed_phase_numeric(psi) - ga) < 1e-4
    assert mod_pi(_mixed_phase_numeric(psi, axis_swap=True) - gb) < 1e-4


# -- scale factor and Schmidt-vector phases --------------------------------------------


@given(thetas)
def test_scale_factor_is_one_without_coupling(theta):
    assert scale_factor(theta, 0.0, Branch.PLUS) == pytest.approx(1.0, abs=1e-12)


def test_scale_factor_strong_coupling():
    assert scale_factor(np.pi / 3, 100.0, Branch.PLUS) == pytest.approx(2.0, abs=1e-3)
    assert scale_factor(np.pi / 4, 100.0, Branch.ZERO) == pytest.approx(0.0, abs=1e-2)
    with pytest.raises(SingularScaleFactor):
        scale_factor(np.pi / 2, 0.0, Branch.ZERO)


def test_schmidt_vector_phase_values():
    g1, g2 = schmidt_vector_phase(np.pi / 3, 0.0, Branch.PLUS)
    assert g1 == pytest.approx(-np.pi / 2)
    assert abs(wrap_phase(schmidt_vector_phase(np.pi / 6, 100.0, Branch.PLUS)[0])) < 1e-3
    assert schmidt_vector_phase(np.pi / 4, 100.0, Branch.ZERO)[1] == pytest.approx(np.pi, abs=0.05)
    with pytest.raises(DegenerateSchmidt):
        schmidt_vector_phase(np.pi / 3, 0.0, Branch.ZERO)


@given(thetas, st.floats(0.01, 50.0), st.sampled_from(BRANCHES))
def test_schmidt_vector_phases_are_exact_negatives(theta, g, branch):
    try:
        g1, g2 = schmidt_vector_phase(theta, g, branch)
    except (DegenerateSchmidt, SingularScaleFactor):
        return
    assert g2 == -g1


def test_zero_branch_second_vector_phase_climbs_to_pi():
    values = [schmidt_vector_phase(np.pi / 4, g, Branch.ZERO)[1] for g in (5, 10, 20, 50, 100)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert np.pi - values[-1] < 1e-3


# -- composite and subsystem phases -----------------------------------------------------


def test_composite_phase_examples():
    assert composite_phase_constant_theta(np.pi / 3, 0.0, Branch.PLUS) == pytest.approx(-np.pi)
    assert abs(wrap_phase(composite_phase_constant_theta(np.pi / 6, 100.0, Branch.PLUS))) < 1e-3
    wil = wilson_loop_phase(ConstantPolar(0.4 * np.pi), 1.0, Branch.PLUS, 4096)
    assert phase_distance(composite_phase_constant_theta(0.4 * np.pi, 1.0, Branch.PLUS), wil) < 1e-4


@given(thetas, st.floats(0.0, 10.0), st.sampled_from(BRANCHES))
def test_composite_phase_matches_holonomy(theta, g, branch):
    wil = wilson_loop_phase(ConstantPolar(theta), g, branch, 2048)
    assert phase_distance(composite_phase_constant_theta(theta, g, branch), wil) < 5e-4


@pytest.mark.parametrize("branch", [Branch.MINUS, Branch.PLUS])
def test_weighted_principal_phase_only_right_where_weights_are_integral(branch):
    theta = np.pi / 3
    assert weighted_principal_phase(theta, 0.0, branch) == pytest.approx(
        composite_phase_constant_theta(theta, 0.0, branch), abs=1e-12
    )
    # fractional Schmidt weights: the weighted sum is not the holonomy
    wil = wilson_loop_phase(ConstantPolar(theta), 1.0, branch, 4096)
    assert phase_distance(weighted_principal_phase(theta, 1.0, branch), wil) > 0.1
    assert phase_distance(composite_phase_constant_theta(theta, 1.0, branch), wil) < 1e-4


def test_subsystem_phase_examples():
    theta = 0.4 * np.pi
    value = subsystem_phase_constant_theta(theta, 0.0, Branch.PLUS)
    omega = 2 * np.pi * (1 - np.cos(theta))
    assert value == pytest.approx(-omega / 2, abs=1e-12)
    assert mod_pi(value - np.cos(theta) * np.pi) < 1e-12
    assert abs(subsystem_phase_constant_theta(np.pi / 6, 100.0, Branch.PLUS)) < 1e-3
    with pytest.raises(DegenerateSchmidt):
        subsystem_phase_constant_theta(1.0, 0.0, Branch.ZERO)


@given(thetas, st.floats(0.01, 20.0), st.sampled_from(BRANCHES))
def test_subsystem_phase_agrees_with_arctan_form_modulo_pi(theta, g, branch):
    res = constant_theta_phases(theta, g, branch)
    if res.status != "ok":
        return
    r = bloch_length(theta, g, branch)
    arctan_form = -np.arctan(r * np.tan(-res.Gamma_a1))
    assert mod_pi(res.gamma_a - arctan_form) < 1e-9
    assert res.gamma_a == res.gamma_b


@given(northern, st.sampled_from([Branch.MINUS, Branch.PLUS]))
def test_composite_is_sum_of_subsystem_phases_at_zero_coupling(theta, branch):
    res = constant_theta_phases(theta, 0.0, branch)
    assert phase_distance(res.gamma_ab, res.gamma_mixed_sum) < 1e-9


@pytest.mark.parametrize("branch", [Branch.MINUS, Branch.PLUS])
def test_composite_is_not_sum_of_subsystem_phases_with_coupling(branch):
    res = constant_theta_phases(np.pi / 3, 1.0, branch)
    assert phase_distance(res.gamma_ab, res.gamma_mixed_sum) > 0.01


def test_phase_result_reports_undefined_entries():
    res = constant_theta_phases(np.pi / 3, 0.0, Branch.ZERO)
    assert res.gamma_ab == pytest.approx(0.0, abs=1e-12)
    assert res.gamma_a is None and res.gamma_mixed_sum is None
    assert res.status == "DegenerateSchmidt"
    assert set(PhaseResult(gamma_ab=1.0).as_dict()) >= {"gamma_ab", "method", "status"}


def test_strong_coupling_quenching_of_all_branches():
    for theta in (np.pi / 6, np.pi / 3):
        for branch in BRANCHES:
            res = constant_theta_phases(theta, 100.0, branch).wrapped()
            assert abs(res.gamma_ab) < 0.05
            assert abs(wrap_phase(res.gamma_mixed_sum)) < 0.05


# -- general loops ------------------------------------------------------------------


@pytest.mark.parametrize("branch", BRANCHES)
def test_line_integral_reduces_to_circle_formula(branch):
    theta, g = 1.0, 1.5
    value = transition_path_phase(constant_theta_as_parametrized(theta), g, branch)
    assert value == pytest.approx(composite_phase_constant_theta(theta, g, branch), abs=1e-8)


def test_pole_to_pole_loop_without_coupling_gives_solid_angle():
    path = transition_loop()
    value = transition_path_phase(path, 0.0, Branch.PLUS)
    assert value == pytest.approx(-solid_angle(path), rel=1e-8)


@pytest.mark.parametrize("g", [0.0, 1.0, 2.0, 5.0])
def test_pole_to_pole_line_integral_matches_holonomy(g):
    path = transition_loop()
    for branch in BRANCHES:
        wil = wilson_loop_phase(path, g, branch, 8192)
        assert phase_distance(transition_path_phase(path, g, branch), wil) < 1e-3


def test_pole_to_pole_strong_coupling_under_adiabatic_following():
    # the aligned branches pass an avoided crossing at the equator and come back
    # with +/- 2 pi / 3; only the |1;0>-like branch quenches
    path = transition_loop()
    plus = wrap_phase(transition_path_phase(path, 50.0, Branch.PLUS))
    minus = wrap_phase(transition_path_phase(path, 50.0, Branch.MINUS))
    assert plus == pytest.approx(2 * np.pi / 3, abs=1e-3)
    assert minus == pytest.approx(-2 * np.pi / 3, abs=1e-3)
    assert abs(transition_path_phase(path, 50.0, Branch.ZERO)) < 1e-5


def test_quadrature_reports_convergence_and_budget():
    res = transition_path_quadrature(transition_loop(), 1.0, Branch.PLUS)
    assert res.change <= 1e-6 * max(1.0, abs(res.value))
    with pytest.raises(NonconvergentQuadrature):
        transition_path_quadrature(transition_loop(), 1.0, Branch.PLUS, panels=16, tol=0.0, max_panels=64)


def test_open_path_is_rejected():
    from coupled_berry.paths import Parametrized

    half = Parametrized(lambda s: np.full_like(s, 1.0), lambda s: np.pi * s)
    with pytest.raises(ValueError):
        transition_path_phase(half, 1.0, Branch.PLUS)
    assert ModelParams(1.0, 1.0).g == 1.0
