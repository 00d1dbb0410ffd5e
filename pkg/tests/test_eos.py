import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import fd_module as fd
from conftest import identical_phases, polytropic_isothermal, stiffened_polytropic
from eos_module import (
    EosFamily,
    MixtureEos,
    PhaseEosSpec,
    calibrate_offsets,
    mixture_first_derivs,
    mixture_potential,
    mixture_potential_vq,
    mixture_pressure,
    mixture_second_derivs,
    mixture_sound_speed_sq,
    phase_densities,
    phase_density_at_pressure,
    phase_potential,
    phase_pressure,
    phase_psi,
    phase_sound_speed_sq,
)
from errors_module import DomainError

PHASES = [
    PhaseEosSpec(EosFamily.POLYTROPIC, K=1.0, gamma=2.0),
    PhaseEosSpec(EosFamily.POLYTROPIC, K=0.7, gamma=1.4, phi0=3.0),
    PhaseEosSpec(EosFamily.ISOTHERMAL, cT2=1.0),
    PhaseEosSpec(EosFamily.ISOTHERMAL, cT2=2.5, phi0=-1.0),
    PhaseEosSpec(EosFamily.STIFFENED, K=1.0, gamma=3.0, pInf=1.0),
]


def test_phase_laws_at_known_points():
    poly = PHASES[0]
    assert phase_pressure(poly, 2.0) == pytest.approx(4.0)
    assert phase_sound_speed_sq(poly, 2.0) == pytest.approx(4.0)
    assert phase_potential(poly, 2.0) == pytest.approx(2.0)
    assert phase_psi(poly, 2.0) == pytest.approx(4.0)

    iso = PHASES[2]
    assert phase_pressure(iso, 4.0) == pytest.approx(4.0)
    assert phase_sound_speed_sq(iso, 4.0) == pytest.approx(1.0)
    assert phase_psi(iso, 4.0) == pytest.approx(math.log(4.0) + 1.0)

    stiff = PHASES[4]
    assert phase_pressure(stiff, 2.0) == pytest.approx(7.0)
    assert phase_sound_speed_sq(stiff, 2.0) == pytest.approx(12.0)
    assert phase_potential(stiff, 2.0) == pytest.approx(2.5)
    assert phase_psi(stiff, 2.0) == pytest.approx(6.0)


@pytest.mark.parametrize("spec", PHASES, ids=lambda s: f"{s.family.value}-{s.gamma}-{s.cT2}")
def test_phase_thermodynamic_identities(spec):
    # a^2 = dp/drho, p = rho^2 dphi/drho, dpsi/drho = a^2 / rho
    rng = np.random.Generator(np.random.PCG64(17))
    for rho in np.exp(rng.uniform(np.log(0.05), np.log(10.0), size=100)):
        a2 = phase_sound_speed_sq(spec, rho)
        assert fd.central_derivative(lambda r: phase_pressure(spec, r), rho) == pytest.approx(a2, rel=1e-6)
        dphi = fd.central_derivative(lambda r: phase_potential(spec, r), rho)
        assert rho * rho * dphi == pytest.approx(phase_pressure(spec, rho), rel=1e-6, abs=1e-8)
        dpsi = fd.central_derivative(lambda r: phase_psi(spec, r), rho)
        assert dpsi == pytest.approx(a2 / rho, rel=1e-6)


def test_phase_laws_broadcast_over_arrays():
    rho = np.array([0.5, 1.0, 2.0])
    p = phase_pressure(PHASES[0], rho)
    assert isinstance(p, np.ndarray)
    assert_allclose(p, rho ** 2)
    assert isinstance(phase_pressure(PHASES[0], 2.0), float)


@pytest.mark.parametrize("spec", PHASES, ids=lambda s: s.family.value)
@pytest.mark.parametrize("p", [0.01, 1.0, 4.0, 50.0])
def test_density_at_pressure_inverts_phase_law(spec, p):
    rho = phase_density_at_pressure(spec, p)
    assert rho > 0
    assert phase_pressure(spec, rho) == pytest.approx(p, rel=1e-12, abs=1e-13)


def test_density_at_pressure_rejects_unreachable_pressure():
    with pytest.raises(DomainError):
        phase_density_at_pressure(PHASES[0], 0.0)
    with pytest.raises(DomainError):
        phase_density_at_pressure(PHASES[4], -1.5)
    # stiffened gas reaches tension down to -pInf
    rho = phase_density_at_pressure(PHASES[4], -0.5)
    assert phase_pressure(PHASES[4], rho) == pytest.approx(-0.5, rel=1e-12)


@pytest.mark.parametrize("rho", [0.0, -1.0, float("nan")])
def test_nonpositive_density_is_a_domain_error(rho):
    with pytest.raises(DomainError):
        phase_pressure(PHASES[0], rho)
    with pytest.raises(ValueError):
        phase_sound_speed_sq(PHASES[2], rho)


@pytest.mark.parametrize("kwargs", [
    dict(family=EosFamily.POLYTROPIC, K=-1.0),
    dict(family=EosFamily.POLYTROPIC, gamma=1.0),
    dict(family=EosFamily.STIFFENED, gamma=0.5),
    dict(family=EosFamily.ISOTHERMAL, cT2=0.0),
])
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(DomainError):
        PhaseEosSpec(**kwargs)


def test_family_accepts_its_config_name():
    spec = PhaseEosSpec("stiffened-gas", K=1.0, gamma=3.0, pInf=1.0)
    assert spec.family is EosFamily.STIFFENED
    assert spec.regime == "isentropic"
    assert PhaseEosSpec("ideal-isothermal").regime == "isothermal"


def test_phase_densities():
    rho1, rho2 = phase_densities(0.5, 1.0 / 3.0, 3.0)
    assert rho1 == pytest.approx(2.0)
    assert rho2 == pytest.approx(4.0)
    with pytest.raises(DomainError):
        phase_densities(1.0, 0.5, 1.0)


def test_mixture_at_mechanical_equilibrium():
    mix = polytropic_isothermal()
    # p_1 = p_2 = 4, so the mixture pressure is 4 and a^2 = c a_1^2 + (1 - c) a_2^2 = 2
    assert mixture_pressure(mix, 0.5, 1.0 / 3.0, 3.0) == pytest.approx(4.0)
    assert mixture_sound_speed_sq(mix, 0.5, 1.0 / 3.0, 3.0) == pytest.approx(2.0)


def test_mixture_potential_kinetic_term():
    mix = polytropic_isothermal()
    base = mixture_potential(mix, 0.4, 0.3, 2.0, 0.0)
    assert mixture_potential(mix, 0.4, 0.3, 2.0, 0.5) - base == pytest.approx(0.5 * 0.3 * 0.7 * 0.25)


def test_mixture_is_symmetric_under_phase_swap():
    mix = stiffened_polytropic()
    swapped = mix.swapped()
    rng = np.random.Generator(np.random.PCG64(5))
    for _ in range(100):
        alpha, c = rng.uniform(0.05, 0.95, size=2)
        rho, w = rng.uniform(0.3, 5.0), rng.uniform(-1.0, 1.0)
        assert mixture_potential(mix, alpha, c, rho, w) == pytest.approx(
            mixture_potential(swapped, 1.0 - alpha, 1.0 - c, rho, w), rel=1e-13)
        assert mixture_pressure(mix, alpha, c, rho) == pytest.approx(
            mixture_pressure(swapped, 1.0 - alpha, 1.0 - c, rho), rel=1e-13, abs=1e-13)
        assert mixture_sound_speed_sq(mix, alpha, c, rho) == pytest.approx(
            mixture_sound_speed_sq(swapped, 1.0 - alpha, 1.0 - c, rho), rel=1e-13)


def test_calibrate_offsets_equalizes_psi():
    for mix in (polytropic_isothermal(), stiffened_polytropic(), identical_phases()):
        cal = calibrate_offsets(mix, 6.0)
        rho1 = phase_density_at_pressure(cal.phase1, 6.0)
        rho2 = phase_density_at_pressure(cal.phase2, 6.0)
        assert phase_psi(cal.phase1, rho1) == pytest.approx(phase_psi(cal.phase2, rho2), abs=1e-12)
        assert cal.phase1 == mix.phase1


def test_identical_phases_need_no_calibration():
    mix = identical_phases()
    assert calibrate_offsets(mix, 3.0) is mix


@pytest.mark.parametrize("mix", [polytropic_isothermal(), stiffened_polytropic()], ids=["poly-iso", "stiff-poly"])
@pytest.mark.parametrize("point", [(0.5, 0.4, 2.0, 0.3), (0.2, 0.7, 5.0, -0.8), (0.9, 0.15, 1.2, 0.05)])
def test_first_derivatives_match_finite_differences(mix, point):
    x = np.array(point)
    analytic = mixture_first_derivs(mix, *point).as_array()
    oracle = fd.gradient(lambda y: mixture_potential(mix, *y), x)
    assert_allclose(analytic, oracle, rtol=1e-6, atol=1e-8 * np.max(np.abs(oracle)))


@pytest.mark.parametrize("mix", [polytropic_isothermal(), stiffened_polytropic()], ids=["poly-iso", "stiff-poly"])
@pytest.mark.parametrize("point", [(0.5, 0.4, 0.5, 0.1), (0.3, 0.6, 0.25, -0.2)])
def test_second_derivatives_match_finite_differences(mix, point):
    x = np.array(point)
    analytic = mixture_second_derivs(mix, *point).gen_hessian()
    oracle = fd.hessian(lambda y: mixture_potential_vq(mix, *y), x)
    assert_allclose(analytic, oracle, rtol=1e-6, atol=1e-6 * np.max(np.abs(oracle)))


def _fraction_scale(x):
    return min(x, 1.0 - x)


@pytest.mark.parametrize("mix", [polytropic_isothermal(), stiffened_polytropic()], ids=["poly-iso", "stiff-poly"])
def test_derivatives_over_random_states(mix):
    rng = np.random.Generator(np.random.PCG64(23))
    for _ in range(100):
        alpha, c = rng.uniform(0.05, 0.95, size=2)
        rho, w = rng.uniform(0.3, 5.0), rng.uniform(-1.0, 1.0)
        x = np.array([alpha, c, rho, w])
        analytic = mixture_first_derivs(mix, *x).as_array()
        oracle = fd.gradient(lambda y: mixture_potential(mix, *y), x,
                             scale=[_fraction_scale(alpha), _fraction_scale(c), rho, 1.0])
        assert_allclose(analytic, oracle, rtol=1e-6, atol=1e-8 * np.max(np.abs(oracle)))

        v = 1.0 / rho
        y = np.array([alpha, c, v, v * w])
        analytic = mixture_second_derivs(mix, *y).gen_hessian()
        oracle = fd.hessian(lambda z: mixture_potential_vq(mix, *z), y,
                            scale=[_fraction_scale(alpha), _fraction_scale(c), v, v])
        assert_allclose(analytic, oracle, rtol=1e-6, atol=1e-6 * np.max(np.abs(oracle)))


def test_second_derivatives_at_canonical_state():
    d2 = mixture_second_derivs(polytropic_isothermal(), 0.5, 1.0 / 3.0, 1.0 / 3.0)
    expected = np.array([
        [8.0, -10.0, 4.0],
        [-10.0, 13.5, -9.0],
        [4.0, -9.0, 18.0],
    ])
    assert_allclose(d2.phi_hessian(), expected, rtol=1e-12)
    # q = 0: the q row only carries c (1 - c) / v^2
    H = d2.gen_hessian()
    assert_allclose(H[:3, :3], expected, rtol=1e-12)
    assert_allclose(H[3], [0.0, 0.0, 0.0, 2.0], atol=1e-12)


def test_mixture_functions_vectorize():
    mix = polytropic_isothermal()
    alpha = np.array([0.2, 0.5, 0.8])
    c = np.array([0.3, 0.3, 0.6])
    rho = np.array([1.0, 2.0, 3.0])
    phi = mixture_potential(mix, alpha, c, rho)
    assert phi.shape == (3,)
    assert phi[1] == pytest.approx(mixture_potential(mix, 0.5, 0.3, 2.0))


def test_mixture_rejects_inadmissible_fractions():
    mix = MixtureEos(PHASES[0], PHASES[2])
    with pytest.raises(DomainError):
        mixture_potential(mix, 0.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        mixture_first_derivs(mix, 0.5, 1.0, 1.0)
