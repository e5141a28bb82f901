import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atmos.errors import DomainError, ParameterDomainError
from atmos.params import (critical_mass, dimension_of_gamma,
                          equilibrium_density, equilibrium_density_derivative,
                          equilibrium_pressure, equilibrium_profile,
                          gamma_of_dimension, make_params, total_mass)


def test_dimension_anchors():
    assert make_params(2.0, 2.0).N == 4.0
    assert make_params(4.0 / 3.0, 2.0).N == pytest.approx(8.0, rel=1e-14)
    assert make_params(1.5, 2.0).N == 6.0


@given(st.floats(min_value=1.01, max_value=2.0))
@settings(max_examples=60, deadline=None)
def test_gamma_dimension_round_trip(gamma):
    N = dimension_of_gamma(gamma)
    assert N >= 4.0 - 1e-12
    assert gamma_of_dimension(N) == pytest.approx(gamma, rel=4e-16)


def test_normalizations_fixed():
    p = make_params(1.5, 3.0)
    assert (p.R0, p.g0, p.A, p.A1) == (1.0, 2.0, 1.0 / 1.5, 1.0)


@pytest.mark.parametrize("gamma,R", [(1.0, 2.0), (2.5, 2.0), (0.9, 2.0),
                                     (1.5, 1.0), (1.5, 0.5)])
def test_parameter_domain_errors(gamma, R):
    with pytest.raises(ParameterDomainError):
        make_params(gamma, R)


def test_density_anchors(p32):
    assert equilibrium_density(p32, p32.R) == 0.0
    assert equilibrium_density(p32, 1.0) == pytest.approx(0.25, abs=1e-15)
    assert equilibrium_density(p32, 5.0) == 0.0
    with pytest.raises(DomainError):
        equilibrium_density(p32, 0.5)


def test_density_strictly_decreasing(p32):
    r = np.linspace(1.0, p32.R, 400)
    rho = equilibrium_density(p32, r)
    assert np.all(np.diff(rho) < 0.0)


def test_density_vacuum_slope(p32):
    # least-squares fit of log rho against log(R - r) near the boundary
    s = np.geomspace(1e-6, 1e-3, 40)
    r = p32.R - s
    rho = equilibrium_density(p32, r)
    slope = np.polyfit(np.log(s), np.log(rho), 1)[0]
    assert slope == pytest.approx(1.0 / (p32.gamma - 1.0), rel=1e-3)


def _gauss_mass(p, panels):
    """Independent oracle: composite 20-point Gauss on a fixed grid."""
    t, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(1.0, p.R, panels + 1)
    expo = 1.0 / (p.gamma - 1.0)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = mid + half * t
        total += half * np.dot(w, ((p.R - s) / (s * p.R)) ** expo * s * s)
    return 4.0 * math.pi * total


def test_total_mass_against_quadrature_oracle(p32):
    M = total_mass(p32)
    oracle = _gauss_mass(p32, 64)
    oracle2 = _gauss_mass(p32, 128)
    assert abs(oracle - oracle2) / oracle2 < 1e-11  # oracle self-consistent
    assert M == pytest.approx(oracle2, rel=1e-10)
    # closed form for gamma = 3/2, R = 2: integrand is (1 - r/2)^2
    assert M == pytest.approx(math.pi / 3.0, rel=1e-12)


def test_total_mass_small_atmosphere():
    p = make_params(1.5, 1.0 + 1e-6)
    assert 0.0 < total_mass(p) < 1e-12


def test_total_mass_increasing_in_R():
    Ms = [total_mass(make_params(1.5, R)) for R in np.linspace(1.2, 4.0, 12)]
    assert np.all(np.diff(Ms) > 0.0)


def test_critical_mass():
    assert critical_mass(make_params(1.25, 2.0)) == pytest.approx(
        4.0 * math.pi, rel=1e-14)
    assert math.isinf(critical_mass(make_params(1.5, 2.0)))
    assert math.isinf(critical_mass(make_params(4.0 / 3.0, 2.0)))
    # the mass stays below the bound for gamma < 4/3
    p = make_params(1.25, 50.0)
    assert total_mass(p) < critical_mass(p)


@pytest.mark.parametrize("gamma,R", [(1.5, 2.0), (2.0, 1.5), (1.2, 3.0)])
def test_hydrostatic_balance(gamma, R):
    # (1/rho) dP/dr + g0/r^2 = 0 with analytic derivatives
    p = make_params(gamma, R)
    r = np.linspace(1.0, p.R - 1e-6, 300)
    rho = equilibrium_density(p, r)
    drho = equilibrium_density_derivative(p, r)
    dP = p.A * p.gamma * rho ** (p.gamma - 1.0) * drho
    residual = dP / rho + p.g0 / r ** 2
    assert np.max(np.abs(residual)) < 1e-10


def test_pressure_is_polytropic(p32):
    r = np.linspace(1.0, p32.R, 50)
    assert equilibrium_pressure(p32, r) == pytest.approx(
        p32.A * equilibrium_density(p32, r) ** p32.gamma, rel=1e-14)


def test_profile_bundle(p32):
    prof = equilibrium_profile(p32)
    assert prof.total_mass == pytest.approx(math.pi / 3.0, rel=1e-12)
    assert prof.density(p32.R) == 0.0
    assert prof.enclosed_mass(p32.R) == pytest.approx(prof.total_mass,
                                                      rel=1e-10)
    assert prof.enclosed_mass(1.0) == 0.0
