import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from phasenoise import baths, cumulants, exact, tcl
from phasenoise.baths import BathMode, DiscreteBath
from phasenoise.exact import CoherentMixture, Gaussian, SystemSpec

from conftest import random_bath

MIX = [(BathMode(1.0, 0.1), CoherentMixture((0.5, 0.5), (2.0, -2.0)))]
QUBIT = SystemSpec([0.0, 1.0], [1.0, -1.0])


def cgf_cumulants(system, modes, m, n, t, order):
    """Cumulants of F by numerical differentiation of log E[exp(s F)] at s = 0."""
    mode_list = [mode for mode, _ in modes]
    (mode, state), = modes
    values = [cumulants.f_mn_value(system, mode_list, m, n, t, [b]) for b in state.betas]
    with mpmath.workdps(60):
        w = [mpmath.mpf(x) for x in state.weights]
        v = [mpmath.mpc(x.real, x.imag) for x in values]
        cgf = lambda s: mpmath.log(sum(wi * mpmath.exp(s * vi) for wi, vi in zip(w, v)))
        return [complex(mpmath.diff(cgf, 0, k)) for k in range(1, order + 1)]


def test_f_value_trivial_cases(rng):
    bath = random_bath(rng)
    modes = list(bath.modes)
    system = SystemSpec([0.0, 1.0, 2.0], [0.5, 0.5, -1.0])
    assert cumulants.f_mn_value(system, modes, 0, 1, 2.0, [1j] * 5) == 0
    t = 3.1
    z = np.array([exact.z_coefficient(m, t) for m in modes])
    expected = -(1.5**2) * np.sum(np.abs(z) ** 2) / 2 + 1j * (0.25 - 1.0) * baths.phi_phase(bath, t)
    assert cumulants.f_mn_value(system, modes, 0, 2, t, [0] * 5) == pytest.approx(expected, abs=1e-14)


def test_f_value_is_affine(rng):
    modes = list(random_bath(rng).modes)
    f = lambda b: cumulants.f_mn_value(SystemSpec([0, 1, 2], [1, 0, -1]), modes, 0, 2, 2.7, b)
    for _ in range(5):
        a = rng.normal(size=5) + 1j * rng.normal(size=5)
        b = rng.normal(size=5) + 1j * rng.normal(size=5)
        assert abs(f(a + b) - f(a) - f(b) + f(np.zeros(5))) <= 1e-14


def test_log_coherence_zero_time():
    assert cumulants.log_coherence_exact(QUBIT, MIX, 0, 1, 0.0) == 0


def test_log_coherence_gaussian_closed_form(rng):
    bath = random_bath(rng)
    system = SystemSpec([0.0, 0.7, 1.3], [1.0, 0.0, -1.0])
    modes = exact.states_from_bath(bath)
    ts = np.linspace(0, 8, 17)
    got = cumulants.log_coherence_exact(system, modes, 0, 1, ts)
    expected = -baths.lambda_damping(bath, ts) + 1j * (baths.phi_phase(bath, ts) + baths.psi_phase(bath, ts))
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_log_coherence_mixture_is_log_of_average():
    ts = np.linspace(0.1, 6, 12)
    got = cumulants.log_coherence_exact(QUBIT, MIX, 0, 1, ts)
    avg = 0.5 * sum(np.exp([cumulants.f_mn_value(QUBIT, [MIX[0][0]], 0, 1, t, [b]) for t in ts]) for b in (2.0, -2.0))
    np.testing.assert_allclose(np.exp(got), avg, rtol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_gaussian_termination(seed):
    bath = random_bath(np.random.default_rng(seed))
    modes = exact.states_from_bath(bath)
    system = SystemSpec([0.0, 0.7, 1.3], [1.0, 0.0, -1.0])
    for t in (0.7, 3.0, 11.0):
        k = cumulants.cumulants(system, modes, 0, 2, t, 4)
        assert abs(k[2]) <= 1e-12 * abs(k[1]) and abs(k[3]) <= 1e-12 * abs(k[1])
        assert cumulants.cumulant_contribution(system, modes, 0, 2, t, 3) == pytest.approx(0, abs=1e-12)
        report = cumulants.cumulant_report(system, modes, 0, 2, t)
        assert report.tcl2_log == pytest.approx(report.exact_log, abs=1e-10)


@pytest.mark.parametrize("t", [0.4, math.pi / 2, 2.5, 4.0])
def test_mixture_cumulants_against_cgf(t):
    got = cumulants.cumulants(QUBIT, MIX, 0, 1, t, 4)
    ref = cgf_cumulants(QUBIT, MIX, 0, 1, t, 4)
    for g, r in zip(got, ref):
        assert g == pytest.approx(r, abs=1e-12, rel=1e-9)


def test_mixture_fourth_cumulant_nonzero_off_pi():
    k4 = cumulants.cumulants(QUBIT, MIX, 0, 1, math.pi / 2, 4)[3]
    assert abs(k4) > 1e-3


def test_mixture_fourth_cumulant_at_pi():
    # stated anchor: |kappa_4| > 1e-3 at t = pi
    k4 = cumulants.cumulants(QUBIT, MIX, 0, 1, math.pi, 4)[3]
    assert abs(k4) > 1e-3


def test_partial_sums_reduce_gap():
    for t in (0.5, 1.0, math.pi / 2, 2.0):
        report = cumulants.cumulant_report(QUBIT, MIX, 0, 1, t)
        assert report.gap(4) < report.gap(2)


def test_tcl2_identification():
    bath = exact.gaussian_bath(MIX)
    for t in (0.8, 2.0, 5.0):
        re, _ = integrate.quad(lambda s: tcl.tcl2_rate(QUBIT, bath, 0, 1, s).real, 0, t, epsabs=1e-14, epsrel=1e-13)
        im, _ = integrate.quad(lambda s: tcl.tcl2_rate(QUBIT, bath, 0, 1, s).imag, 0, t, epsabs=1e-14, epsrel=1e-13)
        report = cumulants.cumulant_report(QUBIT, MIX, 0, 1, t)
        assert report.tcl2_log == pytest.approx(re + 1j * im, abs=1e-10)


def test_order_bounds():
    with pytest.raises(ValueError):
        cumulants.cumulant_contribution(QUBIT, MIX, 0, 1, 1.0, 5)
    with pytest.raises(ValueError):
        cumulants.cumulants(QUBIT, MIX, 0, 1, 1.0, 0)


def test_moments_to_cumulants_gaussian():
    # N(mu, s2): moments mu, mu^2+s2, mu^3+3 mu s2, mu^4+6 mu^2 s2+3 s2^2
    mu, s2 = 0.7, 1.3
    k = cumulants.moments_to_cumulants([mu, mu**2 + s2, mu**3 + 3 * mu * s2, mu**4 + 6 * mu**2 * s2 + 3 * s2**2])
    np.testing.assert_allclose(k, [mu, s2, 0, 0], atol=1e-13)
