import math

import numpy as np
import pytest

from phasenoise import baths, exact, tcl
from phasenoise.baths import BathMode, DiscreteBath, OhmicExpCutoff, SpectralBath
from phasenoise.errors import UnsupportedModelError
from phasenoise.exact import CoherentMixture, SystemSpec

from conftest import plus_state, random_bath, random_density

OHMIC = OhmicExpCutoff(0.1, 5.0)


def test_rate_diagonal_is_zero(rng, qutrit):
    bath = random_bath(rng)
    for m in range(3):
        assert tcl.tcl2_rate(qutrit, bath, m, m, 2.3) == 0


def test_rate_qubit_example(qubit):
    bath = DiscreteBath((BathMode(1.0, 0.2),))
    assert tcl.tcl2_rate(qubit, bath, 0, 1, math.pi / 2) == pytest.approx(-0.16, abs=1e-15)


def test_rate_real_part_is_lambda_derivative(rng, qubit):
    bath = random_bath(rng)
    h = 1e-3
    for t in (0.5, 3.0, 9.0):
        lam = lambda s: baths.lambda_damping(bath, s)
        d_lam = (lam(t - 2 * h) - 8 * lam(t - h) + 8 * lam(t + h) - lam(t + 2 * h)) / (12 * h)
        assert tcl.tcl2_rate(qubit, bath, 0, 1, t).real == pytest.approx(-4 * d_lam, rel=1e-6)


def test_empty_bath_constant(rng, qutrit):
    rho0 = random_density(rng, 3)
    traj = tcl.integrate_tcl2(qutrit, DiscreteBath(()), rho0, np.linspace(0, 5, 6))
    np.testing.assert_array_equal(traj.rho, np.repeat(rho0[None], 6, 0))


@pytest.mark.parametrize("seed", range(3))
def test_tcl2_matches_exact(seed, qutrit):
    rng = np.random.default_rng(seed)
    bath = random_bath(rng)
    rho0 = random_density(rng, 3)
    ts = np.linspace(0, 20, 400)
    a = tcl.integrate_tcl2(qutrit, bath, rho0, ts)
    b = exact.propagate_exact_gaussian(qutrit, bath, rho0, ts)
    assert np.max(np.abs(a.rho - b.rho)) <= 10 * tcl.DEFAULT_RTOL


def test_tcl2_matches_exact_spectral(qubit):
    bath = SpectralBath(OHMIC, 0.5)
    ts = np.linspace(0, 3, 13)
    a = tcl.integrate_tcl2(qubit, bath, plus_state(2), ts)
    b = exact.propagate_exact_gaussian(qubit, bath, plus_state(2), ts)
    assert np.max(np.abs(a.rho - b.rho)) < 1e-8


def test_tcl2_gap_grows_for_mixture(qubit):
    modes = [(BathMode(1.0, 0.1), CoherentMixture((0.5, 0.5), (2.0, -2.0)))]
    ts = np.linspace(0, 2 * math.pi, 61)
    a = tcl.integrate_tcl2(qubit, exact.gaussian_bath(modes), plus_state(2), ts)
    b = exact.propagate_exact_charfn(qubit, modes, plus_state(2), ts)
    gap = np.abs(a.rho[:, 0, 1] - b.rho[:, 0, 1])
    assert gap[0] == 0
    assert gap.max() > 1e-3
    assert gap[5] < gap[10] < gap[15]


def test_generator_forms_agree(rng, qutrit):
    bath = random_bath(rng)
    rho = random_density(rng, 3)
    for t in (0.0, 1.1, 7.5):
        op = tcl.apply_generator(qutrit, bath, t, rho)
        el = tcl.tcl2_rates(qutrit, bath, t).drift * rho
        np.testing.assert_allclose(op, el, atol=1e-14)
        np.testing.assert_allclose(op, op.conj().T, atol=1e-14)
    diag = np.diag(np.diag(rho))
    assert np.all(tcl.apply_generator(qutrit, bath, 2.0, diag) == 0)


def test_generator_qubit_entry(qubit):
    bath = DiscreteBath((BathMode(1.0, 0.2),))
    rho = plus_state(2)
    assert tcl.apply_generator(qubit, bath, math.pi / 2, rho)[0, 1] == pytest.approx(-0.16 * 0.5, abs=1e-15)


def test_markov_discrete_unsupported(rng):
    with pytest.raises(UnsupportedModelError, match="unsupported-model"):
        tcl.markov_rates(random_bath(rng))


def test_markov_zero_temperature_and_shift():
    rates = tcl.markov_rates(SpectralBath(OHMIC, 0.0))
    assert rates.gamma == 0.0
    assert rates.shift == pytest.approx(-0.5, abs=1e-4)


def test_markov_gamma_is_long_time_limit_of_sym_integral():
    bath = SpectralBath(OHMIC, 2.0)
    gamma = tcl.markov_rates(bath).gamma
    assert baths.spectral_sym_integral(bath, 200.0) == pytest.approx(gamma, rel=5e-3)
    assert gamma == pytest.approx(math.pi * 0.1 * 2.0, rel=1e-12)


def test_markov_gamma_high_temperature_anchor():
    # anchor as stated: 2 pi alpha T = 1.256637 within 1 %
    gamma = tcl.markov_rates(SpectralBath(OHMIC, 2.0)).gamma
    assert abs(gamma - 2 * math.pi * 0.1 * 2.0) <= 0.01 * 2 * math.pi * 0.1 * 2.0


def test_long_time_convergence():
    # |Lambda'(t) - gamma| / gamma <= 1 % for t >= 20 / omega_c
    bath = SpectralBath(OHMIC, 2.0)
    gamma = tcl.markov_rates(bath).gamma
    for t in (4.0, 8.0, 20.0):
        assert abs(baths.spectral_sym_integral(bath, t) - gamma) / gamma <= 0.01


def test_bloch_redfield(qubit):
    rho0 = plus_state(2)
    ts = np.linspace(0, 3, 7)
    still = tcl.integrate_bloch_redfield(qubit, tcl.MarkovRates(0.0, 0.0), rho0, ts)
    np.testing.assert_array_equal(still.rho, np.repeat(rho0[None], 7, 0))
    decay = tcl.integrate_bloch_redfield(qubit, tcl.MarkovRates(0.5, 0.3), rho0, ts)
    np.testing.assert_allclose(np.abs(decay.rho[:, 0, 1]), 0.5 * np.exp(-2 * ts), rtol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_choi_positive(d, rng):
    system = SystemSpec(np.zeros(d), rng.normal(size=d))
    rates = tcl.MarkovRates(rng.uniform(0, 1), rng.normal())
    for t in (0.0, 0.3, 2.0, 10.0):
        factor = tcl.bloch_redfield_factors(system, rates, [t])[0]
        assert np.linalg.eigvalsh(tcl.choi_matrix(factor)).min() >= -1e-10
