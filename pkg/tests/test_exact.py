import math

import numpy as np
import pytest
from scipy import integrate

from phasenoise import baths, exact, fock
from phasenoise.baths import BathMode, DiscreteBath
from phasenoise.errors import PhaseNoiseError
from phasenoise.exact import CoherentMixture, Gaussian, SystemSpec

from conftest import plus_state, random_bath, random_density


def test_z_coefficient():
    assert exact.z_coefficient(BathMode(1.0, 0.2), 0.0) == 0
    assert exact.z_coefficient(BathMode(1.0, 0.2), math.pi) == pytest.approx(0.4, abs=1e-15)


def test_z_reproduces_lambda(rng):
    for _ in range(5):
        bath = random_bath(rng)
        t = rng.uniform(0, 20)
        z = np.array([exact.z_coefficient(m, t) for m in bath.modes])
        lam = float(np.sum(np.abs(z) ** 2 * (1 + 2 * bath.nbar)) / 2)
        assert lam == pytest.approx(baths.lambda_damping(bath, t), abs=1e-12)


def test_characteristic_fn_trivial():
    for state in (Gaussian(0.7, 1 - 1j), CoherentMixture((0.3, 0.7), (1j, -2))):
        assert exact.characteristic_fn(state, 0.0) == 1
    assert exact.characteristic_fn(Gaussian(0.0, 0.0), 0.4 - 2j) == 1


def test_characteristic_fn_against_p_function_quadrature():
    # chi(lam) = int d^2 beta P(beta) exp(lam beta* - lam* beta), P thermal with nbar = 1
    def integrand(y, x):
        return math.exp(-(x * x + y * y)) / math.pi * math.cos(2 * y)

    ref, _ = integrate.dblquad(integrand, -10, 10, -10, 10, epsabs=1e-13)
    assert exact.characteristic_fn(Gaussian(1.0, 0.0), 1.0) == pytest.approx(ref, abs=1e-10)
    assert abs(exact.characteristic_fn(Gaussian(1.0, 0.0), 1.0) - 0.367879) < 1e-6


def test_identity_coupling_freezes(rng):
    system = SystemSpec([0.0, 0.5, 2.0], [0.4, 0.4, 0.4])
    rho0 = random_density(rng, 3)
    traj = exact.propagate_exact_gaussian(system, random_bath(rng), rho0, np.linspace(0, 10, 11))
    np.testing.assert_allclose(traj.rho, np.repeat(rho0[None], 11, axis=0), atol=1e-15)


def test_qubit_vacuum_decay(qubit):
    bath = DiscreteBath((BathMode(1.0, 0.2),))
    traj = exact.propagate_exact_gaussian(qubit, bath, plus_state(2), [math.pi])
    ratio = traj.rho[0, 0, 1] / 0.5
    assert abs(ratio) == pytest.approx(math.exp(-0.32), rel=1e-13)
    assert abs(np.angle(ratio)) < 1e-15


def test_qubit_displaced_phase(qubit):
    bath = DiscreteBath((BathMode(1.0, 0.1, 0.0, 1.0),))
    ts = np.linspace(0, 6, 13)
    traj = exact.propagate_exact_gaussian(qubit, bath, plus_state(2), ts)
    np.testing.assert_allclose(np.angle(traj.rho[:, 0, 1]), -0.4 * np.sin(ts), atol=1e-13)


def test_charfn_matches_gaussian_form(rng, qutrit):
    bath = random_bath(rng)
    modes = exact.states_from_bath(bath)
    ts = np.linspace(0, 15, 40)
    rho0 = random_density(rng, 3)
    a = exact.propagate_exact_gaussian(qutrit, bath, rho0, ts)
    b = exact.propagate_exact_charfn(qutrit, modes, rho0, ts)
    np.testing.assert_allclose(a.rho, b.rho, atol=1e-12)
    np.testing.assert_array_equal(b.rho[0], rho0)


def test_mixture_matches_oracle(qubit):
    modes = [(BathMode(1.0, 0.1), CoherentMixture((0.5, 0.5), (2.0, -2.0)))]
    ts = np.linspace(0, 10, 41)
    a = exact.propagate_exact_charfn(qubit, modes, plus_state(2), ts)
    b = fock.oracle_trajectory(qubit, modes, plus_state(2), ts, n_max=60)
    assert np.max(np.abs(a.rho - b.rho)) < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_structural_invariants(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 3
    system = SystemSpec(rng.uniform(0, 2, d), rng.normal(size=d))
    rho0 = random_density(rng, d)
    traj = exact.propagate_exact_gaussian(system, random_bath(rng), rho0, np.linspace(0, 30, 121))
    rho = traj.rho
    np.testing.assert_allclose(rho, np.conj(np.swapaxes(rho, 1, 2)), atol=1e-12)
    np.testing.assert_allclose(np.diagonal(rho, axis1=1, axis2=2), np.repeat(np.diag(rho0)[None], rho.shape[0], 0), atol=1e-12)
    assert np.all(np.abs(rho) <= np.abs(rho0)[None] + 1e-15)
    assert min(np.linalg.eigvalsh(r).min() for r in rho) >= -1e-10


def test_to_schrodinger(qubit):
    bath = DiscreteBath((BathMode(1.0, 0.2),))
    traj = exact.propagate_exact_gaussian(qubit, bath, plus_state(2), [0.0, math.pi])
    s = exact.to_schrodinger(traj, qubit)
    np.testing.assert_allclose(np.abs(s.rho), np.abs(traj.rho), atol=1e-16)
    assert s.rho[1, 0, 1] == pytest.approx(traj.rho[1, 0, 1] * np.exp(1j * math.pi), abs=1e-15)
    flat = SystemSpec([0.3, 0.3], [1.0, -1.0])
    np.testing.assert_array_equal(exact.to_schrodinger(traj, flat).rho, traj.rho)
    with pytest.raises(ValueError):
        exact.to_schrodinger(s, qubit)


def test_invalid_density_rejected(qubit):
    bad = np.array([[0.7, 0.0], [0.0, 0.7]])
    with pytest.raises((ValueError, PhaseNoiseError)):
        exact.propagate_exact_gaussian(qubit, DiscreteBath(()), bad, [0.0])


def test_mixture_validation():
    with pytest.raises(ValueError):
        CoherentMixture((0.5, 0.6), (1, -1))


def test_gaussian_bath_moments():
    mix = CoherentMixture((0.5, 0.5), (2.0, -2.0))
    bath = exact.gaussian_bath([(BathMode(1.0, 0.1), mix)])
    assert bath.beta_bar[0] == 0
    assert bath.nbar[0] == pytest.approx(4.0)
    assert bath.anomalous[0] == pytest.approx(4.0)
