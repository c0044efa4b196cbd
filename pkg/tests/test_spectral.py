import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltatrain import ConfigurationError, DeltaTrain
from deltatrain.spectral import (
    DiscreteOscillators,
    LorentzDrude,
    NoiseCovariance,
    PeriodicSpectralDensity,
    dtft_s,
    gamma_from_dtft,
    gamma_ld,
    noise_commutator,
    noise_continuous,
    noise_correlator,
    noise_nu,
    poisson_check,
    poisson_tail,
    sigma_continuous,
    sigma_ld,
    thermal_offsets_ld,
    thermal_offsets_ld_adaptive,
)

from oracles import ld_symmetric_matsubara


def test_sources_validate():
    with pytest.raises(ConfigurationError):
        LorentzDrude(0.1, 0.0)
    with pytest.raises(ConfigurationError):
        DiscreteOscillators([1.0, -2.0], 1.0)
    with pytest.raises(ConfigurationError):
        DiscreteOscillators([1.0], 1.0).sigma(1.0)


def test_gamma_ld():
    assert gamma_ld(0.0, 1.0, 1.0) == 0
    assert gamma_ld(1.0, 1.0, 1.0) == pytest.approx(0.36788, abs=5e-6)
    t = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(gamma_ld(-t, 0.3, 2.0), -gamma_ld(t, 0.3, 2.0))


def test_discrete_gamma():
    one = DiscreteOscillators([1.7], 1.0)
    assert one.gamma(0.0) == 0
    assert one.gamma(0.4) == pytest.approx(np.sin(1.7 * 0.4) / 1.7)


def test_sigma():
    ld = LorentzDrude(0.3, 2.0)
    assert sigma_continuous(2.0, ld) == pytest.approx(0.3 * 2.0 / 2)
    w = np.linspace(0.1, 10, 7)
    np.testing.assert_array_equal(sigma_ld(-w, 0.3, 2.0), -sigma_ld(w, 0.3, 2.0))


def test_dtft_s_values():
    assert dtft_s(0.0, 1.0, 1.0, 1.0, 10) == 0
    assert abs(dtft_s(np.pi, 1.0, 1.0, 1.0, 10)) < 1e-15
    s = PeriodicSpectralDensity(0.4, 1.3, 2.0, 17)
    w = np.linspace(-np.pi, np.pi, 41)
    np.testing.assert_allclose(s(-w), -s(w), atol=1e-15)
    np.testing.assert_allclose(s(w + 2 * np.pi), s(w), atol=1e-12)
    assert np.all(np.cos(w) - np.cosh(1.3 * 2.0 / 17) < 0)


@pytest.mark.parametrize("kappa,lam,delta", [(1.0, 1.0, 0.1), (0.1, 2.0, 0.0005), (3.0, 0.5, 0.7), (0.2, 5.0, 0.02)])
def test_dtft_roundtrip(kappa, lam, delta):
    N = 100
    T = delta * N
    for k in range(1, 11):
        assert gamma_from_dtft(k, kappa, lam, T, N) == pytest.approx(kappa * lam ** 2 * np.exp(-lam * delta * k), abs=1e-8)
    assert gamma_from_dtft(-3, kappa, lam, T, N) == pytest.approx(-kappa * lam ** 2 * np.exp(-3 * lam * delta), abs=1e-8)


def test_poisson_zero_and_monotone():
    lhs, rhs, diff = poisson_check(0.0, 1.0, 1.0, 1.0, 10, 50)
    assert lhs == 0 and abs(rhs) < 1e-15
    diffs = [poisson_check(1.0, 1.0, 1.0, 1.0, 10, M)[2] for M in (50, 100, 200, 400, 800)]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_poisson_tail_accounts_for_residual():
    # the truncated image sum misses ~ kappa Lambda^2 omega delta / (2 pi^2 M)
    for M in (50, 200, 800):
        lhs, rhs, _ = poisson_check(1.0, 1.0, 1.0, 1.0, 10, M)
        tail = poisson_tail(1.0, 1.0, 1.0, 1.0, 10, M)
        assert abs(lhs - rhs - tail) < 1e-3 * abs(tail) + 1e-12
    d50 = poisson_check(1.0, 1.0, 1.0, 1.0, 10, 50)[2]
    d800 = poisson_check(1.0, 1.0, 1.0, 1.0, 10, 800)[2]
    assert d50 / d800 == pytest.approx(16, rel=0.05)


@pytest.mark.parametrize("N,beta,units", [(40, 1.0, "physical"), (300, 0.3, "physical"), (2000, 1.0, "physical"),
                                          (60, 2.0, "literal"), (25, 50.0, "physical")])
def test_offsets_against_adaptive_quadrature(N, beta, units):
    ld = LorentzDrude(0.1, 2.0)
    tr = DeltaTrain.uniform(1.0, N)
    fast = thermal_offsets_ld(ld, tr, beta, units)
    probes = sorted({0, 1, 2, N // 3, N - 1})
    np.testing.assert_allclose(fast[probes], thermal_offsets_ld_adaptive(ld, tr, beta, probes, units), atol=1e-9)


def test_nu_structure():
    ld = LorentzDrude(0.3, 2.0)
    tr = DeltaTrain.uniform(1.5, 30)
    nu = noise_nu(tr, ld, 0.7).nu
    np.testing.assert_array_equal(nu, nu.T)
    assert np.all(np.diag(nu) >= 0)
    # stationary for a uniform train
    for m in range(1, 5):
        d = np.diagonal(nu, m)
        assert np.ptp(d) < 1e-15
    assert np.linalg.eigvalsh(nu).min() >= -1e-8 * np.abs(nu).max()
    assert not noise_nu(tr, LorentzDrude(0.0, 2.0), 0.7).nu.any()
    with pytest.raises(ConfigurationError):
        noise_nu(tr, ld, 0.0)
    with pytest.raises(ConfigurationError):
        noise_nu(tr, ld, 1.0, units="radians")


def test_nu_scales_with_amplitudes():
    ld = LorentzDrude(0.3, 2.0)
    chi = np.linspace(0.2, 1.4, 12)
    a = noise_nu(DeltaTrain(1.0, 12, chi), ld, 1.0).nu
    b = noise_nu(DeltaTrain.uniform(1.0, 12), ld, 1.0).nu
    np.testing.assert_allclose(a, np.outer(chi, chi) * b, rtol=1e-14)


def test_nu_units_modes():
    ld = LorentzDrude(0.3, 2.0)
    tr = DeltaTrain.uniform(2.0, 10)  # delta = 0.2
    phys = noise_nu(tr, ld, 1.0, "physical").nu
    lit = noise_nu(tr, ld, 5.0, "literal").nu  # beta / delta
    np.testing.assert_allclose(phys, lit, atol=1e-15)
    assert NoiseCovariance.zeros(3).size == 3
    np.testing.assert_array_equal(noise_nu(tr, ld, 1.0).diagonal_part().nu, np.diag(np.diag(phys)))


def test_nu_high_temperature_scaling():
    # coth(beta w / 2) -> 2 / (beta w): nu grows like 1/beta
    ld = LorentzDrude(0.3, 2.0)
    tr = DeltaTrain.uniform(1.0, 8)
    a = noise_nu(tr, ld, 1e-5).nu
    b = noise_nu(tr, ld, 2e-5).nu
    np.testing.assert_allclose(a, 2 * b, rtol=1e-6)


def test_discrete_bath_nu_exact():
    bath = DiscreteOscillators([0.7, 1.9], 0.4)
    tr = DeltaTrain.uniform(1.0, 5)
    beta = 2.0
    nu = noise_nu(tr, bath, beta).nu
    d = tr.spacing
    for k in range(5):
        for kp in range(5):
            lag = (k - kp) * d
            ref = sum(0.16 / w / np.tanh(beta * w / 2) * np.cos(w * lag) for w in (0.7, 1.9))
            assert nu[k, kp] == pytest.approx(d * d * ref, rel=1e-13)


def test_commutator_and_correlator():
    ld = LorentzDrude(0.3, 2.0)
    tr = DeltaTrain.uniform(1.0, 6)
    c = noise_commutator(tr, ld)
    np.testing.assert_allclose(c, -c.T, atol=1e-16)
    assert c[3, 1] == pytest.approx(tr.spacing ** 2 * gamma_ld(2 * tr.spacing, 0.3, 2.0))
    C = noise_correlator(tr, ld, 1.0)
    np.testing.assert_allclose(C + C.T, noise_nu(tr, ld, 1.0).nu, atol=1e-16)
    np.testing.assert_allclose(C, C.conj().T, atol=1e-16)


@pytest.mark.parametrize("tau", [0.05, 0.4, 1.3])
@pytest.mark.parametrize("beta", [0.5, 1.0, 3.0])
def test_continuous_correlator_matsubara(tau, beta):
    ld = LorentzDrude(0.3, 2.0)
    v = noise_continuous(tau, 0.0, ld, beta)
    assert v.real == pytest.approx(ld_symmetric_matsubara(tau, 0.3, 2.0, beta), rel=1e-8)
    assert v.imag == pytest.approx(0.5 * gamma_ld(tau, 0.3, 2.0))


def test_continuous_correlator_symmetry():
    ld = LorentzDrude(0.3, 2.0)
    a, b = noise_continuous(0.9, 0.2, ld, 1.0), noise_continuous(0.2, 0.9, ld, 1.0)
    assert a.real == pytest.approx(b.real, rel=1e-12)
    assert a.imag == pytest.approx(-b.imag)
    with pytest.raises(ConfigurationError):
        noise_continuous(0.3, 0.3, ld, 1.0)
    bath = DiscreteOscillators([1.0], 1.0)
    v = noise_continuous(0.5, 0.0, bath, 2.0)
    assert v.real == pytest.approx(0.5 / np.tanh(1.0) * np.cos(0.5))


@given(st.floats(0.01, 5), st.floats(0.05, 5), st.floats(0.001, 1.0), st.floats(-np.pi, np.pi))
def test_s_odd_and_poisson_sign(kappa, lam, delta, w):
    s = dtft_s(w, kappa, lam, delta, 1)
    assert dtft_s(-w, kappa, lam, delta, 1) == pytest.approx(-s, abs=1e-12 * max(1, abs(s)))
    assert np.sign(s) == np.sign(np.sin(w)) or s == 0
