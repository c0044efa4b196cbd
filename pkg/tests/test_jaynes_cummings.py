import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltatrain import ConfigurationError, DeltaTrain, PhysicalityError, PoleError, solve_nodes
from deltatrain.jaynes_cummings import (
    JCParams,
    choi_matrix,
    choi_spectrum,
    decay_rates,
    decay_rates_fd,
    exact_amplitude,
    g_function,
    jc_kernel,
    kraus_channel,
    kraus_operators,
    node_amplitudes,
    rhp_measure,
    transfer,
    transfer_interval,
)

from oracles import jc_ode_amplitude

FIG3 = dict(params=JCParams(2.5, 1.0), train=DeltaTrain.uniform(30.0, 40))


def test_params_validation():
    with pytest.raises(ConfigurationError):
        JCParams(-1.0, 1.0)
    with pytest.raises(ConfigurationError):
        JCParams(0.1, 1.0, alpha1_0=0.9, alpha0=0.0)
    p = JCParams(0.1, 1.0, alpha1_0=0.6, alpha0=0.8)
    assert np.trace(p.rho0) == pytest.approx(1.0)


def test_kernel_values():
    k = jc_kernel(JCParams(0.1, 1.0))
    assert k.gamma(2.0, 1.0) == pytest.approx(0.05 * np.exp(-1.0))
    assert k.gamma(2.0, 1.0) == pytest.approx(0.018394, abs=5e-7)
    assert k.gamma(1.0, 1.0) == pytest.approx(0.05)
    assert k.sigma_matrix(DeltaTrain.uniform(1.0, 3))[1, 1] == 0
    assert not jc_kernel(JCParams(0.0, 1.0)).sigma_matrix(DeltaTrain.uniform(1.0, 4)).any()


@pytest.mark.parametrize("ratio", [0.1, 0.5, 2.5, 7.0])
def test_exact_amplitude_matches_ode(ratio):
    for t in (0.0, 0.3, 1.0, 4.0, 11.0):
        assert exact_amplitude(t, ratio, 1.0) == pytest.approx(jc_ode_amplitude(t, ratio, 1.0), abs=1e-12)


def test_exact_amplitude_values():
    assert exact_amplitude(0.0, 0.3, 1.0) == 1.0
    # printed reference value, to its stated precision
    assert abs(exact_amplitude(1.0, 0.1, 1.0) - 0.98130) < 1e-3
    assert exact_amplitude(1.0, 0.1, 1.0).real == pytest.approx(0.9816771188, abs=1e-10)
    # critical damping 2 kappa = Lambda
    for t in (0.2, 1.0, 3.0):
        assert exact_amplitude(t, 0.5, 1.0) == pytest.approx(np.exp(-t / 2) * (1 + t / 2), rel=1e-12)
    # just off the critical point: series branch vs closed form
    assert exact_amplitude(2.0, 0.5 + 1e-10, 1.0) == pytest.approx(np.exp(-1.0) * 2.0, rel=1e-8)


def test_transfer_trivial():
    tr = DeltaTrain.uniform(1.0, 20)
    tf = transfer(tr, JCParams(0.0, 1.0))
    assert all(tf(t) == 1 for t in (0.0, 0.33, 1.0))
    one = transfer(DeltaTrain.uniform(1.0, 1), JCParams(0.7, 1.0))
    assert one(1.0) == 1 and one(3.0) == 1
    assert transfer(tr, JCParams(0.4, 1.0))(0.0) == 1


def test_transfer_nodes_equal_solver():
    tr = DeltaTrain.uniform(3.0, 25)
    p = JCParams(0.8, 1.0)
    tf = transfer(tr, p)
    np.testing.assert_allclose(tf.nodes, solve_nodes([1.0], tr, jc_kernel(p)), atol=1e-15)
    _, alpha = node_amplitudes(tr, p)
    np.testing.assert_allclose(alpha, tf.nodes, atol=1e-13)


def test_convergence():
    errs = [abs(transfer(DeltaTrain.uniform(1.0, N), JCParams(0.1, 1.0))(1.0) - exact_amplitude(1.0, 0.1, 1.0))
            for N in (10, 30, 100, 300, 1000)]
    assert all(b < a + 1e-9 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3
    # first-order scheme
    assert errs[-2] / errs[-1] == pytest.approx(1000 / 300, rel=0.05)


def test_interval_start_zero_equals_transfer():
    tr = DeltaTrain.uniform(2.0, 16)
    p = JCParams(1.3, 1.0)
    tf = transfer(tr, p)
    for t in (0.5, 1.25, 2.0):
        assert transfer_interval(t, 0.0, tr, p) == pytest.approx(tf(t), abs=1e-15)
    with pytest.raises(ConfigurationError):
        transfer_interval(1.0, 0.3, tr, p)


@pytest.mark.parametrize("ratio", [0.1, 2.5])
def test_markov_semigroup(ratio):
    p = JCParams(ratio, 1.0)
    tr = DeltaTrain.uniform(3.0, 24)
    tf = transfer(tr, p, 1)
    for a in range(0, 24):
        ta = tr.node_time(a)
        for t in np.r_[tr.times[a:], ta + 0.37]:
            assert abs(tf(t) - transfer_interval(t, ta, tr, p, 1) * tf(ta)) < 1e-12


def test_unrestricted_breaks_semigroup():
    p, tr = FIG3["params"], FIG3["train"]
    tf = transfer(tr, p)
    ta, t = tr.node_time(2), tr.node_time(6)
    assert abs(tf(t) - transfer_interval(t, ta, tr, p) * tf(ta)) > 1e-4


def test_markov_population_monotone():
    for ratio in (0.1, 2.5, 6.0):
        mags = np.abs(transfer(FIG3["train"], JCParams(ratio, 1.0), 1).nodes)
        assert np.all(np.diff(mags) <= 1e-15)


def test_kraus_endpoints():
    rho = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    np.testing.assert_allclose(kraus_channel(1.0, rho), rho, atol=1e-15)
    out = kraus_channel(0.0, rho)
    assert out[0, 0] == 0 and out[1, 1] == pytest.approx(1.0)
    with pytest.raises(PhysicalityError):
        kraus_operators(1.01)
    E1, E2 = kraus_operators(1.0 + 5e-7)
    assert abs(E1[0, 0]) == pytest.approx(1.0) and not E2.any()
    assert abs(kraus_operators(1.3, clamp=True)[0][0, 0]) == pytest.approx(1.0)


@st.composite
def density_matrices(draw):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


@given(density_matrices(), st.floats(0, 1), st.floats(0, 2 * np.pi))
def test_kraus_channel_properties(rho, mag, phase):
    T = mag * np.exp(1j * phase)
    E1, E2 = kraus_operators(T)
    np.testing.assert_allclose(E1.conj().T @ E1 + E2.conj().T @ E2, np.eye(2), atol=1e-15)
    out = kraus_channel(T, rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() >= -1e-14
    assert out[0, 0] == pytest.approx(mag ** 2 * rho[0, 0].real, abs=1e-14)


def test_decay_rates_zero_coupling():
    assert not decay_rates(DeltaTrain.uniform(5.0, 30), JCParams(0.0, 1.0)).any()


def test_decay_rates_markov_closed_form():
    # one-step factor alpha_{k+1} = (1 + X) alpha_k with X = -delta^2 kappa Lambda / 2 e^{-Lambda delta}
    p, tr = FIG3["params"], FIG3["train"]
    d = tr.spacing
    g = decay_rates(tr, p, 1)
    X = -d * d * 1.25 * np.exp(-d)
    np.testing.assert_allclose(g, -2 * X / d, rtol=1e-13)
    assert len(g) == 39


@pytest.mark.parametrize("j", [1, 2, 3, 4, None])
def test_decay_rate_forms_agree(j):
    p, tr = FIG3["params"], FIG3["train"]
    np.testing.assert_allclose(decay_rates(tr, p, j), decay_rates_fd(tr, p, j), rtol=0, atol=1e-10)


def test_decay_rates_fig3_signs():
    p, tr = FIG3["params"], FIG3["train"]
    assert decay_rates(tr, p, 1).min() >= -1e-9
    assert rhp_measure(decay_rates(tr, p, 1), tr.spacing) == 0
    for j in (2, 3, 4):
        g = decay_rates(tr, p, j)
        assert g.min() < 0
        assert rhp_measure(g, tr.spacing) > 0


def test_pole_error():
    # kappa delta^2 tuned so that 1 + X = 0 in the nearest-neighbour recursion
    d = 0.5
    kappa = 2.0 / (d * d * np.exp(-d))
    tr = DeltaTrain.uniform(3 * d, 3)
    with pytest.raises(PoleError) as err:
        decay_rates(tr, JCParams(kappa, 1.0), 1)
    assert err.value.index == 2


def test_rhp_measure():
    assert rhp_measure([0.1, 2.0, 0.0], 0.5) == 0
    assert rhp_measure([-1.0, 2.0, -3.0], 0.5) == pytest.approx(2.0)


def test_choi_identity_channel():
    s = choi_spectrum(0.0, 0.0, 0.1)
    assert sorted(s.eigenvalues) == [0.0, 0.0, 0.0, 1.0]
    assert s.g_exact == 0 and s.g_leading == 0


@given(st.floats(-0.3, 0.3), st.floats(0.0, 0.02), st.floats(1e-4, 1.0))
def test_choi_closed_form_eigenvalues(gd, h2, delta):
    gamma, h = gd / delta, h2 / delta ** 2
    C = choi_matrix(gamma, h, delta)
    assert np.trace(C) == pytest.approx(1.0)
    s = choi_spectrum(gamma, h, delta)
    np.testing.assert_allclose(np.sort(s.eigenvalues), np.linalg.eigvalsh(C), atol=1e-13)
    # derived bound on the correction term
    assert abs(s.g_exact - s.g_leading) <= delta * (h + gamma ** 2 / 4) * (1 + 1e-9) + 1e-12


def test_choi_leading_order_regimes():
    d = 1e-3
    pos = choi_spectrum(0.4, 0.01, d)
    assert abs(pos.g_exact) < 1e-3
    neg = choi_spectrum(-0.4, 0.01, d)
    assert neg.g_exact == pytest.approx(0.4, abs=1e-3)


def test_g_function_on_model():
    tr = DeltaTrain.uniform(10.0, 400)
    gam, h, g = g_function(tr, JCParams(0.3, 1.0))
    np.testing.assert_allclose(gam, decay_rates(tr, JCParams(0.3, 1.0)), atol=1e-10)
    assert np.all(np.abs(g + np.minimum(0, gam)) <= tr.spacing * (h + gam ** 2 / 4) + 1e-12)
