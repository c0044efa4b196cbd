"""Spectral densities and thermal noise correlators.

Two environments are supported: a finite set of oscillators with a common
coupling and the Lorentz-Drude (LD) continuum

    sigma(w) = kappa * w * Lambda^2 / (w^2 + Lambda^2),
    Gamma(t) = kappa * Lambda^2 * exp(-Lambda |t|) * sgn(t).

For a delta train the node samples ``Gamma_k = Gamma(k T/N)`` have the
2pi-periodic density ``s`` (defined through ``DTFT[Gamma_k] = 2i s``), and the
node noise correlations are integrals of ``s`` against the Bose factor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .errors import AccuracyError, ConfigurationError
from .kernel_core import DeltaTrain

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 400

ThermalUnits = Literal["physical", "literal"]


@dataclass(frozen=True)
class LorentzDrude:
    kappa: float
    lam: float

    def __post_init__(self):
        if not (self.kappa >= 0 and self.lam > 0):
            raise ConfigurationError("Lorentz-Drude needs kappa >= 0 and Lambda > 0")

    def sigma(self, omega):
        return sigma_ld(omega, self.kappa, self.lam)

    def gamma(self, t):
        return gamma_ld(t, self.kappa, self.lam)


@dataclass(frozen=True)
class DiscreteOscillators:
    frequencies: tuple
    coupling: float

    def __post_init__(self):
        freqs = tuple(float(w) for w in np.atleast_1d(self.frequencies))
        if not freqs or min(freqs) <= 0:
            raise ConfigurationError("oscillator frequencies must be positive")
        object.__setattr__(self, "frequencies", freqs)

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        w = np.asarray(self.frequencies)
        return np.sum(self.coupling ** 2 / w * np.sin(np.multiply.outer(t, w)), axis=-1)

    def sigma(self, omega):
        raise ConfigurationError("a finite oscillator bath has a distributional spectral density")


def sigma_ld(omega, kappa, lam):
    omega = np.asarray(omega, dtype=float)
    return kappa * omega * lam ** 2 / (omega ** 2 + lam ** 2)


def sigma_continuous(omega, spectral):
    return spectral.sigma(omega)


def gamma_ld(t, kappa, lam):
    """``kappa Lambda^2 exp(-Lambda|t|) sgn(t)`` with ``sgn(0) = 0``."""
    t = np.asarray(t, dtype=float)
    return kappa * lam ** 2 * np.exp(-lam * np.abs(t)) * np.sign(t)


def dtft_s(omega_bar, kappa, lam, T, N):
    """Periodic spectral density of the sampled LD kernel."""
    omega_bar = np.asarray(omega_bar, dtype=float)
    return -0.5 * kappa * lam ** 2 * np.sin(omega_bar) / (np.cos(omega_bar) - np.cosh(lam * T / N))


def _s_over_omega(omega_bar, kappa, lam, T, N):
    # s(w)/w, finite at w = 0
    omega_bar = np.asarray(omega_bar, dtype=float)
    sinc = np.sinc(omega_bar / np.pi)
    return -0.5 * kappa * lam ** 2 * sinc / (np.cos(omega_bar) - np.cosh(lam * T / N))


def _x_coth(x, beta):
    """``x coth(beta x / 2)``, equal to ``2/beta`` at ``x = 0``."""
    y = 0.5 * beta * np.asarray(x, dtype=float)
    small = np.abs(y) < 1e-4
    ys = np.where(small, 1.0, y)
    out = np.where(small, 1.0 + y ** 2 / 3.0, ys / np.tanh(ys))
    return 2.0 / beta * out


@dataclass(frozen=True)
class PeriodicSpectralDensity:
    kappa: float
    lam: float
    T: float
    N: int

    def __call__(self, omega_bar):
        return dtft_s(omega_bar, self.kappa, self.lam, self.T, self.N)

    @property
    def spacing(self):
        return self.T / self.N


def _quad(fn, a, b, what, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=kwargs.pop("epsabs", QUAD_EPSABS),
                                      epsrel=kwargs.pop("epsrel", 1e-12),
                                      limit=QUAD_LIMIT, **kwargs)
        except integrate.IntegrationWarning as exc:
            val, err = integrate.quad(fn, a, b, limit=QUAD_LIMIT, **kwargs)
            raise AccuracyError(f"quadrature for {what} did not converge: {exc}", val, err) from None
    return val


def gamma_from_dtft(k, kappa, lam, T, N):
    """Inverse DTFT ``(i/pi) int s(w) exp(-i w k) dw`` by quadrature."""
    if k == 0:
        return 0.0
    fn = lambda w: dtft_s(w, kappa, lam, T, N)
    return 2.0 / np.pi * _quad(fn, 0.0, np.pi, f"Gamma_{k}", weight="sin", wvar=abs(k)) * np.sign(k)


def poisson_check(omega, kappa, lam, T, N, M):
    """Compare ``s(omega T/N)`` with the image sum over ``k in [-M, M]``.

    Returns ``(lhs, rhs, abs_diff)``.
    """
    delta = T / N
    lhs = float(dtft_s(omega * delta, kappa, lam, T, N))
    k = np.arange(-M, M + 1)
    rhs = float(np.sum(sigma_ld(omega - 2 * np.pi * k / delta, kappa, lam)) / delta)
    return lhs, rhs, abs(lhs - rhs)


def poisson_tail(omega, kappa, lam, T, N, M):
    """Leading asymptotic value of the images with ``|k| > M``.

    Paired images ``k, -k`` cancel to ``-2 kappa Lambda^2 omega / a_k^2`` with
    ``a_k = 2 pi k N / T``; the remaining sum uses the trigamma tail.
    """
    from scipy.special import polygamma

    delta = T / N
    tail_sum = float(polygamma(1, M + 1))  # sum_{k > M} 1/k^2
    return -2.0 * kappa * lam ** 2 * omega * delta ** 2 / (4 * np.pi ** 2) * tail_sum / delta


def _beta_eff(beta, train: DeltaTrain, units: ThermalUnits):
    if not beta > 0:
        raise ConfigurationError(f"inverse temperature must be positive, got {beta!r}")
    if units == "physical":
        return beta / train.spacing
    if units == "literal":
        return beta
    raise ConfigurationError(f"unknown thermal units mode {units!r}")


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_rule(edges):
    """Composite 16-point Gauss-Legendre nodes and weights on ``edges``."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)[:, None]
    x = (0.5 * (hi + lo)[:, None] + half * _GL_X).ravel()
    w = (half * _GL_W).ravel()
    return x, w


def _offset_edges(N, scale, refine):
    # geometric grading towards the peak at w = 0, then a cap on the panel
    # width so every panel holds at most a fraction of one cos(m w) period
    g = scale * 0.25 * 2.0 ** np.arange(64)
    edges = np.concatenate(([0.0], g[g < np.pi], [np.pi]))
    hmax = np.pi / max(N, 4) / 2 ** refine
    out = [edges[:1]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, int(np.ceil((hi - lo) / hmax)), 2 ** refine)
        out.append(np.linspace(lo, hi, n + 1)[1:])
    return np.concatenate(out)


def _cos_moments(h_vals, x, w, offsets, block=256):
    hw = h_vals * w
    out = np.empty(len(offsets))
    for s in range(0, len(offsets), block):
        m = np.asarray(offsets[s:s + block], dtype=float)
        out[s:s + block] = np.cos(np.outer(m, x)) @ hw
    return 2.0 / np.pi * out


def thermal_offsets_ld(spectral: LorentzDrude, train: DeltaTrain, beta, units: ThermalUnits = "physical",
                       tol=QUAD_EPSABS, max_refine=6):
    """``<{xi_k, xi_k'}>`` as a function of the offset ``m = k - k'`` (m = 0..N-1).

    Evaluates ``(2/pi) int_0^pi s(w) coth(beta_eff w / 2) cos(m w) dw`` with a
    composite Gauss-Legendre rule graded towards ``w = 0``, where the
    integrand has a Lorentzian peak of width ``Lambda T/N``.  The panel set is
    halved until two successive rules agree to ``tol`` on probe offsets.
    """
    beta_eff = _beta_eff(beta, train, units)
    kappa, lam, T, N = spectral.kappa, spectral.lam, train.duration, train.count

    def h(w):
        return _s_over_omega(w, kappa, lam, T, N) * _x_coth(w, beta_eff)

    scale = min(lam * T / N, 1.0 / beta_eff, 1.0)
    probes = sorted({0, 1, N // 2, max(N - 1, 0)})
    x, w = _panel_rule(_offset_edges(N, scale, 0))
    prev = _cos_moments(h(x), x, w, probes)
    for refine in range(1, max_refine + 1):
        x, w = _panel_rule(_offset_edges(N, scale, refine))
        hv = h(x)
        cur = _cos_moments(hv, x, w, probes)
        err = float(np.max(np.abs(cur - prev)))
        if err <= tol:
            return _cos_moments(hv, x, w, np.arange(N))
        prev = cur
    raise AccuracyError("thermal noise offsets did not converge", cur, err)


def thermal_offsets_ld_adaptive(spectral: LorentzDrude, train: DeltaTrain, beta, offsets,
                                units: ThermalUnits = "physical"):
    """Same integrals offset by offset with QUADPACK's cos-weighted rule."""
    beta_eff = _beta_eff(beta, train, units)
    kappa, lam, T, N = spectral.kappa, spectral.lam, train.duration, train.count

    def h(w):
        return _s_over_omega(w, kappa, lam, T, N) * _x_coth(w, beta_eff)

    split = min(np.pi, 50.0 * lam * T / N)
    out = []
    for m in offsets:
        kw = dict(weight="cos", wvar=m) if m else {}
        parts = [_quad(h, 0.0, split, f"nu_{m}", **kw)]
        if split < np.pi:
            parts.append(_quad(h, split, np.pi, f"nu_{m}", **kw))
        out.append(2.0 / np.pi * sum(parts))
    return np.array(out)


@dataclass(frozen=True, eq=False)
class NoiseCovariance:
    """Symmetrised node noise ``nu_{k,k'} = <{zeta_k, zeta_k'}>``."""

    nu: np.ndarray
    units: str = "physical"

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float)
        if nu.ndim != 2 or nu.shape[0] != nu.shape[1]:
            raise ConfigurationError("noise covariance must be a square matrix")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros((n, n)))

    @property
    def size(self):
        return self.nu.shape[0]

    def diagonal_part(self):
        """White-noise restriction: drop every correlation between distinct nodes."""
        return NoiseCovariance(np.diag(np.diag(self.nu)), self.units)


def noise_nu(train: DeltaTrain, spectral, beta, units: ThermalUnits = "physical") -> NoiseCovariance:
    """Thermal ``nu_{k,k'}`` for the delta train.

    LD baths use the periodic density ``s`` with Bose exponent ``beta_eff * w``;
    ``units="physical"`` sets ``beta_eff = beta N / T`` (the exponent then
    carries the physical frequency ``w N / T``), ``units="literal"`` uses
    ``beta`` as is.  Finite oscillator baths are summed exactly.
    """
    delta = train.spacing
    chi = train.amplitudes
    idx = np.arange(train.count)
    if isinstance(spectral, LorentzDrude):
        if spectral.kappa == 0:
            return NoiseCovariance(np.zeros((train.count, train.count)), units)
        offsets = thermal_offsets_ld(spectral, train, beta, units)
        sym = offsets[np.abs(idx[:, None] - idx[None, :])]
    elif isinstance(spectral, DiscreteOscillators):
        if not beta > 0:
            raise ConfigurationError(f"inverse temperature must be positive, got {beta!r}")
        w = np.asarray(spectral.frequencies)
        weights = spectral.coupling ** 2 / w / np.tanh(0.5 * beta * w)
        lag = (idx[:, None] - idx[None, :]) * delta
        sym = np.sum(weights * np.cos(np.multiply.outer(lag, w)), axis=-1)
    else:
        raise ConfigurationError(f"unsupported spectral source {spectral!r}")
    nu = delta ** 2 * np.outer(chi, chi) * sym
    return NoiseCovariance(0.5 * (nu + nu.T), units)


def noise_commutator(train: DeltaTrain, spectral):
    """``-i <[zeta_k, zeta_k']>``: the state-independent antisymmetric part."""
    delta = train.spacing
    lag = (np.arange(train.count)[:, None] - np.arange(train.count)[None, :]) * delta
    return delta ** 2 * np.outer(train.amplitudes, train.amplitudes) * spectral.gamma(lag)


def noise_correlator(train: DeltaTrain, spectral, beta, units: ThermalUnits = "physical"):
    """Unsymmetrised ``<zeta_k zeta_k'> = nu/2 + (i/2) [commutator]``."""
    nu = noise_nu(train, spectral, beta, units).nu
    return 0.5 * nu + 0.5j * noise_commutator(train, spectral)


def noise_continuous(t, t2, spectral, beta):
    """``<xi(t) xi(t')>`` for constant switching.

    The symmetric part ``(1/pi) int_0^inf sigma coth(beta w/2) cos(w tau) dw``
    is integrated with a Fourier-weighted rule; the antisymmetric part is
    ``(i/2) Gamma(tau)``.  For the LD bath the symmetric part diverges
    logarithmically at equal times.
    """
    if not beta > 0:
        raise ConfigurationError(f"inverse temperature must be positive, got {beta!r}")
    tau = float(t - t2)
    imag = 0.5 * float(spectral.gamma(tau))
    if isinstance(spectral, DiscreteOscillators):
        w = np.asarray(spectral.frequencies)
        real = 0.5 * np.sum(spectral.coupling ** 2 / w / np.tanh(0.5 * beta * w) * np.cos(w * tau))
        return complex(real, imag)
    if tau == 0:
        raise ConfigurationError("the LD equal-time noise correlator is divergent")
    kappa, lam = spectral.kappa, spectral.lam

    def h(w):
        return kappa * lam ** 2 / (w ** 2 + lam ** 2) * _x_coth(w, beta)

    real = _quad(h, 0.0, np.inf, "continuous noise", weight="cos", wvar=abs(tau),
                 epsabs=1e-12) / np.pi
    return complex(real, imag)
