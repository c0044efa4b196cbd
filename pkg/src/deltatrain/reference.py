"""Constant-switching baselines (``chi = 1``) for the delta-train results.

For the LD bath the QLE Green function has the Laplace transform

    G~(z) = (z + Lambda) / ((z^2 + Omega^2)(z + Lambda) - kappa Lambda^2),

a proper rational function with three poles, so ``G(t) = sum_i r_i exp(z_i t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegeneracyError
from .jaynes_cummings import exact_amplitude
from .spectral import LorentzDrude, _quad, _x_coth

# relative; a triple root splits by ~eps^(1/3), so this must sit well above 1e-5
POLE_SEPARATION = 1e-4


@dataclass(frozen=True, eq=False)
class RationalGreen:
    poles: np.ndarray
    residues: np.ndarray

    @classmethod
    def lorentz_drude(cls, omega, kappa, lam):
        if not (omega > 0 and kappa >= 0 and lam > 0):
            raise ConfigurationError("need omega > 0, kappa >= 0 and Lambda > 0")
        den = np.array([1.0, lam, omega ** 2, omega ** 2 * lam - kappa * lam ** 2])
        z = np.roots(den).astype(complex)  # companion-matrix eigenvalues
        gaps = [abs(z[i] - z[j]) for i in range(3) for j in range(i + 1, 3)]
        if min(gaps) < POLE_SEPARATION * (1.0 + np.abs(z).max()):
            raise DegeneracyError(
                f"poles {z} are nearly repeated (separation {min(gaps):.3g}); perturb kappa or Lambda"
            )
        dden = np.polyder(den)
        r = (z + lam) / np.polyval(dden, z)
        return cls(z, r)

    def denominator_residual(self, omega, kappa, lam):
        z = self.poles
        return float(np.max(np.abs((z ** 2 + omega ** 2) * (z + lam) - kappa * lam ** 2)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, self.poles)) @ self.residues)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, self.poles)) @ (self.residues * self.poles))

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, self.poles)) @ (self.residues * self.poles ** 2))

    def driven_amplitude(self, t, w):
        """``int_0^t G(t-u) exp(i w u) du`` for real ``w`` (array-valued)."""
        w = np.asarray(w, dtype=float)
        z, r = self.poles, self.residues
        d = 1j * w[..., None] - z
        return np.sum(r * (np.exp(1j * w * t)[..., None] - np.exp(z * t)) / d, axis=-1)


def green_constant(t, omega, kappa, lam):
    if np.any(np.asarray(t) < 0):
        raise ConfigurationError("t must be non-negative")
    return RationalGreen.lorentz_drude(omega, kappa, lam)(t)


def green_constant_derivative(t, omega, kappa, lam):
    return RationalGreen.lorentz_drude(omega, kappa, lam).derivative(t)


def noise_QQ_constant(t, omega, kappa, lam, beta):
    """Noise part of ``<{Q(t), Q(t)}>`` for constant switching.

    ``(2/pi) int_0^inf sigma(w) coth(beta w/2) |int_0^t G(t-u) e^{iwu} du|^2 dw``.
    """
    if not beta > 0:
        raise ConfigurationError(f"inverse temperature must be positive, got {beta!r}")
    if t == 0 or kappa == 0:
        return 0.0
    g = RationalGreen.lorentz_drude(omega, kappa, lam)

    def h(w):
        a = g.driven_amplitude(t, w)
        return kappa * lam ** 2 / (w * w + lam * lam) * _x_coth(w, beta) * abs(a) ** 2

    # the integrand decays like w^-3 and oscillates with period 2 pi / t
    edges = [0.0, 2 * lam, 20 * lam, 200 * lam + 200 * omega]
    total = sum(_quad(h, a, b, "constant-switching noise", epsrel=1e-10) for a, b in zip(edges[:-1], edges[1:]))
    total += _quad(h, edges[-1], np.inf, "constant-switching noise tail", epsrel=1e-10)
    return 2.0 / np.pi * total


def reference_Q2(t, params, spectral: LorentzDrude, beta):
    """``<Q(t)^2>`` for constant switching from the initial Gaussian state ``params``."""
    if not isinstance(spectral, LorentzDrude):
        raise ConfigurationError("the reference path supports the LD bath only")
    w, kappa, lam = params.omega, spectral.kappa, spectral.lam
    g = RationalGreen.lorentz_drude(w, kappa, lam)
    G, Gd = float(g(t)), float(g.derivative(t))
    V = params.V0
    var = Gd * Gd * V[0, 0] + G * G * V[1, 1] + 2 * G * Gd * V[0, 1]
    mean = Gd * params.q0 + G * params.p0
    return 0.5 * (var + noise_QQ_constant(t, w, kappa, lam, beta)) + mean * mean


def jc_exact(t, kappa, lam):
    return exact_amplitude(t, kappa, lam)

