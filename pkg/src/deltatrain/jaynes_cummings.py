"""Damped Jaynes-Cummings qubit driven through a delta train.

The excited amplitude obeys ``a'(t) + int_0^t Sigma(t,t') a(t') dt' = 0`` with
``Gamma(t - t') = (kappa Lambda / 2) exp(-Lambda (t - t'))``.  With ``G_0 = 1``
the delta-train solution is ``a(t) = Tr(t) a(0)`` where ``Tr`` is the transfer
function below.  Kraus operators, decay rates, the RHP measure and the Choi
spectrum of the one-step increment are built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, PhysicalityError, PoleError
from .kernel_core import DeltaSolver, DeltaTrain, FreePropagator, KernelSpec

EPS_PHYS = 1e-6


@dataclass(frozen=True)
class JCParams:
    kappa: float
    lam: float
    alpha1_0: complex = 1.0
    alpha0: complex = 0.0

    def __post_init__(self):
        if not self.kappa >= 0 or not self.lam > 0:
            raise ConfigurationError("need kappa >= 0 and Lambda > 0")
        norm = abs(self.alpha0) ** 2 + abs(self.alpha1_0) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ConfigurationError(f"initial amplitudes are not normalised: {norm!r}")

    @property
    def rho0(self):
        a1, a0 = complex(self.alpha1_0), complex(self.alpha0)
        return np.array([[abs(a1) ** 2, a0.conjugate() * a1],
                         [a0 * a1.conjugate(), 1 - abs(a1) ** 2]])


def jc_kernel(params: JCParams, max_arc_span: Optional[int] = None) -> KernelSpec:
    kl2 = 0.5 * params.kappa * params.lam
    lam = params.lam

    def gamma(t, s):
        return kl2 * np.exp(-lam * (np.asarray(t) - np.asarray(s)))

    return KernelSpec(gamma, max_arc_span=max_arc_span, sign=1)


class TransferFunction:
    """``Tr(t)`` for one train; ``nodes[k-1] = Tr(t_k)``."""

    def __init__(self, train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
        self.train = train
        self.params = params
        self.solver = DeltaSolver(train, jc_kernel(params, max_arc_span), FreePropagator.first_order_unit())
        self.nodes = self.solver.solve_nodes([1.0])

    def __call__(self, t):
        if t < self.train.start_time:
            raise ConfigurationError("evaluation time precedes the start of the evolution")
        m = self.train.nodes_up_to(t)
        return complex(1.0 + self.solver.k_row(t)[:m] @ self.nodes[:m]) if m else 1.0 + 0j

    value = __call__


def transfer(train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None) -> TransferFunction:
    return TransferFunction(train, params, max_arc_span)


def transfer_interval(t, t_a, train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
    """``Tr(t, t_a)``: same construction on the nodes ``t_a <= t_k <= t``.

    The node at ``t_a`` is kept as the origin of arcs leaving it; nothing can
    arrive there, so the window starts from amplitude one at ``t_a``.
    """
    a = train.node_index(t_a)
    if t < t_a:
        raise ConfigurationError("need t >= t_a")
    return TransferFunction(train.window(a), params, max_arc_span)(t)


def exact_amplitude(t, kappa, lam):
    """Constant-switching amplitude ratio ``a(t)/a(0)`` (complex)."""
    t = np.asarray(t, dtype=float)
    D = np.sqrt(complex(lam ** 2 - 2 * kappa * lam))
    x = 0.5 * D * t
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    sinhc = np.where(small, 1.0 + x ** 2 / 6.0, np.sinh(xs) / xs)
    return np.exp(-0.5 * lam * t) * (np.cosh(x) + 0.5 * lam * t * sinhc)


def kraus_operators(T_value, clamp=False):
    T_value = complex(T_value)
    mag2 = abs(T_value) ** 2
    if mag2 > 1.0:
        if abs(T_value) > 1.0 + EPS_PHYS and not clamp:
            raise PhysicalityError(f"|T| = {abs(T_value)!r} exceeds 1")
        T_value /= abs(T_value)
        mag2 = 1.0
    E1 = np.array([[T_value, 0.0], [0.0, 1.0]], dtype=complex)
    E2 = np.array([[0.0, 0.0], [np.sqrt(1.0 - mag2), 0.0]], dtype=complex)
    return E1, E2


def kraus_channel(T_value, rho0, clamp=False):
    """Amplitude-damping channel ``sum_i E_i rho E_i^dagger`` (excited level first)."""
    rho0 = np.asarray(rho0, dtype=complex)
    return sum(E @ rho0 @ E.conj().T for E in kraus_operators(T_value, clamp))


def node_amplitudes(train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
    """``Tr(t_k)`` from the one-step recursion ``a_{k+1} = a_k - delta^2 sum_j Sigma_{k+1,j} a_j``.

    Algebraically identical to ``transfer(...).nodes``.  The resolvent form
    builds each ``a_k`` as ``1 + (terms of order one)`` and so only resolves
    ``a_k`` to absolute round-off; the recursion keeps relative accuracy when
    the amplitude decays by many orders of magnitude, which the decay rates
    need because they divide by ``a_k``.
    """
    sigma = jc_kernel(params, max_arc_span).sigma_matrix(train)
    d2 = train.spacing ** 2
    alpha = np.empty(train.n_active, dtype=complex)
    alpha[0] = 1.0
    for k in range(train.n_active - 1):
        alpha[k + 1] = alpha[k] - d2 * (sigma[k + 1, :k + 1] @ alpha[:k + 1])
    return sigma, alpha


def _alphas(train, params, max_arc_span):
    sigma, alpha = node_amplitudes(train, params, max_arc_span)
    return sigma, alpha * params.alpha1_0


def decay_rates(train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
    """Decay rates ``gamma_k`` for ``k = 1 .. N-1``.

    ``gamma_k = 2 (T/N) Re[ sum_{j<=k} Sigma(t_{k+1}, t_j) a(t_j) / a(t_k) ]``,
    identical to ``-2 Re[(a_{k+1} - a_k) / (delta a_k)]``.
    """
    sigma, alpha = _alphas(train, params, max_arc_span)
    if np.any(alpha[:-1] == 0):
        raise PoleError(int(np.argmax(alpha[:-1] == 0)) + 1)
    feed = sigma[1:, :] @ alpha  # row k-1: sum_j Sigma(t_{k+1}, t_j) a_j
    return 2.0 * train.spacing * np.real(feed / alpha[:-1])


def decay_rates_fd(train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
    """Forward-difference decay rates ``-2 Re[(a_{k+1} - a_k)/(delta a_k)]``."""
    _, alpha = _alphas(train, params, max_arc_span)
    if np.any(alpha[:-1] == 0):
        raise PoleError(int(np.argmax(alpha[:-1] == 0)) + 1)
    return -2.0 * np.real(np.diff(alpha) / (train.spacing * alpha[:-1]))


def rhp_measure(gammas, delta):
    """``-delta * sum min(0, gamma_k)`` over the supplied rates."""
    gammas = np.asarray(gammas, dtype=float)
    return float(-delta * np.sum(np.minimum(0.0, gammas))) + 0.0  # no negative zero


def choi_matrix(gamma, h, delta):
    """Choi matrix of the one-step increment ``1 + delta L_t``."""
    d2h = delta ** 2 * h
    return 0.5 * np.array([
        [0.0, d2h, 0.0, 0.0],
        [0.0, 1 - delta * gamma + d2h, 1 - delta * gamma / 2, 0.0],
        [0.0, 1 - delta * gamma / 2, 1.0, -d2h],
        [0.0, 0.0, 0.0, delta * gamma - d2h],
    ])


@dataclass(frozen=True)
class ChoiSpectrum:
    eigenvalues: tuple  # (lambda_0, lambda_1, lambda_+, lambda_-)
    g_exact: float
    g_leading: float

    @property
    def trace_norm(self):
        return float(sum(abs(x) for x in self.eigenvalues))


def choi_spectrum(gamma, h, delta) -> ChoiSpectrum:
    """Closed-form Choi eigenvalues and the g-function estimate.

    ``g_exact = (sum |lambda_i| - 1) / delta``; ``g_leading = -min(0, gamma)``.
    """
    a = delta * (gamma - delta * h)
    root = np.sqrt(4 - 4 * delta * gamma + 2 * delta ** 2 * gamma ** 2
                   - 2 * delta ** 3 * h * gamma + delta ** 4 * h ** 2)
    lam0 = 0.0
    lam1 = 0.5 * a
    lam_p = (2 - a + root) / 4
    lam_m = (2 - a - root) / 4
    norm = abs(lam0) + abs(lam1) + abs(lam_p) + abs(lam_m)
    return ChoiSpectrum((lam0, lam1, lam_p, lam_m), (norm - 1.0) / delta, -min(0.0, gamma) + 0.0)


def g_function(train: DeltaTrain, params: JCParams, max_arc_span: Optional[int] = None):
    """Per-node ``(gamma_k, h_k, g_exact_k)`` from forward differences of the amplitude."""
    _, alpha = _alphas(train, params, max_arc_span)
    delta = train.spacing
    adot = np.diff(alpha) / delta
    if np.any(alpha[:-1] == 0):
        raise PoleError(int(np.argmax(alpha[:-1] == 0)) + 1)
    gam = -2.0 * np.real(adot / alpha[:-1])
    h = np.abs(adot) ** 2
    g = np.array([choi_spectrum(gk, hk, delta).g_exact for gk, hk in zip(gam, h)])
    return gam, h, g
