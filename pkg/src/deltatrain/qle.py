"""Caldeira-Leggett oscillator: quantum Langevin equation on a delta train.

The position obeys ``Q'' + Omega^2 Q - int chi chi Gamma Q = chi xi``, i.e. the
generic equation with ``p = d^2/dt^2 + Omega^2`` and ``Sigma = -chi chi Gamma``.
Its solution is linear in the initial quadratures and the node noises,

    Q(t) = G[f_Q](t) Q(0) + G[f_P](t) P(0) + sum_k G[f_zeta^(k)](t) zeta_k,

with ``G[f](t) = f(t) + sum_{l,i} K_{t,t_l} Kres_{li} f(t_i)``.  Moments follow
from the Gaussian transfer pair ``V -> T V T^T + N``.

Covariances use ``V_ij = <{R_i, R_j}> - 2 <R_i><R_j>``, so the vacuum is
``diag(1/Omega, Omega)`` and the uncertainty relation reads ``V + i J >= 0``
with ``J = [[0, 1], [-1, 0]]``.

Derivatives are analytic.  At a node the momentum jumps (each delta kicks
it), and ``side="right"`` (the default) returns the value just after the kick.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from .errors import ConfigurationError
from .kernel_core import NODE_SLACK, DeltaSolver, DeltaTrain, FreePropagator, KernelSpec
from .spectral import DiscreteOscillators, LorentzDrude, NoiseCovariance

J = np.array([[0.0, 1.0], [-1.0, 0.0]])
EIG_FLOOR_STATE = -1e-10

Side = Literal["right", "left"]
Source = Union[str, int]


def vacuum_covariance(omega):
    return np.diag([1.0 / omega, float(omega)])


def uncertainty_min_eig(V):
    """Smallest eigenvalue of ``V + iJ``."""
    return float(np.linalg.eigvalsh(np.asarray(V, dtype=complex) + 1j * J).min())


@dataclass(frozen=True, eq=False)
class OscillatorParams:
    """System frequency and the initial Gaussian state.

    Defaults to the coherent state with ``<Q(0)> = 1``, ``<P(0)> = 0`` and
    vacuum covariance.
    """

    omega: float
    q0: float = 1.0
    p0: float = 0.0
    V0: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega!r}")
        V0 = vacuum_covariance(self.omega) if self.V0 is None else np.array(self.V0, dtype=float)
        if V0.shape != (2, 2) or not np.allclose(V0, V0.T, rtol=0, atol=1e-12):
            raise ConfigurationError("V0 must be a symmetric 2x2 matrix")
        if uncertainty_min_eig(V0) < EIG_FLOOR_STATE:
            raise ConfigurationError("V0 violates the uncertainty relation V + iJ >= 0")
        V0.setflags(write=False)
        object.__setattr__(self, "V0", V0)

    @property
    def mean(self):
        return np.array([self.q0, self.p0], dtype=float)

    def second_moments(self):
        """Symmetrised initial moments ``(<Q^2>, <P^2>, <{Q,P}>/2)``."""
        V = self.V0
        q, p = self.q0, self.p0
        return 0.5 * V[0, 0] + q * q, 0.5 * V[1, 1] + p * p, 0.5 * V[0, 1] + q * p


def qle_kernel(spectral, train: Optional[DeltaTrain] = None, max_arc_span: Optional[int] = None) -> KernelSpec:
    """Kernel ``Sigma = -chi chi Gamma(t - t')`` for an LD or discrete bath.

    ``train`` is accepted for symmetry with the other constructors; the
    switching amplitudes enter through ``KernelSpec.sigma_matrix``.
    """
    if not isinstance(spectral, (LorentzDrude, DiscreteOscillators)):
        raise ConfigurationError(f"unsupported spectral source {spectral!r}")

    def gamma(t, s):
        return spectral.gamma(np.asarray(t) - np.asarray(s))

    return KernelSpec(gamma, max_arc_span=max_arc_span, sign=-1)


@dataclass(frozen=True, eq=False)
class TransferPair:
    T_mat: np.ndarray
    N_mat: np.ndarray

    def evolve(self, V0, mean0=None):
        V = self.T_mat @ np.asarray(V0) @ self.T_mat.T + self.N_mat
        if mean0 is None:
            return V
        return V, self.T_mat @ np.asarray(mean0)

    def uncertainty_min_eig(self):
        """Smallest eigenvalue of ``N + iJ - i T J T^T``."""
        M = self.N_mat + 1j * J - 1j * self.T_mat @ J @ self.T_mat.T
        return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T)).min())


class QLESolver:
    """Delta-train QLE solver for one train and kernel.

    Caches the memory matrix and the node response matrix
    ``Z_ik = G_0(t_i - t_k) Theta(t_i - t_k)`` of the noise sources.
    """

    def __init__(self, train: DeltaTrain, kernel: KernelSpec, omega):
        if kernel.sign != -1:
            raise ConfigurationError("the QLE kernel carries sign -1")
        self.train = train
        self.omega = float(omega)
        self.prop = FreePropagator.harmonic(omega)
        self.core = DeltaSolver(train, kernel, self.prop)
        tk = train.active_times
        self._Z = np.tril(self.prop.green0(tk[:, None] - tk[None, :]))
        s = tk - train.start_time
        self._fQ = np.cos(self.omega * s)
        self._fP = np.sin(self.omega * s) / self.omega

    # node counting with an explicit side of the jump
    def _m(self, t, side: Side):
        if t < self.train.start_time - NODE_SLACK * self.train.spacing:
            raise ConfigurationError("evaluation time precedes the start of the evolution")
        m = self.train.nodes_up_to(t)
        if side == "left" and m and abs(t - self.train.active_times[m - 1]) <= NODE_SLACK * self.train.spacing:
            m -= 1
        elif side not in ("left", "right"):
            raise ConfigurationError(f"side must be 'left' or 'right', got {side!r}")
        return m

    def _green_row(self, t, derivative, side):
        row = np.zeros(self.train.n_active)
        m = self._m(t, side)
        if m:
            fn = self.prop.green0_derivative if derivative else self.prop.green0
            row[:m] = fn(t - self.train.active_times[:m])
        return row

    def _y(self, t, derivative=False, side: Side = "right"):
        k_row = -(self.train.spacing ** 2) * (self._green_row(t, derivative, side) @ self.core.sigma)
        return self.core.memory.solve_transposed(k_row).real

    def _free(self, t, derivative=False):
        w, s = self.omega, t - self.train.start_time
        if derivative:
            return -w * np.sin(w * s), np.cos(w * s)
        return np.cos(w * s), np.sin(w * s) / w

    def G(self, t, source: Source = "P", derivative=False, side: Side = "right"):
        """``G[f](t)`` (or its time derivative) for ``f_Q``, ``f_P`` or ``f_zeta^(k)``."""
        y = self._y(t, derivative, side)
        if source == "Q":
            return float(self._free(t, derivative)[0] + y @ self._fQ)
        if source == "P":
            return float(self._free(t, derivative)[1] + y @ self._fP)
        k = int(source)
        if not self.train.first_node <= k <= self.train.count:
            raise ConfigurationError(f"noise node {k} is outside the active train")
        return float(self.G_zeta(t, derivative, side)[k - self.train.first_node])

    def G_zeta(self, t, derivative=False, side: Side = "right"):
        """All ``G[f_zeta^(k)](t)`` over the active nodes at once."""
        return self._green_row(t, derivative, side) + self._y(t, derivative, side) @ self._Z

    def script_G(self, t):
        return self.G(t, "P")

    def script_G_dot(self, t, side: Side = "left"):
        return self.G(t, "P", derivative=True, side=side)

    def T_matrix(self, t):
        y, yd = self._y(t), self._y(t, True)
        (cq, cp), (dq, dp) = self._free(t), self._free(t, True)
        return np.array([[cq + y @ self._fQ, cp + y @ self._fP],
                         [dq + yd @ self._fQ, dp + yd @ self._fP]])

    def noise_rows(self, t):
        return np.vstack([self.G_zeta(t), self.G_zeta(t, True)])

    def _nu_active(self, nu, noise_after):
        if nu is None:
            return None
        nu = nu.nu if isinstance(nu, NoiseCovariance) else np.asarray(nu, dtype=float)
        if nu.shape != (self.train.count, self.train.count):
            raise ConfigurationError(f"noise covariance must be {self.train.count}x{self.train.count}")
        f = self.train.first_node - 1
        nu = nu[f:, f:]
        if noise_after is not None:
            cut = max(0, int(noise_after) - f)
            nu = nu.copy()
            nu[:cut, :] = 0.0
            nu[:, :cut] = 0.0
        return nu

    def transfer(self, t, nu=None, noise_after: Optional[int] = None) -> TransferPair:
        """Transfer pair at ``t``; noise from nodes with index ``> noise_after`` only."""
        T = self.T_matrix(t)
        nu_a = self._nu_active(nu, noise_after)
        if nu_a is None:
            return TransferPair(T, np.zeros((2, 2)))
        R = self.noise_rows(t)
        Nm = R @ nu_a @ R.T
        return TransferPair(T, 0.5 * (Nm + Nm.T))

    def mean(self, t, params: OscillatorParams):
        return self.T_matrix(t) @ params.mean

    def covariance(self, t, params: OscillatorParams, nu=None):
        return self.transfer(t, nu).evolve(params.V0)

    def second_moment_Q(self, t, params: OscillatorParams, nu=None):
        """``<Q(t)^2> = V_QQ/2 + <Q>^2``."""
        pair = self.transfer(t, nu)
        V, m = pair.evolve(params.V0, params.mean)
        return float(0.5 * V[0, 0] + m[0] ** 2)

    def two_time_QQ(self, t, t2, params: OscillatorParams, nu=None, correlator=None):
        """``<Q(t) Q(t')>``.

        With ``correlator=None`` this is the symmetrised (real) correlator
        built from ``nu``.  Passing the complex node correlator
        ``<zeta_k zeta_k'>`` returns the ordered correlator, which then also
        carries ``<Q(0)P(0)> - <P(0)Q(0)> = i``.
        """
        q2, p2, qp = params.second_moments()
        a = np.array([self.G(t, "Q"), self.G(t, "P")])
        b = np.array([self.G(t2, "Q"), self.G(t2, "P")])
        r, r2 = self.G_zeta(t), self.G_zeta(t2)
        f = self.train.first_node - 1
        if correlator is None:
            nu_a = self._nu_active(nu, None)
            noise = 0.0 if nu_a is None else 0.5 * r @ nu_a @ r2
            return float(a[0] * b[0] * q2 + a[1] * b[1] * p2 + (a[0] * b[1] + a[1] * b[0]) * qp + noise)
        C = np.asarray(correlator, dtype=complex)[f:, f:]
        qp_ord, pq_ord = qp + 0.5j, qp - 0.5j
        return complex(a[0] * b[0] * q2 + a[1] * b[1] * p2 + a[0] * b[1] * qp_ord
                       + a[1] * b[0] * pq_ord + r @ C @ r2)


def G_functional(source: Source, t, train, kernel, omega, side: Side = "right"):
    return QLESolver(train, kernel, omega).G(t, source, False, side)


def G_functional_dot(source: Source, t, train, kernel, omega, side: Side = "right"):
    return QLESolver(train, kernel, omega).G(t, source, True, side)


def script_G(t, train, kernel, omega):
    return QLESolver(train, kernel, omega).script_G(t)


def two_time_QQ(t, t2, params: OscillatorParams, nu, train, kernel, correlator=None):
    return QLESolver(train, kernel, params.omega).two_time_QQ(t, t2, params, nu, correlator)


def transfer_matrices(t, train, kernel, nu, omega) -> TransferPair:
    return QLESolver(train, kernel, omega).transfer(t, nu)


def markov_restrict_noise(nu):
    """Drop correlations between distinct nodes (white-noise restriction)."""
    if isinstance(nu, NoiseCovariance):
        return nu.diagonal_part()
    return NoiseCovariance(np.diag(np.diag(np.asarray(nu, dtype=float))))


def interval_transfer(t, t_a, train, kernel, nu, omega) -> TransferPair:
    """Transfer pair from ``t_a`` to ``t`` built on the window starting at ``t_a``.

    The node at ``t_a`` stays an arc origin; its own kick is already part of
    the transfer up to ``t_a``, so noise enters from nodes after it only.
    """
    a = train.node_index(t_a)
    if t < t_a:
        raise ConfigurationError("need t >= t_a")
    return QLESolver(train.window(a), kernel, omega).transfer(t, nu, noise_after=a)


def markov_check(t, s, train, kernel, nu, omega):
    """Composition residuals ``(|T_t - T_{t,s} T_s|, |N_t - T_{t,s} N_s T_{t,s}^T - N_{t,s}|)``.

    ``s`` must be a node time; norms are Frobenius.
    """
    full = QLESolver(train, kernel, omega)
    whole, first = full.transfer(t, nu), full.transfer(s, nu)
    step = interval_transfer(t, s, train, kernel, nu, omega)
    t_res = np.linalg.norm(whole.T_mat - step.T_mat @ first.T_mat)
    n_res = np.linalg.norm(whole.N_mat - step.T_mat @ first.N_mat @ step.T_mat.T - step.N_mat)
    return float(t_res), float(n_res)


def free_rotation(tau, omega):
    c, s = np.cos(omega * tau), np.sin(omega * tau)
    return np.array([[c, s / omega], [-omega * s, c]])


def markov_restricted_transfer(t, train: DeltaTrain, kernel: KernelSpec, nu, omega) -> TransferPair:
    """Nearest-neighbour transfer pair as an ordered product of ``(I + P_j)``.

    ``T = F_t (I + P_{m-1}) ... (I + P_1)`` with ``m`` the last node before
    ``t`` and ``P_j = X_j g(t_{j+1}) [cos(Omega t_j), sin(Omega t_j)/Omega]``,
    ``X_j = -(T/N)^2 Sigma(t_{j+1}, t_j)``, ``g(t) = [-sin(Omega t)/Omega, cos(Omega t)]``.
    The kick at ``t_k`` propagates through the factors with ``j >= k`` only.
    Only the nearest-neighbour entries of ``kernel`` are used.
    """
    if train.start_index != 0:
        raise ConfigurationError("use the full train; windows are built by interval_transfer")
    w = float(omega)
    sigma = kernel.restricted(1).sigma_matrix(train)
    tk = train.times
    m = train.nodes_up_to(t)
    c, s = np.cos(w * tk), np.sin(w * tk) / w
    g = np.stack([-s, c], axis=1)  # g(t_k)
    X = -(train.spacing ** 2) * np.diagonal(sigma, -1).real  # X_j, j = 1..N-1
    B = free_rotation(t, w)
    cols = np.zeros((2, m))
    for k in range(m, 0, -1):
        # B currently equals F_t (I + P_{m-1}) ... (I + P_k)
        cols[:, k - 1] = B @ g[k - 1]
        if k > 1:
            j = k - 1
            P = X[j - 1] * np.outer(g[j], [c[j - 1], s[j - 1]])
            B = B @ (np.eye(2) + P)
    T = B
    if nu is None:
        return TransferPair(T, np.zeros((2, 2)))
    nu = nu.nu if isinstance(nu, NoiseCovariance) else np.asarray(nu, dtype=float)
    Nm = cols @ nu[:m, :m] @ cols.T
    return TransferPair(T, 0.5 * (Nm + Nm.T))
