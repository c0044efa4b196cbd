"""Delta-train solver for linear integro-differential equations.

The equation handled here is

    p(d/dt) O(t) + int_0^t chi(t) chi(t') Gamma(t, t') O(t') dt' = chi(t) xi(t)

with ``p`` a polynomial differential operator of order one or two.  When the
switching function is a train of ``N`` Dirac deltas at ``t_k = k T / N`` the
memory integral collapses to sums over node pairs and the solution is

    O(t) = f(t) + sum_{l,i} K_{t,t_l} Kres_{li} f(t_i),   f = O^(0) + Xi,

where ``K`` is strictly lower triangular (hence nilpotent) and
``Kres = (I - K)^{-1} = sum_{n<N} K^n`` is its finite Neumann resolvent.

All solver arithmetic is complex double precision.  Node membership is decided
on integer node indices; a floating time ``t`` is mapped to the number of
nodes with ``t_k <= t`` allowing a relative slack of ``NODE_SLACK`` spacings so
that ``t = l * T / N`` computed in floating point lands on node ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError, KernelEvaluationError

NODE_SLACK = 1e-9

# |Re r| * span above which the separable K assembly could overflow
_SEPARABLE_EXPONENT_LIMIT = 40.0


@dataclass(frozen=True, eq=False)
class DeltaTrain:
    """Uniform train of ``count`` deltas on ``(0, duration]``.

    ``amplitudes[k-1]`` is the switching amplitude chi(t_k).  ``start_index``
    selects a window: the free evolution starts at ``t_a = a T / N`` and only
    nodes ``k >= max(a, 1)`` take part.  ``start_index=0`` is the full train.
    """

    duration: float
    count: int
    amplitudes: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        if not np.isfinite(self.duration) or self.duration <= 0:
            raise ConfigurationError(f"duration must be positive, got {self.duration!r}")
        if int(self.count) != self.count or self.count < 1:
            raise ConfigurationError(f"count must be a positive integer, got {self.count!r}")
        amps = np.array(self.amplitudes, dtype=float).reshape(-1)
        if amps.shape[0] != self.count:
            raise ConfigurationError(
                f"expected {self.count} amplitudes, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise ConfigurationError("amplitudes must be finite")
        if not 0 <= self.start_index <= self.count:
            raise ConfigurationError(
                f"start_index must lie in [0, {self.count}], got {self.start_index}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def uniform(cls, duration, count, amplitude=1.0):
        return cls(duration, count, np.full(int(count), float(amplitude)))

    @property
    def spacing(self):
        return self.duration / self.count

    def node_time(self, k):
        return k * self.duration / self.count

    @property
    def times(self):
        """All node times ``t_1 .. t_N`` regardless of the window."""
        return np.arange(1, self.count + 1) * self.spacing

    @property
    def start_time(self):
        return self.node_time(self.start_index)

    @property
    def first_node(self):
        return max(self.start_index, 1)

    @property
    def node_indices(self):
        """1-based indices of the nodes taking part in the dynamics."""
        return np.arange(self.first_node, self.count + 1)

    @property
    def active_times(self):
        return self.node_indices * self.spacing

    @property
    def active_amplitudes(self):
        return self.amplitudes[self.first_node - 1:]

    @property
    def n_active(self):
        return self.count - self.first_node + 1

    def window(self, index):
        """Same train seen from node ``index``: evolution restarts at ``t_index``."""
        return replace(self, start_index=int(index))

    def nodes_up_to(self, t):
        """Number of active nodes with ``t_k <= t``."""
        kmax = int(np.floor(t / self.spacing + NODE_SLACK))
        return int(np.clip(kmax - self.first_node + 1, 0, self.n_active))

    def node_index(self, t):
        """Index ``k`` with ``t_k == t`` (within the node slack), else an error."""
        k = int(np.rint(t / self.spacing))
        if abs(t / self.spacing - k) > NODE_SLACK or not 0 <= k <= self.count:
            raise ConfigurationError(f"time {t!r} is not on the node grid")
        return k


class FreePropagator:
    """Memoryless operator ``p(d/dt) = sum_k a_k d^k/dt^k`` of order 1 or 2.

    Provides the Green function ``G_0 = L^{-1}[1/p]``, its derivative and the
    free solution built from the initial derivatives.
    """

    def __init__(self, coefficients):
        coeffs = tuple(complex(c) if np.iscomplexobj(c) else float(c) for c in coefficients)
        if len(coeffs) not in (2, 3):
            raise ConfigurationError("only orders n = 1 and n = 2 are supported")
        if coeffs[-1] == 0:
            raise ConfigurationError("leading coefficient a_n must be nonzero")
        self.coefficients = coeffs
        self.order = len(coeffs) - 1
        self.is_real = all(not isinstance(c, complex) for c in coeffs)
        self._roots = np.roots(coeffs[::-1]).astype(complex)
        self._harmonic = None
        if self.order == 2 and self.is_real and coeffs[1] == 0 and coeffs[0] / coeffs[2] > 0:
            self._harmonic = np.sqrt(coeffs[0] / coeffs[2])

    @classmethod
    def first_order_unit(cls):
        """``p = d/dt``, so ``G_0 = 1``."""
        return cls((0.0, 1.0))

    @classmethod
    def harmonic(cls, omega):
        """``p = d^2/dt^2 + omega^2``, so ``G_0 = sin(omega t) / omega``."""
        if omega <= 0:
            raise ConfigurationError("harmonic frequency must be positive")
        return cls((float(omega) ** 2, 0.0, 1.0))

    def __repr__(self):
        return f"FreePropagator({self.coefficients!r})"

    @property
    def _repeated(self):
        if self.order == 1:
            return False
        r1, r2 = self._roots
        return abs(r1 - r2) <= 1e-8 * max(1.0, abs(r1), abs(r2))

    def modes(self):
        """``[(c_j, r_j)]`` with ``G_0(t) = sum c_j exp(r_j t)``; None for a double root."""
        an = self.coefficients[-1]
        if self.order == 1:
            return [(1.0 / an, self._roots[0])]
        if self._repeated:
            return None
        r1, r2 = self._roots
        c = 1.0 / (an * (r1 - r2))
        return [(c, r1), (-c, r2)]

    def _finish(self, value):
        return value.real if self.is_real else value

    def green0(self, t):
        t = np.asarray(t, dtype=float)
        an = self.coefficients[-1]
        if self._harmonic is not None:
            w = self._harmonic
            return np.sin(w * t) / (an * w)
        if self.order == 1:
            return self._finish(np.exp(self._roots[0] * t) / an)
        if self._repeated:
            r = self._roots.mean()
            return self._finish(t * np.exp(r * t) / an)
        return self._finish(sum(c * np.exp(r * t) for c, r in self.modes()))

    def green0_derivative(self, t):
        t = np.asarray(t, dtype=float)
        an = self.coefficients[-1]
        if self._harmonic is not None:
            return np.cos(self._harmonic * t) / an
        if self.order == 1:
            r = self._roots[0]
            return self._finish(r * np.exp(r * t) / an)
        if self._repeated:
            r = self._roots.mean()
            return self._finish((1.0 + r * t) * np.exp(r * t) / an)
        return self._finish(sum(c * r * np.exp(r * t) for c, r in self.modes()))

    def free_solution(self, t, initials):
        """Free evolution ``O^(0)(t)`` from ``initials = (O(0), O'(0), ...)``."""
        initials = np.asarray(initials, dtype=complex).reshape(-1)
        if initials.shape[0] != self.order:
            raise ConfigurationError(
                f"expected {self.order} initial values, got {initials.shape[0]}"
            )
        a = self.coefficients
        g = self.green0(t)
        if self.order == 1:
            return a[1] * g * initials[0]
        gd = self.green0_derivative(t)
        return a[2] * (gd * initials[0] + g * initials[1]) + a[1] * g * initials[0]


def _zero_gamma(t, s):
    return np.zeros(np.broadcast(np.asarray(t), np.asarray(s)).shape)


@dataclass(frozen=True)
class KernelSpec:
    """Two-time kernel ``Gamma(t, t')`` plus restriction metadata.

    ``gamma`` must accept broadcastable numpy arrays of absolute times.  The
    effective memory weight between nodes is
    ``Sigma(t_k, t_l) = sign * chi_k * chi_l * Gamma(t_k, t_l)`` for
    ``0 < k - l <= max_arc_span`` and exactly zero otherwise; in particular
    the diagonal ``k == l`` is always zero.
    """

    gamma: Callable
    max_arc_span: Optional[int] = None
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ConfigurationError("sign convention must be +1 or -1")
        if self.max_arc_span is not None and self.max_arc_span < 1:
            raise ConfigurationError("max_arc_span must be a positive integer")

    @classmethod
    def zero(cls):
        return cls(_zero_gamma)

    def restricted(self, span):
        return replace(self, max_arc_span=None if span is None else int(span))

    def sigma_matrix(self, train: DeltaTrain):
        """Effective Sigma on the active nodes, strictly lower triangular."""
        n = train.n_active
        sigma = np.zeros((n, n), dtype=complex)
        rows, cols = np.tril_indices(n, -1)
        if self.max_arc_span is not None:
            keep = rows - cols <= self.max_arc_span
            rows, cols = rows[keep], cols[keep]
        if rows.size == 0:
            return sigma
        times = train.active_times
        values = np.asarray(self.gamma(times[rows], times[cols]), dtype=complex)
        values = np.broadcast_to(values, rows.shape)
        bad = ~np.isfinite(values)
        if bad.any():
            first = int(np.argmax(bad))
            idx = train.node_indices
            raise KernelEvaluationError(int(idx[rows[first]]), int(idx[cols[first]]), values[first])
        chi = train.active_amplitudes
        sigma[rows, cols] = self.sign * chi[rows] * chi[cols] * values
        return sigma


@dataclass(frozen=True, eq=False)
class NoiseSequence:
    """Impulse strengths ``zeta_k = (T/N) chi_k xi(t_k)`` for every node."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, train: DeltaTrain):
        return cls(np.zeros(train.count, dtype=complex))

    @classmethod
    def from_xi(cls, train: DeltaTrain, xi):
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if xi.shape[0] != train.count:
            raise ConfigurationError(f"expected {train.count} noise samples, got {xi.shape[0]}")
        return cls(train.spacing * train.amplitudes * xi)

    def check(self, train: DeltaTrain):
        if self.values.shape[0] != train.count:
            raise ConfigurationError(
                f"noise has {self.values.shape[0]} entries, train has {train.count} nodes"
            )
        return self


class MemoryMatrix:
    """Strictly lower triangular ``K`` and its resolvent ``(I - K)^{-1}``."""

    def __init__(self, K):
        K = np.tril(np.asarray(K, dtype=complex), -1)
        K.setflags(write=False)
        self.K = K

    @property
    def size(self):
        return self.K.shape[0]

    @cached_property
    def resolvent(self):
        n = self.size
        res = solve_triangular(np.eye(n) - self.K, np.eye(n, dtype=complex),
                               lower=True, unit_diagonal=True)
        res.setflags(write=False)
        return res

    def power_resolvent(self):
        """``sum_{n=0}^{N-1} K^n`` by repeated multiplication (debug path)."""
        n = self.size
        term = np.eye(n, dtype=complex)
        total = term.copy()
        for _ in range(n - 1):
            term = term @ self.K
            if not term.any():
                break
            total += term
        return total

    def solve(self, rhs):
        """``(I - K)^{-1} rhs`` by forward substitution."""
        return solve_triangular(np.eye(self.size) - self.K, np.asarray(rhs, dtype=complex),
                                lower=True, unit_diagonal=True)

    def solve_transposed(self, rhs):
        """``(I - K)^{-T} rhs`` by back substitution."""
        return solve_triangular(np.eye(self.size) - self.K, np.asarray(rhs, dtype=complex),
                                lower=True, unit_diagonal=True, trans="T")


def _apply_lower_green(prop: FreePropagator, taus, X):
    """``L @ X`` with ``L_lk = G_0(tau_l - tau_k)`` for ``k <= l``, else 0."""
    modes = prop.modes()
    span = taus[-1] - taus[0] if taus.size else 0.0
    if modes is not None and all(abs(r.real) * span < _SEPARABLE_EXPONENT_LIMIT for _, r in modes):
        def apply(Y):
            out = np.zeros(Y.shape, dtype=complex)
            for c, r in modes:
                tau = taus - taus[0]
                out += (c * np.exp(r * tau))[:, None] * np.cumsum(np.exp(-r * tau)[:, None] * Y, axis=0)
            return out
    else:
        L = np.tril(np.asarray(prop.green0(taus[:, None] - taus[None, :]), dtype=complex))

        def apply(Y):
            return L @ Y
    if prop.is_real:
        out = apply(X.real).real
        if np.iscomplexobj(X) and X.imag.any():
            out = out + 1j * apply(X.imag).real
        return out.astype(complex)
    return apply(X)


class DeltaSolver:
    """Cached solver for one (train, kernel, propagator) triple.

    Building the memory matrix is the only O(N^2)-memory step; each evaluation
    at a time ``t`` then costs one triangular solve.
    """

    def __init__(self, train: DeltaTrain, kernel: KernelSpec, prop: FreePropagator):
        self.train = train
        self.kernel = kernel
        self.prop = prop
        self.sigma = kernel.sigma_matrix(train)
        delta = train.spacing
        K = -(delta ** 2) * _apply_lower_green(prop, train.active_times, self.sigma)
        self.memory = MemoryMatrix(K)

    @property
    def K(self):
        return self.memory.K

    def green_row(self, t, derivative=False):
        """``G_0(t - t_k) Theta(t - t_k)`` over active nodes, Theta(0) = 1."""
        row = np.zeros(self.train.n_active, dtype=complex)
        m = self.train.nodes_up_to(t)
        if m:
            fn = self.prop.green0_derivative if derivative else self.prop.green0
            row[:m] = fn(t - self.train.active_times[:m])
        return row

    def k_row(self, t, derivative=False):
        """Memory row ``K_{t, t_l}`` (or its time derivative) over active nodes."""
        return -(self.train.spacing ** 2) * (self.green_row(t, derivative) @ self.sigma)

    def propagated_row(self, t, derivative=False):
        """``y(t) = (I - K)^{-T} K_{t,.}`` so that ``O(t) = f(t) + y(t) . f_nodes``."""
        return self.memory.solve_transposed(self.k_row(t, derivative))

    def free(self, t, initials):
        return self.prop.free_solution(t - self.train.start_time, initials)

    def xi(self, t, noise: NoiseSequence, derivative=False):
        zeta = noise.check(self.train).values[self.train.first_node - 1:]
        return self.green_row(t, derivative) @ zeta

    def source_nodes(self, initials, noise: Optional[NoiseSequence] = None):
        """``f_i = O^(0)(t_i) + Xi(t_i)`` at every active node."""
        f = np.asarray(self.free(self.train.active_times, initials), dtype=complex)
        f = np.broadcast_to(f, (self.train.n_active,)).copy()
        if noise is not None:
            zeta = noise.check(self.train).values[self.train.first_node - 1:]
            f += _apply_lower_green(self.prop, self.train.active_times, zeta[:, None])[:, 0]
        return f

    def solve_nodes(self, initials, noise: Optional[NoiseSequence] = None):
        return self.memory.solve(self.source_nodes(initials, noise))

    def solve_at(self, t, initials, noise: Optional[NoiseSequence] = None):
        if t < self.train.start_time:
            raise ConfigurationError("evaluation time precedes the start of the evolution")
        f_t = complex(self.free(t, initials))
        if noise is not None:
            f_t += self.xi(t, noise)
        nodes = self.solve_nodes(initials, noise)
        return f_t + self.k_row(t) @ nodes


def build_K(train: DeltaTrain, kernel: KernelSpec, prop: FreePropagator) -> MemoryMatrix:
    return DeltaSolver(train, kernel, prop).memory


def k_row(t, train, kernel, prop):
    return DeltaSolver(train, kernel, prop).k_row(t)


def xi_at(t, train: DeltaTrain, noise: NoiseSequence, prop: FreePropagator):
    row = np.zeros(train.n_active, dtype=complex)
    m = train.nodes_up_to(t)
    if m:
        row[:m] = prop.green0(t - train.active_times[:m])
    return complex(row @ noise.check(train).values[train.first_node - 1:])


def solve_at(t, initials: Sequence, train, kernel, noise=None, prop=None):
    prop = prop or FreePropagator.first_order_unit()
    return complex(DeltaSolver(train, kernel, prop).solve_at(t, initials, noise))


def solve_nodes(initials: Sequence, train, kernel, noise=None, prop=None):
    prop = prop or FreePropagator.first_order_unit()
    return DeltaSolver(train, kernel, prop).solve_nodes(initials, noise)
