"""Arc/line diagrams of the memory expansion.

Every term of ``sum_{l,i} K_{t,t_l} Kres_{li} f_i`` expands, at the level of
single kernel factors, into a chain

    i_0 -arc-> k_1 -line-> l_1 -arc-> k_2 -line-> ... -arc-> k_m -line-> t

with ``i_0 < k_1 <= l_1 < k_2 <= ... < k_m``.  Arcs carry
``-(T/N)^2 Sigma(t_k, t_i)``, lines carry ``G_0`` (zero-length lines give
``G_0(0)``), and the chain is seeded by ``f_{i_0}``.  The arcs fix the chain
completely, so a diagram is identified with its arc tuple.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .kernel_core import DeltaSolver, DeltaTrain, FreePropagator, KernelSpec, NoiseSequence

MAX_ENUMERATION_NODES = 12


class Memory(Enum):
    MARKOVIAN = "Markovian"
    NON_MARKOVIAN = "NonMarkovian"


@dataclass(frozen=True, order=True)
class Diagram:
    arcs: tuple  # ((i, k), ...) with k > i, 1-based node indices

    def __post_init__(self):
        if not self.arcs:
            raise ConfigurationError("a diagram needs at least one arc")
        prev_end = None
        for i, k in self.arcs:
            if k <= i:
                raise ConfigurationError(f"arc {i}->{k} is not forward in time")
            if prev_end is not None and i < prev_end:
                raise ConfigurationError(f"arc {i}->{k} starts before the previous line ends")
            prev_end = k

    @property
    def start_index(self):
        return self.arcs[0][0]

    @property
    def terminal(self):
        return "t"

    @property
    def lines(self):
        """``((k, destination), ...)``; the last destination is the open time ``"t"``."""
        ends = [k for _, k in self.arcs]
        dests = [i for i, _ in self.arcs[1:]] + ["t"]
        return tuple(zip(ends, dests))

    @property
    def spans(self):
        return tuple(k - i for i, k in self.arcs)

    def label(self):
        return " ".join(f"S{k}{i}" if max(i, k) < 10 else f"S{k},{i}" for i, k in self.arcs)


def enumerate_diagrams(N: int, max_arc_span: Optional[int] = None):
    """All diagrams for an ``N``-node train, sorted by arc list."""
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    span = N if max_arc_span is None else max_arc_span
    out = []

    def extend(prefix):
        # close the chain with a line to t ...
        out.append(Diagram(tuple(prefix)))
        # ... or run a line to a node l >= k and open the next arc there
        for l in range(prefix[-1][1], N):
            for k in range(l + 1, min(N, l + span) + 1):
                extend(prefix + [(l, k)])

    for i in range(1, N):
        for k in range(i + 1, min(N, i + span) + 1):
            extend([(i, k)])
    return sorted(out)


def classify(d: Diagram) -> Memory:
    return Memory.MARKOVIAN if all(s == 1 for s in d.spans) else Memory.NON_MARKOVIAN


def weight(d: Diagram, t, train: DeltaTrain, kernel: KernelSpec, prop: FreePropagator, f_values):
    """Product of arc factors, line propagators and the seed ``f_{start}``."""
    train = train.window(0)
    return _weight(d, t, train, kernel.sigma_matrix(train), prop, np.asarray(f_values, dtype=complex))


def _weight(d, t, train, sigma, prop, f_values):
    delta2 = train.spacing ** 2
    times = train.times
    w = f_values[d.start_index - 1]
    for (i, k), (_, dest) in zip(d.arcs, d.lines):
        w *= -delta2 * sigma[k - 1, i - 1]
        if dest == "t":
            if train.nodes_up_to(t) < k:
                return 0j
            w *= prop.green0(t - times[k - 1])
        else:
            w *= prop.green0(times[dest - 1] - times[k - 1])
    return complex(w)


def sum_check(t, train: DeltaTrain, kernel: KernelSpec, noise: Optional[NoiseSequence],
              initials, prop: FreePropagator):
    """Diagram sum plus ``f_t`` against the matrix solver at time ``t``.

    Returns ``(diagram_value, solver_value, abs_difference)``.
    """
    N = train.count
    if N > MAX_ENUMERATION_NODES:
        raise ConfigurationError(
            f"diagram enumeration is limited to N <= {MAX_ENUMERATION_NODES}, got {N}"
        )
    train = train.window(0)
    solver = DeltaSolver(train, kernel, prop)
    f_nodes = solver.source_nodes(initials, noise)
    f_t = complex(solver.free(t, initials))
    if noise is not None:
        f_t += solver.xi(t, noise)
    total = f_t
    for d in enumerate_diagrams(N, kernel.max_arc_span):
        total += _weight(d, t, train, solver.sigma, prop, f_nodes)
    solver_value = complex(solver.solve_at(t, initials, noise))
    return total, solver_value, abs(total - solver_value)
