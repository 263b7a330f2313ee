"""Discrete environment-replacement map for a bipartite system.

Per step of length ``dt`` the environment (second factor) is swapped for the
bath state ``sigma`` with weight ``1 - x**dt`` and the whole system is then
propagated under a time-independent Hamiltonian::

    rho <- U [x**dt rho + (1 - x**dt) Tr2(rho) (x) sigma] U^dagger

where ``x = (1 - p)**(1/tau)``. ``x`` itself is never formed; only
``ln x = ln(1 - p)/tau`` is stored because ``x`` underflows for ordinary
parameter values (``p = 0.5, tau = 1e-3`` gives ``x ~ 1e-301``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import (
    DensityMatrix,
    DimensionError,
    as_matrix,
    conjugate,
    hermitian_propagator,
    kron,
    partial_trace_first,
    partial_trace_second,
    validate_density,
)


class NumericalFailure(RuntimeError):
    """The evolution produced non-finite values."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state encountered at step {step}")
        self.step = step


@dataclass(frozen=True)
class DissipationParams:
    p: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def ln_x(self) -> float:
        """``ln(1 - p)/tau``; ``-inf`` marks ``p == 1``."""
        if self.p == 1.0:
            return -math.inf
        return math.log1p(-self.p) / self.tau

    @property
    def is_full_replacement(self) -> bool:
        return self.p == 1.0


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0.0 or not self.t_final > 0.0:
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final:
            raise ValueError(f"dt={self.dt} exceeds t_final={self.t_final}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if self.n_steps < 1:
            raise ValueError("t_final/dt rounds to zero steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def t_end(self) -> float:
        """``t_final`` snapped onto the step grid."""
        return self.n_steps * self.dt

    def record_steps(self) -> np.ndarray:
        steps = list(range(0, self.n_steps + 1, self.record_stride))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.asarray(steps, dtype=np.int64)


@dataclass(frozen=True)
class BipartiteState:
    rho12: DensityMatrix
    dim1: int
    dim2: int

    def __post_init__(self):
        if self.rho12.dim != self.dim1 * self.dim2:
            raise DimensionError(
                f"state of dimension {self.rho12.dim} is not {self.dim1}x{self.dim2}"
            )

    @classmethod
    def product(cls, rho1, rho2) -> "BipartiteState":
        r1, r2 = as_matrix(rho1), as_matrix(rho2)
        return cls(validate_density(kron(r1, r2)), r1.shape[0], r2.shape[0])

    def reduced(self) -> np.ndarray:
        return partial_trace_second(self.rho12.matrix, self.dim1, self.dim2)

    def environment(self) -> np.ndarray:
        return partial_trace_first(self.rho12.matrix, self.dim1, self.dim2)


def replacement_weight(d: DissipationParams, dt: float) -> float:
    """Weight ``x**dt`` kept by the current state over one step."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if d.is_full_replacement:
        return 0.0
    return math.exp(dt * d.ln_x)


def step(
    state: BipartiteState,
    u,
    d: DissipationParams,
    dt: float,
    sigma,
) -> BipartiteState:
    sigma = as_matrix(sigma)
    if sigma.shape != (state.dim2, state.dim2):
        raise DimensionError(f"sigma must be {state.dim2}x{state.dim2}")
    rho = state.rho12.matrix
    w = replacement_weight(d, dt)
    mixed = w * rho + (1.0 - w) * kron(state.reduced(), sigma)
    out = validate_density(conjugate(u, mixed), state.rho12.validation_tolerance)
    return BipartiteState(out, state.dim1, state.dim2)


def evolve_full(
    initial: BipartiteState,
    h,
    d: DissipationParams,
    cfg: EvolutionConfig,
    sigma=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the map and return ``(times, states)`` for the recorded steps.

    ``states`` has shape ``(n_records, D, D)`` and holds the full bipartite
    density matrices, unvalidated. ``sigma`` defaults to the environment
    marginal of ``initial``.
    """
    h = as_matrix(h)
    n = initial.dim1 * initial.dim2
    if h.shape != (n, n):
        raise DimensionError(f"Hamiltonian shape {h.shape} does not match state dim {n}")
    u = hermitian_propagator(h, cfg.dt)
    sigma = initial.environment() if sigma is None else as_matrix(sigma)
    if sigma.shape != (initial.dim2, initial.dim2):
        raise DimensionError(f"sigma must be {initial.dim2}x{initial.dim2}")
    w = replacement_weight(d, cfg.dt)
    rec = cfg.record_steps()
    out = np.empty((rec.shape[0], n, n), dtype=np.complex128)
    failed = _kernels.evolve_kernel(
        np.ascontiguousarray(initial.rho12.matrix),
        np.ascontiguousarray(u),
        np.ascontiguousarray(sigma),
        w,
        initial.dim1,
        initial.dim2,
        cfg.n_steps,
        rec,
        out,
    )
    if failed >= 0:
        raise NumericalFailure(int(failed))
    return rec * cfg.dt, out


def evolve(
    initial: BipartiteState,
    h,
    d: DissipationParams,
    cfg: EvolutionConfig,
    sigma=None,
) -> list[tuple[float, DensityMatrix]]:
    """Iterate the map and return ``(t, Tr2 rho(t))`` at the recorded steps.

    ``sigma`` defaults to the initial environment marginal.
    """
    times, states = evolve_full(initial, h, d, cfg, sigma)
    tol = initial.rho12.validation_tolerance
    return [
        (float(t), validate_density(partial_trace_second(s, initial.dim1, initial.dim2), tol))
        for t, s in zip(times, states)
    ]


def coherence_of(reduced) -> float:
    """``|rho[0, 1]|`` of a qubit state."""
    m = as_matrix(reduced)
    if m.shape != (2, 2):
        raise DimensionError(f"coherence is defined for 2x2 states, got {m.shape}")
    return float(abs(m[0, 1]))
