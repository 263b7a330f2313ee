"""Figure sweeps and discrete-versus-closed-form comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    ModelParams,
    _factors_from_lnx,
    eta_closed,
    initial_product_state,
    ising_hamiltonian,
    thermal_sigma,
)
from .channel import BipartiteState, DissipationParams, EvolutionConfig, evolve, evolve_full
from .linalg import validate_density

KINDS = ("factors", "eta", "compare", "convergence")
FIG2_P = (0.0, 0.25, 0.5, 0.75, 0.95, 1.0)
FIG2_EPSILON = (0.0, 0.25, 0.8)
EXACT_REGIME_TOL = 1e-9


class SweepSpecError(ValueError):
    pass


def default_params(
    c: float = 1e3, tau: float = 1e-3, p: float = 0.0, epsilon: float = 0.0
) -> ModelParams:
    return ModelParams(0.5, 0.5, c, DissipationParams(p, tau), epsilon)


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    base_params: ModelParams = field(default_factory=default_params)
    epsilon_list: tuple[float, ...] = FIG2_EPSILON
    p_list: tuple[float, ...] = FIG2_P
    lnx_over_c_range: tuple[float, float, int] = (0.0, 10.0, 500)
    time_grid: tuple[float, int] = (0.01, 1000)
    dt_list: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SweepSpecError(f"unknown sweep kind {self.kind!r}")
        if self.kind == "factors":
            lo, hi, steps = self.lnx_over_c_range
            if not self.epsilon_list:
                raise SweepSpecError("epsilon_list is empty")
            if lo < 0 or hi < lo or int(steps) < 1:
                raise SweepSpecError(f"bad lnx_over_c range {self.lnx_over_c_range}")
        if self.kind == "eta":
            t_final, steps = self.time_grid
            if not self.p_list:
                raise SweepSpecError("p_list is empty")
            if not t_final > 0 or int(steps) < 1:
                raise SweepSpecError(f"bad time grid {self.time_grid}")
            if self.base_params.b == 0:
                raise SweepSpecError("b must be nonzero to normalise |eta|/|b|")
        if self.kind == "convergence" and len(self.dt_list) < 2:
            raise SweepSpecError("convergence needs at least two step sizes")

    def lnx_over_c_values(self) -> np.ndarray:
        lo, hi, steps = self.lnx_over_c_range
        return np.array([lo + (hi - lo) * i / steps for i in range(int(steps) + 1)])

    def times(self) -> np.ndarray:
        t_final, steps = self.time_grid
        return np.array([t_final * i / steps for i in range(int(steps) + 1)])


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[tuple[float, float]]
    estimated_order: float
    exact_regime: bool = False


def sweep_factors(spec: SweepSpec) -> list[tuple[float, float, float, float, float, float]]:
    """Rows ``(eps, -ln(x)/c, Re r+/c, Im r+/c, Re r-/c, Im r-/c)``."""
    c = spec.base_params.c
    if c == 0:
        raise SweepSpecError("c must be nonzero for a -ln(x)/c sweep")
    rows = []
    for eps in spec.epsilon_list:
        for s in spec.lnx_over_c_values():
            f = _factors_from_lnx(-s * c, c, eps)
            rp, rm = f.r_plus / c, f.r_minus / c
            rows.append((eps, float(s), rp.real, rp.imag, rm.real, rm.imag))
    return rows


def sweep_eta(spec: SweepSpec) -> list[tuple[float, float, float, float]]:
    """Rows ``(p, eps, t, |eta(t)|/|b|)`` for every epsilon, p and grid time."""
    base = spec.base_params
    t = spec.times()
    b_abs = abs(base.b)
    rows = []
    for eps in spec.epsilon_list:
        for p in spec.p_list:
            params = ModelParams(base.a, base.b, base.c, DissipationParams(p, base.tau), eps)
            ratio = np.abs(eta_closed(t, params)) / b_abs
            rows.extend((p, eps, float(ti), float(r)) for ti, r in zip(t, ratio))
    return rows


def paper_setup(params: ModelParams) -> tuple[BipartiteState, np.ndarray, np.ndarray]:
    """Initial product state, Ising Hamiltonian and bath state for ``params``."""
    state = BipartiteState(validate_density(initial_product_state(params)), 2, 2)
    return state, ising_hamiltonian(params.c), thermal_sigma(params.epsilon).matrix


def discrete_coherence(params: ModelParams, cfg: EvolutionConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(t, rho1[0, 1](t))`` from the full 4x4 map in the paper's setup."""
    state, h, sigma = paper_setup(params)
    times, states = evolve_full(state, h, params.dissipation, cfg, sigma)
    return times, states[:, 0, 2] + states[:, 1, 3]


def compare_discrete_analytic(params: ModelParams, cfg: EvolutionConfig) -> float:
    """Largest ``| |rho01| - |eta| |`` over the recorded times."""
    times, rho01 = discrete_coherence(params, cfg)
    return float(np.max(np.abs(np.abs(rho01) - np.abs(eta_closed(times, params)))))


def convergence_order(
    params: ModelParams, dt_list, t_final: float = 0.01, record_stride: int = 1
) -> ConvergenceReport:
    dts = [float(dt) for dt in dt_list]
    if len(dts) < 2:
        raise SweepSpecError("convergence needs at least two step sizes")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise SweepSpecError("dt_list must be strictly decreasing")
    for dt in dts:
        n = round(t_final / dt)
        if n < 1 or abs(n * dt - t_final) > 1e-9 * t_final:
            raise SweepSpecError(f"dt={dt} does not divide t_final={t_final}")
    rows = [
        (dt, compare_discrete_analytic(params, EvolutionConfig(dt, t_final, record_stride)))
        for dt in dts
    ]
    errors = [e for _, e in rows]
    if max(errors) <= EXACT_REGIME_TOL:
        return ConvergenceReport(rows, math.nan, exact_regime=True)
    orders = [
        math.log(e1 / e2) / math.log(d1 / d2)
        for (d1, e1), (d2, e2) in zip(rows, rows[1:])
    ]
    return ConvergenceReport(rows, float(np.mean(orders)))


def reduced_trajectory(params: ModelParams, cfg: EvolutionConfig):
    """``(t, rho1(t))`` pairs from :func:`qwipe.channel.evolve` in the paper's setup."""
    state, h, sigma = paper_setup(params)
    return evolve(state, h, params.dissipation, cfg, sigma)
