"""Closed-form coherence of a qubit Ising-coupled to a replaced thermal qubit.

Setup: principal qubit ``[[a, b], [b*, 1-a]]``, environment qubit
``sigma = diag((1+eps)/2, (1-eps)/2)``, Hamiltonian ``c Iz (x) Iz`` and the
replacement map of :mod:`qwipe.channel`. The two nonzero off-diagonal blocks
``f`` (the ``|0 0><1 0|`` element) and ``g`` (``|0 1><1 1|``) obey a linear
recurrence whose continuum limit solves

    kappa'' - ln(x) kappa' + (c**2/4 - i c eps ln(x)/2) kappa = 0,

with characteristic exponents ``r_pm``. The principal coherence is
``eta(t) = f(t) + g(t)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import DissipationParams, replacement_weight
from .linalg import DensityMatrix, kron, validate_density

IZ = np.diag([0.5, -0.5]).astype(np.complex128)
CONFLUENCE_RTOL = 1e-9
_B_SLACK = 1e-12


class LimitNotRepresentable(ValueError):
    """``p == 1`` has no finite decoherence factors; use :func:`eta_limit_p1`."""


class ConfluenceError(ValueError):
    """The decoherence factors coincide and the two-exponential form is singular."""


@dataclass(frozen=True)
class ModelParams:
    a: float
    b: complex
    c: float
    dissipation: DissipationParams
    epsilon: float

    def __post_init__(self):
        _check_populations(self.a, self.b)
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not math.isfinite(self.c):
            raise ValueError("c must be finite")

    @property
    def p(self) -> float:
        return self.dissipation.p

    @property
    def tau(self) -> float:
        return self.dissipation.tau

    @property
    def ln_x(self) -> float:
        return self.dissipation.ln_x

    def with_dissipation(self, p: float, tau: float | None = None) -> "ModelParams":
        return ModelParams(
            self.a, self.b, self.c, DissipationParams(p, self.tau if tau is None else tau), self.epsilon
        )


@dataclass(frozen=True)
class DecoherenceFactors:
    r_plus: complex
    r_minus: complex
    degenerate: bool = False


@dataclass(frozen=True)
class ClosedFormCoefficients:
    u_f: complex
    v_f: complex
    u_g: complex
    v_g: complex


@dataclass(frozen=True)
class CoherenceSeries:
    t: np.ndarray
    eta: np.ndarray

    @property
    def abs_eta(self) -> np.ndarray:
        return np.abs(self.eta)

    def records(self) -> list[tuple[float, complex, float]]:
        return [(float(t), complex(e), float(abs(e))) for t, e in zip(self.t, self.eta)]


def _check_populations(a: float, b: complex) -> None:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a must lie in [0, 1], got {a}")
    bound = math.sqrt(a * (1.0 - a))
    if abs(b) > bound + _B_SLACK:
        raise ValueError(f"|b|={abs(b):.6g} exceeds sqrt(a(1-a))={bound:.6g}")


def polarization(e_delta: float, kb_t: float) -> float:
    """Thermal polarization ``tanh(E / 2kT)`` of a two-level system."""
    if not kb_t > 0.0:
        raise ValueError(f"kb_t must be positive, got {kb_t}")
    return math.tanh(e_delta / (2.0 * kb_t))


def thermal_sigma(epsilon: float) -> DensityMatrix:
    if abs(epsilon) > 1.0:
        raise ValueError(f"|epsilon| must not exceed 1, got {epsilon}")
    return validate_density(np.diag([(1.0 + epsilon) / 2, (1.0 - epsilon) / 2]))


def initial_rho1(a: float, b: complex) -> DensityMatrix:
    _check_populations(a, b)
    b = complex(b)
    return validate_density(np.array([[a, b], [b.conjugate(), 1.0 - a]]))


def ising_hamiltonian(c: float) -> np.ndarray:
    """``c Iz (x) Iz = diag(c/4, -c/4, -c/4, c/4)``."""
    return np.diag(np.array([c, -c, -c, c], dtype=np.complex128) / 4.0)


def initial_product_state(params: ModelParams) -> np.ndarray:
    return kron(initial_rho1(params.a, params.b), thermal_sigma(params.epsilon))


def recurrence_series(params: ModelParams, dt: float, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact discrete ``f_m, g_m`` for ``m = 0..m_max`` at step ``dt``."""
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    w = replacement_weight(params.dissipation, dt)
    eps, b = params.epsilon, complex(params.b)
    half_phase = 0.5 * params.c * dt
    return _kernels.recurrence_kernel(
        b * (1.0 + eps) / 2.0,
        b * (1.0 - eps) / 2.0,
        complex(math.cos(half_phase), -math.sin(half_phase)),
        complex(math.cos(half_phase), math.sin(half_phase)),
        w,
        (1.0 + eps) / 2.0,
        (1.0 - eps) / 2.0,
        int(m_max),
    )


def _factors_from_lnx(ln_x: float, c: float, epsilon: float) -> DecoherenceFactors:
    # "+ 0.0" turns a signed -0.0 imaginary part into +0.0 so the principal
    # root of -c**2 is +i|c|.
    disc = complex(ln_x * ln_x - c * c, 2.0 * c * epsilon * ln_x + 0.0)
    root = cmath.sqrt(disc)
    r_plus = -0.5 * (ln_x + root)
    r_minus = -0.5 * (ln_x - root)
    scale = max(abs(ln_x), abs(c))
    degenerate = abs(r_plus - r_minus) <= CONFLUENCE_RTOL * scale
    if degenerate:
        r_plus = r_minus = -0.5 * ln_x + 0j
    return DecoherenceFactors(r_plus, r_minus, degenerate)


def decoherence_factors(d: DissipationParams, c: float, epsilon: float) -> DecoherenceFactors:
    """``r_pm = -(ln x +- sqrt(ln(x)**2 - c**2 + 2i c eps ln x)) / 2``, principal root."""
    if d.is_full_replacement:
        raise LimitNotRepresentable("p = 1 sends r_minus to infinity; use eta_limit_p1")
    return _factors_from_lnx(d.ln_x, c, epsilon)


def closed_form_coefficients(params: ModelParams, factors: DecoherenceFactors) -> ClosedFormCoefficients:
    """Amplitudes of ``f(t) = u_f e^{-r+ t} + v_f e^{-r- t}`` (and likewise ``g``)."""
    if factors.degenerate:
        raise ConfluenceError("coincident decoherence factors; use the confluent form")
    rp, rm = factors.r_plus, factors.r_minus
    b, eps, half_c = complex(params.b), params.epsilon, 0.5j * params.c
    denom = 2.0 * (rp - rm)
    return ClosedFormCoefficients(
        u_f=-b * (1.0 + eps) * (rm - half_c) / denom,
        v_f=b * (1.0 + eps) * (rp - half_c) / denom,
        u_g=-b * (1.0 - eps) * (rm + half_c) / denom,
        v_g=b * (1.0 - eps) * (rp + half_c) / denom,
    )


def _eta_from_factors(t, b: complex, factors: DecoherenceFactors, c: float, epsilon: float):
    shift = 0.5j * c * epsilon
    rp, rm = factors.r_plus, factors.r_minus
    if factors.degenerate:
        return b * np.exp(-rp * t) * (1.0 + (rp - shift) * t)
    d = rp - rm
    return b * ((-rm + shift) / d * np.exp(-rp * t) + (rp - shift) / d * np.exp(-rm * t))


def eta_limit_p1(t, params: ModelParams):
    """Coherence under instantaneous replacement: a pure phase ``b e^{-i c eps t/2}``."""
    t = np.asarray(t, dtype=float)
    out = complex(params.b) * np.exp(-0.5j * params.c * params.epsilon * t)
    return complex(out) if out.ndim == 0 else out


def eta_closed(t, params: ModelParams):
    """Closed-form principal coherence ``eta(t)``; accepts scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise ValueError("t must be non-negative")
    if params.dissipation.is_full_replacement:
        return eta_limit_p1(t, params)
    b = complex(params.b)
    factors = decoherence_factors(params.dissipation, params.c, params.epsilon)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        out = _eta_from_factors(t_arr, b, factors, params.c, params.epsilon)
    out = np.where(t_arr == 0.0, b, out)
    return complex(out) if out.ndim == 0 else out


def eta_series(params: ModelParams, t_grid) -> CoherenceSeries:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("t_grid must be strictly increasing")
    return CoherenceSeries(t, np.atleast_1d(eta_closed(t, params)))
