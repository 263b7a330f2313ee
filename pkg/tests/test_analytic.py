import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwipe.analytic import (
    ConfluenceError,
    DecoherenceFactors,
    LimitNotRepresentable,
    ModelParams,
    _eta_from_factors,
    _factors_from_lnx,
    closed_form_coefficients,
    decoherence_factors,
    eta_closed,
    eta_limit_p1,
    eta_series,
    initial_rho1,
    ising_hamiltonian,
    polarization,
    recurrence_series,
    thermal_sigma,
)
from qwipe.channel import DissipationParams
from qwipe.linalg import kron

from conftest import random_qubit

C, TAU = 1e3, 1e-3


def params(p=0.5, eps=0.25, a=0.5, b=0.5, c=C, tau=TAU):
    return ModelParams(a, b, c, DissipationParams(p, tau), eps)


def quadratic_residual(r, ln_x, c, eps):
    return abs(r * r + ln_x * r + (c * c / 4 - 0.5j * c * eps * ln_x))


def test_polarization():
    assert polarization(0.0, 1.0) == 0.0
    assert polarization(40.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert math.atanh(0.25) == pytest.approx(0.2554, abs=5e-5)
    assert polarization(2 * 0.2554, 1.0) == pytest.approx(0.25, abs=1e-4)
    assert polarization(2 * math.atanh(0.25), 1.0) == pytest.approx(0.25, rel=1e-14)
    with pytest.raises(ValueError):
        polarization(1.0, 0.0)


def test_thermal_sigma():
    np.testing.assert_allclose(thermal_sigma(0.0).matrix, np.eye(2) / 2)
    np.testing.assert_allclose(thermal_sigma(1.0).matrix, np.diag([1.0, 0.0]))
    np.testing.assert_allclose(thermal_sigma(0.8).matrix, np.diag([0.9, 0.1]), atol=1e-15)
    with pytest.raises(ValueError):
        thermal_sigma(1.01)


def test_initial_rho1():
    np.testing.assert_allclose(initial_rho1(1.0, 0.0).matrix, np.diag([1.0, 0.0]))
    plus = initial_rho1(0.5, 0.5).matrix
    np.testing.assert_allclose(plus, np.full((2, 2), 0.5))
    assert abs(0.2 + 0.1j) <= math.sqrt(0.3 * 0.7)
    initial_rho1(0.3, 0.2 + 0.1j)
    with pytest.raises(ValueError):
        initial_rho1(0.3, 0.5)
    with pytest.raises(ValueError):
        initial_rho1(1.2, 0.0)


def test_ising_hamiltonian():
    np.testing.assert_array_equal(ising_hamiltonian(0.0), np.zeros((4, 4)))
    np.testing.assert_array_equal(ising_hamiltonian(1e3), np.diag([250.0, -250.0, -250.0, 250.0]))
    iz = np.diag([0.5, -0.5])
    for c in (-3.0, 17.5, 1e3):
        np.testing.assert_allclose(ising_hamiltonian(c), c * kron(iz, iz), atol=1e-15)


def test_model_params_constraints():
    with pytest.raises(ValueError):
        params(eps=1.5)
    with pytest.raises(ValueError):
        params(a=0.1, b=0.5)


def test_recurrence_initial_terms():
    pr = params(p=0.3, eps=0.4, a=0.3, b=0.2 + 0.1j)
    dt = 1e-5
    f, g = recurrence_series(pr, dt, 3)
    b = pr.b
    assert f[0] == pytest.approx(b * 1.4 / 2, abs=1e-16)
    assert g[0] == pytest.approx(b * 0.6 / 2, abs=1e-16)
    # replacement leaves f_0 + g_0 structure intact, so f_1, g_1 are pure phases
    assert f[1] == pytest.approx(b * 1.4 * cmath.exp(-0.5j * C * dt) / 2, abs=1e-15)
    assert g[1] == pytest.approx(b * 0.6 * cmath.exp(0.5j * C * dt) / 2, abs=1e-15)


def test_recurrence_second_order_form():
    # f_m and g_m both satisfy k_{m+2} - S k_{m+1} + x^dt k_m = 0
    pr = params(p=0.6, eps=0.8, b=0.3)
    dt = 2e-5
    f, g = recurrence_series(pr, dt, 50)
    w = math.exp(dt * pr.ln_x)
    e = pr.epsilon
    s = ((1 + e) / 2 + (1 - e) / 2 * w) * cmath.exp(-0.5j * C * dt) + (
        (1 - e) / 2 + (1 + e) / 2 * w
    ) * cmath.exp(0.5j * C * dt)
    for k in (f, g):
        res = k[2:] - s * k[1:-1] + w * k[:-2]
        assert np.max(np.abs(res)) <= 1e-15


def test_factors_lossless():
    f = decoherence_factors(DissipationParams(0.0, TAU), C, 0.0)
    assert f.r_plus == pytest.approx(-500j, abs=1e-12)
    assert f.r_minus == pytest.approx(500j, abs=1e-12)
    assert not f.degenerate


def test_factors_negative_zero_imaginary_part_takes_principal_branch():
    f = decoherence_factors(DissipationParams(0.0, TAU), -C, 0.5)
    assert f.r_plus == pytest.approx(-500j, abs=1e-12)


def test_factors_critical_point():
    f = _factors_from_lnx(-C, C, 0.0)
    assert f.degenerate
    assert f.r_plus == f.r_minus == 500.0


def test_factors_against_polynomial_roots():
    ln_x, eps = -2000.0, 0.25
    f = _factors_from_lnx(ln_x, C, eps)
    roots = np.roots([1.0, ln_x, C * C / 4 - 0.5j * C * eps * ln_x])
    roots = sorted(roots, key=lambda r: r.real)
    assert f.r_plus == pytest.approx(roots[0], rel=1e-12)
    assert f.r_minus == pytest.approx(roots[1], rel=1e-12)
    assert f.r_plus == pytest.approx(122.341349 + 142.424392j, abs=1e-6)
    assert f.r_minus == pytest.approx(1877.658651 - 142.424392j, abs=1e-6)


def test_factors_reject_full_replacement():
    with pytest.raises(LimitNotRepresentable):
        decoherence_factors(DissipationParams(1.0, TAU), C, 0.2)


def test_root_residuals_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p, c, eps = rng.uniform(0, 0.9999), rng.uniform(-5e3, 5e3), rng.uniform(0, 1)
        d = DissipationParams(p, TAU)
        f = decoherence_factors(d, c, eps)
        scale = max(1.0, d.ln_x**2, c * c)
        for r in (f.r_plus, f.r_minus):
            assert quadratic_residual(r, d.ln_x, c, eps) <= 1e-9 * scale
        assert abs(f.r_plus + f.r_minus + d.ln_x) <= 1e-9 * max(1.0, abs(d.ln_x))


def test_coefficients_initial_and_derivative_conditions():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a, b = random_qubit(rng)
        pr = params(p=rng.uniform(0, 0.99), eps=rng.uniform(0, 1), a=a, b=b, c=rng.uniform(10, 3e3))
        f = decoherence_factors(pr.dissipation, pr.c, pr.epsilon)
        k = closed_form_coefficients(pr, f)
        e, c = pr.epsilon, pr.c
        assert abs(k.u_f + k.v_f - b * (1 + e) / 2) <= 1e-10
        assert abs(k.u_g + k.v_g - b * (1 - e) / 2) <= 1e-10
        scale = max(abs(b) * c, 1e-300)
        df = -f.r_plus * k.u_f - f.r_minus * k.v_f
        dg = -f.r_plus * k.u_g - f.r_minus * k.v_g
        assert abs(df + 0.25j * b * c * (1 + e)) <= 1e-9 * scale
        assert abs(dg - 0.25j * b * c * (1 - e)) <= 1e-9 * scale


def test_coefficients_reject_confluence():
    pr = params(p=1 - math.exp(-1.0), eps=0.0)
    with pytest.raises(ConfluenceError):
        closed_form_coefficients(pr, _factors_from_lnx(-C, C, 0.0))


def test_closed_form_branches_match_small_step_recurrence():
    rng = np.random.default_rng(3)
    dt = 1e-7
    for _ in range(5):
        a, b = random_qubit(rng)
        pr = params(p=rng.uniform(0, 0.95), eps=rng.uniform(0, 1), a=a, b=b)
        f_fac = decoherence_factors(pr.dissipation, pr.c, pr.epsilon)
        k = closed_form_coefficients(pr, f_fac)
        fm, gm = recurrence_series(pr, dt, 20000)
        for m in (1000, 10000, 20000):
            t = m * dt
            f_t = k.u_f * cmath.exp(-f_fac.r_plus * t) + k.v_f * cmath.exp(-f_fac.r_minus * t)
            g_t = k.u_g * cmath.exp(-f_fac.r_plus * t) + k.v_g * cmath.exp(-f_fac.r_minus * t)
            assert abs(f_t - fm[m]) <= 1e-4
            assert abs(g_t - gm[m]) <= 1e-4
            assert abs(f_t + g_t - eta_closed(t, pr)) <= 1e-12


def test_eta_initial_value():
    for p in (0.0, 0.3, 1 - math.exp(-1.0), 0.99, 1.0):
        assert eta_closed(0.0, params(p=p, eps=0.0, b=0.4, a=0.5)) == 0.4


def test_eta_lossless_cosine():
    pr = params(p=0.0, eps=0.0)
    t = np.linspace(0, 1e-2, 257)
    np.testing.assert_allclose(eta_closed(t, pr), 0.5 * np.cos(C * t / 2), atol=1e-13)
    assert abs(eta_closed(math.pi / C, pr)) <= 1e-13
    f, g = recurrence_series(pr, 1e-5, 1000)
    np.testing.assert_allclose(f + g, eta_closed(np.arange(1001) * 1e-5, pr), atol=1e-12)


def test_eta_full_replacement_is_phase():
    for eps in (0.0, 0.25, 0.8):
        pr = params(p=1.0, eps=eps)
        t = np.linspace(0, 1e-2, 101)
        np.testing.assert_allclose(np.abs(eta_closed(t, pr)), 0.5, atol=1e-15)
    assert eta_limit_p1(0.7, params(p=1.0, eps=0.0)) == 0.5


def test_eta_limit_phase():
    val = eta_limit_p1(1e-3, params(p=1.0, eps=0.25))
    assert cmath.phase(val) == pytest.approx(-0.125, abs=1e-15)
    assert abs(val) == pytest.approx(0.5, abs=1e-15)


def test_eta_closed_approaches_limit_as_ln_x_diverges():
    # the gap to the limit scales like c^2 t / (4 |ln x|); shrink tau to reach large |ln x|
    t = 1e-3
    limit = eta_limit_p1(t, params(p=1.0, eps=0.25))
    pr = params(p=1 - 1e-12, eps=0.25, tau=1e-9)
    assert abs(eta_closed(t, pr) - limit) <= 1e-5
    gaps = [abs(eta_closed(t, params(p=1 - 10.0**-k, eps=0.25)) - limit) for k in (2, 6, 12)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_eta_rejects_negative_time():
    with pytest.raises(ValueError):
        eta_closed(-1e-3, params())


def test_branch_swap_invariance():
    rng = np.random.default_rng(5)
    t = np.linspace(0, 1e-2, 64)
    for _ in range(200):
        pr = params(p=rng.uniform(0, 0.999), eps=rng.uniform(0, 1), c=rng.uniform(1, 3e3))
        f = decoherence_factors(pr.dissipation, pr.c, pr.epsilon)
        if f.degenerate:
            continue
        swapped = DecoherenceFactors(f.r_minus, f.r_plus)
        a = _eta_from_factors(t, pr.b, f, pr.c, pr.epsilon)
        b = _eta_from_factors(t, pr.b, swapped, pr.c, pr.epsilon)
        assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(np.abs(a), 1e-300) + 1e-300)


def test_confluent_continuity():
    t = np.linspace(0, 1e-2, 1001)
    at = eta_closed(t, params(p=1 - math.exp(-1.0), eps=0.0))
    for s in (1 - 1e-6, 1 + 1e-6):
        near = eta_closed(t, params(p=1 - math.exp(-s), eps=0.0))
        assert np.max(np.abs(near - at)) <= 1e-6


def test_confluent_form_matches_recurrence():
    pr = params(p=1 - math.exp(-1.0), eps=0.0)
    assert decoherence_factors(pr.dissipation, C, 0.0).degenerate
    f, g = recurrence_series(pr, 1e-7, 50000)
    t = np.arange(0, 50001, 5000) * 1e-7
    np.testing.assert_allclose((f + g)[::5000], eta_closed(t, pr), atol=1e-8)


def test_monotone_conservation_toward_full_replacement():
    vals = [abs(eta_closed(0.01, params(p=p, eps=0.25))) for p in (0.95, 0.99, 0.999, 0.9999)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 0.5


@settings(max_examples=200, deadline=None)
@given(
    p=st.floats(0, 1),
    eps=st.floats(0, 1),
    c=st.floats(-5e3, 5e3),
    t=st.floats(0, 5e-2),
)
def test_eta_bounded_and_linear_in_b(p, eps, c, t):
    one = eta_closed(t, ModelParams(0.5, 0.25, c, DissipationParams(p, TAU), eps))
    two = eta_closed(t, ModelParams(0.5, 0.5, c, DissipationParams(p, TAU), eps))
    other_a = eta_closed(t, ModelParams(0.2, 0.25, c, DissipationParams(p, TAU), eps))
    assert abs(two) <= 0.5 + 1e-9
    assert abs(two - 2 * one) <= 1e-12 * abs(two) + 1e-300
    assert other_a == one


def test_eta_series():
    pr = params(p=0.75, eps=0.8)
    s = eta_series(pr, [0.0])
    assert s.records() == [(0.0, 0.5 + 0j, 0.5)]
    grid = np.linspace(0, 1e-2, 1001)
    s = eta_series(pr, grid)
    assert np.all(s.abs_eta <= 0.5 + 1e-12)
    assert np.all(np.abs(s.abs_eta - np.abs(s.eta)) <= 1e-12)
    with pytest.raises(ValueError):
        eta_series(pr, [0.0, 0.0])
