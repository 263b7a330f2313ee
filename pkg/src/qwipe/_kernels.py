"""Inner loops of the discrete replacement map.

Two implementations share one signature: a numba ``@njit`` version and a plain
numpy version. Set ``QWIPE_DISABLE_NUMBA=1`` (or run without numba installed)
to use the numpy path. Both are importable directly for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("QWIPE_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)


def evolve_numpy(rho, u, sigma, w, dim1, dim2, n_steps, record_steps, out):
    """Iterate ``rho -> u [w rho + (1-w) Tr2(rho) x sigma] u^dagger``.

    ``record_steps`` is an increasing int array of step indices to store in
    ``out``. Returns the first step whose state is non-finite, or -1.
    """
    rho = rho.copy()
    uh = u.conj().T
    k = 0
    if record_steps[0] == 0:
        out[0] = rho
        k = 1
    for m in range(1, n_steps + 1):
        red = np.einsum("ikjk->ij", rho.reshape(dim1, dim2, dim1, dim2))
        mix = (red[:, None, :, None] * sigma[None, :, None, :]).reshape(rho.shape)
        rho = u @ (w * rho + (1.0 - w) * mix) @ uh
        if not np.isfinite(rho.sum()):
            return m
        if k < record_steps.shape[0] and record_steps[k] == m:
            out[k] = rho
            k += 1
    return -1


def recurrence_numpy(f0, g0, phase_f, phase_g, w, pop_f, pop_g, n_steps):
    f = np.empty(n_steps + 1, dtype=np.complex128)
    g = np.empty(n_steps + 1, dtype=np.complex128)
    f[0], g[0] = f0, g0
    one_minus_w = 1.0 - w
    for m in range(n_steps):
        s = one_minus_w * (f[m] + g[m])
        f[m + 1] = phase_f * (w * f[m] + pop_f * s)
        g[m + 1] = phase_g * (w * g[m] + pop_g * s)
    return f, g


def _evolve_loops(rho_in, u, sigma, w, dim1, dim2, n_steps, record_steps, out):
    n = rho_in.shape[0]
    rho = rho_in.copy()
    mix = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    red = np.empty((dim1, dim1), dtype=np.complex128)
    k = 0
    if record_steps[0] == 0:
        out[0, :, :] = rho
        k = 1
    one_minus_w = 1.0 - w
    for m in range(1, n_steps + 1):
        for i in range(dim1):
            for j in range(dim1):
                acc = 0j
                for q in range(dim2):
                    acc += rho[i * dim2 + q, j * dim2 + q]
                red[i, j] = acc
        for i in range(dim1):
            for q in range(dim2):
                r = i * dim2 + q
                for j in range(dim1):
                    for l in range(dim2):
                        c = j * dim2 + l
                        mix[r, c] = w * rho[r, c] + one_minus_w * red[i, j] * sigma[q, l]
        for r in range(n):
            for c in range(n):
                acc = 0j
                for s in range(n):
                    acc += u[r, s] * mix[s, c]
                tmp[r, c] = acc
        finite = True
        for r in range(n):
            for c in range(n):
                acc = 0j
                for s in range(n):
                    acc += tmp[r, s] * np.conj(u[c, s])
                rho[r, c] = acc
                if not (np.isfinite(acc.real) and np.isfinite(acc.imag)):
                    finite = False
        if not finite:
            return m
        if k < record_steps.shape[0] and record_steps[k] == m:
            out[k, :, :] = rho
            k += 1
    return -1


if HAVE_NUMBA:
    evolve_numba = numba.njit(cache=True)(_evolve_loops)
    recurrence_numba = numba.njit(cache=True)(recurrence_numpy)
else:  # pragma: no cover
    evolve_numba = None
    recurrence_numba = None

if USE_NUMBA:
    evolve_kernel = evolve_numba
    recurrence_kernel = recurrence_numba
else:
    evolve_kernel = evolve_numpy
    recurrence_kernel = recurrence_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
