"""Compiled inner loops: tridiagonal Cayley sweeps and the Kirchhoff triple sum.

Each sweep solves ``L psi' = conj(L) psi`` independently on every grid line,
where ``L`` is tridiagonal with lower/diagonal/upper coefficients stored per
node.  The Thomas factorisation of ``L`` is precomputed once (``inv_beta`` and
``cprime``) because the operator does not change between steps.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def thomas_factor(lo, di, up):
    """Factor every line of a batch of tridiagonal systems.

    Lines run along axis 1.  Returns ``(inv_beta, cprime)`` for the
    elimination ``g_k = (r_k - lo_k g_{k-1}) inv_beta_k``,
    ``x_k = g_k - cprime_k x_{k+1}``.
    """
    nlines, n = di.shape
    inv_beta = np.zeros_like(di)
    cprime = np.zeros_like(di)
    for j in range(nlines):
        beta = di[j, 0]
        inv_beta[j, 0] = 1.0 / beta
        cprime[j, 0] = up[j, 0] / beta
        for k in range(1, n):
            beta = di[j, k] - lo[j, k] * cprime[j, k - 1]
            inv_beta[j, k] = 1.0 / beta
            cprime[j, k] = up[j, k] * inv_beta[j, k]
    return inv_beta, cprime


@njit(cache=True)
def sweep_rows(psi, lo, di, up, inv_beta, cprime, work):
    """Cayley solve along axis 1 for interior rows ``i``; edges stay zero."""
    nx, ny = psi.shape
    n = ny - 2
    for i in range(1, nx - 1):
        # forward elimination with the explicit half folded in
        prev = 0.0j
        for k in range(n):
            c = k + 1
            r = np.conj(di[i, k]) * psi[i, c]
            if k > 0:
                r += np.conj(lo[i, k]) * psi[i, c - 1]
            if k < n - 1:
                r += np.conj(up[i, k]) * psi[i, c + 1]
            prev = (r - lo[i, k] * prev) * inv_beta[i, k]
            work[k] = prev
        x = work[n - 1]
        psi[i, n] = x
        for k in range(n - 2, -1, -1):
            x = work[k] - cprime[i, k] * x
            psi[i, k + 1] = x


@njit(cache=True)
def sweep_cols(psi, lo, di, up, inv_beta, cprime, work):
    """Cayley solve along axis 0 for interior columns; edges stay zero.

    Coefficient arrays have shape ``(nx - 2, ny)`` so the inner loop over
    columns touches contiguous memory.
    """
    nx, ny = psi.shape
    n = nx - 2
    for k in range(n):
        c = k + 1
        for j in range(1, ny - 1):
            r = np.conj(di[k, j]) * psi[c, j]
            if k > 0:
                r += np.conj(lo[k, j]) * psi[c - 1, j] - lo[k, j] * work[k - 1, j]
            if k < n - 1:
                r += np.conj(up[k, j]) * psi[c + 1, j]
            work[k, j] = r * inv_beta[k, j]
    for j in range(1, ny - 1):
        psi[n, j] = work[n - 1, j]
    for k in range(n - 2, -1, -1):
        for j in range(1, ny - 1):
            psi[k + 1, j] = work[k, j] - cprime[k, j] * psi[k + 2, j]


@njit(cache=True)
def squared_norm(psi):
    acc = 0.0
    nx, ny = psi.shape
    for i in range(nx):
        for j in range(ny):
            v = psi[i, j]
            acc += v.real * v.real + v.imag * v.imag
    return acc


@njit(cache=True)
def kirchhoff_sum(ys, x, y0, w0, tau, wt, src, scale):
    """Evaluate ``sum_k wt_k / tau_k^2 sum_j w0_j exp(c_k R_kj^2) src_kj``.

    ``c_k = i*scale/tau_k`` with ``R^2 = x^2 + (y - y0_j)^2``.  Nodes whose
    whole contribution underflows are skipped.
    """
    ny = ys.shape[0]
    nt = tau.shape[0]
    n0 = y0.shape[0]
    out = np.zeros(ny, dtype=np.complex128)
    x2 = x * x
    for iy in range(ny):
        yv = ys[iy]
        acc = 0.0j
        for k in range(nt):
            ck = 1j * scale / tau[k]
            if ck.real * x2 < -700.0:
                continue
            inner = 0.0j
            for j in range(n0):
                dy = yv - y0[j]
                e = ck * (x2 + dy * dy)
                if e.real < -700.0:
                    continue
                inner += w0[j] * np.exp(e) * src[k, j]
            acc += wt[k] * inner / (tau[k] * tau[k])
        out[iy] = acc
    return out
