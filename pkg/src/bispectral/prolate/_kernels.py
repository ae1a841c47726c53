"""Float kernels for the prolate module: Legendre tables, the sinc kernel and the quadrature contraction.

Each kernel has a numba version and a plain numpy version; the two agree to
rounding, and each is deterministic run to run.  Setting ``BISPECTRAL_NO_NUMBA=1`` (or running without
numba installed) selects the numpy versions.
"""

from __future__ import annotations

import os

import numpy as np

# node pairs closer than this use the removable-singularity limit W
COINCIDENT = 1e-14


def legendre_table_np(u, n_modes):
    """``P[q, k] = sqrt(k + 1/2) * P_k(u[q])``, orthonormal on [-1, 1]."""
    nq = u.shape[0]
    P = np.empty((nq, n_modes))
    p_prev = np.ones(nq)
    p_cur = u.copy()
    P[:, 0] = p_prev
    if n_modes > 1:
        P[:, 1] = p_cur
    for k in range(1, n_modes - 1):
        p_next = ((2 * k + 1) * u * p_cur - k * p_prev) / (k + 1)
        p_prev, p_cur = p_cur, p_next
        P[:, k + 1] = p_cur
    return P * np.sqrt(np.arange(n_modes) + 0.5)


def sinc_kernel_np(s, t, W):
    """``sin(W (t - s)) / (t - s)`` on the grid s x t, with the value W on the diagonal limit."""
    d = t[None, :] - s[:, None]
    small = np.abs(d) < COINCIDENT
    safe = np.where(small, 1.0, d)
    return np.where(small, W, np.sin(W * safe) / safe)


def contract_np(P, w, M):
    """``K[m, n] = sum_{a,b} P[a, m] w[a] M[a, b] w[b] P[b, n]``."""
    G = (M * w[None, :]) @ P
    return (P * w[:, None]).T @ G


def _numba_kernels():
    from numba import njit

    @njit(cache=True)
    def legendre_table(u, n_modes):
        nq = u.shape[0]
        P = np.empty((nq, n_modes))
        for q in range(nq):
            x = u[q]
            p_prev = 1.0
            p_cur = x
            P[q, 0] = 1.0
            if n_modes > 1:
                P[q, 1] = x
            for k in range(1, n_modes - 1):
                p_next = ((2 * k + 1) * x * p_cur - k * p_prev) / (k + 1)
                p_prev = p_cur
                p_cur = p_next
                P[q, k + 1] = p_cur
        for k in range(n_modes):
            c = np.sqrt(k + 0.5)
            for q in range(nq):
                P[q, k] *= c
        return P

    @njit(cache=True)
    def sinc_kernel(s, t, W):
        ns, nt = s.shape[0], t.shape[0]
        M = np.empty((ns, nt))
        for a in range(ns):
            for b in range(nt):
                d = t[b] - s[a]
                if abs(d) < COINCIDENT:
                    M[a, b] = W
                else:
                    M[a, b] = np.sin(W * d) / d
        return M

    @njit(cache=True)
    def contract(P, w, M):
        nq, nm = P.shape
        G = np.zeros((nq, nm))
        for a in range(nq):
            for b in range(nq):
                c = M[a, b] * w[b]
                for n in range(nm):
                    G[a, n] += c * P[b, n]
        K = np.zeros((nm, nm))
        for m in range(nm):
            for a in range(nq):
                c = P[a, m] * w[a]
                for n in range(nm):
                    K[m, n] += c * G[a, n]
        return K

    return legendre_table, sinc_kernel, contract


def _select():
    if os.environ.get("BISPECTRAL_NO_NUMBA", "") not in ("", "0"):
        return "numpy", (legendre_table_np, sinc_kernel_np, contract_np)
    try:
        return "numba", _numba_kernels()
    except ImportError:
        return "numpy", (legendre_table_np, sinc_kernel_np, contract_np)


BACKEND, (legendre_table, sinc_kernel, contract) = _select()
