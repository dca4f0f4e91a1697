# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot numeric kernels.

Mirrors ``twqkd._kernel_py`` exactly: entropy function and symplectic
spectra of xp-separable states.  Matrices here are tiny (n <= 8), so a
hand-rolled Cholesky factorisation plus cyclic Jacobi sweeps beats calling
out to LAPACK per evaluation by a wide margin.
"""
from libc.math cimport fabs, log2, sqrt

import numpy as np

NAME = "cython"

DEF MAXN = 16

cdef double CLAMP = 1.0 - 1e-9


cpdef double g_entropy(double nu):
    """Thermal-mode entropy in bits; nu within 1e-9 below 1 counts as 1."""
    cdef double a, b
    if nu <= 1.0:
        return 0.0
    a = 0.5 * (nu + 1.0)
    b = 0.5 * (nu - 1.0)
    return a * log2(a) - b * log2(b)


cpdef double g_sum(const double[::1] nus):
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(nus.shape[0]):
        total += g_entropy(nus[i])
    return total


cdef int _cholesky(double[MAXN][MAXN] a, double[MAXN][MAXN] l, int n) nogil:
    """Lower Cholesky factor of a; returns 0 on success, -1 if not PD."""
    cdef int i, j, k
    cdef double s
    for i in range(n):
        for j in range(i + 1):
            s = a[i][j]
            for k in range(j):
                s -= l[i][k] * l[j][k]
            if i == j:
                if s <= 0.0:
                    return -1
                l[i][i] = sqrt(s)
            else:
                l[i][j] = s / l[j][j]
        for j in range(i + 1, n):
            l[i][j] = 0.0
    return 0


cdef void _jacobi_eigvals(double[MAXN][MAXN] m, double* w, int n) nogil:
    """Eigenvalues of the symmetric matrix m via cyclic Jacobi rotations."""
    cdef int p, q, i, sweep
    cdef double off, scale, theta, t, c, s, tau, h, g
    for sweep in range(64):
        off = 0.0
        scale = 0.0
        for p in range(n):
            scale += fabs(m[p][p])
            for q in range(p + 1, n):
                off += fabs(m[p][q])
        if off <= 1e-15 * (scale + off) or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if fabs(m[p][q]) == 0.0:
                    continue
                theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q]
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                h = t * m[p][q]
                m[p][p] -= h
                m[q][q] += h
                m[p][q] = 0.0
                m[q][p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        g = m[i][p]
                        h = m[i][q]
                        m[i][p] = g - s * (h + tau * g)
                        m[i][q] = h + s * (g - tau * h)
                        m[p][i] = m[i][p]
                        m[q][i] = m[i][q]
    for p in range(n):
        w[p] = m[p][p]


cpdef sympeig_xp(const double[:, ::1] x_block, const double[:, ::1] p_block):
    """Symplectic eigenvalues sqrt(eig(X P)) of an xp-separable state, descending."""
    cdef int n = x_block.shape[0]
    if n > MAXN or p_block.shape[0] != n:
        raise ValueError("kernel supports square blocks up to 16x16")
    cdef double[MAXN][MAXN] a
    cdef double[MAXN][MAXN] l
    cdef double[MAXN][MAXN] m
    cdef double[MAXN] w
    cdef int i, j, k
    cdef double s, nu, tmp
    for i in range(n):
        for j in range(n):
            a[i][j] = x_block[i, j]
    if _cholesky(a, l, n) != 0:
        raise ValueError("x-quadrature block is not positive definite")
    # m = L^T P L, exploiting symmetry of the result
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += p_block[i, k] * l[k][j]
            a[i][j] = s
    for i in range(n):
        for j in range(i, n):
            s = 0.0
            for k in range(n):
                s += l[k][i] * a[k][j]
            m[i][j] = s
            m[j][i] = s
    _jacobi_eigvals(m, w, n)
    # descending insertion sort; n is tiny
    for i in range(1, n):
        tmp = w[i]
        j = i - 1
        while j >= 0 and w[j] < tmp:
            w[j + 1] = w[j]
            j -= 1
        w[j + 1] = tmp
    out = np.empty(n)
    cdef double[::1] ov = out
    for i in range(n):
        nu = sqrt(w[i]) if w[i] > 0.0 else 0.0
        if CLAMP <= nu < 1.0:
            nu = 1.0
        ov[i] = nu
    return out
