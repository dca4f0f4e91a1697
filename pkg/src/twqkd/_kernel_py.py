"""Pure-Python/NumPy implementation of the hot numeric kernels.

Same contract as the compiled extension ``twqkd._kernel``; which of the two
backs the package is decided once at import time in ``twqkd._backend``.

All states handled here are xp-separable: the covariance matrix splits into
an n x n x-quadrature block X and an n x n p-quadrature block P with no
cross terms.  For such states the symplectic spectrum is sqrt(eig(X @ P)).
"""
import math

import numpy as np

NAME = "python"

_CLAMP = 1.0 - 1e-9


def g_entropy(nu: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue nu.

    ((nu+1)/2)log2((nu+1)/2) - ((nu-1)/2)log2((nu-1)/2); values within 1e-9
    below 1 are treated as exactly 1.  Callers validate nu >= 1 - 1e-9.
    """
    if nu <= 1.0:
        return 0.0
    a = 0.5 * (nu + 1.0)
    b = 0.5 * (nu - 1.0)
    return a * math.log2(a) - b * math.log2(b)


def g_sum(nus) -> float:
    """Sum of g_entropy over a spectrum."""
    return float(sum(g_entropy(float(nu)) for nu in nus))


def sympeig_xp(x_block, p_block):
    """Symplectic eigenvalues of an xp-separable state, descending.

    Uses the similarity eig(X P) = eig(L^T P L) with X = L L^T, which keeps
    the problem symmetric.  Requires X positive definite (true for every
    state produced by the protocol pipeline).  Eigenvalues in [1-1e-9, 1)
    are clamped to 1 so downstream entropies never see log of a negative.
    """
    l_fact = np.linalg.cholesky(x_block)
    w = np.linalg.eigvalsh(l_fact.T @ p_block @ l_fact)
    nus = np.sqrt(np.maximum(w, 0.0))[::-1].copy()
    nus[(nus >= _CLAMP) & (nus < 1.0)] = 1.0
    return nus
