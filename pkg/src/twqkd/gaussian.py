"""Covariance-matrix calculus for zero-mean Gaussian states.

Conventions, used everywhere in the package:

* shot-noise units: the vacuum quadrature variance is 1;
* quadrature ordering is interleaved, (x1, p1, x2, p2, ...);
* a state is physical when every symplectic eigenvalue is >= 1 - 1e-9.

The module is the general, full-matrix route: symplectic spectra come from
the eigenvalues of i*Omega*gamma.  The protocol pipeline has a faster
xp-block route through ``twqkd._backend``; tests hold the two routes
against each other.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from . import _backend
from .errors import (
    DimensionMismatchError,
    UnphysicalEigenvalueError,
    UnphysicalStateError,
)

PHYSICAL_TOL = 1e-9
SYMMETRY_RTOL = 1e-12
SYMPLECTIC_TOL = 1e-10

I2 = np.eye(2)
SIGMA_Z = np.diag([1.0, -1.0])


def omega(n_modes: int) -> np.ndarray:
    """Standard symplectic form, block-diagonal [[0, 1], [-1, 0]] per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _as_readonly(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclasses.dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric 2n x 2n matrix of quadrature second moments."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatchError(
                f"covariance matrix must be square and even-dimensional, got {m.shape}"
            )
        scale = np.abs(m).max() if m.size else 0.0
        if np.abs(m - m.T).max() > SYMMETRY_RTOL * max(1.0, scale):
            raise ValueError("covariance matrix is not symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def mode_block(self, i: int) -> np.ndarray:
        """2x2 diagonal block of mode i."""
        return self.matrix[2 * i : 2 * i + 2, 2 * i : 2 * i + 2]

    def xp_blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, P) quadrature blocks; requires an xp-separable matrix."""
        m = self.matrix
        cross = m[0::2, 1::2]
        if np.abs(cross).max() > 1e-10 * max(1.0, np.abs(m).max()):
            raise ValueError("state has x-p cross correlations")
        return np.ascontiguousarray(m[0::2, 0::2]), np.ascontiguousarray(m[1::2, 1::2])

    @classmethod
    def from_xp_blocks(cls, x_block: np.ndarray, p_block: np.ndarray) -> "CovarianceMatrix":
        n = x_block.shape[0]
        m = np.zeros((2 * n, 2 * n))
        m[0::2, 0::2] = x_block
        m[1::2, 1::2] = p_block
        return cls(m)

    def assert_physical(self, tol: float = PHYSICAL_TOL) -> None:
        nus = symplectic_eigenvalues(self)
        if nus[-1] < 1.0 - tol:
            raise UnphysicalStateError(
                f"smallest symplectic eigenvalue {nus[-1]} below 1 - {tol}",
                spectrum=nus,
            )


@dataclasses.dataclass(frozen=True)
class SymplecticTransform:
    """2n x 2n matrix S with S Omega S^T = Omega."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatchError(
                f"symplectic matrix must be square and even-dimensional, got {m.shape}"
            )
        omg = omega(m.shape[0] // 2)
        if np.abs(m @ omg @ m.T - omg).max() > SYMPLECTIC_TOL:
            raise ValueError("matrix does not preserve the symplectic form")
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2


def g_entropy(nu: float) -> float:
    """Entropy in bits of a thermal mode with symplectic eigenvalue nu.

    G(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2), with
    G(1) = 0.  Inputs within 1e-9 below 1 are clamped to 1; anything lower
    is rejected as unphysical.
    """
    if nu < 1.0 - PHYSICAL_TOL:
        raise UnphysicalEigenvalueError(f"symplectic eigenvalue {nu} < 1 - 1e-9")
    return _backend.g_entropy(float(nu))


def entropy_sum(nus) -> float:
    """Total entropy Sum_i G(nu_i) of a symplectic spectrum, in bits."""
    nus = np.asarray(nus, dtype=float)
    if nus.size and nus.min() < 1.0 - PHYSICAL_TOL:
        raise UnphysicalEigenvalueError(
            f"symplectic eigenvalue {nus.min()} < 1 - 1e-9"
        )
    return _backend.g_sum(np.ascontiguousarray(nus))


def symplectic_eigenvalues(gamma: CovarianceMatrix) -> np.ndarray:
    """Moduli of the eigenvalues of i*Omega*gamma, one per mode, descending.

    The 2n eigenvalues pair up as +/- nu_i; pairs are matched by modulus
    (tolerance 1e-9 relative) and values in [1 - 1e-9, 1) are clamped to 1.
    """
    m = gamma.matrix
    n = gamma.n_modes
    ev = np.linalg.eigvals(1j * omega(n) @ m)
    mods = np.sort(np.abs(ev))[::-1]
    first, second = mods[0::2], mods[1::2]
    if np.abs(first - second).max() > 1e-9 * max(1.0, mods[0]):
        raise UnphysicalStateError(
            "eigenvalues of i*Omega*gamma do not pair up by modulus", spectrum=mods
        )
    nus = 0.5 * (first + second)
    nus[(nus >= 1.0 - PHYSICAL_TOL) & (nus < 1.0)] = 1.0
    return nus


def apply_symplectic(gamma: CovarianceMatrix, s: SymplecticTransform) -> CovarianceMatrix:
    """gamma -> S gamma S^T."""
    if s.matrix.shape != gamma.matrix.shape:
        raise DimensionMismatchError(
            f"transform is {s.matrix.shape}, state is {gamma.matrix.shape}"
        )
    m = s.matrix @ gamma.matrix @ s.matrix.T
    return CovarianceMatrix(0.5 * (m + m.T))


def beam_splitter_symplectic(
    t: float, mode_a: int, mode_b: int, n_modes: int
) -> SymplecticTransform:
    """Two-mode mixing with transmittance t.

    Acts as [[sqrt(t), sqrt(1-t)], [-sqrt(1-t), sqrt(t)]] on each quadrature
    pair of (mode_a, mode_b): mode_a is transmitted into the mode_a slot.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmittance must be in [0, 1], got {t}")
    if (
        mode_a == mode_b
        or not 0 <= mode_a < n_modes
        or not 0 <= mode_b < n_modes
    ):
        raise ValueError(f"invalid mode pair ({mode_a}, {mode_b}) for {n_modes} modes")
    s = np.eye(2 * n_modes)
    ct, rt = np.sqrt(t), np.sqrt(1.0 - t)
    for off in (0, 1):
        a, b = 2 * mode_a + off, 2 * mode_b + off
        s[a, a] = ct
        s[a, b] = rt
        s[b, a] = -rt
        s[b, b] = ct
    return SymplecticTransform(s)


def tmsv_covariance(v: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with quadrature variance v per mode.

    [[v I, sqrt(v^2 - 1) sigma_z], [sqrt(v^2 - 1) sigma_z, v I]]; pure for
    every v >= 1 (v = 1 is the two-mode vacuum).
    """
    if v < 1.0:
        raise ValueError(f"variance must be >= 1 shot-noise unit, got {v}")
    c = np.sqrt(v * v - 1.0)
    m = np.zeros((4, 4))
    m[0:2, 0:2] = v * I2
    m[2:4, 2:4] = v * I2
    m[0:2, 2:4] = c * SIGMA_Z
    m[2:4, 0:2] = c * SIGMA_Z
    return CovarianceMatrix(m)


def homodyne_condition(
    gamma: CovarianceMatrix, measured_mode: int, quadrature: str = "x"
) -> CovarianceMatrix:
    """Conditional state of the unmeasured modes after a homodyne detection.

    gamma_cond = gamma_rest - C (X gamma_meas X)^MP C^T with X = diag(1, 0)
    for an x measurement (diag(0, 1) for p).  The pseudoinverse of the
    rank-one middle factor is the inverted scalar when the measured
    quadrature variance exceeds 1e-12, else zero.
    """
    n = gamma.n_modes
    if not 0 <= measured_mode < n:
        raise ValueError(f"mode {measured_mode} out of range for {n} modes")
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    q = 2 * measured_mode + (0 if quadrature == "x" else 1)
    keep = [i for i in range(2 * n) if i not in (2 * measured_mode, 2 * measured_mode + 1)]
    m = gamma.matrix
    rest = m[np.ix_(keep, keep)].copy()
    var = m[q, q]
    if var > 1e-12:
        col = m[keep, q]
        rest -= np.outer(col, col) / var
    return CovarianceMatrix(0.5 * (rest + rest.T))


def append_vacuum(gamma: CovarianceMatrix, count: int = 1) -> CovarianceMatrix:
    """Tensor on vacuum modes at the end of the mode list."""
    n = gamma.n_modes
    m = np.eye(2 * (n + count))
    m[: 2 * n, : 2 * n] = gamma.matrix
    return CovarianceMatrix(m)


def permute_modes(gamma: CovarianceMatrix, order) -> CovarianceMatrix:
    """Relabel modes so new mode i is old mode order[i]."""
    n = gamma.n_modes
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of 0..{n - 1}")
    idx = np.concatenate([[2 * i, 2 * i + 1] for i in order])
    return CovarianceMatrix(gamma.matrix[np.ix_(idx, idx)])
