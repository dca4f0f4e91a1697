"""Key rates of the two-way protocol (and the one-way baseline).

Entanglement-based picture of one protocol round:

1. Bob's TMSV (B1 kept, B4 sent) travels the forward channel, becoming B3.
2. Alice's TMSV (A1 kept, A4) meets B3 on a beam splitter of transmittance
   t_a; the port fed by A4's transmitted output goes down the backward
   channel to Bob (B5), the other output stays with Alice (A5).
3. Both parties heterodyne their kept modes; Bob homodynes B5 and builds
   the estimator x_B = x_B5 - mu * x_B1 from his two outcomes.

The assembled four-mode state is ordered (B1, B5, A1, A5); an eavesdropper
holding a purification of it limits the key via the Holevo quantity
S(E:B) = S(E) - S(E|x_B), both terms computed from symplectic spectra.

Bob's B1 outcome is a *heterodyne* outcome.  The default analysis therefore
splits B1 on a balanced beam splitter with vacuum before the estimator
transform, so the estimator combines x_B5 with the noisy outcome mode; the
closed-form optimal gain is then mu = sqrt(2) Cov(x_B1, x_B5)/(V_B1 + 1),
and conditioning on x_B leaves four modes.  Setting
``conditioning="mode-level"`` instead treats x_B1 as a noiseless quadrature
(no vacuum split, three conditional modes, optimal gain Cov/V_B1); it is
kept for comparison.

The per-round rate is K = P * (beta * I(B:A) - S(E:B)), with P the joint
selection success probability.  Negative rates are reported, not clamped.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import _backend
from .errors import DegenerateEstimatorError, DimensionMismatchError, UnphysicalStateError
from .gaussian import CovarianceMatrix, SymplecticTransform, symplectic_eigenvalues
from .sources import SourceSpec, SubtractionSpec, subtracted_covariance, success_probability

# mode slots of the assembled two-way state
MODE_B1, MODE_B5, MODE_A1, MODE_A5 = 0, 1, 2, 3

HETERODYNE_SPLIT = "heterodyne-split"
MODE_LEVEL = "mode-level"


@dataclasses.dataclass(frozen=True)
class ChannelSpec:
    """One thermal-loss channel: transmittance t and excess noise eps."""

    t: float
    eps: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.t <= 1.0:
            raise ValueError(f"transmittance must be in (0, 1], got {self.t}")
        if self.eps < 0.0:
            raise ValueError(f"excess noise must be >= 0, got {self.eps}")

    @property
    def chi(self) -> float:
        """Total channel-referred added noise (1 - t)/t + eps."""
        return (1.0 - self.t) / self.t + self.eps


@dataclasses.dataclass(frozen=True)
class ProtocolConfig:
    """Everything needed to evaluate one two-way key rate."""

    alice_src: SourceSpec
    bob_src: SourceSpec
    alice_sub: SubtractionSpec
    bob_sub: SubtractionSpec
    t_a: float
    forward: ChannelSpec
    backward: ChannelSpec
    beta: float
    mu_policy: float | str = "optimal"
    conditioning: str = HETERODYNE_SPLIT

    def __post_init__(self):
        if not 0.0 <= self.t_a <= 1.0:
            raise ValueError(f"t_a must be in [0, 1], got {self.t_a}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if isinstance(self.mu_policy, str) and self.mu_policy != "optimal":
            raise ValueError(f"mu_policy must be 'optimal' or a number, got {self.mu_policy!r}")
        if self.conditioning not in (HETERODYNE_SPLIT, MODE_LEVEL):
            raise ValueError(f"unknown conditioning variant {self.conditioning!r}")

    def replace(self, **kwargs) -> "ProtocolConfig":
        return dataclasses.replace(self, **kwargs)


@dataclasses.dataclass(frozen=True)
class KeyRateReport:
    """Full decomposition of one key-rate evaluation (bits per round)."""

    p_success: float
    mutual_info: float
    holevo: float
    eig_unconditional: tuple
    eig_conditional: tuple
    k_s: float
    k_ps: float

    def __post_init__(self):
        if abs(self.k_ps - self.p_success * self.k_s) > 1e-12 * max(1.0, abs(self.k_s)):
            raise ValueError("k_ps does not decompose as P * k_s")
        if self.holevo < -1e-9:
            raise ValueError(f"negative Holevo bound {self.holevo}")

    def as_dict(self) -> dict:
        return {
            "p_success": self.p_success,
            "mutual_info": self.mutual_info,
            "holevo": self.holevo,
            "eig_unconditional": list(self.eig_unconditional),
            "eig_conditional": list(self.eig_conditional),
            "k_s": self.k_s,
            "k_ps": self.k_ps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KeyRateReport":
        return cls(
            p_success=d["p_success"],
            mutual_info=d["mutual_info"],
            holevo=d["holevo"],
            eig_unconditional=tuple(d["eig_unconditional"]),
            eig_conditional=tuple(d["eig_conditional"]),
            k_s=d["k_s"],
            k_ps=d["k_ps"],
        )


def _build_report(p_success, mutual_info, holevo, beta, eig_unc, eig_cond) -> KeyRateReport:
    k_s = beta * mutual_info - holevo
    return KeyRateReport(
        p_success=p_success,
        mutual_info=mutual_info,
        holevo=holevo,
        eig_unconditional=tuple(float(x) for x in eig_unc),
        eig_conditional=tuple(float(x) for x in eig_cond),
        k_s=k_s,
        k_ps=p_success * k_s,
    )


# --------------------------------------------------------------------------
# full-matrix operations (general route)
# --------------------------------------------------------------------------

def entangling_cloner_apply(
    gamma: CovarianceMatrix, mode: int, ch: ChannelSpec
) -> CovarianceMatrix:
    """Send one mode through a thermal-loss channel, Eve's modes traced out.

    The mode's variance maps V -> t V + (1 - t) + t eps  (= t (V + chi));
    its correlations with every other mode scale by sqrt(t).  The same
    expression covers t = 1, where the channel is purely additive noise.
    """
    n = gamma.n_modes
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for {n} modes")
    m = gamma.matrix.copy()
    sl = slice(2 * mode, 2 * mode + 2)
    st = math.sqrt(ch.t)
    m[sl, :] *= st
    m[:, sl] *= st
    m[sl, sl] += ((1.0 - ch.t) + ch.t * ch.eps) * np.eye(2)
    return CovarianceMatrix(m)


def gamma_mu_transform(
    gamma: CovarianceMatrix, mu: float, quadrature: str = "x"
) -> CovarianceMatrix:
    """Bob's estimator as a symplectic map on modes 0 (B1) and 1 (B5).

    x case:  x_B5 -> x_B5 - mu x_B1, compensated by p_B1 -> p_B1 + mu p_B5.
    p case is the mirror image (with the sign matching the sigma_z
    correlation convention): p_B5 -> p_B5 + mu p_B1, x_B1 -> x_B1 - mu x_B5.
    """
    n = gamma.n_modes
    if n < 2:
        raise DimensionMismatchError("estimator transform needs modes 0 and 1")
    s = np.eye(2 * n)
    if quadrature == "x":
        s[2 * MODE_B5, 2 * MODE_B1] = -mu
        s[2 * MODE_B1 + 1, 2 * MODE_B5 + 1] = mu
    elif quadrature == "p":
        s[2 * MODE_B5 + 1, 2 * MODE_B1 + 1] = mu
        s[2 * MODE_B1, 2 * MODE_B5] = -mu
    else:
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    transform = SymplecticTransform(s)
    m = transform.matrix @ gamma.matrix @ transform.matrix.T
    return CovarianceMatrix(0.5 * (m + m.T))


def heterodyne_split(gamma: CovarianceMatrix, mode: int = MODE_B1) -> CovarianceMatrix:
    """Model a heterodyne of one mode: balanced split with an appended vacuum.

    The measured-outcome mode stays in the original slot; the second
    splitter output is appended as the last mode.
    """
    n = gamma.n_modes
    big = np.eye(2 * (n + 1))
    big[: 2 * n, : 2 * n] = gamma.matrix
    s = np.eye(2 * (n + 1))
    r = 1.0 / math.sqrt(2.0)
    for off in (0, 1):
        a, b = 2 * mode + off, 2 * n + off
        s[a, a] = r
        s[a, b] = r
        s[b, a] = -r
        s[b, b] = r
    m = s @ big @ s.T
    return CovarianceMatrix(0.5 * (m + m.T))


def mutual_information(after_mu: CovarianceMatrix, quadrature: str = "x") -> float:
    """Mutual information (bits) between Alice's heterodyne and Bob's estimator.

    I = (1/2) log2((V_A1 + 1) / (V_A1 + 1 - C^2 / V_B)), with V_B the
    estimator-quadrature variance at mode 1 and C its correlation with the
    matching quadrature of Alice's retained mode 2.  The +1 terms are the
    vacuum unit added by Alice's heterodyne.
    """
    off = 0 if quadrature == "x" else 1
    m = after_mu.matrix
    v_b = m[2 * MODE_B5 + off, 2 * MODE_B5 + off]
    if v_b <= 1e-12:
        raise DegenerateEstimatorError(f"estimator variance {v_b} is numerically zero")
    v_a = m[2 * MODE_A1 + off, 2 * MODE_A1 + off]
    c = m[2 * MODE_A1 + off, 2 * MODE_B5 + off]
    return 0.5 * math.log2((v_a + 1.0) / (v_a + 1.0 - c * c / v_b))


# --------------------------------------------------------------------------
# compact xp-block pipeline (hot route)
# --------------------------------------------------------------------------

def _source_elements(src: SourceSpec, sub: SubtractionSpec) -> tuple[float, float, float]:
    tmc = subtracted_covariance(src, sub)
    return tmc.v1, tmc.c, tmc.v2


def _assemble_xp(cfg: ProtocolConfig) -> tuple[np.ndarray, np.ndarray]:
    """x- and p-blocks of the assembled (B1, B5, A1, A5) state."""
    va1, ca, va4 = _source_elements(cfg.alice_src, cfg.alice_sub)
    vb1, cb, vb4 = _source_elements(cfg.bob_src, cfg.bob_sub)
    t1, e1 = cfg.forward.t, cfg.forward.eps
    t2, e2 = cfg.backward.t, cfg.backward.eps
    ta = cfg.t_a
    s1, s2 = math.sqrt(t1), math.sqrt(t2)
    w, u = math.sqrt(ta), math.sqrt(1.0 - ta)
    b3 = t1 * vb4 + (1.0 - t1) + t1 * e1  # B4 after the forward channel

    x = np.zeros((4, 4))
    x[MODE_B1, MODE_B1] = vb1
    x[MODE_B5, MODE_B5] = t2 * (ta * va4 + (1.0 - ta) * b3) + (1.0 - t2) + t2 * e2
    x[MODE_A1, MODE_A1] = va1
    x[MODE_A5, MODE_A5] = (1.0 - ta) * va4 + ta * b3
    x[MODE_B1, MODE_B5] = s2 * u * s1 * cb
    x[MODE_B1, MODE_A5] = w * s1 * cb
    x[MODE_B5, MODE_A1] = s2 * w * ca
    x[MODE_B5, MODE_A5] = s2 * w * u * (b3 - va4)
    x[MODE_A1, MODE_A5] = -u * ca
    x += np.triu(x, 1).T

    p = x.copy()
    # sigma_z correlations flip sign between the quadrature blocks; the
    # (B5, A5) entry stems from variance mixing and keeps its sign
    for i, j in ((MODE_B1, MODE_B5), (MODE_B1, MODE_A5), (MODE_B5, MODE_A1), (MODE_A1, MODE_A5)):
        p[i, j] = -x[i, j]
        p[j, i] = -x[i, j]
    return x, p


def _xp_het_split(x, p, mode):
    n = x.shape[0]
    out = []
    r = 1.0 / math.sqrt(2.0)
    for m in (x, p):
        big = np.zeros((n + 1, n + 1))
        big[:n, :n] = m
        big[n, n] = 1.0
        s = np.eye(n + 1)
        s[mode, mode] = r
        s[mode, n] = r
        s[n, mode] = -r
        s[n, n] = r
        out.append(s @ big @ s.T)
    return out[0], out[1]


def _xp_gamma_mu(x, p, mu, quadrature):
    n = x.shape[0]
    if quadrature == "x":
        sx = np.eye(n)
        sx[MODE_B5, MODE_B1] = -mu
        sp = np.eye(n)
        sp[MODE_B1, MODE_B5] = mu
    else:
        sp = np.eye(n)
        sp[MODE_B5, MODE_B1] = mu
        sx = np.eye(n)
        sx[MODE_B1, MODE_B5] = -mu
    return sx @ x @ sx.T, sp @ p @ sp.T


def _xp_condition(x, p, mode, quadrature):
    """Homodyne one quadrature of `mode`, drop the mode from both blocks."""
    keep = [i for i in range(x.shape[0]) if i != mode]
    meas, other = (x, p) if quadrature == "x" else (p, x)
    var = meas[mode, mode]
    cond = meas[np.ix_(keep, keep)].copy()
    if var > 1e-12:
        col = meas[keep, mode]
        cond -= np.outer(col, col) / var
    rest = other[np.ix_(keep, keep)].copy()
    if quadrature == "x":
        return np.ascontiguousarray(cond), np.ascontiguousarray(rest)
    return np.ascontiguousarray(rest), np.ascontiguousarray(cond)


def _mu_from_blocks(x, conditioning):
    # computed from the x-block; the p-mirror of the estimator transform
    # carries the sigma_z sign flip, so the same gain is optimal for both
    cov = x[MODE_B1, MODE_B5]
    if conditioning == HETERODYNE_SPLIT:
        return math.sqrt(2.0) * cov / (x[MODE_B1, MODE_B1] + 1.0)
    return cov / x[MODE_B1, MODE_B1]


def optimal_mu(cfg: ProtocolConfig, assembled: CovarianceMatrix | None = None) -> float:
    """Estimator gain that maximises I(B:A), or the configured explicit value.

    For the default heterodyne-split analysis the optimum is
    mu = sqrt(2) Cov(x_B1, x_B5) / (V_B1 + 1), which expands to
    sqrt(2 (1 - t_a) T1 T2 (V_B4 - 1) / (V_B1 + 1)) in terms of Bob's source;
    under the mode-level variant it is Cov(x_B1, x_B5) / V_B1.
    """
    if not isinstance(cfg.mu_policy, str):
        return float(cfg.mu_policy)
    if assembled is not None:
        x, _ = assembled.xp_blocks()
    else:
        x, _ = _assemble_xp(cfg)
    return _mu_from_blocks(x, cfg.conditioning)


def assemble_two_way_state(cfg: ProtocolConfig) -> CovarianceMatrix:
    """Covariance of the four travelling-and-kept modes (B1, B5, A1, A5)."""
    x, p = _assemble_xp(cfg)
    return CovarianceMatrix.from_xp_blocks(x, p)


def _holevo_from_blocks(x, p, mu, quadrature, conditioning):
    nu_unc = _backend.sympeig_xp(np.ascontiguousarray(x), np.ascontiguousarray(p))
    s_unc = _backend.g_sum(nu_unc)
    if conditioning == HETERODYNE_SPLIT:
        x_w, p_w = _xp_het_split(x, p, MODE_B1)
    else:
        x_w, p_w = x, p
    x_g, p_g = _xp_gamma_mu(x_w, p_w, mu, quadrature)
    est = x_g if quadrature == "x" else p_g
    v_b = est[MODE_B5, MODE_B5]
    if v_b <= 1e-12:
        raise DegenerateEstimatorError(f"estimator variance {v_b} is numerically zero")
    v_a = est[MODE_A1, MODE_A1]
    c = est[MODE_A1, MODE_B5]
    mi = 0.5 * math.log2((v_a + 1.0) / (v_a + 1.0 - c * c / v_b))
    x_c, p_c = _xp_condition(x_g, p_g, MODE_B5, quadrature)
    nu_cond = _backend.sympeig_xp(x_c, p_c)
    s_cond = _backend.g_sum(nu_cond)
    holevo = s_unc - s_cond
    if holevo < -1e-9:
        raise UnphysicalStateError(
            f"conditioning increased entropy by {-holevo}",
            spectrum=(tuple(nu_unc), tuple(nu_cond)),
        )
    return max(holevo, 0.0), mi, nu_unc, nu_cond


def holevo_bound(
    assembled: CovarianceMatrix,
    mu: float,
    quadrature: str = "x",
    conditioning: str = HETERODYNE_SPLIT,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Holevo quantity S(E:B) and the two symplectic spectra behind it.

    S(E) comes from the assembled four-mode state (Eve purifies it);
    S(E|x_B) from the state left after the estimator transform and the
    homodyne of the estimator mode.  The default heterodyne-split analysis
    leaves four conditional modes, the mode-level variant three.  Tiny
    negative differences (within 1e-9) are clamped to zero.
    """
    x, p = assembled.xp_blocks()
    holevo, _, nu_unc, nu_cond = _holevo_from_blocks(x, p, mu, quadrature, conditioning)
    return holevo, nu_unc, nu_cond


def two_way_key_rate(cfg: ProtocolConfig, quadrature: str = "x") -> KeyRateReport:
    """Key rate of the two-way protocol under collective attacks."""
    x, p = _assemble_xp(cfg)
    if isinstance(cfg.mu_policy, str):
        mu = _mu_from_blocks(x, cfg.conditioning)
    else:
        mu = float(cfg.mu_policy)
    holevo, mi, nu_unc, nu_cond = _holevo_from_blocks(
        x, p, mu, quadrature, cfg.conditioning
    )
    p_joint = success_probability(cfg.alice_src, cfg.alice_sub) * success_probability(
        cfg.bob_src, cfg.bob_sub
    )
    return _build_report(p_joint, mi, holevo, cfg.beta, nu_unc, nu_cond)


def one_way_key_rate(
    src: SourceSpec, sub: SubtractionSpec, ch: ChannelSpec, beta: float
) -> KeyRateReport:
    """Reverse-reconciliation rate of the one-way coherent-state protocol.

    Entanglement-based picture: one arm of the (possibly subtracted) source
    crosses the channel, Bob homodynes it, Alice heterodynes the kept mode.
    With subtraction disabled this is the standard Gaussian-modulation
    homodyne baseline.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    v1, c, v2 = _source_elements(src, sub)
    st = math.sqrt(ch.t)
    vb = ch.t * v2 + (1.0 - ch.t) + ch.t * ch.eps
    x = np.array([[v1, st * c], [st * c, vb]])
    p = np.array([[v1, -st * c], [-st * c, vb]])
    nu_unc = _backend.sympeig_xp(x, p)
    s_unc = _backend.g_sum(nu_unc)
    if vb <= 1e-12:
        raise DegenerateEstimatorError(f"estimator variance {vb} is numerically zero")
    mi = 0.5 * math.log2((v1 + 1.0) / (v1 + 1.0 - (st * c) ** 2 / vb))
    x_c, p_c = _xp_condition(x, p, 1, "x")
    nu_cond = _backend.sympeig_xp(x_c, p_c)
    s_cond = _backend.g_sum(nu_cond)
    holevo = s_unc - s_cond
    if holevo < -1e-9:
        raise UnphysicalStateError(
            f"conditioning increased entropy by {-holevo}",
            spectrum=(tuple(nu_unc), tuple(nu_cond)),
        )
    holevo = max(holevo, 0.0)
    return _build_report(
        success_probability(src, sub), mi, holevo, beta, nu_unc, nu_cond
    )
