"""Parameter sweeps, subtraction-transmittance optimisation and comparisons.

Distance-to-transmittance model: standard telecom fibre at 0.2 dB/km, so
each channel of a span of length L has t = 10^(-0.02 L).  The two channels
of the two-way protocol run over the same span, t1 = t2.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .protocols import (
    ChannelSpec,
    KeyRateReport,
    ProtocolConfig,
    one_way_key_rate,
    two_way_key_rate,
)
from .sources import SubtractionSpec

GOLDEN = (math.sqrt(5.0) + 1.0) / 2.0

ALICE = "alice"
BOB = "bob"
BOTH = "both"

SCHEMES = ("none", "alice-only", "bob-only", "both")


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    value: float
    report: KeyRateReport
    t_ps_alice: float
    t_ps_bob: float


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """One curve: points sorted by the swept parameter, plus provenance."""

    axis: str
    points: tuple[SweepPoint, ...]
    metadata: dict

    def __post_init__(self):
        values = [pt.value for pt in self.points]
        if values != sorted(values):
            raise ValueError("sweep points must be sorted by parameter value")

    def rates(self) -> np.ndarray:
        return np.array([pt.report.k_ps for pt in self.points])


@dataclasses.dataclass(frozen=True)
class OptimizeResult:
    t_ps: float
    report: KeyRateReport
    positive: bool


def distance_to_channel(l_km: float, eps: float) -> ChannelSpec:
    """Fibre span of l_km at 0.2 dB/km: t = 10^(-0.02 l_km)."""
    if l_km < 0.0:
        raise ValueError(f"distance must be >= 0, got {l_km}")
    return ChannelSpec(t=10.0 ** (-0.02 * l_km), eps=eps)


def config_at_distance(cfg: ProtocolConfig, l_km: float) -> ProtocolConfig:
    """Both channels set to the same span length, excess noises kept."""
    return cfg.replace(
        forward=distance_to_channel(l_km, cfg.forward.eps),
        backward=distance_to_channel(l_km, cfg.backward.eps),
    )


def _with_tps(cfg: ProtocolConfig, side: str, t_ps: float) -> ProtocolConfig:
    if side == ALICE:
        return cfg.replace(alice_sub=SubtractionSpec(cfg.alice_sub.k, t_ps))
    return cfg.replace(bob_sub=SubtractionSpec(cfg.bob_sub.k, t_ps))


def _golden_section(fn, a: float, b: float, tol: float):
    """Maximise fn on [a, b]; returns (argmax, max)."""
    c = b - (b - a) / GOLDEN
    d = a + (b - a) / GOLDEN
    fc, fd = fn(c), fn(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - (b - a) / GOLDEN
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) / GOLDEN
            fd = fn(d)
    return (c, fc) if fc > fd else (d, fd)


def _optimize_single_side(cfg, side, grid_points, grid_lo, refine_tol):
    grid = np.linspace(grid_lo, 1.0, grid_points)

    def rate(t_ps: float) -> float:
        return two_way_key_rate(_with_tps(cfg, side, float(t_ps))).k_ps

    vals = [rate(t) for t in grid]
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    t_star, v_star = _golden_section(rate, lo, hi, refine_tol)
    if vals[i] >= v_star:  # refinement must never lose to the coarse grid
        t_star, v_star = float(grid[i]), vals[i]
    return t_star, v_star


def optimize_tps(
    cfg: ProtocolConfig,
    side: str = ALICE,
    grid_points: int = 21,
    grid_lo: float = 0.01,
    refine_tol: float = 1e-4,
    rounds: int = 2,
) -> OptimizeResult | tuple[OptimizeResult, OptimizeResult]:
    """Maximise the key rate over the subtraction transmittance.

    Coarse grid on [grid_lo, 1] plus golden-section refinement of the
    bracketing interval.  ``side="both"`` runs an alternating coordinate
    search (the two sources are independent, so two rounds suffice) and
    returns a pair (alice result, bob result).  A result with
    ``positive=False`` flags that no grid point achieved a positive rate.
    """
    if side not in (ALICE, BOB, BOTH):
        raise ValueError(f"side must be one of {ALICE!r}, {BOB!r}, {BOTH!r}")
    if side in (ALICE, BOB):
        t_star, _ = _optimize_single_side(cfg, side, grid_points, grid_lo, refine_tol)
        report = two_way_key_rate(_with_tps(cfg, side, t_star))
        return OptimizeResult(t_ps=t_star, report=report, positive=report.k_ps > 0.0)

    work = cfg
    t_a, t_b = work.alice_sub.t_ps, work.bob_sub.t_ps
    for _ in range(rounds):
        t_a, _ = _optimize_single_side(work, ALICE, grid_points, grid_lo, refine_tol)
        work = _with_tps(work, ALICE, t_a)
        t_b, _ = _optimize_single_side(work, BOB, grid_points, grid_lo, refine_tol)
        work = _with_tps(work, BOB, t_b)
    report = two_way_key_rate(work)
    positive = report.k_ps > 0.0
    return (
        OptimizeResult(t_ps=t_a, report=report, positive=positive),
        OptimizeResult(t_ps=t_b, report=report, positive=positive),
    )


def _optimized_sides(cfg: ProtocolConfig) -> tuple[str, ...]:
    """Sides whose subtraction transmittance is worth optimising (k >= 1)."""
    sides = []
    if cfg.alice_sub.k >= 1:
        sides.append(ALICE)
    if cfg.bob_sub.k >= 1:
        sides.append(BOB)
    return tuple(sides)


def best_rate(
    cfg: ProtocolConfig, reoptimize: bool = True
) -> tuple[KeyRateReport, float, float]:
    """Key rate with per-point optimal t_ps on every subtracting side.

    Returns (report, t_ps_alice, t_ps_bob) where the transmittances are the
    ones actually used.
    """
    sides = _optimized_sides(cfg) if reoptimize else ()
    if not sides:
        return two_way_key_rate(cfg), cfg.alice_sub.t_ps, cfg.bob_sub.t_ps
    if len(sides) == 2:
        res_a, res_b = optimize_tps(cfg, BOTH)
        return res_a.report, res_a.t_ps, res_b.t_ps
    res = optimize_tps(cfg, sides[0])
    if sides[0] == ALICE:
        return res.report, res.t_ps, cfg.bob_sub.t_ps
    return res.report, cfg.alice_sub.t_ps, res.t_ps


def tolerable_excess_noise(
    cfg: ProtocolConfig,
    distance_km: float,
    tol: float = 1e-5,
    reoptimize: bool = True,
    eps_cap: float = 20.0,
) -> float | None:
    """Largest symmetric excess noise with a strictly positive key rate.

    Bisection on eps with sign checks at both bracket endpoints; the
    subtraction transmittance is re-optimised at every trial eps when
    ``reoptimize`` is set.  Returns None when the rate is non-positive
    already at eps = 0 (out of range), and eps_cap if no amount of noise
    tested kills the rate.
    """

    def rate(eps: float) -> float:
        at = cfg.replace(
            forward=distance_to_channel(distance_km, eps),
            backward=distance_to_channel(distance_km, eps),
        )
        return best_rate(at, reoptimize)[0].k_ps

    if rate(0.0) <= 0.0:
        return None
    # note: strictly positive rate required; with k >= 1 the optimised rate
    # surface has an exact-zero plateau at t_ps = 1 (success probability 0)
    lo, hi = 0.0, 0.01
    while rate(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > eps_cap:
            return eps_cap
    # invariant: rate(lo) > 0 >= rate(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def max_distance(
    cfg: ProtocolConfig,
    cutoff: float = 1e-8,
    resolution_km: float = 0.1,
    reoptimize: bool = True,
    l_cap: float = 1000.0,
) -> float:
    """Largest span length keeping the key rate at or above `cutoff`.

    Doubling march to bracket the boundary, then bisection to
    ``resolution_km``; t_ps is re-optimised at every probed distance.
    """

    def rate(l_km: float) -> float:
        return best_rate(config_at_distance(cfg, l_km), reoptimize)[0].k_ps

    if rate(0.0) < cutoff:
        return 0.0
    lo, hi = 0.0, 10.0
    while rate(hi) >= cutoff:
        lo, hi = hi, 2.0 * hi
        if hi > l_cap:
            return l_cap
    # invariant: rate(lo) >= cutoff > rate(hi)
    while hi - lo > resolution_km:
        mid = 0.5 * (lo + hi)
        if rate(mid) >= cutoff:
            lo = mid
        else:
            hi = mid
    return lo


def _scheme_config(cfg: ProtocolConfig, scheme: str, k: int) -> ProtocolConfig:
    off = SubtractionSpec.disabled()
    if k == 0:  # degenerate comparison: every scheme collapses to no subtraction
        return cfg.replace(alice_sub=off, bob_sub=off)
    sub_a = SubtractionSpec(k, cfg.alice_sub.t_ps if cfg.alice_sub.k >= 1 else 0.9)
    sub_b = SubtractionSpec(k, cfg.bob_sub.t_ps if cfg.bob_sub.k >= 1 else 0.9)
    if scheme == "none":
        return cfg.replace(alice_sub=off, bob_sub=off)
    if scheme == "alice-only":
        return cfg.replace(alice_sub=sub_a, bob_sub=off)
    if scheme == "bob-only":
        return cfg.replace(alice_sub=off, bob_sub=sub_b)
    if scheme == "both":
        return cfg.replace(alice_sub=sub_a, bob_sub=sub_b)
    raise ValueError(f"unknown scheme {scheme!r}")


def _snapshot(cfg: ProtocolConfig) -> dict:
    return {
        "v_alice": cfg.alice_src.v,
        "v_bob": cfg.bob_src.v,
        "k_alice": cfg.alice_sub.k,
        "t_ps_alice": cfg.alice_sub.t_ps,
        "k_bob": cfg.bob_sub.k,
        "t_ps_bob": cfg.bob_sub.t_ps,
        "t_a": cfg.t_a,
        "eps_forward": cfg.forward.eps,
        "eps_backward": cfg.backward.eps,
        "beta": cfg.beta,
        "mu_policy": cfg.mu_policy,
        "conditioning": cfg.conditioning,
    }


def sweep_distance(
    cfg: ProtocolConfig,
    grid,
    reoptimize: bool = True,
    label: str = "",
) -> SweepResult:
    """Key rate along a distance grid, t_ps re-optimised per point."""
    points = []
    for l_km in sorted(float(v) for v in grid):
        report, tpa, tpb = best_rate(config_at_distance(cfg, l_km), reoptimize)
        points.append(SweepPoint(l_km, report, tpa, tpb))
    meta = _snapshot(cfg)
    meta["label"] = label
    meta["reoptimize"] = reoptimize
    return SweepResult(axis="distance-km", points=tuple(points), metadata=meta)


def compare_schemes(
    cfg: ProtocolConfig, grid, k: int = 1, reoptimize: bool = True
) -> dict[str, SweepResult]:
    """The four subtraction placements over one distance grid."""
    out = {}
    for scheme in SCHEMES:
        scheme_cfg = _scheme_config(cfg, scheme, k)
        out[scheme] = sweep_distance(scheme_cfg, grid, reoptimize, label=scheme)
    return out


def sweep_one_way_distance(
    src, sub, eps: float, beta: float, grid, reoptimize: bool = True, label: str = ""
) -> SweepResult:
    """One-way baseline along a distance grid (t_ps optimised when k >= 1)."""
    points = []
    for l_km in sorted(float(v) for v in grid):
        ch = distance_to_channel(l_km, eps)
        if reoptimize and sub.k >= 1:
            t_star, report = optimize_one_way_tps(src, sub, ch, beta)
        else:
            t_star, report = sub.t_ps, one_way_key_rate(src, sub, ch, beta)
        points.append(SweepPoint(l_km, report, t_star, 1.0))
    meta = {
        "protocol": "one-way",
        "v": src.v,
        "k": sub.k,
        "t_ps": sub.t_ps,
        "eps": eps,
        "beta": beta,
        "label": label,
        "reoptimize": reoptimize,
    }
    return SweepResult(axis="distance-km", points=tuple(points), metadata=meta)


def optimize_one_way_tps(src, sub, ch, beta, grid_points=21, grid_lo=0.01, refine_tol=1e-4):
    grid = np.linspace(grid_lo, 1.0, grid_points)

    def rate(t_ps: float) -> float:
        return one_way_key_rate(src, SubtractionSpec(sub.k, float(t_ps)), ch, beta).k_ps

    vals = [rate(t) for t in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    t_star, v_star = _golden_section(rate, lo, hi, refine_tol)
    if vals[i] >= v_star:
        t_star = float(grid[i])
    return t_star, one_way_key_rate(src, SubtractionSpec(sub.k, t_star), ch, beta)


def one_way_max_distance(
    src, sub, eps: float, beta: float, cutoff: float = 1e-8,
    resolution_km: float = 0.1, reoptimize: bool = True, l_cap: float = 1000.0,
) -> float:
    """Max span of the one-way baseline at the rate cutoff."""

    def rate(l_km: float) -> float:
        ch = distance_to_channel(l_km, eps)
        if reoptimize and sub.k >= 1:
            return optimize_one_way_tps(src, sub, ch, beta)[1].k_ps
        return one_way_key_rate(src, sub, ch, beta).k_ps

    if rate(0.0) < cutoff:
        return 0.0
    lo, hi = 0.0, 10.0
    while rate(hi) >= cutoff:
        lo, hi = hi, 2.0 * hi
        if hi > l_cap:
            return l_cap
    while hi - lo > resolution_km:
        mid = 0.5 * (lo + hi)
        if rate(mid) >= cutoff:
            lo = mid
        else:
            hi = mid
    return lo


def one_way_tolerable_excess_noise(
    src, sub, distance_km: float, beta: float, tol: float = 1e-5,
    reoptimize: bool = True, eps_cap: float = 20.0,
) -> float | None:
    """Largest excess noise with a positive one-way rate at one distance."""

    def rate(eps: float) -> float:
        ch = distance_to_channel(distance_km, eps)
        if reoptimize and sub.k >= 1:
            return optimize_one_way_tps(src, sub, ch, beta)[1].k_ps
        return one_way_key_rate(src, sub, ch, beta).k_ps

    if rate(0.0) <= 0.0:
        return None
    lo, hi = 0.0, 0.01
    while rate(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > eps_cap:
            return eps_cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
