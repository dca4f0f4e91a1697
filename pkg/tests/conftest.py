import math

import numpy as np
import pytest

from twqkd import (
    ChannelSpec,
    CovarianceMatrix,
    ProtocolConfig,
    SourceSpec,
    SubtractionSpec,
    apply_symplectic,
    beam_splitter_symplectic,
    distance_to_channel,
)
from twqkd.gaussian import SymplecticTransform


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_symplectic(n_modes: int, rng, layers: int = 3) -> SymplecticTransform:
    """Product of random single-mode squeezers and two-mode beam splitters."""
    s = np.eye(2 * n_modes)
    for _ in range(layers):
        for mode in range(n_modes):
            r = rng.uniform(-0.8, 0.8)
            sq = np.eye(2 * n_modes)
            sq[2 * mode, 2 * mode] = math.exp(r)
            sq[2 * mode + 1, 2 * mode + 1] = math.exp(-r)
            s = sq @ s
        if n_modes > 1:
            a, b = rng.choice(n_modes, size=2, replace=False)
            t = rng.uniform(0.05, 0.95)
            s = beam_splitter_symplectic(t, int(a), int(b), n_modes).matrix @ s
    return SymplecticTransform(s)


def random_physical_state(n_modes: int, rng, pure: bool = False) -> CovarianceMatrix:
    """Random Gaussian state: thermal spectrum conjugated by a random symplectic."""
    if pure:
        nus = np.ones(n_modes)
    else:
        nus = 1.0 + rng.uniform(0.0, 3.0, size=n_modes)
    diag = np.repeat(nus, 2)
    gamma = CovarianceMatrix(np.diag(diag))
    return apply_symplectic(gamma, random_symplectic(n_modes, rng))


def paper_config(distance_km: float = 10.0, eps: float = 0.01, **kwargs) -> ProtocolConfig:
    """The simulation parameter set: v=40, beta=0.95, t_a=0.5, symmetric eps."""
    defaults = dict(
        alice_src=SourceSpec(40.0),
        bob_src=SourceSpec(40.0),
        alice_sub=SubtractionSpec.disabled(),
        bob_sub=SubtractionSpec.disabled(),
        t_a=0.5,
        forward=distance_to_channel(distance_km, eps),
        backward=distance_to_channel(distance_km, eps),
        beta=0.95,
    )
    defaults.update(kwargs)
    return ProtocolConfig(**defaults)


def random_config(rng) -> ProtocolConfig:
    """Randomized but well-conditioned protocol configuration."""
    k_a = int(rng.integers(0, 3))
    k_b = int(rng.integers(0, 3))
    return ProtocolConfig(
        alice_src=SourceSpec(float(rng.uniform(2.0, 60.0))),
        bob_src=SourceSpec(float(rng.uniform(2.0, 60.0))),
        alice_sub=SubtractionSpec(k_a, float(rng.uniform(0.3, 1.0)) if k_a else 1.0),
        bob_sub=SubtractionSpec(k_b, float(rng.uniform(0.3, 1.0)) if k_b else 1.0),
        t_a=float(rng.uniform(0.2, 0.8)),
        forward=ChannelSpec(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.0, 0.05))),
        backward=ChannelSpec(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.0, 0.05))),
        beta=float(rng.uniform(0.8, 1.0)),
    )
