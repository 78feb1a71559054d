"""Jump-time sampling and per-trajectory random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .decomposition import ExplicitDecomposition

KET, BRA = 0, 1
SIDE_NAMES = ("ket", "bra")

# stream-id domains, so different estimators never share a stream for one seed
DOMAIN_STOCHASTIC = 0
DOMAIN_PURITY = 1
DOMAIN_DYSON = 2


def trajectory_rng(seed: int, stream: int, domain: int = DOMAIN_STOCHASTIC) -> np.random.Generator:
    """Counter-based generator for one trajectory.

    The Philox key is ``(seed, domain:stream)``: streams are independent of
    each other and of how trajectories are scheduled across workers.
    """
    if not 0 <= seed < 2**64:
        raise ValueError("seed must lie in [0, 2^64)")
    if not 0 <= stream < 2**56 or not 0 <= domain < 2**8:
        raise ValueError("stream index out of range")
    return np.random.Generator(np.random.Philox(key=(seed << 64) | (domain << 56) | stream))


class Jump(NamedTuple):
    time: float
    term: int
    side: int  # KET or BRA


@dataclass(frozen=True)
class Trajectory:
    jumps: tuple[Jump, ...]
    horizon: float

    def __post_init__(self):
        times = [j.time for j in self.jumps]
        if any(not 0 < t <= self.horizon for t in times):
            raise ValueError("jump times must lie in (0, horizon]")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("jump times must be ordered")

    def __len__(self):
        return len(self.jumps)

    def phase(self, decomp: ExplicitDecomposition) -> complex:
        out = 1.0 + 0.0j
        for j in self.jumps:
            out *= decomp.jump_phase(j.term, j.side)
        return out


def _pick(decomp: ExplicitDecomposition, rng) -> tuple[int, int]:
    j = int(np.searchsorted(decomp.cumulative, rng.random(), side="right"))
    j = min(j, len(decomp.terms) - 1)
    side = KET if rng.random() < 0.5 else BRA
    return j, side


def sample_trajectory(
    decomp: ExplicitDecomposition, T: float, rng, max_jumps: int | None = None
) -> Trajectory:
    """Sample the jump process on ``[0, T]``.

    Waiting times are ``-ln(u) / rate`` with ``u = rng.random()``. With
    ``max_jumps`` set, jumps past the cap are drawn but discarded, so the
    trajectory evolves freely to ``T`` afterwards (a biased truncation).
    ``rng`` only needs a ``random()`` method returning floats in ``[0, 1)``.
    """
    if T < 0:
        raise ValueError("horizon must be non-negative")
    if max_jumps is not None and max_jumps < 0:
        raise ValueError("max_jumps must be non-negative")
    rate = decomp.rate
    if rate == 0 or T == 0:
        return Trajectory((), T)
    jumps = []
    t = 0.0
    while True:
        u = rng.random()
        # u == 0 happens with probability 2^-53; treat it as an infinite wait
        t += -math.log(u) / rate if u > 0.0 else math.inf
        if t >= T:
            break
        j, side = _pick(decomp, rng)
        if max_jumps is None or len(jumps) < max_jumps:
            jumps.append(Jump(t, j, side))
    return Trajectory(tuple(jumps), T)


def dyson_order_weights(x: float, k: int) -> np.ndarray:
    """Unnormalised ``x^n / n!`` for ``n = 0..k``."""
    w = np.empty(k + 1)
    w[0] = 1.0
    for n in range(1, k + 1):
        w[n] = w[n - 1] * x / n
    return w


def sample_dyson(decomp: ExplicitDecomposition, t: float, k: int, rng) -> Trajectory:
    """Order-``k`` truncated expansion: ``n <= k`` jumps with weight ``(rate t)^n / n!``,
    placed at sorted uniform times in ``(0, t)``."""
    if k < 0:
        raise ValueError("dyson order must be non-negative")
    if decomp.rate == 0 or t == 0:
        return Trajectory((), t)
    w = np.cumsum(dyson_order_weights(decomp.rate * t, k))
    n = int(np.searchsorted(w / w[-1], rng.random(), side="right"))
    n = min(n, k)
    times = sorted(t * (1.0 - rng.random()) for _ in range(n))
    jumps = []
    for tj in times:
        j, side = _pick(decomp, rng)
        jumps.append(Jump(tj, j, side))
    return Trajectory(tuple(jumps), t)
