"""Exact sampling of the stationary law via backward regeneration.

Each space-time site z = (i, t) carries an independent pair (J, xi):

  * with probability lam the site regenerates (J = 0) and its value is the
    fresh Bernoulli(beta) bit xi;
  * otherwise J picks one of the n sites uniformly (1-based label k, i.e.
    site k-1), and the value copies the chosen site's value at time t-1 --
    directly if the edge theta[i, k-1] is present and the source is
    excitatory, flipped if the source is inhibitory, and 0 if the edge is
    absent.

Following J backward in time defines a walk that dies (regenerates) after a
geometric(lam) number of steps, so every site's value is determined by
finitely many draws.  Resolving the draws lazily, keyed by (seed, i, t),
yields a sample of the stationary chain restricted to any finite window,
with no burn-in error.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .model import Environment, ModelParams, Trajectory
from .rng import (MASK64, absorb, absorb_array, derive_key, uniform01,
                  uniform01_array, word, word_array)


class DepthExceededError(RuntimeError):
    """A backward walk failed to regenerate within the depth bound."""


@dataclass(frozen=True)
class SiteDraw:
    """Per-site randomness: neighbor label j (0 = regenerate) and value bit xi.

    P(j = 0) = lam, P(j = k) = (1 - lam)/n for 1 <= k <= n, and xi is an
    independent Bernoulli(beta) bit.
    """

    j: int
    xi: int


@dataclass(frozen=True)
class BackwardWalk:
    """Trace of one backward walk from `start` down to its regeneration site."""

    start: tuple[int, int]
    path: tuple[tuple[int, int], ...]
    regen_time: int
    regen_site: int
    regen_value: int


def default_max_depth(lam: float, tail: float = 1e-12) -> int:
    """Depth bound with per-walk failure probability (1-lam)^depth < tail."""
    if lam >= 1.0:
        return 1
    return ceil(log(tail) / log(1.0 - lam))


class SiteField:
    """Lazily addressable (J, xi) randomness over the space-time lattice.

    Draws at distinct sites are computationally independent; the draw at a
    site is a pure function of (seed, i, t) so that walks launched from
    different sites see one shared field.
    """

    __slots__ = ("key", "lam", "beta", "n")

    def __init__(self, seed: int, params: ModelParams):
        self.key = derive_key(seed, "site-field")
        self.lam = params.lam
        self.beta = params.beta
        self.n = params.n

    def draw(self, i: int, t: int) -> tuple[int, int]:
        """(j, xi) at site (i, t); j uses the 0-= regenerate convention."""
        k = absorb(absorb(self.key, i), t & MASK64)
        if uniform01(word(k, 0)) < self.lam:
            j = 0
        else:
            j = 1 + int(uniform01(word(k, 1)) * self.n)
            if j > self.n:  # guard the u -> 1 float edge
                j = self.n
        xi = 1 if uniform01(word(k, 2)) < self.beta else 0
        return j, xi

    def draw_j_batch(self, keys: np.ndarray, i: np.ndarray,
                     t: np.ndarray) -> np.ndarray:
        """Vectorized neighbor labels for per-trial keys (coalescence MC).

        ``keys`` replaces the single field key with one key per trial;
        otherwise this is bitwise-identical to the scalar `draw` j logic.
        """
        k = absorb_array(absorb_array(keys, i), t)
        u0 = uniform01_array(word_array(k, 0))
        u1 = uniform01_array(word_array(k, 1))
        j = 1 + (u1 * self.n).astype(np.int64)
        np.minimum(j, self.n, out=j)
        j[u0 < self.lam] = 0
        return j


def site_draw(seed: int, params: ModelParams, site: tuple[int, int]) -> SiteDraw:
    """Deterministic (J, xi) draw attached to one space-time site."""
    i, t = site
    if not 0 <= i < params.n:
        raise IndexError(f"site index {i} out of range for n={params.n}")
    j, xi = SiteField(seed, params).draw(i, t)
    return SiteDraw(j=j, xi=xi)


def backward_walk(seed: int, params: ModelParams, z: tuple[int, int],
                  max_depth: int | None = None) -> BackwardWalk:
    """Follow the neighbor labels backward from z until regeneration."""
    if max_depth is None:
        max_depth = default_max_depth(params.lam)
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    field = SiteField(seed, params)
    i, t = z
    path = [(i, t)]
    for _ in range(max_depth):
        j, xi = field.draw(i, t)
        if j == 0:
            return BackwardWalk(start=z, path=tuple(path), regen_time=t,
                                regen_site=i, regen_value=xi)
        i, t = j - 1, t - 1
        path.append((i, t))
    raise DepthExceededError(
        f"no regeneration within {max_depth} steps from {z}; "
        "increase max_depth or check lam"
    )


def perfect_sample(env: Environment, params: ModelParams, t_len: int,
                   seed: int, max_depth: int | None = None,
                   order: str = "row") -> Trajectory:
    """Exact stationary sample on the window sites x times {1 .. t_len}.

    Sites are resolved by memoized iterative descent into earlier times;
    `order` ("row" = site-major, "column" = time-major) fixes the resolution
    sweep and must not change the result (the field is shared).
    """
    if t_len < 1:
        raise ValueError(f"t_len must be >= 1, got {t_len}")
    if params.lam <= 0.0:
        raise ValueError("perfect sampling requires lam > 0")
    if max_depth is None:
        max_depth = default_max_depth(params.lam)

    field = SiteField(seed, params)
    theta = env.theta
    size_plus = env.partition.size_plus
    n = env.n
    values: dict[tuple[int, int], int] = {}
    draws: dict[tuple[int, int], tuple[int, int]] = {}

    def resolve(i0: int, t0: int) -> int:
        stack = [(i0, t0)]
        while stack:
            z = stack[-1]
            if z in values:
                stack.pop()
                continue
            d = draws.get(z)
            if d is None:
                d = field.draw(z[0], z[1])
                draws[z] = d
            j, xi = d
            if j == 0:
                values[z] = xi
                stack.pop()
                continue
            src = j - 1
            parent = (src, z[1] - 1)
            pv = values.get(parent)
            if pv is None:
                if len(stack) > max_depth:
                    raise DepthExceededError(
                        f"no regeneration within {max_depth} steps above "
                        f"site {stack[0]}"
                    )
                stack.append(parent)
                continue
            if theta[z[0], src]:
                values[z] = pv if src < size_plus else 1 - pv
            else:
                values[z] = 0
            stack.pop()
        return values[(i0, t0)]

    out = np.empty((n, t_len), dtype=np.uint8)
    if order == "row":
        for i in range(n):
            for t in range(1, t_len + 1):
                out[i, t - 1] = resolve(i, t)
    elif order == "column":
        for t in range(1, t_len + 1):
            for i in range(n):
                out[i, t - 1] = resolve(i, t)
    else:
        raise ValueError(f"unknown resolution order {order!r}")
    return Trajectory(out)
