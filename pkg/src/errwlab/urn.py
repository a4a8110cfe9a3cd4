"""Two-colour reinforced urns and their exponential-clock embedding.

The urn starts with one white and one black ball.  With z whites and y
blacks the next draw is white with probability z**rho / (z**rho +
gamma * y**rho); the drawn colour gains a ball.  ``B*_n`` is the black
count at the first moment the white count reaches n, the quantity whose
mean the transience argument bounds by gamma**(1/(1-rho)) * n +
C * n**((1+rho)/2).

The same law arises from racing exponential clocks: colour counts
advance when their accumulated clocks fire, the black side scaled by
1/gamma.  Both routes are implemented (plus batch kernels) and checked
against each other distributionally.

Per-vertex urns with gamma_x = ((x+1)/x)**alpha drive the power-law walk
exactly: a black draw at x moves the walk right, a white draw left, and
the draw probability reproduces the step law edge for edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .rng import Xoshiro256StarStar
from .schemes import PowerLawDT

DEFAULT_DRAW_CAP = 100_000_000
DEFAULT_CLOCK_CAP = 100_000_000

WHITE = "white"
BLACK = "black"


class CapExceeded(RuntimeError):
    """A draw or clock cap was hit; the sample is censored."""


@dataclass(frozen=True)
class UrnState:
    """Composition of a two-colour urn with power reinforcement."""

    white: int = 1
    black: int = 1
    gamma: float = 1.0
    rho: float = 0.0
    draws: int = 0

    def __post_init__(self):
        if self.white < 1 or self.black < 1:
            raise ValueError("both colours start with one ball and never shrink")
        if self.gamma < 1.0:
            raise ValueError("gamma must be at least 1")
        if self.rho < 0.0:
            raise ValueError("rho must be non-negative")

    def p_white(self) -> float:
        wpow = float(self.white) ** self.rho
        bpow = self.gamma * float(self.black) ** self.rho
        return wpow / (wpow + bpow)


@dataclass
class RubinClocks:
    """Accumulated firing times of the two colour clocks."""

    gamma: float
    rho: float
    white_time: float = 0.0
    black_time: float = 0.0
    white_count: int = 0
    black_count: int = 0

    def advance_white(self, rng: Xoshiro256StarStar) -> float:
        self.white_count += 1
        self.white_time += rng.exponential() / float(self.white_count) ** self.rho
        return self.white_time

    def advance_black(self, rng: Xoshiro256StarStar) -> float:
        self.black_count += 1
        self.black_time += (rng.exponential()
                            / (self.gamma * float(self.black_count) ** self.rho))
        return self.black_time


@dataclass(frozen=True)
class BStarStat:
    """Black count (and draw count) when the white count first hits n."""

    n: int
    b_star: int
    h: int
    censored: bool = False


def urn_draw(state: UrnState, rng: Xoshiro256StarStar) -> tuple[str, UrnState]:
    """Draw one ball; returns the colour and the reinforced urn."""
    if rng.uniform() < state.p_white():
        return WHITE, replace(state, white=state.white + 1,
                              draws=state.draws + 1)
    return BLACK, replace(state, black=state.black + 1,
                          draws=state.draws + 1)


def simulate_Bstar(gamma: float, rho: float, n: int, rng: Xoshiro256StarStar,
                   draw_cap: int = DEFAULT_DRAW_CAP) -> BStarStat:
    """B*_n by direct urn draws; censored when draw_cap is exhausted."""
    if n < 1:
        raise ValueError("n must be at least 1")
    state = UrnState(gamma=gamma, rho=rho)
    while state.white < n:
        if state.draws >= draw_cap:
            return BStarStat(n, state.black, state.draws, censored=True)
        _, state = urn_draw(state, rng)
    return BStarStat(n, state.black, state.draws)


def rubin_Bstar(gamma: float, rho: float, n: int, rng: Xoshiro256StarStar,
                clock_cap: int = DEFAULT_CLOCK_CAP) -> BStarStat:
    """B*_n from the clock race.

    The white count reaches n at the (n-1)-th white firing; the black
    count at that instant is one plus the number of black firings that
    happened earlier.  Identical in law to ``simulate_Bstar``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    clocks = RubinClocks(gamma=gamma, rho=rho)
    threshold = 0.0
    for _ in range(n - 1):
        threshold = clocks.advance_white(rng)
    fired = 0
    while True:
        if fired >= clock_cap:
            return BStarStat(n, fired + 1, (n - 1) + fired, censored=True)
        if clocks.advance_black(rng) >= threshold:
            break
        fired += 1
    return BStarStat(n, fired + 1, (n - 1) + fired)


def sample_bstar(gamma: float, rho: float, n: int, n_samples: int,
                 master_seed: int, *, method: str = "direct",
                 base_index: int = 0, cap: Optional[int] = None
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batch B*_n sampling via the njit kernels.

    Returns (b_star, h, censored) arrays ordered by sample index; sample
    i uses the stream of run ``base_index + i`` under ``master_seed``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if method == "direct":
        limit = DEFAULT_DRAW_CAP if cap is None else cap
        return _kernels.bstar_direct_batch(gamma, rho, n, n_samples,
                                           master_seed, base_index, limit)
    if method == "rubin":
        limit = DEFAULT_CLOCK_CAP if cap is None else cap
        return _kernels.bstar_rubin_batch(gamma, rho, n, n_samples,
                                          master_seed, base_index, limit)
    raise ValueError(f"unknown method {method!r}; use 'direct' or 'rubin'")


def lemma_bound(gamma: float, rho: float, n: int, C: float) -> float:
    """The mean bound gamma**(1/(1-rho)) * n + C * n**((1+rho)/2)."""
    if rho >= 1.0:
        raise ValueError("the bound needs rho < 1")
    return gamma ** (1.0 / (1.0 - rho)) * n + C * float(n) ** ((1.0 + rho) / 2.0)


# ---------------------------------------------------------------------------
# Urn-driven walk generation
# ---------------------------------------------------------------------------

def gamma_x(alpha: float, x: int) -> float:
    """Black-side bias ((x+1)/x)**alpha of the urn at vertex x >= 1."""
    if x < 1:
        raise ValueError("the urn bias is undefined at the origin")
    return (float(x + 1) / float(x)) ** alpha


@dataclass
class UrnWalk:
    """A walk driven by one urn per vertex instead of edge weights."""

    scheme: PowerLawDT
    position: int = 0
    urns: dict[int, UrnState] = None  # type: ignore[assignment]

    def __post_init__(self):
        if not isinstance(self.scheme, PowerLawDT):
            raise TypeError("urn-driven generation covers the power-law "
                            "down-only family")
        if self.urns is None:
            self.urns = {}

    def urn_at(self, x: int) -> UrnState:
        if x not in self.urns:
            self.urns[x] = UrnState(gamma=gamma_x(self.scheme.alpha, x),
                                    rho=self.scheme.rho)
        return self.urns[x]


def urn_driven_step(uwalk: UrnWalk, rng: Xoshiro256StarStar) -> int:
    """Advance the urn-driven walk one step; returns the new position.

    At the origin the walk reflects without consuming a draw; elsewhere a
    black draw from the local urn moves right, a white draw left.
    """
    x = uwalk.position
    if x == 0:
        uwalk.position = 1
        return 1
    colour, uwalk.urns[x] = urn_draw(uwalk.urn_at(x), rng)
    uwalk.position = x + 1 if colour == BLACK else x - 1
    return uwalk.position


def enumerate_urn_paths(scheme: PowerLawDT, depth: int
                        ) -> list[tuple[tuple[int, ...], float]]:
    """Exact path distribution of the urn-driven generator.

    Tracks per-vertex urn compositions along each branch of the decision
    tree; probabilities come from the urn draw law only, never from the
    edge-weight law, so agreement with ``walk.enumerate_paths`` is a real
    cross-check of the two representations.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth == 0:
        return [((0,), 1.0)]
    results: list[tuple[tuple[int, ...], float]] = []
    whites = [1] * (depth + 1)
    blacks = [1] * (depth + 1)
    path = [0]

    def p_black(x: int) -> float:
        g = gamma_x(scheme.alpha, x)
        wpow = float(whites[x]) ** scheme.rho
        bpow = g * float(blacks[x]) ** scheme.rho
        return bpow / (wpow + bpow)

    def descend(pos: int, prob: float, remaining: int):
        if remaining == 0:
            results.append((tuple(path), prob))
            return
        if pos == 0:
            path.append(1)
            descend(1, prob, remaining - 1)
            path.pop()
            return
        pb = p_black(pos)
        for right, p_branch in ((False, 1.0 - pb), (True, pb)):
            if right:
                blacks[pos] += 1
            else:
                whites[pos] += 1
            nxt = pos + 1 if right else pos - 1
            path.append(nxt)
            descend(nxt, prob * p_branch, remaining - 1)
            path.pop()
            if right:
                blacks[pos] -= 1
            else:
                whites[pos] -= 1

    descend(0, 1.0, depth)
    results.sort(key=lambda item: item[0])
    return results


def sample_rubin_path_codes(scheme: PowerLawDT, depth: int, n_samples: int,
                            master_seed: int, base_index: int = 0) -> np.ndarray:
    """Monte Carlo path codes from the clock-driven urn walk (kernel)."""
    if not isinstance(scheme, PowerLawDT):
        raise TypeError("clock-driven generation covers the power-law "
                        "down-only family")
    return _kernels.sample_rubin_paths(scheme.alpha, scheme.rho, depth,
                                       n_samples, master_seed, base_index)


# ---------------------------------------------------------------------------
# The induction recursion behind the mean bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecursionCertificate:
    """Extremal recursion values and the power-of-two envelope constant."""

    log_values: np.ndarray  # log a_x for x = 1..x_max
    cbar: float
    exponent: float         # the envelope is cbar * x**exponent
    ok: bool

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)


def recursion_sequence(alpha: float, rho: float, C: float, a1: float,
                       x_max: int) -> RecursionCertificate:
    """Drive a_{x+1} = gamma_x**(1/(1-rho)) a_x + C a_x**((1+rho)/2) to x_max.

    Equality is the extremal case of the recursion, so the generated
    sequence dominates every admissible one.  Evaluation is in log space
    to sidestep overflow; the certificate is the smallest power of two
    cbar with a_x <= cbar * x**(2/(1-rho)) for all x <= x_max.
    """
    if not (0.0 < rho <= 0.5):
        raise ValueError("rho must lie in (0, 1/2]")
    if not (0.5 < alpha <= 1.0):
        raise ValueError("alpha must lie in (1/2, 1]")
    if a1 < 1.0:
        raise ValueError("a1 must be at least 1")
    if x_max < 1:
        raise ValueError("x_max must be at least 1")
    q = 1.0 / (1.0 - rho)
    s = (1.0 + rho) / 2.0
    exponent = 2.0 / (1.0 - rho)
    la = math.log(a1)
    logs = np.empty(x_max, np.float64)
    logs[0] = la
    for x in range(1, x_max):
        lg = q * alpha * (math.log(x + 1) - math.log(x))  # log gamma_x**q
        # log(gamma**q * a + C * a**s) = la + log(gamma**q + C * a**(s-1))
        la = la + math.log(math.exp(lg) + C * math.exp((s - 1.0) * la))
        logs[x] = la
    if not np.all(np.isfinite(logs)):
        return RecursionCertificate(logs, math.inf, exponent, ok=False)
    excess = logs - exponent * np.log(np.arange(1, x_max + 1, dtype=np.float64))
    j = math.ceil(float(np.max(excess)) / math.log(2.0))
    return RecursionCertificate(logs, 2.0 ** j, exponent, ok=True)
