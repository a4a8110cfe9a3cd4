"""The reinforced-walk engine on the non-negative integers.

The walk starts at 0, reflects at the origin, and steps right from x > 0
with probability w(x) / (w(x-1) + w(x)), where w(y) is the current
weight of edge {y, y+1} given its traversal count.  Two interchangeable
engines implement the same step law: a njit kernel for long horizons and
a python loop for arbitrary schemes and for auditing the kernel.  For
kernel-supported schemes the two produce bit-identical trajectories from
the same seed, which the test suite asserts.

``enumerate_paths`` is the brute-force oracle: it walks the full binary
decision tree to a small depth and returns every path with its exact
probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .rng import Xoshiro256StarStar
from .schemes import Scheme

ENUMERATION_DEPTH_LIMIT = 22
DRIFT_RECOMPUTE_EVERY = 2 ** 20


class Direction(Enum):
    LEFT = -1
    RIGHT = 1


@dataclass
class WalkState:
    """Mutable state of one walk: position plus per-edge bookkeeping."""

    position: int = 0
    phi: list[int] = field(default_factory=list)
    step_count: int = 0
    tau: Optional[int] = None
    max_position: int = 0

    def phi_at(self, x: int) -> int:
        return self.phi[x] if 0 <= x < len(self.phi) else 0


@dataclass(frozen=True)
class StopRules:
    """Early-stop conditions checked after every step, in this order."""

    escape_level: Optional[int] = None
    visits_vertex: Optional[int] = None
    visits_count: Optional[int] = None
    stop_on_return: bool = False

    def __post_init__(self):
        if (self.visits_vertex is None) != (self.visits_count is None):
            raise ValueError("visits_vertex and visits_count go together")
        if self.visits_count is not None and self.visits_count < 1:
            raise ValueError("visits_count must be at least 1")


@dataclass
class Trajectory:
    """Recorded positions (possibly strided) plus the terminal state."""

    positions: Optional[np.ndarray]
    stride: int
    state: WalkState


@dataclass
class DiagnosticsSeries:
    """Sampled series of the step-level functionals (stride >= 1)."""

    n: np.ndarray
    M: np.ndarray
    Theta: np.ndarray
    S2: np.ndarray
    stride: int


@dataclass
class RunFeatures:
    """Everything a single run reports besides the trajectory itself."""

    steps: int
    stop_reason: str
    final_position: int
    max_position: int
    tau: Optional[int]
    returns_to_0: int
    last_return_step: int
    visits_to_watched: int
    M: float
    Theta: float
    S2: float
    S2_at_tail_start: float
    S2_tail_fraction: float
    drift_max: float
    window_ranges: dict[int, tuple[int, int]]
    checkpoint_M: np.ndarray
    checkpoint_Theta: np.ndarray
    phi: np.ndarray
    N_pre_tau: np.ndarray
    N_all: np.ndarray
    series: Optional[DiagnosticsSeries] = None


_STOP_NAMES = {
    _kernels.STOP_HORIZON: "horizon",
    _kernels.STOP_ESCAPE: "escape",
    _kernels.STOP_VISITS: "visits",
    _kernels.STOP_RETURN: "return",
}


# ---------------------------------------------------------------------------
# Single-step law
# ---------------------------------------------------------------------------

def _exp_saturating(v: float) -> float:
    """exp saturating to inf, matching IEEE semantics of the kernels."""
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _p_right(scheme: Scheme, phi_left: int, phi_right: int, x: int) -> float:
    """P(step right) at x > 0 given the two adjacent traversal counts."""
    wl = scheme.weight(phi_left, x - 1)
    wr = scheme.weight(phi_right, x)
    r = wl / wr
    if not math.isfinite(r):
        r = _exp_saturating(scheme.log_weight(phi_left, x - 1)
                            - scheme.log_weight(phi_right, x))
    return 1.0 / (1.0 + r)


def transition_probability(scheme: Scheme, state: WalkState,
                           direction: Direction) -> float:
    """Exact one-step transition probability from the current state."""
    if state.position == 0:
        p_right = 1.0  # reflection at the origin
    else:
        p_right = _p_right(scheme, state.phi_at(state.position - 1),
                           state.phi_at(state.position), state.position)
    return p_right if direction is Direction.RIGHT else 1.0 - p_right


def step(scheme: Scheme, state: WalkState,
         rng: Xoshiro256StarStar) -> WalkState:
    """Advance the walk by one step, updating the state in place.

    The reflection step at the origin is deterministic and consumes no
    randomness; every other step consumes exactly one uniform draw.
    """
    x = state.position
    if x == 0:
        right = True
    else:
        p = _p_right(scheme, state.phi_at(x - 1), state.phi_at(x), x)
        right = rng.uniform() < p
    e = x if right else x - 1
    while len(state.phi) <= e:
        state.phi.append(0)
    state.phi[e] += 1
    if state.phi[e] < 0:
        raise OverflowError(f"traversal counter overflow on edge {e}")
    state.position = x + 1 if right else x - 1
    state.step_count += 1
    if state.position > state.max_position:
        state.max_position = state.position
    if state.position == 0 and state.tau is None:
        state.tau = state.step_count
    return state


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------

def run(scheme: Scheme, horizon: int, stop_rules: Optional[StopRules] = None,
        seed: int = 0, *, run_index: int = 0, pos_stride: int = 0,
        series_stride: int = 0, windows: Sequence[int] = (),
        checkpoints: Sequence[int] = (), s2_tail_start: int = 0,
        drift_every: int = DRIFT_RECOMPUTE_EVERY,
        force_python: bool = False) -> tuple[Trajectory, RunFeatures]:
    """Run one walk for up to ``horizon`` steps.

    The per-run stream is seeded from ``(seed, run_index)``.  Most
    recording is optional: ``pos_stride``/``series_stride`` of 0 disable
    position and diagnostics-series sampling, ``windows`` asks for exact
    position ranges over trailing windows of the given sizes, and
    ``checkpoints`` records M and Theta at specific step numbers.
    Kernel-supported schemes run through the njit engine unless
    ``force_python`` is set; both engines produce identical output.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    rules = stop_rules or StopRules()
    cks = np.asarray(sorted(checkpoints), dtype=np.int64)
    wins = np.asarray(list(windows), dtype=np.int64)
    if horizon == 0:
        state = WalkState()
        positions = np.zeros(1, np.int64) if pos_stride > 0 else None
        features = RunFeatures(
            steps=0, stop_reason="horizon", final_position=0, max_position=0,
            tau=None, returns_to_0=0, last_return_step=-1,
            visits_to_watched=0, M=0.0, Theta=0.0, S2=0.0,
            S2_at_tail_start=0.0, S2_tail_fraction=0.0, drift_max=0.0,
            window_ranges={int(w): (0, 0) for w in wins},
            checkpoint_M=np.zeros(len(cks)), checkpoint_Theta=np.zeros(len(cks)),
            phi=np.zeros(0, np.int64), N_pre_tau=np.zeros(1, np.int64),
            N_all=np.zeros(1, np.int64), series=None)
        return Trajectory(positions, max(pos_stride, 0), state), features

    params = scheme.kernel_params()
    if params is not None and not force_python:
        return _run_kernel(scheme, params, horizon, rules, seed, run_index,
                           pos_stride, series_stride, wins, cks,
                           s2_tail_start, drift_every)
    return _run_python(scheme, horizon, rules, seed, run_index, pos_stride,
                       series_stride, wins, cks, s2_tail_start, drift_every)


def _pack_rules(rules: StopRules):
    esc = -1 if rules.escape_level is None else int(rules.escape_level)
    vv = -1 if rules.visits_vertex is None else int(rules.visits_vertex)
    vc = 0 if rules.visits_count is None else int(rules.visits_count)
    return esc, vv, vc, bool(rules.stop_on_return)


def _run_kernel(scheme, params, horizon, rules, seed, run_index, pos_stride,
                series_stride, wins, cks, s2_tail_start, drift_every):
    kind, alpha, rho, eps, bump_k = params
    esc, vv, vc, sor = _pack_rules(rules)
    s0, s1, s2, s3 = (np.uint64(v) for v in
                      Xoshiro256StarStar.for_run(seed, run_index).state())
    out = _kernels.walk_kernel(
        kind, alpha, rho, eps, bump_k, horizon, esc, vv, vc, sor,
        wins, cks, s2_tail_start, series_stride, pos_stride, drift_every,
        s0, s1, s2, s3)
    return _from_kernel(out, wins, cks, pos_stride, series_stride)


def _from_kernel(out, wins, cks, pos_stride, series_stride):
    (steps_done, stop_reason, pos, maxpos, tau, returns, last_return,
     visits, m_final, theta_final, s2sum, s2_at_tail, s2_tail_fraction,
     drift_max, phi, npre, nall, win_min, win_max, ck_m, ck_theta,
     ser_n, ser_m, ser_t, ser_s2, pos_buf) = out
    state = WalkState(position=int(pos), phi=[int(v) for v in phi],
                      step_count=int(steps_done),
                      tau=None if tau < 0 else int(tau),
                      max_position=int(maxpos))
    series = None
    if series_stride > 0:
        series = DiagnosticsSeries(ser_n, ser_m, ser_t, ser_s2, series_stride)
    features = RunFeatures(
        steps=int(steps_done), stop_reason=_STOP_NAMES[int(stop_reason)],
        final_position=int(pos), max_position=int(maxpos),
        tau=None if tau < 0 else int(tau), returns_to_0=int(returns),
        last_return_step=int(last_return), visits_to_watched=int(visits),
        M=float(m_final), Theta=float(theta_final), S2=float(s2sum),
        S2_at_tail_start=float(s2_at_tail),
        S2_tail_fraction=float(s2_tail_fraction), drift_max=float(drift_max),
        window_ranges={int(w): (int(win_min[i]), int(win_max[i]))
                       for i, w in enumerate(wins)},
        checkpoint_M=ck_m, checkpoint_Theta=ck_theta, phi=phi,
        N_pre_tau=npre, N_all=nall, series=series)
    positions = pos_buf if pos_stride > 0 else None
    return Trajectory(positions, max(pos_stride, 0), state), features


def _run_python(scheme, horizon, rules, seed, run_index, pos_stride,
                series_stride, wins, cks, s2_tail_start, drift_every):
    """Reference engine; keep the loop in lockstep with the njit kernel."""
    rng = Xoshiro256StarStar.for_run(seed, run_index)
    esc, vv, vc, sor = _pack_rules(rules)
    weight = scheme.weight
    log_weight = scheme.log_weight

    cap = 1024
    phi = [0] * cap
    w = [0.0] * cap
    npre = [0] * cap
    nall = [0] * cap
    w[0] = weight(0, 0)
    hi = 0

    pos = 0
    maxpos = 0
    tau = -1
    returns = 0
    last_return = -1
    visits = 0
    stop_reason = _kernels.STOP_HORIZON
    steps_done = horizon

    m = mc = s2sum = s2c = corr = corrc = 0.0
    drift_max = 0.0

    nwin = len(wins)
    win_min = [1 << 62] * nwin
    win_max = [-1] * nwin

    nck = len(cks)
    ck_m = np.zeros(nck)
    ck_theta = np.zeros(nck)
    ck_i = 0

    ser_n: list[int] = []
    ser_m: list[float] = []
    ser_t: list[float] = []
    ser_s2: list[float] = []

    pos_samples: list[int] = [0] if pos_stride > 0 else []
    s2_at_tail = 0.0

    for n in range(horizon):
        x = pos
        if x == 0:
            right = True
        else:
            r = w[x - 1] / w[x]
            if not math.isfinite(r):
                r = _exp_saturating(log_weight(phi[x - 1], x - 1)
                                    - log_weight(phi[x], x))
            p_right = 1.0 / (1.0 + r)
            right = rng.uniform() < p_right

        pre_tau = tau < 0
        if right:
            e = x
            phi[e] += 1
            w_old = w[e]
            w_new = weight(phi[e], e)
            w[e] = w_new
            dm = 1.0 / w_new
            dcorr = 1.0 / w_old - 1.0 / w_new
            pos = x + 1
        else:
            e = x - 1
            phi[e] += 1
            dm = -1.0 / w[e]
            w[e] = weight(phi[e], e)
            dcorr = 0.0
            pos = x - 1

        if pre_tau:
            y = dm - mc
            t_ = m + y
            mc = (t_ - m) - y
            m = t_
            d2 = dm * dm
            y = d2 - s2c
            t_ = s2sum + y
            s2c = (t_ - s2sum) - y
            s2sum = t_
            if dcorr != 0.0:
                y = dcorr - corrc
                t_ = corr + y
                corrc = (t_ - corr) - y
                corr = t_
            if not right:
                npre[x] += 1
        if not right:
            nall[x] += 1

        if pos > maxpos:
            maxpos = pos
            if pos + 1 >= cap:
                newcap = cap
                while pos + 1 >= newcap:
                    newcap *= 2
                phi.extend([0] * (newcap - cap))
                w.extend([0.0] * (newcap - cap))
                npre.extend([0] * (newcap - cap))
                nall.extend([0] * (newcap - cap))
                cap = newcap
            while hi < pos:
                hi += 1
                w[hi] = weight(0, hi)

        stepno = n + 1
        if pos == 0:
            returns += 1
            last_return = stepno
            if tau < 0:
                tau = stepno
                m = 0.0
                mc = 0.0

        if tau < 0 and drift_every > 0 and stepno % drift_every == 0:
            direct = 0.0
            for yv in range(pos):
                direct += 1.0 / w[yv]
            denom = max(abs(direct), 1.0)
            drift_max = max(drift_max, abs(m - direct) / denom)
            m = direct
            mc = 0.0

        for i in range(nwin):
            if stepno > horizon - wins[i]:
                win_min[i] = min(win_min[i], pos)
                win_max[i] = max(win_max[i], pos)

        if ck_i < nck and stepno == cks[ck_i]:
            mm = m if tau < 0 else 0.0
            ck_m[ck_i] = mm
            ck_theta[ck_i] = mm + corr
            ck_i += 1

        if s2_tail_start > 0 and stepno == s2_tail_start:
            s2_at_tail = s2sum

        if series_stride > 0 and stepno % series_stride == 0:
            mm = m if tau < 0 else 0.0
            ser_n.append(stepno)
            ser_m.append(mm)
            ser_t.append(mm + corr)
            ser_s2.append(s2sum)

        if pos_stride > 0 and stepno % pos_stride == 0:
            pos_samples.append(pos)

        if esc >= 0 and pos >= esc:
            stop_reason = _kernels.STOP_ESCAPE
            steps_done = stepno
            break
        if vv >= 0 and pos == vv:
            visits += 1
            if visits >= vc:
                stop_reason = _kernels.STOP_VISITS
                steps_done = stepno
                break
        if sor and tau == stepno:
            stop_reason = _kernels.STOP_RETURN
            steps_done = stepno
            break

    for i in range(nwin):
        if win_max[i] < 0:
            win_min[i] = pos
            win_max[i] = pos

    m_final = m if tau < 0 else 0.0
    theta_final = m_final + corr
    s2_tail_fraction = 0.0
    if s2_tail_start > 0 and steps_done >= s2_tail_start and s2sum > 0.0:
        s2_tail_fraction = (s2sum - s2_at_tail) / s2sum

    out = (steps_done, stop_reason, pos, maxpos, tau, returns, last_return,
           visits, m_final, theta_final, s2sum, s2_at_tail, s2_tail_fraction,
           drift_max, np.asarray(phi[:maxpos], np.int64),
           np.asarray(npre[:maxpos + 1], np.int64),
           np.asarray(nall[:maxpos + 1], np.int64),
           np.asarray(win_min, np.int64), np.asarray(win_max, np.int64),
           ck_m, ck_theta, np.asarray(ser_n, np.int64), np.asarray(ser_m),
           np.asarray(ser_t), np.asarray(ser_s2),
           np.asarray(pos_samples, np.int64))
    return _from_kernel(out, wins, cks, pos_stride, series_stride)


# ---------------------------------------------------------------------------
# Exact enumeration
# ---------------------------------------------------------------------------

def enumerate_paths(scheme: Scheme, depth: int) -> list[tuple[tuple[int, ...], float]]:
    """Every depth-step path with its exact probability.

    Walks the full decision tree, multiplying one-step probabilities
    along each branch; results are sorted by path.  Probabilities sum to
    one up to roundoff.  Depth is capped because the tree is binary.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth > ENUMERATION_DEPTH_LIMIT:
        raise ValueError(f"depth {depth} exceeds the enumeration limit "
                         f"{ENUMERATION_DEPTH_LIMIT}")
    results: list[tuple[tuple[int, ...], float]] = []
    if depth == 0:
        return [((0,), 1.0)]
    phi = [0] * (depth + 1)
    path = [0]

    def descend(pos: int, prob: float, remaining: int):
        if remaining == 0:
            results.append((tuple(path), prob))
            return
        if pos == 0:
            branches = ((True, 1.0),)
        else:
            p = _p_right(scheme, phi[pos - 1], phi[pos], pos)
            branches = ((False, 1.0 - p), (True, p))
        for right, p_branch in branches:
            e = pos if right else pos - 1
            nxt = pos + 1 if right else pos - 1
            phi[e] += 1
            path.append(nxt)
            descend(nxt, prob * p_branch, remaining - 1)
            path.pop()
            phi[e] -= 1

    descend(0, 1.0, depth)
    results.sort(key=lambda item: item[0])
    return results


def sample_path_codes(scheme: Scheme, depth: int, n_samples: int,
                      master_seed: int, base_index: int = 0) -> np.ndarray:
    """Monte Carlo path codes from the step law (kernel-backed)."""
    params = scheme.kernel_params()
    if params is None:
        raise ValueError(f"{scheme.name} is not kernel-supported")
    kind, alpha, rho, eps, bump_k = params
    return _kernels.sample_walk_paths(kind, alpha, rho, eps, bump_k, depth,
                                      n_samples, master_seed, base_index)


def path_code(path: Sequence[int]) -> int:
    """Bit-code of a path as produced by the sampling kernels."""
    code = 0
    for j in range(2, len(path)):
        if path[j] > path[j - 1]:
            code |= 1 << (j - 2)
    return code
