"""Martingale functionals of a running walk.

Tracked quantities, all frozen once the walk first returns to 0 (at the
stopping time tau):

* M_n: sum of reciprocal current weights over the edges strictly below
  the (tau-stopped) position.  Each step changes a single term, so the
  online update is O(1): +1/w_post(x) when stepping x -> x+1 and
  -1/w_pre(x) when stepping x+1 -> x.  Down-only schemes keep the weight
  unchanged on up-steps, where the two forms coincide.
* Theta_n: M_n plus the up-step corrections 1/w_pre - 1/w_post, which
  restores the martingale property for every factor-type scheme.
* S2: the accumulated squared increments of M.
* N[x]: down-crossings x -> x-1 (pre-tau and unconditional variants).

The ``direct_*`` functions recompute the same quantities from a recorded
trajectory by entirely different formulas; they are the oracles the
incremental path is audited against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .schemes import FtrScheme, Scheme


@dataclass
class DiagnosticsTrace:
    """Online accumulator for M, Theta and S2 along a single walk."""

    M: float = 0.0
    Theta_correction: float = 0.0
    S2: float = 0.0
    tau_hit: bool = False
    _m_carry: float = 0.0
    _s2_carry: float = 0.0
    _corr_carry: float = 0.0

    @property
    def Theta(self) -> float:
        return self.M + self.Theta_correction

    def update_M(self, scheme: Scheme, x: int, right: bool,
                 phi_after: int) -> float:
        """Apply one step's increment to M; returns the increment.

        ``x`` is the pre-step position and ``phi_after`` the traversal
        count of the crossed edge after the step.
        """
        if self.tau_hit:
            return 0.0
        if right:
            dm = 1.0 / scheme.weight(phi_after, x)
        else:
            dm = -1.0 / scheme.weight(phi_after - 1, x - 1)
        y = dm - self._m_carry
        t = self.M + y
        self._m_carry = (t - self.M) - y
        self.M = t
        return dm

    def update_Theta(self, scheme: Scheme, x: int, right: bool,
                     phi_after: int) -> float:
        """Accumulate the up-step correction term; returns it."""
        if self.tau_hit or not right:
            return 0.0
        dcorr = (1.0 / scheme.weight(phi_after - 1, x)
                 - 1.0 / scheme.weight(phi_after, x))
        if dcorr != 0.0:
            y = dcorr - self._corr_carry
            t = self.Theta_correction + y
            self._corr_carry = (t - self.Theta_correction) - y
            self.Theta_correction = t
        return dcorr

    def update_S2(self, dm: float) -> None:
        if self.tau_hit:
            return
        d2 = dm * dm
        y = d2 - self._s2_carry
        t = self.S2 + y
        self._s2_carry = (t - self.S2) - y
        self.S2 = t

    def observe_step(self, scheme: Scheme, x: int, right: bool,
                     phi_after: int, returned_to_0: bool) -> None:
        """Convenience wrapper applying all three updates for one step."""
        dm = self.update_M(scheme, x, right, phi_after)
        self.update_Theta(scheme, x, right, phi_after)
        self.update_S2(dm)
        if returned_to_0 and not self.tau_hit:
            self.tau_hit = True
            self.M = 0.0
            self._m_carry = 0.0


# ---------------------------------------------------------------------------
# Trajectory-level recounts (the independent oracles)
# ---------------------------------------------------------------------------

def _phi_counts(positions: Sequence[int], upto: int) -> np.ndarray:
    """Traversal counts per edge after the first ``upto`` steps."""
    phi = np.zeros(max(positions) + 1 if len(positions) else 1, np.int64)
    for i in range(1, upto + 1):
        phi[min(positions[i], positions[i - 1])] += 1
    return phi


def first_return(positions: Sequence[int]) -> Optional[int]:
    """Step index of the first return to 0, or None."""
    for i in range(1, len(positions)):
        if positions[i] == 0:
            return i
    return None


def truncate_at_tau(positions: Sequence[int]) -> Sequence[int]:
    tau = first_return(positions)
    return positions if tau is None else positions[:tau + 1]


def direct_M(scheme: Scheme, positions: Sequence[int], n: int) -> float:
    """M_n recomputed from scratch off a fully recorded trajectory."""
    tau = first_return(positions)
    stop = n if tau is None else min(n, tau)
    phi = _phi_counts(positions, n)  # weights at time n, position at n^tau
    top = positions[stop]
    return sum(1.0 / scheme.weight(int(phi[x]), x) for x in range(top))


def direct_Theta(scheme: Scheme, positions: Sequence[int], n: int) -> float:
    """Theta_n via the alternating-factor identity (factor-type only).

    Theta_n = sum_x f(0,x)^-1 * A(phi_{n^tau}(x)) with
    A(p) = sum_{l<p} (-1)^l / delta(l), summed over every touched edge.
    This is a closed form, not a replay of the incremental update.
    """
    if not isinstance(scheme, FtrScheme):
        raise TypeError("the alternating identity needs a factor-type scheme")
    tau = first_return(positions)
    stop = n if tau is None else min(n, tau)
    phi = _phi_counts(positions, stop)
    total = 0.0
    for x in range(len(phi)):
        p = int(phi[x])
        if p == 0:
            continue
        alt = 0.0
        for ell in range(p):
            term = 1.0 / scheme.delta(ell)
            alt += term if ell % 2 == 0 else -term
        total += alt / scheme.initial_weight(x)
    return total


def direct_S2(scheme: Scheme, positions: Sequence[int], n: int) -> float:
    """S2 after n steps recomputed per-edge from traversal counts.

    The j-th traversal of edge x contributes 1/f(j,x)^2 if it was an
    up-crossing (odd j) and 1/f(j-1,x)^2 if a down-crossing (even j);
    only pre-tau steps count.
    """
    tau = first_return(positions)
    stop = n if tau is None else min(n, tau)
    phi = _phi_counts(positions, stop)
    total = 0.0
    for x in range(len(phi)):
        for j in range(1, int(phi[x]) + 1):
            ell = j if j % 2 == 1 else j - 1
            total += scheme.weight(ell, x) ** -2.0
    return total


def down_crossings(positions: Sequence[int]) -> np.ndarray:
    """Down-crossing counts N[x] on a recorded trajectory.

    The caller chooses the convention by what it passes: a trajectory
    truncated at tau gives the pre-tau counts, a full one the
    unconditional counts.
    """
    top = max(positions) if len(positions) else 0
    counts = np.zeros(top + 1, np.int64)
    for i in range(1, len(positions)):
        if positions[i] < positions[i - 1]:
            counts[positions[i - 1]] += 1
    return counts


def proof_series(N: Sequence[int], alpha: float, rho: float) -> tuple[float, float]:
    """Partial sums of the two transience-proof series over explored x.

    Returns (sum (N_x+1)^-rho / (x+1)^alpha,
             sum (N_x+1)^(1-2 rho) / (x+1)^(2 alpha)).
    """
    first = 0.0
    second = 0.0
    for x, nx in enumerate(N):
        first += float(nx + 1) ** -rho / float(x + 1) ** alpha
        second += float(nx + 1) ** (1.0 - 2.0 * rho) / float(x + 1) ** (2.0 * alpha)
    return first, second
