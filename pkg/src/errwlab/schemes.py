"""Reinforcement schemes and the theoretical phase classification.

A scheme assigns to every edge ``{x, x+1}`` a positive non-decreasing
weight sequence ``f(ell, x)`` indexed by the number of traversals
``ell``.  Factor-type schemes split as ``f(ell, x) = delta(ell) * f(0, x)``
with ``delta(0) = 1``; the down-only subfamily additionally pairs
``delta(2k) == delta(2k+1)``, so a weight can change only when the edge
is crossed from right to left.

The module also houses the analytic side of the lab: divergence verdicts
for the weight series, the closed-form phase oracle for the power-law
family, the series-based classification table, and the sticking-product
lower bound used by the localization argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

# Partial-sum heuristics for general schemes stop after this many terms.
SERIES_TERM_CUTOFF = 10_000_000
# Partial sums above this are treated as numerically divergent.
SERIES_DIVERGENCE_SUM = 1e12
# Number of vertices probed when a "for all x" condition cannot be
# decided analytically.
PROBE_VERTICES = 32
# Prefix length used to validate user-supplied delta/f0 rules.
VALIDATION_PREFIX = 64


class Verdict(str, Enum):
    DIVERGES = "Diverges"
    CONVERGES = "Converges"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class SeriesVerdict:
    """Outcome of a series test plus the partial sum that backs it."""

    kind: Verdict
    partial_sum: float
    terms_used: int

    @property
    def diverges(self) -> bool:
        return self.kind is Verdict.DIVERGES

    @property
    def converges(self) -> bool:
        return self.kind is Verdict.CONVERGES

    @property
    def undetermined(self) -> bool:
        return self.kind is Verdict.UNDETERMINED


class Phase(str, Enum):
    RECURRENT = "Recurrent"
    TRANSIENT = "Transient"
    LOCALIZES = "Localizes"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class PhaseLabel:
    """A phase verdict together with the rule that produced it."""

    phase: Phase
    provenance: str

    def __str__(self) -> str:  # pragma: no cover - convenience only
        return f"{self.phase.value} [{self.provenance}]"


class SchemeError(ValueError):
    """Raised when a scheme description violates its invariants."""


def _float_pow(base: float, exp: float) -> float:
    """base ** exp saturating to inf, like IEEE pow (python's raises)."""
    try:
        return base ** exp
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# Scheme kinds
# ---------------------------------------------------------------------------

# Codes used to hand parametric schemes to the njit kernels.
KERNEL_POWER = 0
KERNEL_PERTURBED = 1
KERNEL_QUADRATIC_ORIGIN = 2


class Scheme:
    """Base interface shared by every reinforcement scheme."""

    name: str = "scheme"
    is_ftr: bool = False
    is_dt: bool = False

    def weight(self, ell: int, x: int) -> float:
        raise NotImplementedError

    def initial_weight(self, x: int) -> float:
        return self.weight(0, x)

    def log_weight(self, ell: int, x: int) -> float:
        """log f(ell, x); overridden where an overflow-safe form exists."""
        return math.log(self.weight(ell, x))

    def kernel_params(self) -> Optional[tuple[int, float, float, float, int]]:
        """(kind, alpha, rho, eps, bump_k) for njit kernels, or None."""
        return None


class FtrScheme(Scheme):
    """Factor-type scheme: f(ell, x) = delta(ell) * f(0, x)."""

    is_ftr = True

    def delta(self, ell: int) -> float:
        raise NotImplementedError

    def weight(self, ell: int, x: int) -> float:
        return self.delta(ell) * self.initial_weight(x)

    # Series over the factor sequence; None means "cannot be decided".
    def delta_sum_verdict(self, power: float) -> Optional[Verdict]:
        """Verdict of sum_k delta(2k)**(-power) over k >= 0."""
        return None

    def delta_bounded(self) -> Optional[bool]:
        return None

    def initial_ratio_bounded(self) -> Optional[bool]:
        """Whether f(0,x)/f(0,x-1) is bounded over x >= 1."""
        return None


@dataclass(frozen=True)
class PowerLawDT(FtrScheme):
    """Down-only power-law reinforcement.

    f(0, x) = (x+1)**alpha and delta(2k) = delta(2k+1) = (k+1)**rho.
    """

    alpha: float
    rho: float
    name: str = field(default="power-dt")
    is_dt = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise SchemeError(f"alpha must be positive, got {self.alpha}")
        if self.rho < 0:
            raise SchemeError(f"rho must be non-negative, got {self.rho}")

    def delta(self, ell: int) -> float:
        if ell < 0:
            raise ValueError("traversal count must be non-negative")
        return _float_pow(float(ell // 2 + 1), self.rho)

    def initial_weight(self, x: int) -> float:
        return _float_pow(float(x + 1), self.alpha)

    def log_weight(self, ell: int, x: int) -> float:
        return self.rho * math.log(ell // 2 + 1) + self.alpha * math.log(x + 1)

    def delta_sum_verdict(self, power: float) -> Verdict:
        return Verdict.DIVERGES if power * self.rho <= 1.0 else Verdict.CONVERGES

    def delta_bounded(self) -> bool:
        return self.rho == 0.0

    def initial_ratio_bounded(self) -> bool:
        return True  # ((x+1)/x)**alpha <= 2**alpha

    def kernel_params(self):
        return (KERNEL_POWER, self.alpha, self.rho, 0.0, -1)


@dataclass(frozen=True)
class PerturbedDT(FtrScheme):
    """A power-law DT scheme with a single additive bump in the factor.

    delta'(ell) = delta(ell) + epsilon exactly at the even index
    ell = 2*floor(1/epsilon); everywhere else delta' = delta.  The bump
    breaks the down-only pairing at a single pair of indices, which is
    the point of the preset: it exercises every non-DT code path while
    staying arbitrarily close to its base scheme.
    """

    base: PowerLawDT
    epsilon: float
    name: str = field(default="perturbed-dt")
    is_dt = False

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise SchemeError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def bump_index(self) -> int:
        return int(1.0 / self.epsilon)

    def delta(self, ell: int) -> float:
        d = self.base.delta(ell)
        if ell % 2 == 0 and ell // 2 == self.bump_index:
            d += self.epsilon
        return d

    def initial_weight(self, x: int) -> float:
        return self.base.initial_weight(x)

    def log_weight(self, ell: int, x: int) -> float:
        ld = self.base.rho * math.log(ell // 2 + 1)
        if ell % 2 == 0 and ell // 2 == self.bump_index:
            ld += math.log1p(self.epsilon * math.exp(-ld))
        return ld + self.base.alpha * math.log(x + 1)

    def delta_sum_verdict(self, power: float) -> Verdict:
        # A single finite bump never changes a divergence verdict.
        return self.base.delta_sum_verdict(power)

    def delta_bounded(self) -> bool:
        return self.base.delta_bounded()

    def initial_ratio_bounded(self) -> bool:
        return True

    def kernel_params(self):
        return (KERNEL_PERTURBED, self.base.alpha, self.base.rho,
                self.epsilon, self.bump_index)


@dataclass(frozen=True)
class GeneralFTR(FtrScheme):
    """Factor-type scheme driven by user-supplied callables.

    ``delta_rule`` and ``f0_rule`` are validated on a sampled prefix at
    construction: delta(0) must be 1, the factor must be positive and
    non-decreasing, and the initial profile must be positive.  Analytic
    facts the rules cannot express (bounded factor, bounded initial
    ratio) may be declared explicitly; ``None`` means unknown and the
    classification rules needing them are skipped.
    """

    delta_rule: Callable[[int], float]
    f0_rule: Callable[[int], float]
    name: str = "general-ftr"
    dt: Optional[bool] = None
    bounded_delta: Optional[bool] = None
    bounded_initial_ratio: Optional[bool] = None

    def __post_init__(self):
        d0 = float(self.delta_rule(0))
        if d0 != 1.0:
            raise SchemeError(f"delta(0) must equal 1, got {d0}")
        prev = d0
        dt_ok = True
        for ell in range(1, VALIDATION_PREFIX):
            d = float(self.delta_rule(ell))
            if d <= 0.0:
                raise SchemeError(f"delta({ell}) = {d} is not positive")
            if d < prev:
                raise SchemeError(
                    f"delta must be non-decreasing; delta({ell}) = {d} < {prev}")
            if ell % 2 == 1 and d != prev:
                dt_ok = False
            prev = d
        for x in range(VALIDATION_PREFIX):
            f0 = float(self.f0_rule(x))
            if f0 <= 0.0:
                raise SchemeError(f"f(0, {x}) = {f0} is not positive")
        if self.dt is None:
            object.__setattr__(self, "dt", dt_ok)
        elif self.dt and not dt_ok:
            raise SchemeError("scheme declared down-only but the sampled "
                              "prefix contains an odd-index increase")

    @property
    def is_dt(self) -> bool:  # type: ignore[override]
        return bool(self.dt)

    def delta(self, ell: int) -> float:
        return float(self.delta_rule(ell))

    def initial_weight(self, x: int) -> float:
        return float(self.f0_rule(x))

    def delta_bounded(self) -> Optional[bool]:
        return self.bounded_delta

    def initial_ratio_bounded(self) -> Optional[bool]:
        return self.bounded_initial_ratio


@dataclass(frozen=True)
class Tabular(Scheme):
    """Fully general scheme given directly as a weight table f(ell, x)."""

    weight_rule: Callable[[int, int], float]
    name: str = "tabular"
    note: str = ""
    is_ftr = False
    is_dt = False

    def __post_init__(self):
        for x in range(8):
            prev = None
            for ell in range(VALIDATION_PREFIX):
                w = float(self.weight_rule(ell, x))
                if w <= 0.0:
                    raise SchemeError(f"f({ell}, {x}) = {w} is not positive")
                if prev is not None and w < prev:
                    raise SchemeError(
                        f"weights must be non-decreasing in ell; "
                        f"f({ell}, {x}) = {w} < {prev}")
                prev = w

    def weight(self, ell: int, x: int) -> float:
        return float(self.weight_rule(ell, x))


def _quadratic_origin_weight(ell: int, x: int) -> float:
    if x == 0:
        return float(ell + 1) ** 2
    return float(x) * float(x)


@dataclass(frozen=True)
class QuadraticOriginExample(Tabular):
    """The classical mixed-behaviour example.

    The origin edge reinforces quadratically, f(ell, 0) = (ell+1)**2,
    while every other edge keeps the fixed weight f(ell, x) = x**2.  The
    walk sticks to {0, 1} forever with probability
    prod_k 4k^2/(1+4k^2) = (pi/2)/sinh(pi/2), and otherwise escapes like
    a transient chain: neither verdict has probability one.
    """

    weight_rule: Callable[[int, int], float] = _quadratic_origin_weight
    name: str = "davis-example"
    note: str = "mixed behaviour possible"

    def log_weight(self, ell: int, x: int) -> float:
        if x == 0:
            return 2.0 * math.log(ell + 1)
        return 2.0 * math.log(x)

    def kernel_params(self):
        return (KERNEL_QUADRATIC_ORIGIN, 0.0, 0.0, 0.0, -1)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

PRESET_NAMES = ("power-dt", "perturbed-dt", "davis-example", "no-reinforcement")


def preset(name: str, *, alpha: Optional[float] = None,
           rho: Optional[float] = None,
           epsilon: Optional[float] = None) -> Scheme:
    """Build a named preset scheme.

    power-dt          down-only power law, defaults (alpha, rho) = (0.9, 0.4)
    perturbed-dt      power-dt plus a single epsilon bump in the factor
    davis-example     quadratic origin edge, constant x**2 elsewhere
    no-reinforcement  static weights (x+1)**alpha, alpha defaulting to 1.2
    """
    if name == "power-dt":
        return PowerLawDT(0.9 if alpha is None else alpha,
                          0.4 if rho is None else rho)
    if name == "perturbed-dt":
        base = PowerLawDT(0.9 if alpha is None else alpha,
                          0.4 if rho is None else rho, name="power-dt")
        return PerturbedDT(base, 0.1 if epsilon is None else epsilon)
    if name == "davis-example":
        return QuadraticOriginExample()
    if name == "no-reinforcement":
        return PowerLawDT(1.2 if alpha is None else alpha, 0.0,
                          name="no-reinforcement")
    raise SchemeError(f"unknown scheme preset {name!r}; "
                      f"known: {', '.join(PRESET_NAMES)}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def delta(scheme: Scheme, ell: int) -> float:
    """Factor value delta(ell) of a factor-type scheme."""
    if not isinstance(scheme, FtrScheme):
        raise TypeError(f"{scheme.name} is not factor-type; delta is undefined")
    return scheme.delta(ell)


def weight(scheme: Scheme, ell: int, x: int) -> float:
    """Edge weight f(ell, x) after ell traversals of edge {x, x+1}."""
    if ell < 0 or x < 0:
        raise ValueError("ell and x must be non-negative")
    return scheme.weight(ell, x)


def _partial_sum(term: Callable[[int], float], terms: int) -> float:
    return sum(term(i) for i in range(terms))


def _series_heuristic(term: Callable[[int], float],
                      cutoff: int = SERIES_TERM_CUTOFF) -> SeriesVerdict:
    """Divergence heuristic for a positive-term series.

    Sums the terms over dyadic blocks [2^j, 2^{j+1}).  For tails that
    decay like n**-p the block-sum ratio approaches 2**(1-p), so two
    consecutive ratios at or above 1.03 read as divergence and two at or
    below 0.93 as convergence; that resolves power tails outside roughly
    p in (0.96, 1.10).  A partial sum above SERIES_DIVERGENCE_SUM is
    divergence regardless.  Anything still borderline at the cutoff
    (e.g. a harmonic tail) is reported as undetermined, not guessed.
    """
    total = 0.0
    n = 0
    block_end = 16
    prev_block = None
    pending: Optional[Verdict] = None
    while n < cutoff:
        block_sum = 0.0
        end = min(block_end, cutoff)
        while n < end:
            block_sum += term(n)
            n += 1
        total += block_sum
        if not math.isfinite(total) or total > SERIES_DIVERGENCE_SUM:
            return SeriesVerdict(Verdict.DIVERGES, total, n)
        if prev_block is not None and prev_block > 0.0 and n >= 512:
            ratio = block_sum / prev_block
            verdict = None
            if ratio >= 1.03:
                verdict = Verdict.DIVERGES
            elif ratio <= 0.93:
                verdict = Verdict.CONVERGES
            if verdict is not None and verdict is pending:
                return SeriesVerdict(verdict, total, n)
            pending = verdict
        prev_block = block_sum
        block_end *= 2
    return SeriesVerdict(Verdict.UNDETERMINED, total, n)


def _p_series_verdict(exponent: float, term: Callable[[int], float],
                      report_terms: int = 4096) -> SeriesVerdict:
    kind = Verdict.DIVERGES if exponent <= 1.0 else Verdict.CONVERGES
    return SeriesVerdict(kind, _partial_sum(term, report_terms), report_terms)


def series_F(scheme: Scheme, ell: int, k: int) -> SeriesVerdict:
    """Verdict of F_ell^(k) = sum_y f(ell, y)**(-k)."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    term = lambda y: scheme.weight(ell, y) ** -k
    if isinstance(scheme, (PowerLawDT, PerturbedDT)):
        alpha = scheme.alpha if isinstance(scheme, PowerLawDT) else scheme.base.alpha
        return _p_series_verdict(k * alpha, term)
    return _series_heuristic(term)


def series_Phi(scheme: Scheme, x: int) -> SeriesVerdict:
    """Verdict of Phi_x = sum_ell 1/f(ell, x)."""
    if x < 0:
        raise ValueError("x must be non-negative")
    term = lambda ell: 1.0 / scheme.weight(ell, x)
    if isinstance(scheme, FtrScheme):
        # f(ell, x) = delta(ell) f(0, x): the verdict is that of sum 1/delta.
        verdict = scheme.delta_sum_verdict(1.0)
        if verdict is not None:
            # delta(2k) = delta-even sums match sum over all ell up to a
            # bounded factor, so the even-index verdict transfers.
            return SeriesVerdict(verdict, _partial_sum(term, 4096), 4096)
        return _series_heuristic(term)
    return _series_heuristic(term)


def theory_phase(alpha: float, rho: float) -> PhaseLabel:
    """Closed-form phase of the power-law DT family on its known box.

    Valid for alpha in (1/2, 1] and rho >= 0; outside the box use
    ``table1_phase`` on the scheme instead.
    """
    if not (0.5 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    if rho < 0.0:
        raise ValueError(f"rho must be non-negative, got {rho}")
    if rho <= 1.0 - alpha:
        return PhaseLabel(Phase.RECURRENT,
                          "weak reinforcement: rho <= 1 - alpha")
    if rho > 1.0:
        return PhaseLabel(Phase.LOCALIZES,
                          "summable factor: rho > 1, single-edge trap")
    if rho > 0.5:
        return PhaseLabel(Phase.TRANSIENT,
                          "square-summable factor: 1/2 < rho <= 1")
    boundary = (1.5 - alpha) / (2.5 - alpha)
    if rho > boundary:
        return PhaseLabel(Phase.TRANSIENT,
                          "urn drift bound: rho > (1.5-alpha)/(2.5-alpha)")
    return PhaseLabel(Phase.UNKNOWN,
                      "open region: 1-alpha < rho <= (1.5-alpha)/(2.5-alpha)")


def _phi_forall_verdict(scheme: Scheme) -> tuple[Optional[bool], Optional[int]]:
    """(all_diverge, witness_x): does Phi_x diverge for every x?

    For factor-type schemes the answer is uniform in x.  Otherwise the
    first PROBE_VERTICES vertices are probed; a converging probe yields a
    witness, and an undetermined probe yields (None, None).
    """
    if isinstance(scheme, FtrScheme):
        v = series_Phi(scheme, 0)
        if v.undetermined:
            return None, None
        return v.diverges, (None if v.diverges else 0)
    for x in range(PROBE_VERTICES):
        v = series_Phi(scheme, x)
        if v.undetermined:
            return None, None
        if v.converges:
            return False, x
    return True, None


def _delta_uptick(scheme: FtrScheme, probe: int = 4096) -> bool:
    """Sampled check for an odd-index factor increase delta(2k) < delta(2k+1)."""
    return any(scheme.delta(2 * k) < scheme.delta(2 * k + 1)
               for k in range(probe))


def table1_phase(scheme: Scheme) -> PhaseLabel:
    """Series-based phase classification valid beyond the power-law box.

    Applies, in priority order, the known classification rules driven by
    the divergence pattern of F_0^(1), F_0^(2), Phi_x and the factor
    series.  Returns Unknown when no rule fires or when a needed verdict
    is numerically undetermined.
    """
    phi_all, _phi_witness = _phi_forall_verdict(scheme)
    f1 = series_F(scheme, 0, 1)
    f2 = series_F(scheme, 0, 2)
    if phi_all is None or f1.undetermined or f2.undetermined:
        return PhaseLabel(Phase.UNKNOWN, "undetermined series")

    if phi_all and f1.diverges and f2.diverges:
        return PhaseLabel(Phase.RECURRENT,
                          "series table: Phi, F1, F2 all divergent")
    if phi_all and f1.converges:
        return PhaseLabel(Phase.TRANSIENT,
                          "series table: finite initial resistance (F1)")
    if not phi_all and f2.diverges:
        return PhaseLabel(Phase.LOCALIZES,
                          "series table: some Phi_x finite with F2 divergent")

    if isinstance(scheme, FtrScheme):
        bounded = scheme.delta_bounded()
        if bounded and f1.diverges:
            return PhaseLabel(Phase.RECURRENT,
                              "bounded factor with divergent F1")
        if phi_all and f1.diverges and _delta_uptick(scheme):
            return PhaseLabel(Phase.RECURRENT,
                              "left-to-right factor increase with "
                              "divergent Phi and F1")
        dsum1 = scheme.delta_sum_verdict(1.0)
        dsum2 = scheme.delta_sum_verdict(2.0)
        if dsum1 is None or dsum2 is None:
            d1 = _series_heuristic(lambda k: 1.0 / scheme.delta(2 * k))
            d2 = _series_heuristic(lambda k: scheme.delta(2 * k) ** -2.0)
            if d1.undetermined or d2.undetermined:
                return PhaseLabel(Phase.UNKNOWN, "undetermined series")
            dsum1, dsum2 = d1.kind, d2.kind
        if (scheme.is_dt and dsum2 is Verdict.CONVERGES
                and dsum1 is Verdict.DIVERGES
                and f2.converges and f1.diverges):
            return PhaseLabel(Phase.TRANSIENT,
                              "square-summable factor: height martingale "
                              "bounded in L2")
        ratio_bounded = scheme.initial_ratio_bounded()
        if dsum1 is Verdict.CONVERGES and ratio_bounded:
            return PhaseLabel(Phase.LOCALIZES,
                              "summable factor with bounded initial ratio: "
                              "sticking products diverge")

    provenance = "no classification rule matched"
    note = getattr(scheme, "note", "")
    if note:
        provenance += f"; {note}"
    return PhaseLabel(Phase.UNKNOWN, provenance)


def stick_probability_lower_bound(scheme: Scheme, x: int, K: int) -> float:
    """Truncated lower bound for never jumping from x to x+1.

    The k-th visit to x sees the edge below at traversal count 2k-1 and
    the edge above still fresh, so the probability of stepping down every
    time is at least prod_{k=1..K} (1 + f(0,x)/f(2k-1, x-1))**-1.  The
    product is accumulated in log space.
    """
    if x < 1:
        raise ValueError("x must be at least 1")
    if K < 0:
        raise ValueError("K must be non-negative")
    up = scheme.weight(0, x)
    log_sum = 0.0
    for k in range(1, K + 1):
        log_sum += math.log1p(up / scheme.weight(2 * k - 1, x - 1))
    return math.exp(-log_sum)
