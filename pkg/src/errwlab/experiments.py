"""Finite-horizon phase classification and parameter sweeps.

A run is summarised by a handful of features (final and maximal
position, last return to the origin, positional range over a trailing
window, tail share of the quadratic variation) and classified by a fixed
three-way rule:

* LocalizedLike  - the trailing window spans at most two vertices;
* TransientLike  - otherwise, if the walk did not return to 0 within the
  final ``escape_fraction`` of the horizon and ended at or above
  ``min_drift``;
* RecurrentLike  - everything else.

Ties are impossible by construction (the rules are checked in that
priority order).  Thresholds are calibration artifacts, not theory:
``calibrate_thresholds`` grid-searches them against the closed-form
phase oracle on pilot cells and reports per-cell agreement.  Finite
horizons cannot certify almost-sure behaviour, so sweep output always
carries the theory label next to the empirical fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .schemes import Phase, PhaseLabel, PowerLawDT, Scheme, table1_phase, theory_phase
from .walk import RunFeatures, StopRules, run


class RunClass(str, Enum):
    RECURRENT_LIKE = "RecurrentLike"
    TRANSIENT_LIKE = "TransientLike"
    LOCALIZED_LIKE = "LocalizedLike"


_PHASE_TO_CLASS = {
    Phase.RECURRENT: RunClass.RECURRENT_LIKE,
    Phase.TRANSIENT: RunClass.TRANSIENT_LIKE,
    Phase.LOCALIZES: RunClass.LOCALIZED_LIKE,
}


@dataclass(frozen=True)
class Thresholds:
    """Classifier knobs; all horizon-relative except the drift floor.

    window_fraction: trailing window = window_fraction * horizon steps.
    escape_fraction: TransientLike requires no return to 0 within the
        final escape_fraction * horizon steps.
    min_drift:       TransientLike additionally requires the final
        position to be at least this many vertices from the origin.
    """

    window_fraction: float = 0.05
    escape_fraction: float = 0.9999
    min_drift: int = 50

    def __post_init__(self):
        if not (0.0 < self.window_fraction <= 1.0):
            raise ValueError("window_fraction must lie in (0, 1]")
        if not (0.0 < self.escape_fraction <= 1.0):
            raise ValueError("escape_fraction must lie in (0, 1]")
        if self.min_drift < 0:
            raise ValueError("min_drift must be non-negative")

    def window(self, horizon: int) -> int:
        return max(1, int(round(self.window_fraction * horizon)))

    def return_cutoff(self, horizon: int) -> int:
        """Last step by which the final return may happen for TransientLike."""
        return horizon - int(round(self.escape_fraction * horizon))


# Shipped defaults: argmax of the calibration search on the pilot cells
# (0.9, 0.05) / (0.9, 0.6) / (0.9, 1.5), 100 runs each, horizon 10**6:
#   errwlab calibrate --best-effort --runs 100 --horizon 1000000 \
#       --seed 20260809
# Measured per-point agreement 0.67 / 0.66 / 0.95 (min 0.66): at this
# horizon the recurrent cell and the slow transient cells overlap in
# every recorded feature, so the 0.70 calibration gate is not met and
# these are best-effort values.  See README for the full discussion.
DEFAULT_THRESHOLDS = Thresholds(window_fraction=0.05,
                                escape_fraction=0.9999,
                                min_drift=50)

DEFAULT_WINDOW_FRACTIONS = (0.05, 0.1, 0.2)
DEFAULT_ESCAPE_FRACTIONS = (0.99999, 0.9999, 0.999, 0.997, 0.99, 0.97,
                            0.9, 0.75, 0.5)
DEFAULT_MIN_DRIFTS = (50, 100, 200, 300, 500, 1000, 2000, 3000)


@dataclass(frozen=True)
class RunSummary:
    """Per-run classification features, one JSON object per run in dumps."""

    seed: int
    run_index: int
    horizon: int
    steps: int
    stop_reason: str
    final_position: int
    max_position: int
    tau_hit: bool
    tau: Optional[int]
    returns_to_0: int
    last_return_step: int
    window_size: int
    last_window_range: tuple[int, int]
    M: float
    Theta: float
    S2: float
    S2_tail_fraction: float
    extra_window_ranges: dict[int, tuple[int, int]] = field(default_factory=dict)

    def window_range(self, window: int) -> tuple[int, int]:
        if window == self.window_size:
            return self.last_window_range
        if window in self.extra_window_ranges:
            return self.extra_window_ranges[window]
        raise KeyError(f"run was not summarised with window {window}")


def summarize(features: RunFeatures, *, seed: int, run_index: int,
              horizon: int, window: int) -> RunSummary:
    """Fold raw run features into a RunSummary keyed to one window size."""
    ranges = dict(features.window_ranges)
    if window not in ranges:
        raise KeyError(f"window {window} missing from run features")
    primary = ranges.pop(window)
    return RunSummary(
        seed=seed, run_index=run_index, horizon=horizon,
        steps=features.steps, stop_reason=features.stop_reason,
        final_position=features.final_position,
        max_position=features.max_position,
        tau_hit=features.tau is not None, tau=features.tau,
        returns_to_0=features.returns_to_0,
        last_return_step=features.last_return_step,
        window_size=window, last_window_range=primary,
        M=features.M, Theta=features.Theta, S2=features.S2,
        S2_tail_fraction=features.S2_tail_fraction,
        extra_window_ranges=ranges)


def classify_run(summary: RunSummary,
                 thresholds: Thresholds = DEFAULT_THRESHOLDS) -> RunClass:
    """Three-way finite-horizon classification of one run."""
    window = thresholds.window(summary.horizon)
    if summary.horizon < window:
        raise ValueError("horizon is shorter than the classifier window")
    lo, hi = summary.window_range(window)
    if hi - lo <= 1:  # at most two vertices, i.e. one edge
        return RunClass.LOCALIZED_LIKE
    cutoff = thresholds.return_cutoff(summary.horizon)
    no_recent_return = summary.last_return_step <= cutoff
    if no_recent_return and summary.final_position >= thresholds.min_drift:
        return RunClass.TRANSIENT_LIKE
    return RunClass.RECURRENT_LIKE


def simulate_batch(scheme: Scheme, horizon: int, runs: int, master_seed: int,
                   *, base_index: int = 0,
                   stop_rules: Optional[StopRules] = None,
                   window_fraction: float = DEFAULT_THRESHOLDS.window_fraction,
                   extra_window_fractions: Sequence[float] = (),
                   s2_tail_fraction: float = 0.1) -> list[RunSummary]:
    """Run ``runs`` independent walks and summarise each.

    Run i draws from the stream seeded by (master_seed, base_index + i);
    results are ordered by run index regardless of execution order.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    window = max(1, int(round(window_fraction * horizon)))
    windows = [window]
    for wf in extra_window_fractions:
        w = max(1, int(round(wf * horizon)))
        if w not in windows:
            windows.append(w)
    tail_start = max(1, int(round(s2_tail_fraction * horizon)))
    out = []
    for i in range(runs):
        _, feats = run(scheme, horizon, stop_rules, seed=master_seed,
                       run_index=base_index + i, windows=windows,
                       s2_tail_start=tail_start)
        out.append(summarize(feats, seed=master_seed,
                             run_index=base_index + i, horizon=horizon,
                             window=window))
    return out


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseCell:
    """Aggregate of one (alpha, rho) cell of a sweep."""

    alpha: float
    rho: float
    n_runs: int
    horizon: int
    frac_recurrent_like: float
    frac_transient_like: float
    frac_localized_like: float
    theory_label: str
    master_seed: int


def phase_for(alpha: float, rho: float) -> PhaseLabel:
    """Theory oracle with fallback: closed-form box, else series table."""
    if 0.5 < alpha <= 1.0 and rho >= 0.0:
        return theory_phase(alpha, rho)
    return table1_phase(PowerLawDT(alpha, rho))


def sweep(alphas: Sequence[float], rhos: Sequence[float], runs_per_cell: int,
          horizon: int, master_seed: int,
          thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[PhaseCell]:
    """Classify runs over the (alpha, rho) grid.

    Cells are processed in sorted order and the global run index is
    cell_index * runs_per_cell + run_index, so the output is a pure
    function of (grid, runs, horizon, master_seed, thresholds).
    """
    if runs_per_cell < 1:
        raise ValueError("runs_per_cell must be at least 1")
    cells = []
    grid = sorted((float(a), float(r)) for a in alphas for r in rhos)
    for ci, (alpha, rho) in enumerate(grid):
        scheme = PowerLawDT(alpha, rho)
        summaries = simulate_batch(
            scheme, horizon, runs_per_cell, master_seed,
            base_index=ci * runs_per_cell,
            window_fraction=thresholds.window_fraction)
        counts = {c: 0 for c in RunClass}
        for s in summaries:
            counts[classify_run(s, thresholds)] += 1
        label = phase_for(alpha, rho)
        cells.append(PhaseCell(
            alpha=alpha, rho=rho, n_runs=runs_per_cell, horizon=horizon,
            frac_recurrent_like=counts[RunClass.RECURRENT_LIKE] / runs_per_cell,
            frac_transient_like=counts[RunClass.TRANSIENT_LIKE] / runs_per_cell,
            frac_localized_like=counts[RunClass.LOCALIZED_LIKE] / runs_per_cell,
            theory_label=label.phase.value, master_seed=master_seed))
    return cells


# ---------------------------------------------------------------------------
# Threshold calibration
# ---------------------------------------------------------------------------

class CalibrationError(RuntimeError):
    """Best thresholds fall short of the required pilot agreement."""


@dataclass(frozen=True)
class CalibrationConfig:
    """Pilot design for the threshold search."""

    points: tuple[tuple[float, float], ...] = ((0.9, 0.05), (0.9, 0.6),
                                               (0.9, 1.5))
    runs_per_point: int = 100
    horizon: int = 1_000_000
    master_seed: int = 20260809
    window_fractions: tuple[float, ...] = DEFAULT_WINDOW_FRACTIONS
    escape_fractions: tuple[float, ...] = DEFAULT_ESCAPE_FRACTIONS
    min_drifts: tuple[int, ...] = DEFAULT_MIN_DRIFTS
    min_agreement: float = 0.70

    def __post_init__(self):
        if not self.points:
            raise ValueError("the pilot set must not be empty")
        if self.horizon < 10:
            raise ValueError("pilot horizon is degenerately short")
        if self.horizon < 1.0 / min(self.window_fractions):
            raise ValueError("pilot horizon is shorter than the widest "
                             "candidate window")


@dataclass(frozen=True)
class CalibrationReport:
    """Chosen thresholds plus the agreement table that backs them."""

    thresholds: Thresholds
    min_agreement: float
    mean_agreement: float
    per_point: dict[tuple[float, float], float]
    config: CalibrationConfig
    passed: bool


def _calibration_search(config: CalibrationConfig) -> CalibrationReport:
    expected: dict[tuple[float, float], RunClass] = {}
    for alpha, rho in config.points:
        label = phase_for(alpha, rho)
        if label.phase not in _PHASE_TO_CLASS:
            raise ValueError(f"pilot point ({alpha}, {rho}) is not in an "
                             f"unambiguous theory region: {label}")
        expected[(alpha, rho)] = _PHASE_TO_CLASS[label.phase]

    primary_wf = config.window_fractions[0]
    extra_wfs = config.window_fractions[1:]
    samples: dict[tuple[float, float], list[RunSummary]] = {}
    for pi, (alpha, rho) in enumerate(config.points):
        samples[(alpha, rho)] = simulate_batch(
            PowerLawDT(alpha, rho), config.horizon, config.runs_per_point,
            config.master_seed, base_index=pi * config.runs_per_point,
            window_fraction=primary_wf, extra_window_fractions=extra_wfs)

    best: Optional[tuple[float, float, Thresholds,
                         dict[tuple[float, float], float]]] = None
    for wf in config.window_fractions:
        for ef in config.escape_fractions:
            for md in config.min_drifts:
                cand = Thresholds(window_fraction=wf, escape_fraction=ef,
                                  min_drift=md)
                per_point = {}
                for point, runs_ in samples.items():
                    hits = sum(1 for s in runs_
                               if classify_run(s, cand) == expected[point])
                    per_point[point] = hits / len(runs_)
                worst = min(per_point.values())
                mean = sum(per_point.values()) / len(per_point)
                if best is None or (worst, mean) > (best[0], best[1]):
                    best = (worst, mean, cand, per_point)

    worst, mean, thresholds, per_point = best
    return CalibrationReport(thresholds=thresholds, min_agreement=worst,
                             mean_agreement=mean, per_point=per_point,
                             config=config,
                             passed=worst >= config.min_agreement)


def calibrate_thresholds(config: CalibrationConfig = CalibrationConfig()
                         ) -> CalibrationReport:
    """Grid-search classifier thresholds against the theory oracle.

    Every pilot point must classify unambiguously under the oracle.  The
    score of a candidate is its worst per-point agreement; ties prefer
    higher mean agreement, then the earlier candidate in the (window,
    escape, drift) iteration order.  Raises CalibrationError when even
    the best candidate stays below ``config.min_agreement``.
    """
    report = _calibration_search(config)
    if not report.passed:
        raise CalibrationError(
            f"calibration failure: best worst-case pilot agreement "
            f"{report.min_agreement:.3f} is below the required "
            f"{config.min_agreement:.2f} (per point: "
            + ", ".join(f"({a}, {r})={v:.2f}"
                        for (a, r), v in report.per_point.items())
            + ")")
    return report


def calibrate_best_effort(config: CalibrationConfig = CalibrationConfig()
                          ) -> CalibrationReport:
    """Like calibrate_thresholds but returning the argmax even on failure."""
    return _calibration_search(config)
