"""errwlab: a simulation laboratory for edge-reinforced random walks.

The walk lives on the non-negative integers, reflects at the origin, and
chooses each step with probability proportional to the current weights
of the two adjacent edges; weights grow with traversal counts according
to a reinforcement scheme.  The package bundles the walk engine, the
factor-type scheme algebra and its phase oracles, martingale
diagnostics, the equivalent reinforced-urn representations, and
finite-horizon phase-diagram experiments behind a deterministic CLI.
"""

__version__ = "0.1.0"

from .schemes import (  # noqa: F401
    GeneralFTR,
    Phase,
    PhaseLabel,
    PerturbedDT,
    PowerLawDT,
    QuadraticOriginExample,
    SchemeError,
    SeriesVerdict,
    Tabular,
    Verdict,
    delta,
    preset,
    series_F,
    series_Phi,
    stick_probability_lower_bound,
    table1_phase,
    theory_phase,
    weight,
)
from .walk import (  # noqa: F401
    Direction,
    StopRules,
    Trajectory,
    WalkState,
    enumerate_paths,
    run,
    step,
    transition_probability,
)
from .diagnostics import (  # noqa: F401
    DiagnosticsTrace,
    down_crossings,
    proof_series,
)
from .urn import (  # noqa: F401
    BStarStat,
    RubinClocks,
    UrnState,
    lemma_bound,
    recursion_sequence,
    rubin_Bstar,
    sample_bstar,
    simulate_Bstar,
    urn_draw,
    urn_driven_step,
)
from .experiments import (  # noqa: F401
    CalibrationConfig,
    CalibrationError,
    PhaseCell,
    RunClass,
    RunSummary,
    Thresholds,
    calibrate_thresholds,
    classify_run,
    simulate_batch,
    sweep,
)
