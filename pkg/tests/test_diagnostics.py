"""Martingale functionals: hand values and recount oracles."""

import numpy as np
import pytest

from errwlab.diagnostics import (DiagnosticsTrace, direct_M, direct_S2,
                                 direct_Theta, down_crossings, first_return,
                                 proof_series, truncate_at_tau)
from errwlab.schemes import GeneralFTR, PowerLawDT, preset
from errwlab.walk import run


def _replay(scheme, positions):
    """Feed a recorded trajectory through the online accumulators."""
    trace = DiagnosticsTrace()
    phi = {}
    out_m, out_theta, out_s2 = [], [], []
    for a, b in zip(positions, positions[1:]):
        e = min(a, b)
        phi[e] = phi.get(e, 0) + 1
        trace.observe_step(scheme, a, b > a, phi[e], returned_to_0=(b == 0))
        out_m.append(trace.M)
        out_theta.append(trace.Theta)
        out_s2.append(trace.S2)
    return out_m, out_theta, out_s2


# ---------------------------------------------------------------------------
# hand-computed values
# ---------------------------------------------------------------------------

def test_M_path_010():
    m, _, s2 = _replay(PowerLawDT(1.0, 1.0), [0, 1, 0])
    assert m == [1.0, 0.0]
    assert s2 == [1.0, 2.0]


def test_first_step_increment_is_one():
    for name in ("power-dt", "perturbed-dt", "davis-example"):
        sch = preset(name)
        m, _, _ = _replay(sch, [0, 1])
        assert m[0] == 1.0 / sch.weight(1, 0)


def test_theta_equals_M_for_down_only_schemes():
    sch = PowerLawDT(0.9, 0.4)
    _, feats = run(sch, 5000, seed=21, pos_stride=1)
    m, theta, _ = _replay(sch, list(run(sch, 200, seed=3,
                                        pos_stride=1)[0].positions))
    assert m == theta
    assert feats.M == feats.Theta


def test_theta_correction_on_every_crossing_reinforcement():
    # delta = 1, 2, 2, 2...: the first up-step reinforces immediately,
    # and the correction restores Theta_1 = 1/w_0(0) = 1
    sch = GeneralFTR(delta_rule=lambda ell: 1.0 if ell == 0 else 2.0,
                     f0_rule=lambda x: 1.0)
    m, theta, _ = _replay(sch, [0, 1])
    assert m[0] == 0.5
    assert theta[0] == 1.0


def test_frozen_after_return():
    sch = PowerLawDT(1.0, 1.0)
    m, theta, s2 = _replay(sch, [0, 1, 0, 1, 2, 1])
    assert m[1] == 0.0
    assert m[-1] == 0.0 and theta[-1] == theta[1] and s2[-1] == s2[1]


# ---------------------------------------------------------------------------
# recount oracles against the engine
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,seed", [("power-dt", 3), ("power-dt", 17),
                                       ("perturbed-dt", 3),
                                       ("davis-example", 5),
                                       ("no-reinforcement", 9)])
def test_engine_agrees_with_direct_recounts(name, seed):
    sch = preset(name)
    horizon = 3000
    traj, feats = run(sch, horizon, seed=seed, pos_stride=1)
    pos = list(traj.positions)
    m_direct = direct_M(sch, pos, horizon)
    s2_direct = direct_S2(sch, pos, horizon)
    assert feats.M == pytest.approx(m_direct, rel=1e-9, abs=1e-12)
    assert feats.S2 == pytest.approx(s2_direct, rel=1e-9)
    if sch.is_ftr:
        theta_direct = direct_Theta(sch, pos, horizon)
        assert feats.Theta == pytest.approx(theta_direct, rel=1e-9,
                                            abs=1e-12)


def test_incremental_checkpoints_agree_with_direct_recounts():
    sch = preset("perturbed-dt")
    horizon = 4096
    cks = (7, 100, 1000, 4096)
    traj, feats = run(sch, horizon, seed=5, pos_stride=1, checkpoints=cks)
    pos = list(traj.positions)
    for j, n in enumerate(cks):
        assert feats.checkpoint_M[j] == pytest.approx(
            direct_M(sch, pos, n), rel=1e-9, abs=1e-12)
        assert feats.checkpoint_Theta[j] == pytest.approx(
            direct_Theta(sch, pos, n), rel=1e-9, abs=1e-12)


def test_online_drift_is_negligible():
    _, feats = run(preset("power-dt"), 200_000, seed=2, drift_every=4096)
    assert feats.drift_max < 1e-9


# ---------------------------------------------------------------------------
# down-crossing counts
# ---------------------------------------------------------------------------

def test_down_crossings_hand_counts():
    assert list(down_crossings([0, 1, 0])) == [0, 1]
    assert list(down_crossings([0, 1, 2, 1, 0])) == [0, 1, 1]


def test_down_crossings_parity_identity():
    traj, feats = run(preset("power-dt"), 5000, seed=8, pos_stride=1)
    pos = list(traj.positions)
    counts = down_crossings(pos)
    left_moves = (len(pos) - 1 - pos[-1]) / 2  # steps minus net displacement
    assert counts.sum() == left_moves


def test_down_crossings_pre_tau_vs_unconditional():
    traj, feats = run(preset("power-dt"), 5000, seed=8, pos_stride=1)
    pos = list(traj.positions)
    pre = down_crossings(truncate_at_tau(pos))
    full = down_crossings(pos)
    tau = first_return(pos)
    assert tau == feats.tau
    kept = min(len(pre), len(feats.N_pre_tau))
    assert np.array_equal(np.asarray(pre[:kept]), feats.N_pre_tau[:kept])
    assert feats.N_pre_tau.sum() == pre.sum()
    assert np.array_equal(full, feats.N_all[:len(full)])
    assert full.sum() >= pre.sum()


# ---------------------------------------------------------------------------
# proof series
# ---------------------------------------------------------------------------

def test_proof_series_zero_counts():
    first, second = proof_series([0] * 10, 0.9, 0.4)
    want_first = sum((x + 1.0) ** -0.9 for x in range(10))
    want_second = sum((x + 1.0) ** -1.8 for x in range(10))
    assert first == pytest.approx(want_first, rel=1e-12)
    assert second == pytest.approx(want_second, rel=1e-12)


def test_proof_series_empty():
    assert proof_series([], 0.9, 0.4) == (0.0, 0.0)


def test_proof_series_monotone_in_counts():
    base, _ = proof_series([2, 2, 2], 0.9, 0.4)
    bumped, _ = proof_series([2, 3, 2], 0.9, 0.4)
    assert bumped < base
