"""Scheme algebra, series verdicts and the phase oracles."""

import math

import pytest

from errwlab import schemes
from errwlab.schemes import (GeneralFTR, Phase, PowerLawDT, PerturbedDT,
                             QuadraticOriginExample, SchemeError, Tabular,
                             Verdict, delta, preset, series_F, series_Phi,
                             stick_probability_lower_bound, table1_phase,
                             theory_phase, weight)

STAY_PRODUCT_10K = 0.6825865139272090  # prod_{k<=1e4} 4k^2/(1+4k^2)


# ---------------------------------------------------------------------------
# delta and weight
# ---------------------------------------------------------------------------

def test_delta_at_zero_is_one():
    assert delta(PowerLawDT(0.9, 0.4), 0) == 1.0


def test_delta_power_value():
    assert delta(PowerLawDT(0.9, 0.4), 2) == pytest.approx(1.3195079107728942,
                                                           abs=1e-15)


def test_delta_down_only_pairing():
    sch = PowerLawDT(0.9, 0.4)
    for k in range(1000):
        assert delta(sch, 2 * k) == delta(sch, 2 * k + 1)


def test_delta_non_decreasing():
    sch = PowerLawDT(0.7, 1.3)
    values = [delta(sch, ell) for ell in range(2000)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_delta_needs_factor_type():
    with pytest.raises(TypeError):
        delta(preset("davis-example"), 3)


def test_weight_values():
    assert weight(PowerLawDT(0.9, 0.4), 0, 0) == 1.0
    assert weight(PowerLawDT(0.9, 0.4), 0, 1) == pytest.approx(
        1.8660659830736148, abs=1e-15)
    assert weight(PowerLawDT(1.0, 1.0), 3, 0) == 2.0


def test_weight_factorization_exact():
    sch = PowerLawDT(0.83, 0.71)
    for ell in (0, 1, 5, 17, 1024):
        for x in (0, 1, 7, 300):
            assert weight(sch, ell, x) == delta(sch, ell) * weight(sch, 0, x)


def test_weight_monotone_in_ell():
    for sch in (PowerLawDT(0.9, 0.4), preset("davis-example")):
        for x in (0, 1, 5):
            vals = [weight(sch, ell, x) for ell in range(200)]
            assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_weight_rejects_negative_arguments():
    with pytest.raises(ValueError):
        weight(PowerLawDT(0.9, 0.4), -1, 0)
    with pytest.raises(ValueError):
        weight(PowerLawDT(0.9, 0.4), 0, -1)


# ---------------------------------------------------------------------------
# scheme construction and validation
# ---------------------------------------------------------------------------

def test_power_law_validation():
    with pytest.raises(SchemeError):
        PowerLawDT(0.0, 0.4)
    with pytest.raises(SchemeError):
        PowerLawDT(0.9, -0.1)


def test_perturbed_bump_location_and_size():
    sch = PerturbedDT(PowerLawDT(0.9, 0.4), 0.1)
    k0 = sch.bump_index
    assert k0 == 10
    base = PowerLawDT(0.9, 0.4)
    assert sch.delta(2 * k0) == base.delta(2 * k0) + 0.1
    assert sch.delta(2 * k0 + 1) == base.delta(2 * k0 + 1)
    for ell in range(60):
        if ell != 2 * k0:
            assert sch.delta(ell) == base.delta(ell)


def test_perturbed_is_not_down_only():
    sch = preset("perturbed-dt")
    assert not sch.is_dt
    with pytest.raises(SchemeError):
        PerturbedDT(PowerLawDT(0.9, 0.4), 1.5)


def test_general_ftr_validates_prefix():
    with pytest.raises(SchemeError):
        GeneralFTR(delta_rule=lambda ell: 2.0, f0_rule=lambda x: 1.0)
    with pytest.raises(SchemeError):
        GeneralFTR(delta_rule=lambda ell: 1.0 / (ell + 1),
                   f0_rule=lambda x: 1.0)
    with pytest.raises(SchemeError):
        GeneralFTR(delta_rule=lambda ell: 1.0, f0_rule=lambda x: float(x))


def test_general_ftr_detects_down_only():
    dt = GeneralFTR(delta_rule=lambda ell: float(ell // 2 + 1),
                    f0_rule=lambda x: 1.0)
    assert dt.is_dt
    not_dt = GeneralFTR(delta_rule=lambda ell: float(ell + 1),
                        f0_rule=lambda x: 1.0)
    assert not not_dt.is_dt


def test_tabular_rejects_decreasing_weights():
    with pytest.raises(SchemeError):
        Tabular(weight_rule=lambda ell, x: 1.0 / (ell + 1))


def test_presets():
    assert isinstance(preset("power-dt"), PowerLawDT)
    assert isinstance(preset("perturbed-dt"), PerturbedDT)
    assert isinstance(preset("davis-example"), QuadraticOriginExample)
    nr = preset("no-reinforcement")
    assert nr.rho == 0.0 and nr.alpha == 1.2
    with pytest.raises(SchemeError):
        preset("nope")


def test_quadratic_origin_weights():
    sch = preset("davis-example")
    assert weight(sch, 0, 0) == 1.0
    assert weight(sch, 3, 0) == 16.0
    assert weight(sch, 999, 2) == 4.0


# ---------------------------------------------------------------------------
# series verdicts
# ---------------------------------------------------------------------------

def test_series_F_power_law_rule():
    assert series_F(PowerLawDT(0.9, 0.4), 0, 1).diverges
    assert series_F(PowerLawDT(0.9, 0.4), 0, 2).converges
    assert series_F(PowerLawDT(0.4, 0.4), 0, 2).diverges
    assert series_F(PowerLawDT(1.2, 0.0), 0, 1).converges


def test_series_F_matches_p_series_rule_on_grid():
    for i in range(1, 201):
        alpha = i / 100.0
        sch = PowerLawDT(alpha, 0.3)
        for k in (1, 2):
            verdict = series_F(sch, 0, k)
            assert verdict.diverges == (k * alpha <= 1.0), (alpha, k)


def test_series_F_k_validation():
    with pytest.raises(ValueError):
        series_F(PowerLawDT(0.9, 0.4), 0, 3)


def test_series_Phi_power_law_rule():
    assert series_Phi(PowerLawDT(0.9, 0.4), 5).diverges
    assert series_Phi(PowerLawDT(0.9, 1.5), 0).converges
    for j in range(0, 201, 7):
        rho = j / 100.0
        verdict = series_Phi(PowerLawDT(0.9, rho), 3)
        assert verdict.diverges == (rho <= 1.0), rho


def test_series_Phi_quadratic_origin():
    sch = preset("davis-example")
    assert series_Phi(sch, 0).converges     # sum 1/(l+1)^2
    assert series_Phi(sch, 1).diverges      # constant terms
    assert series_Phi(sch, 5).diverges


def test_series_partial_sums_positive():
    v = series_F(PowerLawDT(0.9, 0.4), 0, 2)
    assert v.partial_sum > 0 and v.terms_used > 0


def test_series_heuristic_borderline_is_undetermined():
    # a harmonic tail diverges so slowly that no finite partial sum can
    # witness it; the honest answer at the cutoff is Undetermined
    verdict = schemes._series_heuristic(lambda n: 1.0 / (n + 1),
                                        cutoff=100_000)
    assert verdict.kind is Verdict.UNDETERMINED


def test_series_heuristic_resolves_clear_tails():
    assert schemes._series_heuristic(lambda n: (n + 1.0) ** -0.9,
                                     cutoff=100_000).kind is Verdict.DIVERGES
    assert schemes._series_heuristic(lambda n: (n + 1.0) ** -2.0,
                                     cutoff=100_000).kind is Verdict.CONVERGES
    # log-squared damping converges and the block ratios see it
    assert schemes._series_heuristic(
        lambda n: 1.0 / ((n + 2) * math.log(n + 2) ** 2),
        cutoff=1_000_000).kind is Verdict.CONVERGES


# ---------------------------------------------------------------------------
# phase oracles
# ---------------------------------------------------------------------------

def test_theory_phase_examples():
    assert theory_phase(0.9, 0.05).phase is Phase.RECURRENT
    assert theory_phase(0.9, 0.45).phase is Phase.TRANSIENT
    assert theory_phase(0.9, 0.6).phase is Phase.TRANSIENT
    assert theory_phase(0.9, 1.5).phase is Phase.LOCALIZES
    assert theory_phase(0.75, 0.3).phase is Phase.UNKNOWN


def test_theory_phase_provenance_nonempty():
    for rho in (0.05, 0.45, 0.6, 1.5, 0.3):
        label = theory_phase(0.8, rho)
        assert label.provenance


def test_theory_phase_domain():
    with pytest.raises(ValueError):
        theory_phase(0.5, 0.3)
    with pytest.raises(ValueError):
        theory_phase(1.01, 0.3)
    with pytest.raises(ValueError):
        theory_phase(0.9, -0.01)
    theory_phase(1.0, 0.0)  # the box is closed on the right


def test_table1_power_law_cases():
    assert table1_phase(PowerLawDT(0.9, 0.6)).phase is Phase.TRANSIENT
    assert table1_phase(PowerLawDT(1.2, 0.0)).phase is Phase.TRANSIENT
    assert table1_phase(PowerLawDT(0.9, 1.5)).phase is Phase.LOCALIZES
    assert table1_phase(PowerLawDT(0.9, 0.0)).phase is Phase.RECURRENT
    assert table1_phase(PowerLawDT(0.4, 0.2)).phase is Phase.RECURRENT


def test_table1_quadratic_origin_is_unknown_with_note():
    label = table1_phase(preset("davis-example"))
    assert label.phase is Phase.UNKNOWN
    assert "mixed behaviour possible" in label.provenance


def test_table1_table_rules_cover_the_grid_consistently():
    # wherever the closed-form oracle and the series table both commit,
    # they must agree
    for ia in range(55, 101, 5):
        for ir in range(0, 200, 10):
            alpha, rho = ia / 100.0, ir / 100.0
            t = table1_phase(PowerLawDT(alpha, rho))
            o = theory_phase(alpha, rho)
            if t.phase is not Phase.UNKNOWN and o.phase is not Phase.UNKNOWN:
                assert t.phase is o.phase, (alpha, rho, t, o)


def test_table1_uptick_rule():
    # an odd-index factor increase with divergent series reads recurrent
    sch = GeneralFTR(
        delta_rule=lambda ell: 1.0 if ell < 1 else 2.0,
        f0_rule=lambda x: float(x + 1) ** 0.9)
    assert not sch.is_dt
    label = table1_phase(sch)
    assert label.phase is Phase.RECURRENT
    assert "left-to-right" in label.provenance


def test_table1_bounded_factor_rule():
    sch = GeneralFTR(delta_rule=lambda ell: 1.0,
                     f0_rule=lambda x: float(x + 1) ** 0.9,
                     bounded_delta=True)
    label = table1_phase(sch)
    assert label.phase is Phase.RECURRENT


# ---------------------------------------------------------------------------
# sticking products
# ---------------------------------------------------------------------------

def test_stick_empty_product():
    assert stick_probability_lower_bound(preset("power-dt"), 3, 0) == 1.0


def test_stick_monotone_in_terms_and_bounded():
    sch = PowerLawDT(0.9, 1.5)
    values = [stick_probability_lower_bound(sch, 3, K)
              for K in (0, 1, 2, 5, 10, 100, 1000)]
    assert all(0.0 < v <= 1.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_stick_quadratic_origin_matches_closed_product():
    value = stick_probability_lower_bound(preset("davis-example"), 1, 10_000)
    assert value == pytest.approx(STAY_PRODUCT_10K, abs=1e-12)


def test_stick_extended_precision_cross_check():
    # term-by-term product in 50-digit arithmetic as the oracle
    import mpmath as mp
    mp.mp.dps = 50
    sch = PowerLawDT(0.9, 1.5)
    x, K = 3, 1000
    up = mp.mpf(4) ** mp.mpf("0.9")
    down0 = mp.mpf(3) ** mp.mpf("0.9")
    product = mp.mpf(1)
    for k in range(1, K + 1):
        d = mp.mpf((2 * k - 1) // 2 + 1) ** mp.mpf("1.5")
        product /= 1 + up / (d * down0)
    got = stick_probability_lower_bound(sch, x, K)
    assert got == pytest.approx(float(product), rel=1e-12)


def test_stick_requires_positive_vertex():
    with pytest.raises(ValueError):
        stick_probability_lower_bound(preset("power-dt"), 0, 10)
