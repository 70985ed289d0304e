import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fogran.capacity import CapacityOracle
from fogran.fsmc import d_step, percentile_indices
from fogran.policy_cran import (H, L, TwoUserBinarySpec, binary_spec_for, cran_closed_policy,
                                cran_lp_policy, cran_lp_sum_rate, cran_two_user_choice,
                                cran_two_user_rates, cran_two_user_sum_rate, max_sum_in_region,
                                transition_probs)
from fogran.scenario import Scenario
from conftest import binary_scenario
from oracles import cran_candidate_search, exact_two_by_two_capacity, pair_outage, vertex_max_sum

PAIRS = [(L, L), (L, H), (H, L), (H, H)]


def exact_spec(S, I_L, I_H, p, q, d):
    caps = [exact_two_by_two_capacity([[S, a], [b, S]]) for a, b in ((I_L, I_L), (I_L, I_H), (I_H, I_H))]
    return TwoUserBinarySpec(S, I_L, I_H, p, q, d, *caps)


# low interference (C_LH <= 2 * single bound) and strong interference specs
SPECS = [exact_spec(3.16, 0.3, 2.0, 0.1, 0.2, 2), exact_spec(3.16, 0.1, 1.0, 0.3, 0.3, 1),
         exact_spec(1.0, 0.5, 8.0, 0.05, 0.4, 3), exact_spec(10.0, 0.1, 1.0, 0.2, 0.4, 1),
         exact_spec(0.5, 1.0, 20.0, 0.2, 0.1, 4)]


def test_specs_cover_both_interference_regimes():
    regimes = {s.C_LH > 2 * s.single_bound for s in SPECS}
    assert regimes == {True, False}


def test_nested_capacity_check():
    with pytest.raises(ValueError, match="nested"):
        TwoUserBinarySpec(1.0, 0.2, 1.0, 0.1, 0.1, 1, 3.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        TwoUserBinarySpec(1.0, 1.0, 0.5, 0.1, 0.1, 1, 1.0, 2.0, 3.0)


def test_from_oracle_requires_full_two_user():
    with pytest.raises(ValueError, match="full"):
        TwoUserBinarySpec.from_oracle(3.0, 0.3, 2.0, 0.1, 0.2, 1, CapacityOracle(2, "restricted", 100))


def test_transition_probs_sum_to_one():
    for spec in SPECS:
        for pair in PAIRS:
            assert sum(transition_probs(spec, pair).values()) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("spec", SPECS)
def test_matches_candidate_search(spec):
    # thresholds themselves follow the table's closed intervals (see test_threshold_convention);
    # probe just beside every threshold and on a regular grid
    marks = []
    for pair in PAIRS:
        P = transition_probs(spec, pair)
        marks += [P["LL"], 1 - P["HH"], min(P["LH"], P["HL"]) + P["LL"]]
    marks = np.array(marks)
    # eps = 1 admits any rates at all, so the search stops just short of it
    eps_grid = np.clip(np.concatenate([np.linspace(0, 1, 41) + 1e-9, marks - 1e-9, marks + 1e-9]), 0, 1 - 1e-9)
    for pair in PAIRS:
        for eps in eps_grid:
            label, rates = cran_two_user_choice(spec, pair, eps)
            assert sum(rates) == pytest.approx(cran_candidate_search(spec, pair, eps), abs=1e-12), (pair, eps, label)
            assert pair_outage(rates, spec, pair, spec.d) <= eps + 1e-12


@pytest.mark.parametrize("spec", SPECS)
def test_symmetric_pairs_give_equal_sums(spec):
    for eps in np.linspace(0, 1, 23):
        a = sum(cran_two_user_rates(spec, (L, H), eps))
        b = sum(cran_two_user_rates(spec, (H, L), eps))
        assert a == pytest.approx(b, abs=1e-14)


@pytest.mark.parametrize("spec", SPECS)
def test_budget_extremes(spec):
    assert cran_two_user_sum_rate(spec, 0.0) == pytest.approx(spec.C_LL, abs=1e-14)
    assert cran_two_user_sum_rate(spec, 1.0) == pytest.approx(spec.C_HH, abs=1e-14)


@pytest.mark.parametrize("spec", SPECS)
def test_fresh_csi_expression(spec):
    fresh = TwoUserBinarySpec(**{**spec.__dict__, "d": 0})
    pl, ph = fresh.pi_L, fresh.pi_H
    expect = pl * pl * spec.C_LL + 2 * pl * ph * spec.C_LH + ph * ph * spec.C_HH
    for eps in (1e-6, 0.01, 0.3, 0.999):
        assert cran_two_user_sum_rate(fresh, eps) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_threshold_convention(spec):
    # at eps == P[LL] the schedule stays at A although a point with outage exactly eps exists
    for pair in PAIRS:
        P = transition_probs(spec, pair)
        assert cran_two_user_choice(spec, pair, P["LL"])[0] == "A"
        if P["HH"] > 0:
            assert cran_two_user_choice(spec, pair, 1 - P["HH"])[0] != "B"


def test_tie_between_orientations():
    # symmetric delayed pair makes both asymmetric orientations equally safe
    spec = SPECS[2]
    assert spec.C_LH > 2 * spec.single_bound
    P = transition_probs(spec, (L, L))
    eps = (min(P["LH"], P["HL"]) + P["LL"] + 1 - P["HH"]) / 2
    label, rates = cran_two_user_choice(spec, (L, L), eps)
    assert label == "E''" and rates[0] < rates[1]


@pytest.mark.parametrize("spec", SPECS)
def test_monotone_in_budget_and_age(spec):
    eps_grid = np.linspace(0, 1, 51)
    by_eps = [cran_two_user_sum_rate(spec, e) for e in eps_grid]
    assert np.all(np.diff(by_eps) >= -1e-12)
    for eps in np.linspace(0, 0.1, 21):
        by_d = [cran_two_user_sum_rate(TwoUserBinarySpec(**{**spec.__dict__, "d": d}), eps) for d in range(12)]
        assert np.all(np.diff(by_d) <= 1e-12)


def test_large_budget_can_favour_older_csi():
    # with a loose budget, mixing lowers P[LL] from an LL observation faster than it hurts
    # the HH observations, so the average is not monotone in the CSI age
    spec = SPECS[4]
    by_d = [cran_two_user_sum_rate(TwoUserBinarySpec(**{**spec.__dict__, "d": d}), 0.2) for d in range(1, 9)]
    assert np.any(np.diff(by_d) > 1e-3)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 15), st.floats(0.05, 2), st.floats(1.1, 10), st.floats(0.02, 0.5),
       st.floats(0.02, 0.5), st.integers(0, 6), st.floats(0, 1))
def test_rule_never_exceeds_budget(S, I_L, ratio, p, q, d, eps):
    spec = exact_spec(S, I_L, I_L * ratio, p, q, d)
    for pair in PAIRS:
        rates = cran_two_user_rates(spec, pair, eps)
        assert pair_outage(rates, spec, pair, d) <= eps + 1e-12


def test_region_optimum_matches_vertex_enumeration(small_scn):
    bounds = np.unique(small_scn.bounds, axis=0)
    for b in bounds:
        val, x = max_sum_in_region(b, small_scn.subset_matrix)
        assert val == pytest.approx(vertex_max_sum(*b), abs=1e-12)
        assert np.all(small_scn.subset_matrix @ x <= b)


@pytest.mark.parametrize("mode", ["restricted", "full"])
def test_region_optimum_against_full_set_bound(small_scn, full_oracle, mode):
    scn = small_scn if mode == "restricted" else small_scn.with_(oracle=full_oracle)
    bounds = np.unique(scn.bounds, axis=0)
    submodular = bounds[:, 2] <= bounds[:, 0] + bounds[:, 1]
    # full antennas give a true polymatroid; own-antenna singles leave the joint bound slack
    assert submodular.all() if mode == "full" else not submodular.any()
    for b, sub in zip(bounds, submodular):
        val = max_sum_in_region(b, scn.subset_matrix)[0]
        assert val <= b[2] + 1e-12
        assert val == pytest.approx(b[2] if sub else b[0] + b[1], abs=1e-12)


def test_lp_policy_uses_percentile_state(small_scn):
    scn = small_scn.with_(eps=1e-2)
    pol = cran_lp_policy(scn)
    assert pol.delay == scn.d_e + scn.d_c
    assert pol.rates.shape == (scn.space.size, 2)
    assert np.all(pol.rates >= 0)


def test_single_user_lp_is_percentile_average():
    from fogran.fsmc import MarkovChannelSpec
    direct = MarkovChannelSpec.from_transition([0.5, 2.0, 6.0], [[0.8, 0.1, 0], [0.2, 0.8, 0.3], [0, 0.1, 0.7]])
    scn = Scenario(1, direct, direct, 2, 1, 0.05, CapacityOracle(1, mc_samples=10))
    pct = percentile_indices(d_step(direct, 3), 0.05)
    expect = direct.stationary @ np.log2(1 + direct.levels[pct])
    assert cran_lp_sum_rate(scn) == pytest.approx(expect, abs=1e-12)


def test_lp_monotone(small_scn):
    by_eps = [cran_lp_sum_rate(small_scn.with_(eps=e)) for e in (0, 1e-3, 1e-2, 0.1)]
    assert np.all(np.diff(by_eps) >= -1e-12)
    by_d = [cran_lp_sum_rate(small_scn.with_(d_c=d)) for d in range(5)]
    assert np.all(np.diff(by_d) <= 1e-12)


def test_lp_zero_budget_binary_gives_low_capacity(full_oracle):
    for d_e, d_c in ((1, 0), (2, 3)):
        scn = binary_scenario(full_oracle, d_e=d_e, d_c=d_c)
        spec = binary_spec_for(scn, scn.d_cloud)
        assert cran_lp_sum_rate(scn) == pytest.approx(spec.C_LL, abs=1e-12)
        assert cran_closed_policy(scn, spec).analytic_sum_rate == pytest.approx(spec.C_LL, abs=1e-12)


def test_closed_policy_layout_matches_pairs(full_oracle):
    scn = binary_scenario(full_oracle, d_e=2, eps=0.05)
    spec = binary_spec_for(scn, scn.d_cloud)
    pol = cran_closed_policy(scn, spec)
    for row, rates in zip(scn.space.indices, pol.rates):
        assert tuple(rates) == cran_two_user_rates(spec, (row[2], row[3]), 0.05)
    assert pol.analytic_sum_rate == pytest.approx(cran_two_user_sum_rate(spec, 0.05), abs=1e-12)
    with pytest.raises(ValueError):
        cran_closed_policy(scn.with_(k=1, oracle=CapacityOracle(1)), spec)
