import math
import random
from fractions import Fraction

import pytest
from scipy import stats

import drawlab as dl
from drawlab.metrics import pot_pairs

from conftest import random_feasible_case

F = Fraction

# Exact distributions of the six-team worked example, frozen from the
# brute-force enumerations (pots I: teams 1-3, II: 4-6; (1,4) and (3,6)
# forbidden).  Of the 36 labelled assignments 18 are valid; uniform
# co-assignment probabilities take values {0, 1/3, 2/3} while the 36
# equally likely draw orders give the skewed skip values below.
EXAMPLE1_UNIFORM_P12 = [
    [F(0), F(1, 3), F(2, 3)],
    [F(1, 3), F(1, 3), F(1, 3)],
    [F(2, 3), F(1, 3), F(0)],
]
EXAMPLE1_SKIP_P12 = [
    [F(0), F(13, 36), F(23, 36)],
    [F(13, 36), F(5, 18), F(13, 36)],
    [F(23, 36), F(13, 36), F(0)],
]


def test_example1_uniform_enumeration(example1, example1_constraints):
    dist = dl.enumerate_uniform(example1, example1_constraints)
    assert dist.feasible_count == 18
    assert dist.baseline_count == 36
    assert dist.feasible_proportion == F(1, 2)
    assert len(dist.classes) == 3
    assert sum(dist.classes.values()) == 1
    assert all(p == F(1, 3) for p in dist.classes.values())
    got = dist.matrices.matrix(1, 2)
    assert [[got[i, j] for j in range(3)] for i in range(3)] == EXAMPLE1_UNIFORM_P12
    assert dist.inequality == F(2, 9)


def test_example1_skip_enumeration(example1, example1_constraints):
    dist = dl.enumerate_skip(example1, example1_constraints)
    assert dist.denominator == 36
    assert sum(dist.classes.values()) == 1
    got = dist.matrices.matrix(1, 2)
    assert [[got[i, j] for j in range(3)] for i in range(3)] == EXAMPLE1_SKIP_P12
    # the alphabetical draw order's outcome is the likeliest class
    top = max(dist.classes, key=dist.classes.get)
    assert top == ((0, 5), (1, 3), (2, 4))
    assert dist.classes[top] == F(13, 36)
    assert dist.inequality == F(269, 1296)


def test_example1_skip_differs_from_uniform(example1, example1_constraints):
    uni = dl.enumerate_uniform(example1, example1_constraints)
    skp = dl.enumerate_skip(example1, example1_constraints)
    assert set(uni.classes) == set(skp.classes)  # same support
    assert uni.classes != skp.classes  # different probabilities
    assert skp.inequality < uni.inequality or skp.inequality > uni.inequality


def test_forbidden_cells_exactly_zero(example1, example1_constraints):
    for dist in (
        dl.enumerate_uniform(example1, example1_constraints),
        dl.enumerate_skip(example1, example1_constraints),
    ):
        M = dist.matrices.matrix(1, 2)
        assert M[0, 0] == 0  # teams 1 and 4
        assert M[2, 2] == 0  # teams 3 and 6


def test_two_by_two_no_constraints_all_half():
    inst = dl.build_instance([[("a", "X"), ("b", "X")], [("c", "X"), ("d", "X")]])
    cs = dl.scenario_constraints(0)
    for dist in (dl.enumerate_uniform(inst, cs), dl.enumerate_skip(inst, cs)):
        M = dist.matrices.matrix(1, 2)
        assert all(M[i, j] == F(1, 2) for i in range(2) for j in range(2))


def test_unconstrained_skip_equals_uniform():
    inst = dl.build_instance(
        [
            [("a", "Africa"), ("b", "Asia"), ("c", "Europe")],
            [("d", "Africa"), ("e", "Asia"), ("f", "Europe")],
        ]
    )
    cs = dl.scenario_constraints(0)
    uni = dl.enumerate_uniform(inst, cs)
    skp = dl.enumerate_skip(inst, cs)
    assert uni.classes == skp.classes
    for pair in pot_pairs(inst.m):
        assert (uni.matrices.matrix(*pair) == skp.matrices.matrix(*pair)).all()


def test_infeasible_toy_raises():
    inst = dl.build_instance(
        [[("a", "Africa"), ("b", "Africa")], [("c", "Africa"), ("d", "Africa")]]
    )
    with pytest.raises(dl.InfeasibleScenarioError):
        dl.enumerate_uniform(inst, dl.scenario_constraints(16))
    with pytest.raises(dl.InfeasibleScenarioError):
        dl.enumerate_skip(inst, dl.scenario_constraints(16))


def test_enumeration_budget_guard(ihf):
    with pytest.raises(dl.EnumerationBudgetError):
        dl.enumerate_uniform(ihf, dl.scenario_constraints(0))
    with pytest.raises(dl.EnumerationBudgetError):
        dl.enumerate_skip(ihf, dl.scenario_constraints(0))


def test_oracle_matrices_exactly_doubly_stochastic(example1, example1_constraints):
    for dist in (
        dl.enumerate_uniform(example1, example1_constraints),
        dl.enumerate_skip(example1, example1_constraints),
    ):
        dist.matrices.check_doubly_stochastic(tol=0)


def test_exact_scenario0_matrices_canonical(ihf):
    ms = dl.exact_scenario0_matrices(ihf)
    ms.check_doubly_stochastic(tol=0)
    i_hat = dl.hhi_index(ms)
    assert i_hat == F(7, 48)
    assert dl.inequality(i_hat, 8) == F(1, 42)
    # spot values: excluded-vs-unexcluded 1/6 and the 1/2 block
    d, p = ihf.team("Denmark").id % 8, ihf.team("Portugal").id % 8
    e, a = ihf.team("Egypt").id % 8, ihf.team("Austria").id % 8
    M12 = ms.matrix(1, 2)
    assert M12[d, p] == F(1, 6)
    assert M12[e, a] == F(1, 2)
    assert ms.matrix(1, 3)[d, 0] == F(1, 8)


def test_exact_scenario0_matrices_rejects_other_shapes(example1):
    with pytest.raises(ValueError):
        dl.exact_scenario0_matrices(example1)


def test_host_feasible_matrices_match_enumeration_on_toy():
    inst = dl.build_instance(
        [
            [("a", "Africa"), ("b", "Asia"), ("c", "Europe"), ("d", "Asia")],
            [("e", "Africa"), ("f", "Asia"), ("g", "Europe"), ("h", "Africa")],
        ],
        host_exclusion=["a", "e", "f"],
    )
    cs = dl.scenario_constraints(0)
    exact = dl.enumerate_uniform(inst, cs)
    analytic = dl.host_feasible_matrices(inst)
    for pair in pot_pairs(inst.m):
        assert (exact.matrices.matrix(*pair) == analytic.matrix(*pair)).all()


def test_oracles_invariant_under_relabelling_within_pot_and_confederation():
    base = dl.build_instance(
        [
            [("p", "Africa"), ("q", "Africa"), ("r", "Asia")],
            [("x", "Africa"), ("y", "Asia"), ("z", "Asia")],
        ]
    )
    swapped = dl.build_instance(
        [
            [("q", "Africa"), ("p", "Africa"), ("r", "Asia")],
            [("x", "Africa"), ("y", "Asia"), ("z", "Asia")],
        ]
    )
    cs = dl.scenario_constraints(24)
    for enum in (dl.enumerate_uniform, dl.enumerate_skip):
        a = enum(base, cs)
        b = enum(swapped, cs)
        # swapping two interchangeable teams permutes matrix rows 0 and 1
        Ma, Mb = a.matrices.matrix(1, 2), b.matrices.matrix(1, 2)
        assert (Ma[[1, 0, 2], :] == Mb).all()
        assert a.i_hat == b.i_hat


def test_monte_carlo_agrees_with_oracle_chi_square(example1, example1_constraints):
    trials = 20000
    for mech, dist in (
        ("uniform", dl.enumerate_uniform(example1, example1_constraints)),
        ("skip", dl.enumerate_skip(example1, example1_constraints)),
    ):
        observed = {}
        for t in range(trials):
            out = dl.draw_trial(example1, example1_constraints, mech, 31, t)
            key = out.assignment.comembership()
            observed[key] = observed.get(key, 0) + 1
        assert set(observed) <= set(dist.classes)
        chi2 = 0.0
        dof = -1
        for key, p in dist.classes.items():
            expect = float(p) * trials
            chi2 += (observed.get(key, 0) - expect) ** 2 / expect
            dof += 1
        assert stats.chi2.sf(chi2, dof) > 0.001, (mech, chi2, dof)


def test_empirical_hhi_converges_at_root_n_rate(example1, example1_constraints):
    exact = dl.enumerate_uniform(example1, example1_constraints)
    ih_exact = float(exact.i_hat)
    m, n = example1.m, example1.n
    c = 2.0 / (m * (m - 1)) / n
    errors = {}
    for trials in (10**3, 10**4, 10**5):
        r = dl.run_scenario(example1, example1_constraints.scenario, "uniform", trials, seed=5)
        bias = 0.0
        var = 0.0
        for mat in exact.matrices.matrices.values():
            for i in range(n):
                for j in range(n):
                    p = float(mat[i, j])
                    bias += c * p * (1 - p) / trials
                    var += (2 * p * c) ** 2 * p * (1 - p) / trials
        errors[trials] = abs(r.i_hat - ih_exact)
        # plug-in estimates are biased upward by O(1/N) and fluctuate at
        # O(1/sqrt(N)); the error must stay inside that envelope
        assert errors[trials] <= bias + 5 * math.sqrt(var), trials
    assert errors[10**5] < errors[10**3]


def test_random_feasible_cases_have_consistent_oracles():
    rng = random.Random(8)
    for _ in range(5):
        inst, cs, uni = random_feasible_case(rng, max_pots=3, max_teams=4)
        skp = dl.enumerate_skip(inst, cs)
        assert sum(uni.classes.values()) == 1
        assert sum(skp.classes.values()) == 1
        assert set(skp.classes) <= set(uni.classes)  # skip only reaches valid ones
        uni.matrices.check_doubly_stochastic(tol=0)
        skp.matrices.check_doubly_stochastic(tol=0)
