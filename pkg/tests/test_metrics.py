import random
from fractions import Fraction

import numpy as np
import pytest

import drawlab as dl
from drawlab.metrics import pot_pairs


def uniform_set(m, n):
    mats = {
        pair: np.full((n, n), Fraction(1, n), dtype=object) for pair in pot_pairs(m)
    }
    return dl.PairMatrixSet(m, n, mats, "exact")


def permutation_set(m, n, rng):
    mats = {}
    for pair in pot_pairs(m):
        mat = np.full((n, n), Fraction(0), dtype=object)
        perm = list(range(n))
        rng.shuffle(perm)
        for i, j in enumerate(perm):
            mat[i, j] = Fraction(1)
        mats[pair] = mat
    return dl.PairMatrixSet(m, n, mats, "exact")


def unconstrained_draw_matrices():
    """Pair matrices of the canonical draw with no constraints, written out
    from first principles: the two non-excluded pot-1 teams (locals 1, 7)
    pair with the two excluded pot-2 teams (locals 1, 2) with probability
    1/2; the six-by-six remainder is uniform 1/6; every other pot pair is
    uniform 1/8."""
    n = 8
    host_rows = {0, 2, 3, 4, 5, 6}
    host_cols = {1, 2}
    p12 = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            if i in host_rows:
                p12[i, j] = Fraction(1, 6) if j not in host_cols else Fraction(0)
            else:
                p12[i, j] = Fraction(1, 2) if j in host_cols else Fraction(0)
    mats = {(1, 2): p12}
    for pair in pot_pairs(4):
        if pair != (1, 2):
            mats[pair] = np.full((n, n), Fraction(1, 8), dtype=object)
    return dl.PairMatrixSet(4, 8, mats, "exact")


def test_hhi_minimum_at_uniform_matrices():
    ms = uniform_set(4, 8)
    assert dl.hhi_index(ms) == Fraction(1, 8)
    assert dl.inequality(Fraction(1, 8), 8) == 0


def test_hhi_maximum_at_permutation_matrices():
    ms = permutation_set(3, 5, random.Random(1))
    assert dl.hhi_index(ms) == 1
    assert dl.inequality(Fraction(1), 5) == 1


def test_hhi_worked_example_value():
    ms = unconstrained_draw_matrices()
    i_hat = dl.hhi_index(ms)
    assert i_hat == Fraction(7, 48)
    assert dl.inequality(i_hat, 8) == Fraction(1, 42)


def test_inequality_examples_and_range():
    assert dl.inequality(Fraction(1, 8), 8) == 0
    assert dl.inequality(Fraction(7, 48), 8) == Fraction(1, 42)
    assert dl.inequality(1.0, 8) == 1.0
    with pytest.raises(ValueError):
        dl.inequality(0.05, 8)  # below 1/8
    with pytest.raises(ValueError):
        dl.inequality(Fraction(2), 8)


def test_hhi_rejects_non_stochastic():
    n = 4
    bad = np.full((n, n), 1.0 / n)
    bad[0, 0] += 0.01
    ms = dl.PairMatrixSet(2, n, {(1, 2): bad}, ("empirical", 100))
    with pytest.raises(ValueError):
        dl.hhi_index(ms)


def test_hhi_invariant_under_team_relabelling():
    rng = random.Random(7)
    ms = unconstrained_draw_matrices()
    base = dl.hhi_index(ms)
    mats = {}
    for pair, mat in ms.matrices.items():
        rows = list(range(8))
        cols = list(range(8))
        rng.shuffle(rows)
        rng.shuffle(cols)
        mats[pair] = mat[np.ix_(rows, cols)]
    shuffled = dl.PairMatrixSet(4, 8, mats, "exact")
    assert dl.hhi_index(shuffled) == base


def test_hhi_transpose_symmetry():
    ms = unconstrained_draw_matrices()
    transposed = dl.PairMatrixSet(
        4, 8, {p: m.T.copy() for p, m in ms.matrices.items()}, "exact"
    )
    assert abs(float(dl.hhi_index(ms)) - float(dl.hhi_index(transposed))) < 1e-12


def _place_all(instance, pos):
    asg = dl.Assignment.empty(instance)
    for tid, g in enumerate(pos):
        asg.place(instance, tid, g)
    return asg


def test_accumulate_counts_per_pair(ihf):
    acc = dl.MatrixAccumulator(ihf.m, ihf.n)
    pos = [g for _ in range(ihf.m) for g in range(ihf.n)]
    dl.accumulate(acc, ihf, _place_all(ihf, pos))
    assert acc.trials == 1
    # one co-membership count per group per pot pair
    assert (acc.counts.sum(axis=(1, 2)) == ihf.n).all()
    ms = dl.pair_matrices(acc)
    for pair in pot_pairs(ihf.m):
        mat = ms.matrix(*pair)
        assert (mat.sum(axis=0) == 1).all() and (mat.sum(axis=1) == 1).all()
        assert set(np.unique(mat)) <= {0.0, 1.0}  # permutation matrix


def test_accumulate_requires_complete(ihf):
    acc = dl.MatrixAccumulator(ihf.m, ihf.n)
    with pytest.raises(dl.IncompleteAssignmentError):
        dl.accumulate(acc, ihf, dl.Assignment.empty(ihf))


def test_merge_equals_sequential(ihf):
    rng = random.Random(3)
    stream_positions = []
    for _ in range(12):
        pos = []
        for k in range(ihf.m):
            groups = list(range(ihf.n))
            rng.shuffle(groups)
            pos.extend(groups)
        stream_positions.append(pos)
    a = dl.MatrixAccumulator(ihf.m, ihf.n)
    b = dl.MatrixAccumulator(ihf.m, ihf.n)
    both = dl.MatrixAccumulator(ihf.m, ihf.n)
    for i, pos in enumerate(stream_positions):
        (a if i < 5 else b).add_pos(pos)
        both.add_pos(pos)
    merged = a.merged(b)
    assert merged.trials == both.trials == 12
    assert (merged.counts == both.counts).all()


def test_add_pos_batch_matches_scalar(ihf):
    rng = random.Random(17)
    rows = []
    for _ in range(40):
        pos = []
        for k in range(ihf.m):
            groups = list(range(ihf.n))
            rng.shuffle(groups)
            pos.extend(groups)
        rows.append(pos)
    scalar = dl.MatrixAccumulator(ihf.m, ihf.n)
    for pos in rows:
        scalar.add_pos(pos)
    batch = dl.MatrixAccumulator(ihf.m, ihf.n)
    batch.add_pos_batch(np.array(rows, dtype=np.int8))
    assert (scalar.counts == batch.counts).all()
    assert scalar.trials == batch.trials


def test_pair_matrices_zero_trials(ihf):
    with pytest.raises(ValueError):
        dl.pair_matrices(dl.MatrixAccumulator(ihf.m, ihf.n))


def test_empirical_matrices_doubly_stochastic(ihf):
    rng = random.Random(5)
    acc = dl.MatrixAccumulator(ihf.m, ihf.n)
    for _ in range(100):
        pos = []
        for k in range(ihf.m):
            groups = list(range(ihf.n))
            rng.shuffle(groups)
            pos.extend(groups)
        acc.add_pos(pos)
    ms = dl.pair_matrices(acc)
    ms.check_doubly_stochastic(tol=1e-9)
    assert ms.stochastic_error() < 1e-12


def test_unattractive_stats():
    hist, mean = dl.unattractive_stats([12, 14, 14, 16])
    assert hist == {12: 0.25, 14: 0.5, 16: 0.25}
    assert mean == 14.0
    with pytest.raises(ValueError):
        dl.unattractive_stats([])


def test_inequality_report_contributions():
    ms = unconstrained_draw_matrices()
    report = dl.inequality_report(ms)
    assert report.i_hat == Fraction(7, 48)
    assert report.inequality == Fraction(1, 42)
    assert report.pair_contributions[(1, 2)] == Fraction(1, 4)
    for pair in pot_pairs(4):
        if pair != (1, 2):
            assert report.pair_contributions[pair] == Fraction(1, 8)


def test_export_matrices_format(ihf):
    ms = unconstrained_draw_matrices()
    ms.team_names = tuple(
        tuple(t.name for t in ihf.pot_teams(k)) for k in range(1, 5)
    )
    text = dl.export_matrices(ms)
    lines = text.splitlines()
    assert lines[0] == "# drawlab-pair-matrices v1"
    assert "# pots 1-2" in lines
    header = lines[lines.index("# pots 1-2") + 1].split("\t")
    assert header[1:] == [t.name for t in ihf.pot_teams(2)]
    denmark = lines[lines.index("# pots 1-2") + 2].split("\t")
    assert denmark[0] == "Denmark"
    assert denmark[1] == "0.166667"  # six decimals
    assert text.count("# pots") == 6
