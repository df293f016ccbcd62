"""The two draw procedures: Uniform (rejection) and Skip (sequential).

Uniform draws are rejection-sampled from the host-feasible baseline: the
mutually excluded teams are placed into distinct groups directly (never by
rejection), remaining pot slots are filled by uniform permutations, and the
proposal is accepted iff the active constraints hold.  Skip draws empty the
pots in order, placing each randomly drawn team into the lowest-index group
that keeps the partial assignment valid and completable.

Each trial consumes a private counter-based stream, so a trial's outcome is
a pure function of (instance, constraints, mechanism, seed, trial index).
The scalar functions here are the reference semantics; the vectorised
uniform sampler reproduces them word for word and is cross-checked in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleScenarioError, ProposalBudgetError
from .feasibility import _bound_confeds, _europe_id, get_checker
from .model import Assignment, ConstraintSet, EUROPE_BOUNDS, Instance
from .rng import RngStream, derive_key, trial_keys, words_np

MECHANISMS = ("uniform", "skip")
_MECH_CODE = {"uniform": 1, "skip": 2}

DEFAULT_PROPOSAL_CAP = 10**7


@dataclass
class DrawOutcome:
    """Result of one draw trial."""

    assignment: Assignment
    proposals_used: int = 1
    trace: tuple = field(default_factory=tuple)  # (team id, group, skipped groups)


def cell_key(seed: int, mechanism: str, scenario: int) -> int:
    """Stream key shared by all trials of one (seed, mechanism, scenario) cell."""
    return derive_key(seed, _MECH_CODE[mechanism], scenario)


def trial_stream(seed: int, mechanism: str, scenario: int, trial: int) -> RngStream:
    return RngStream(seed, _MECH_CODE[mechanism], scenario, trial)


# ---------------------------------------------------------------------------
# host-feasible proposals
# ---------------------------------------------------------------------------


class _ProposalLayout:
    """Word-consumption layout of one host-feasible proposal.

    Every proposal consumes exactly m*n stream words: first one word per
    excluded team (placed into distinct groups), then one word per remaining
    team, pot by pot in id order.  Fixed positions keep the scalar and the
    vectorised samplers aligned.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        n, m = instance.n, instance.m
        self.host_order = sorted(instance.host_exclusion)
        self.nonhost = [
            [t.id for t in instance.pot_teams(k) if t.id not in instance.host_exclusion]
            for k in range(1, m + 1)
        ]
        self.words = m * n

    def sample_pos(self, stream: RngStream):
        """Draw one proposal; returns pos[team id] -> group index."""
        inst = self.instance
        n = inst.n
        pos = [-1] * (inst.m * n)
        avail = list(range(n))
        size = n
        for tid in self.host_order:
            j = stream.next_word() % size
            pos[tid] = avail[j]
            size -= 1
            avail[j] = avail[size]
        for k in range(inst.m):
            row = range(k * n, (k + 1) * n)
            open_groups = [g for g in range(n) if g not in {pos[t] for t in row if pos[t] != -1}]
            size = len(open_groups)
            for tid in self.nonhost[k]:
                j = stream.next_word() % size
                pos[tid] = open_groups[j]
                size -= 1
                open_groups[j] = open_groups[size]
        return pos


class _Validity:
    """Constraint predicate on team->group vectors (host rule not included:
    proposals satisfy it by construction)."""

    def __init__(self, instance: Instance, constraints: ConstraintSet):
        self.n = instance.n
        self.bound_ids = [
            [t.id for t in instance.teams if t.confederation == conf]
            for _, conf in _bound_confeds(instance, constraints)
        ]
        europe = _europe_id(instance, constraints)
        self.euro_ids = (
            [t.id for t in instance.teams if t.confederation == europe]
            if europe is not None
            else []
        )
        self.lo, self.hi = EUROPE_BOUNDS

    def pos_valid(self, pos) -> bool:
        for ids in self.bound_ids:
            seen = 0
            for tid in ids:
                bit = 1 << pos[tid]
                if seen & bit:
                    return False
                seen |= bit
        if self.euro_ids:
            counts = [0] * self.n
            for tid in self.euro_ids:
                counts[pos[tid]] += 1
            lo, hi = self.lo, self.hi
            for c in counts:
                if c < lo or c > hi:
                    return False
        return True


_layout_cache = {}
_validity_cache = {}


def _layout(instance: Instance) -> _ProposalLayout:
    lay = _layout_cache.get(id(instance))
    if lay is None or lay.instance is not instance:
        lay = _ProposalLayout(instance)
        _layout_cache[id(instance)] = lay
    return lay


def _validity(instance: Instance, constraints: ConstraintSet) -> _Validity:
    key = (id(instance), constraints.scenario)
    hit = _validity_cache.get(key)
    if hit is not None and hit[0] is instance:
        return hit[1]
    val = _Validity(instance, constraints)
    _validity_cache[key] = (instance, val)
    return val


def _pos_to_assignment(instance: Instance, pos) -> Assignment:
    asg = Assignment.empty(instance)
    for tid, g in enumerate(pos):
        asg.slots[instance.pot_of(tid) - 1][g] = tid
    return asg


def sample_host_feasible(instance: Instance, rng: RngStream) -> Assignment:
    """Uniform sample over assignments separating all host-excluded teams."""
    return _pos_to_assignment(instance, _layout(instance).sample_pos(rng))


def uniform_draw(
    instance: Instance,
    constraints: ConstraintSet,
    rng: RngStream,
    max_proposals: int = DEFAULT_PROPOSAL_CAP,
) -> DrawOutcome:
    """Accept the first host-feasible proposal that satisfies all constraints."""
    layout = _layout(instance)
    validity = _validity(instance, constraints)
    for p in range(max_proposals):
        pos = layout.sample_pos(rng)
        if validity.pos_valid(pos):
            return DrawOutcome(_pos_to_assignment(instance, pos), proposals_used=p + 1)
    raise ProposalBudgetError(
        f"no valid assignment in {max_proposals} proposals (scenario {constraints.scenario})"
    )


# ---------------------------------------------------------------------------
# Skip mechanism
# ---------------------------------------------------------------------------


class SkipEngine:
    """Sequential placement with exact completability look-ahead.

    The engine shares the completability checker's memo across draws:
    constraint-relevant states repeat massively over a Monte Carlo run, so
    after a short warm-up almost every look-ahead is a dictionary hit.
    """

    def __init__(self, instance: Instance, constraints: ConstraintSet):
        self.instance = instance
        self.constraints = constraints
        self.checker = get_checker(instance, constraints)
        self.n = instance.n
        self.m = instance.m
        self.pot_ids = [
            [t.id for t in instance.pot_teams(k)] for k in range(1, instance.m + 1)
        ]
        # remaining-count templates around the pot currently being drawn
        empty = tuple([0] * self.checker.ntypes)
        full = self.checker.full_pot_counts
        self._prefix = [tuple(empty for _ in range(k)) for k in range(instance.m + 1)]
        self._suffix = [tuple(full[k:]) for k in range(instance.m + 1)]
        state = self.checker.state_of(Assignment.empty(instance))
        self.feasible = state is not None and self.checker.completable_state(*state)

    def place_orders(self, orders, want_trace: bool = False):
        """Deterministic Skip placement for explicit per-pot draw orders.

        Returns (pos, trace): pos[team id] -> group, trace as in DrawOutcome.
        """
        if not self.feasible:
            raise InfeasibleScenarioError(
                f"no valid assignment exists for scenario {self.constraints.scenario}"
            )
        checker = self.checker
        team_type = checker.team_type
        place_sig = checker.place_sig
        completable_state = checker.completable_state
        n = self.n
        sigs = [checker.empty_group_sig] * n
        pos = [-1] * (self.m * n)
        filled = [False] * n
        trace = [] if want_trace else None
        for k in range(self.m):
            rem = list(checker.full_pot_counts[k])
            prefix = self._prefix[k]
            suffix = self._suffix[k + 1]
            filled = [False] * n
            for tid in orders[k]:
                tc = team_type[tid]
                rem[tc] -= 1
                rem_key = prefix + (tuple(rem),) + suffix
                skipped = [] if want_trace else None
                chosen = -1
                for g in range(n):
                    if filled[g]:
                        continue
                    new_sig = place_sig(sigs[g], tc, k)
                    if new_sig is not None:
                        child = list(sigs)
                        child[g] = new_sig
                        child.sort()
                        if completable_state(tuple(child), rem_key):
                            chosen = g
                            sigs[g] = new_sig
                            filled[g] = True
                            pos[tid] = g
                            break
                    if want_trace:
                        skipped.append(g)
                if chosen < 0:
                    raise InfeasibleScenarioError(
                        "skip draw dead end; completability look-ahead violated"
                    )
                if want_trace:
                    trace.append((tid, chosen, tuple(skipped)))
        return pos, tuple(trace) if want_trace else ()

    def draw_pos(self, stream: RngStream, want_trace: bool = False):
        orders = [stream.draw_order(ids) for ids in self.pot_ids]
        return self.place_orders(orders, want_trace=want_trace)


_engine_cache = {}


def get_skip_engine(instance: Instance, constraints: ConstraintSet) -> SkipEngine:
    key = (id(instance), constraints.scenario)
    eng = _engine_cache.get(key)
    if eng is None or eng.instance is not instance:
        eng = SkipEngine(instance, constraints)
        _engine_cache[key] = eng
    return eng


def skip_draw(instance: Instance, constraints: ConstraintSet, rng: RngStream) -> DrawOutcome:
    """One Skip draw: pots emptied in order, teams drawn uniformly within a pot."""
    engine = get_skip_engine(instance, constraints)
    pos, trace = engine.draw_pos(rng, want_trace=True)
    return DrawOutcome(_pos_to_assignment(instance, pos), proposals_used=1, trace=trace)


def skip_draw_with_orders(instance, constraints, orders, want_trace: bool = True) -> DrawOutcome:
    """Skip placement for pinned draw orders (per-pot lists of team ids)."""
    engine = get_skip_engine(instance, constraints)
    for k, order in enumerate(orders, start=1):
        expect = {t.id for t in instance.pot_teams(k)}
        if set(order) != expect or len(order) != len(expect):
            raise ValueError(f"orders[{k - 1}] must list every pot-{k} team exactly once")
    pos, trace = engine.place_orders(orders, want_trace=want_trace)
    return DrawOutcome(_pos_to_assignment(instance, pos), proposals_used=1, trace=trace)


def draw_trial(
    instance: Instance,
    constraints: ConstraintSet,
    mechanism: str,
    seed: int,
    trial: int,
    max_proposals: int = DEFAULT_PROPOSAL_CAP,
) -> DrawOutcome:
    """Deterministic single trial; identical whether run alone or in a sweep."""
    if mechanism not in MECHANISMS:
        raise ValueError(f"unknown mechanism {mechanism!r}")
    stream = trial_stream(seed, mechanism, constraints.scenario, trial)
    if mechanism == "uniform":
        return uniform_draw(instance, constraints, stream, max_proposals=max_proposals)
    return skip_draw(instance, constraints, stream)


# ---------------------------------------------------------------------------
# vectorised uniform sampling (bulk path)
# ---------------------------------------------------------------------------


class VectorUniform:
    """Batch generator of uniform-mechanism trials.

    Reproduces the scalar rejection sampler exactly: trial t's proposal p is
    built from the same stream words in the same order, so shard boundaries
    and batch sizes cannot change any outcome.
    """

    def __init__(self, instance: Instance, constraints: ConstraintSet):
        self.instance = instance
        self.constraints = constraints
        n, m = instance.n, instance.m
        self.n, self.m = n, m
        layout = _layout(instance)
        self.host_order = layout.host_order
        self.nonhost = layout.nonhost
        self.words = layout.words
        validity = _validity(instance, constraints)
        self.bound_ids = [np.array(ids) for ids in validity.bound_ids]
        self.euro_ids = np.array(validity.euro_ids, dtype=np.intp)
        self.lo, self.hi = validity.lo, validity.hi
        self.host_pot = [instance.pot_of(t) - 1 for t in self.host_order]

    def _build_proposals(self, words: np.ndarray) -> np.ndarray:
        """Team->group positions for one proposal round; words is (L, m*n)."""
        L = words.shape[0]
        n, m = self.n, self.m
        rows = np.arange(L)
        pos = np.full((L, m * n), -1, dtype=np.int8)
        avail = np.tile(np.arange(n, dtype=np.int8), (L, 1))
        c = 0
        size = n
        for tid in self.host_order:
            pick = (words[:, c] % np.uint64(size)).astype(np.intp)
            g = avail[rows, pick]
            pos[:, tid] = g
            size -= 1
            avail[rows, pick] = avail[:, size]
            c += 1
        for k in range(m):
            taken = np.zeros((L, n), dtype=bool)
            for tid, kp in zip(self.host_order, self.host_pot):
                if kp == k:
                    taken[rows, pos[:, tid]] = True
            order = np.argsort(taken, axis=1, kind="stable").astype(np.int8)
            size = n - sum(1 for kp in self.host_pot if kp == k)
            pool = order[:, :size].copy()
            for tid in self.nonhost[k]:
                pick = (words[:, c] % np.uint64(size)).astype(np.intp)
                pos[:, tid] = pool[rows, pick]
                size -= 1
                pool[rows, pick] = pool[:, size]
                c += 1
        return pos

    def _valid(self, pos: np.ndarray) -> np.ndarray:
        L = pos.shape[0]
        ok = np.ones(L, dtype=bool)
        for ids in self.bound_ids:
            groups = np.sort(pos[:, ids], axis=1)
            ok &= ~(groups[:, 1:] == groups[:, :-1]).any(axis=1)
        if self.euro_ids.size:
            n = self.n
            offsets = pos[:, self.euro_ids].astype(np.int64) + n * np.arange(L)[:, None]
            counts = np.bincount(offsets.ravel(), minlength=L * n).reshape(L, n)
            ok &= ((counts >= self.lo) & (counts <= self.hi)).all(axis=1)
        return ok

    def run_trials(self, seed: int, t_lo: int, t_hi: int, max_proposals: int = DEFAULT_PROPOSAL_CAP):
        """Accepted assignments for trials [t_lo, t_hi).

        Returns (pos, proposals): pos is (T, m*n) team->group, proposals the
        per-trial count of proposals including the accepted one.
        """
        T = t_hi - t_lo
        ckey = cell_key(seed, "uniform", self.constraints.scenario)
        keys = trial_keys(ckey, np.arange(t_lo, t_hi, dtype=np.uint64))
        out_pos = np.empty((T, self.m * self.n), dtype=np.int8)
        proposals = np.zeros(T, dtype=np.int64)
        live = np.arange(T)
        W = self.words
        word_idx = np.arange(W, dtype=np.uint64)
        p = 0
        while live.size:
            if p >= max_proposals:
                raise ProposalBudgetError(
                    f"no valid assignment in {max_proposals} proposals "
                    f"(scenario {self.constraints.scenario}, {live.size} trials pending)"
                )
            words = words_np(keys[live][:, None], np.uint64(p * W) + word_idx[None, :])
            pos = self._build_proposals(words)
            good = self._valid(pos)
            done = live[good]
            out_pos[done] = pos[good]
            proposals[done] = p + 1
            live = live[~good]
            p += 1
        return out_pos, proposals
