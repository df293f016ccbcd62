"""Constraint checks, unattractive-match counting, and completability.

Violations are monotone in the partial order of assignments: placing more
teams can only add forced violations, never remove them.  Completability
(does a valid completion exist?) is decided by an exact depth-first search
over constraint-relevant state classes; states are canonicalised so that
groups that look alike are interchangeable, which keeps the search small
and lets results be memoised across queries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IncompleteAssignmentError
from .model import (
    Assignment,
    ConstraintSet,
    EUROPE_BOUNDS,
    Instance,
    UPPER_BOUND_BINDINGS,
    composition,
)


@dataclass(frozen=True)
class Violation:
    constraint: str  # "A".."E" or "HOST"
    group: int
    detail: str


def _bound_confeds(instance: Instance, constraints: ConstraintSet):
    """Resolve active upper-bound constraints to confederation ids.

    A constraint whose confederation does not exist in the instance is
    vacuous and dropped here.
    """
    out = []
    for letter in "ABCD":
        if letter in constraints:
            conf = instance.confederation_named(UPPER_BOUND_BINDINGS[letter])
            if conf is not None:
                out.append((letter, conf.id))
    return out


def _europe_id(instance: Instance, constraints: ConstraintSet):
    if "E" in constraints and instance.europe is not None:
        return instance.europe
    return None


def check_full(instance, constraints, assignment) -> list:
    """All violations of a complete assignment (empty list = valid)."""
    if not assignment.is_complete():
        raise IncompleteAssignmentError("check_full requires a complete assignment")
    return _check(instance, constraints, assignment, partial=False)


def check_partial(instance, constraints, assignment) -> list:
    """Violations already forced by the placed teams of a partial assignment.

    Upper bounds are flagged as soon as exceeded; the European lower bound
    only when a group can no longer reach it with its remaining open slots.
    """
    return _check(instance, constraints, assignment, partial=True)


def _check(instance, constraints, assignment, partial):
    comp = composition(instance, assignment)
    lo, hi = EUROPE_BOUNDS
    europe = _europe_id(instance, constraints)
    violations = []
    for letter, conf in _bound_confeds(instance, constraints):
        cname = instance.confederations[conf].name
        for g in range(instance.n):
            cnt = comp.counts[g][conf]
            if cnt > 1:
                violations.append(
                    Violation(letter, g, f"{cnt} {cname} teams in group {g}")
                )
    if europe is not None:
        ename = instance.confederations[europe].name
        for g in range(instance.n):
            eur = comp.counts[g][europe]
            open_slots = instance.m - comp.group_total(g)
            if eur > hi:
                violations.append(
                    Violation("E", g, f"{eur} {ename} teams in group {g} (max {hi})")
                )
            elif eur + open_slots < lo:
                violations.append(
                    Violation(
                        "E", g, f"group {g} can reach at most {eur + open_slots} {ename} teams (min {lo})"
                    )
                )
            elif not partial and eur < lo:
                violations.append(
                    Violation("E", g, f"{eur} {ename} teams in group {g} (min {lo})")
                )
    excl = instance.host_exclusion
    if excl:
        for g in range(instance.n):
            members = [tid for tid in assignment.group_members(g) if tid in excl]
            if len(members) > 1:
                names = ", ".join(instance.teams[t].name for t in sorted(members))
                violations.append(
                    Violation("HOST", g, f"co-grouped host-excluded teams: {names}")
                )
    return violations


def count_unattractive(instance, assignment) -> int:
    """Number of same-confederation pairs in a complete assignment."""
    if not assignment.is_complete():
        raise IncompleteAssignmentError("count_unattractive requires a complete assignment")
    return composition(instance, assignment).unattractive()


# ---------------------------------------------------------------------------
# Completability: exact DFS over canonical constraint states.
#
# A group's constraint-relevant state is packed into one integer:
#   bits 0..3   per active upper-bound constraint: 1 if the group already
#               holds a team of that confederation
#   bit  4      group holds a host-excluded team
#   bits 5..7   European team count (0..7)
#   bits 8..    per pot: 1 while the group's slot for that pot is open
# Groups with equal packed state are interchangeable, so a search state is
# the sorted tuple of group states plus the remaining team-type counts per
# pot.  The DFS result for a canonical state is memoised for the lifetime
# of the checker, which also amortises look-ahead across repeated draws.
# ---------------------------------------------------------------------------

_B_HOST = 4
_B_EUR = 5
_EUR_MASK = 7 << _B_EUR
_B_OPEN = 8


class CompletabilityChecker:
    """Exact completability decisions for one (instance, constraint set)."""

    def __init__(self, instance: Instance, constraints: ConstraintSet):
        self.instance = instance
        self.constraints = constraints
        self.n = instance.n
        self.m = instance.m
        self.uppers = [conf for _, conf in _bound_confeds(instance, constraints)]
        self.europe = _europe_id(instance, constraints)
        self.lo, self.hi = EUROPE_BOUNDS
        self.host = instance.host_exclusion

        # team types: (upper bit mask, euro flag, host flag) -> dense code
        upper_bit = {conf: 1 << i for i, conf in enumerate(self.uppers)}
        type_of = {}
        self.type_fields = []  # code -> (upmask, euro, host)
        self.team_type = []
        for t in instance.teams:
            fields = (
                upper_bit.get(t.confederation, 0),
                1 if t.confederation == self.europe else 0,
                1 if t.id in self.host else 0,
            )
            if fields not in type_of:
                type_of[fields] = len(self.type_fields)
                self.type_fields.append(fields)
            self.team_type.append(type_of[fields])
        self.ntypes = len(self.type_fields)
        self.full_pot_counts = []
        for k in range(1, self.m + 1):
            row = [0] * self.ntypes
            for t in instance.pot_teams(k):
                row[self.team_type[t.id]] += 1
            self.full_pot_counts.append(tuple(row))
        # euro supply per type (0/1) for prune arithmetic
        self._euro_types = [f[1] for f in self.type_fields]

        self.empty_group_sig = ((1 << self.m) - 1) << _B_OPEN
        self._memo = {}
        self._trans = {}

    # -- packed-state helpers ------------------------------------------

    def place_sig(self, sig: int, type_code: int, pot_idx: int):
        """Group state after placing a team type, or None if a bound breaks."""
        key = (sig, type_code, pot_idx)
        cached = self._trans.get(key, -1)
        if cached != -1:
            return cached
        upmask, euro, host = self.type_fields[type_code]
        new = sig
        ok = True
        if upmask and sig & upmask:
            ok = False
        else:
            new |= upmask
        if ok and host:
            if sig & (1 << _B_HOST):
                ok = False
            else:
                new |= 1 << _B_HOST
        if ok and euro:
            cnt = (sig & _EUR_MASK) >> _B_EUR
            if cnt + 1 > self.hi and self.europe is not None:
                ok = False
            else:
                new += 1 << _B_EUR
        result = None
        if ok:
            open_bit = 1 << (_B_OPEN + pot_idx)
            if not sig & open_bit:
                result = None  # slot already filled
            else:
                result = new & ~open_bit
        self._trans[key] = result
        return result

    def state_of(self, assignment: Assignment):
        """Canonical (group sigs, remaining type counts) of a partial assignment."""
        sigs = [self.empty_group_sig] * self.n
        remaining = [list(row) for row in self.full_pot_counts]
        for k in range(self.m):
            for g, tid in enumerate(assignment.slots[k]):
                if tid == -1:
                    continue
                tc = self.team_type[tid]
                sig = self.place_sig(sigs[g], tc, k)
                if sig is None:
                    return None  # already violates an upper bound
                sigs[g] = sig
                remaining[k][tc] -= 1
        return tuple(sorted(sigs)), tuple(tuple(r) for r in remaining)

    # -- search ---------------------------------------------------------

    def completable_state(self, sigs, remaining) -> bool:
        memo = self._memo
        key = (sigs, remaining)
        hit = memo.get(key)
        if hit is not None:
            return hit
        result = self._search(sigs, remaining)
        memo[key] = result
        return result

    def _search(self, sigs, remaining) -> bool:
        # locate the first pot that still has teams to place
        pot_idx = -1
        for k, row in enumerate(remaining):
            if any(row):
                pot_idx = k
                break
        if pot_idx < 0:
            return self._final_ok(sigs)
        if not self._prune_ok(sigs, remaining):
            return False
        row = remaining[pot_idx]
        type_code = next(i for i, c in enumerate(row) if c)
        new_row = list(row)
        new_row[type_code] -= 1
        child_rem = remaining[:pot_idx] + (tuple(new_row),) + remaining[pot_idx + 1 :]
        open_bit = 1 << (_B_OPEN + pot_idx)
        tried = set()
        for i, sig in enumerate(sigs):
            if sig in tried or not sig & open_bit:
                continue
            tried.add(sig)
            new_sig = self.place_sig(sig, type_code, pot_idx)
            if new_sig is None:
                continue
            child_sigs = tuple(sorted(sigs[:i] + (new_sig,) + sigs[i + 1 :]))
            if self.completable_state(child_sigs, child_rem):
                return True
        return False

    def _final_ok(self, sigs) -> bool:
        if self.europe is None:
            return True
        lo = self.lo
        return all((s & _EUR_MASK) >> _B_EUR >= lo for s in sigs)

    def _prune_ok(self, sigs, remaining) -> bool:
        # supply per type over all pots
        supply = [0] * self.ntypes
        for row in remaining:
            for i, c in enumerate(row):
                supply[i] += c
        # each group can absorb at most one more team per bound confederation
        for u in range(len(self.uppers)):
            bit = 1 << u
            need = sum(
                c for i, c in enumerate(supply) if c and self.type_fields[i][0] & bit
            )
            if need:
                free = sum(1 for s in sigs if not s & bit)
                if need > free:
                    return False
        host_supply = sum(
            c for i, c in enumerate(supply) if c and self.type_fields[i][2]
        )
        if host_supply:
            free = sum(1 for s in sigs if not s & (1 << _B_HOST))
            if host_supply > free:
                return False
        if self.europe is not None:
            euro_pots = [
                any(c and self._euro_types[i] for i, c in enumerate(row))
                for row in remaining
            ]
            euro_supply = sum(
                c for row in remaining for i, c in enumerate(row) if self._euro_types[i]
            )
            deficit = 0
            absorb = 0
            for s in sigs:
                eur = (s & _EUR_MASK) >> _B_EUR
                open_mask = s >> _B_OPEN
                reachable = eur
                open_count = 0
                for k in range(self.m):
                    if open_mask & (1 << k):
                        open_count += 1
                        if euro_pots[k]:
                            reachable += 1
                if reachable < self.lo:
                    return False
                if eur < self.lo:
                    deficit += self.lo - eur
                absorb += min(open_count, self.hi - eur)
            if deficit > euro_supply or euro_supply > absorb:
                return False
        return True


_checker_cache = {}


def get_checker(instance: Instance, constraints: ConstraintSet) -> CompletabilityChecker:
    key = (id(instance), constraints.scenario)
    checker = _checker_cache.get(key)
    if checker is None or checker.instance is not instance:
        checker = CompletabilityChecker(instance, constraints)
        _checker_cache[key] = checker
    return checker


def completable(instance, constraints, assignment) -> bool:
    """True iff the partial assignment extends to some valid complete one."""
    if check_partial(instance, constraints, assignment):
        return False  # forced violations are permanent
    checker = get_checker(instance, constraints)
    state = checker.state_of(assignment)
    if state is None:
        return False
    return checker.completable_state(*state)
