"""The six-team worked example, solved exactly.

Two pots of three teams; team pairs (1,4) and (3,6) may not share a group.
The script shows the dead end a naive sequential draw would hit, the Skip
mechanism's look-ahead avoiding it, and the exact outcome distributions of
both mechanisms by full enumeration.
"""

import drawlab as dl

inst = dl.build_instance(
    [
        [("1", "Africa"), ("2", "North America"), ("3", "Asia")],
        [("4", "Africa"), ("5", "South America"), ("6", "Asia")],
    ],
    name="example",
)
cs = dl.scenario_constraints(24)  # constraints A and B bind the two pairs

print("Draw order 1,2,3 then 4,5,6:")
out = dl.skip_draw_with_orders(inst, cs, [[0, 1, 2], [3, 4, 5]])
for tid, group, skipped in out.trace:
    note = f" (skipped {', '.join('ABC'[g] for g in skipped)})" if skipped else ""
    print(f"  team {tid + 1} -> group {'ABC'[group]}{note}")
groups = [tuple(t + 1 for t in g) for g in out.assignment.comembership()]
print(f"  final groups: {groups}")
print()
print("Team 5's natural spot was group A, but that would leave team 6 with")
print("only group C, where team 3 sits: the look-ahead forces the skip.")
print()

uni = dl.enumerate_uniform(inst, cs)
skp = dl.enumerate_skip(inst, cs)
print(f"Valid labelled assignments: {uni.feasible_count} of {uni.baseline_count}")
print(f"Outcome classes and probabilities (uniform vs skip over "
      f"{skp.denominator} draw orders):")
for key in sorted(uni.classes):
    label = [tuple(t + 1 for t in g) for g in key]
    print(f"  {label}: uniform {uni.classes[key]}, skip {skp.classes[key]}")
print()
print("Pairwise co-assignment probabilities, pots 1 x 2:")
print("  uniform:")
for row in uni.matrices.matrix(1, 2):
    print("   ", [str(x) for x in row])
print("  skip:")
for row in skp.matrices.matrix(1, 2):
    print("   ", [str(x) for x in row])
print()
print(f"Inequality I: uniform {uni.inequality} = {float(uni.inequality):.5f}, "
      f"skip {skp.inequality} = {float(skp.inequality):.5f}")
print("The sequential procedure concentrates probability on the outcome the")
print("alphabetical fill reaches first, so its inequality differs from the")
print("uniform benchmark even on six teams.")
