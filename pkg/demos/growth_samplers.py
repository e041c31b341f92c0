"""Growing random permutations one element at a time, and drawing uniformly from a sphere."""
from collections import Counter
from fractions import Fraction

from sphperm import (Ewens, GrowthProcess, HammingAlpha, Mallows, Metric, exact_growth_law, make_rng,
                     sample_batch, sample_sphere_uniform)

# one realisation of the alpha-process; singular elements stay fixed forever
g = GrowthProcess.start(HammingAlpha(Fraction(1, 2)), seed=1)
for _ in range(8):
    g = g.step()
    print(f"n={g.n}  {g.perm.format('cycle'):28s} singular={sorted(g.state.singular)}")

# exact path law of Ewens(2) on S_3 depends only on the cycle count
for p, w in sorted(exact_growth_law(Ewens(2), 3).items()):
    print(p.format("cycle"), w)

# batch sampling is vectorised over replicates
rng = make_rng(2026)
words = sample_batch(Mallows(Fraction(1, 2)), 4, 100_000, rng)
freq = Counter(map(tuple, words.tolist()))
print("most common under Mallows(1/2):", freq.most_common(3))

# uniform element of the Cayley sphere of radius 3 in S_6 (three cycles)
for _ in range(3):
    p = sample_sphere_uniform(Metric.CAYLEY, 6, 3, rng)
    print("sphere draw", p.format("cycle"))
