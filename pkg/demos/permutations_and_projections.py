"""Three ways to measure how far a permutation is from the identity, and how each forgets its last element."""
from sphperm import Metric, Permutation, extensions, lehmer_encode, parse_permutation
from sphperm.perm import project_letter_delete

p = Permutation((2, 5, 1, 4, 3))
print("word        ", p.format())
print("cycles      ", p.format("cycle"))

# statistic, radius; Hamming counts fixed points, Kendall inversions, Cayley cycles
for m in Metric:
    print(f"{m.value:8s} statistic={m.statistic(p)} radius={m.radius(p)}")

# the Lehmer code sums to the inversion count
print("Lehmer code ", lehmer_encode(p), "sum", sum(lehmer_encode(p)))

# order restriction drops the last Lehmer digit; letter deletion removes the value n
print("restrict    ", Metric.KENDALL.project(p).format())
print("delete 5    ", project_letter_delete(p).format())

# cycle deletion removes n from its cycle
q = parse_permutation("(1 5 3)(2 4)")
print("cycle delete", q.format("cycle"), "->", Metric.CAYLEY.project(q).format("cycle"))

# every sigma in S_{n-1} has exactly n preimages
base = Metric.CAYLEY.project(q)
for child in extensions(base, Metric.CAYLEY):
    print("   extension", child.format("cycle"), "cycles:", Metric.CAYLEY.statistic(child))
