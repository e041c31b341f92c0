"""Sphere counts, extension counts and Martin kernels in exact arithmetic, and their limits."""
from fractions import Fraction

from sphperm import Metric, count_table, limit_law, martin_kernel, sphere_count
from sphperm.verify import convergence_experiment, linear_regime, mallows_regime

# rows of the three count tables at n = 5
for m in Metric:
    print(m.value, count_table(m, 5, n_min=5).row(5))

# no permutation moves exactly one point
print("D(7, 6) =", sphere_count(Metric.HAMMING, 7, 6))

# kernel of a derangement sphere in S_5 seen from S_3; one exact probability per fixed-point count
for k in (0, 1, 3):
    print(f"p^(5,0)_(3,{k}) =", martin_kernel(Metric.HAMMING, 5, 0, 3, k))

# half the points fixed: the kernel tends to (1/2)^3 / 3! = 1/48
report = convergence_experiment(Metric.HAMMING, linear_regime("1/2"), 3, [50, 100, 200, 400], k_values=[0], n_min=3)
for nu, kappa, n, k, num, den, value, limit, err in report.rows:
    print(f"nu={nu:4d} kappa={kappa:3d} kernel={value:.6f} limit={limit:.6f} err={err:.2e}")

# Kendall with kappa = nu inversions sits in the q = 1/2 regime; limit q/[2]_q = 1/3
report = convergence_experiment(Metric.KENDALL, mallows_regime("1/2"), 2, [100, 200, 400], k_values=[1], n_min=2)
print("kendall kernels", [round(r[6], 5) for r in report.rows], "->", limit_law(Metric.KENDALL, Fraction(1, 2), 2, 1))
