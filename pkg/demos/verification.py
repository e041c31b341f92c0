"""Exhaustive and statistical checks: monotonicity, consistency, and why mixtures are not extreme."""
from fractions import Fraction

from sphperm import ExactLaw, HammingAlpha, Metric, check_monotonicity, check_spherical_symmetry, make_rng
from sphperm.verify import bimodal, mixture_fixed_fractions

# larger spheres project to stochastically larger radii
for m in Metric:
    report = check_monotonicity(m, 6)
    print(f"{m.value:8s} {len(report.pairs)} radius pairs, violations: {len(report.violations)}")

# a 50/50 mixture of two alpha-laws is still spherically symmetric and projectively consistent...
a, b = HammingAlpha(Fraction(1, 4)), HammingAlpha(Fraction(3, 4))
mix5 = ExactLaw.from_growth(a, 5).mix(ExactLaw.from_growth(b, 5))
mix4 = ExactLaw.from_growth(a, 4).mix(ExactLaw.from_growth(b, 4))
print("symmetric:", check_spherical_symmetry(mix5, Metric.HAMMING),
      " consistent:", mix5.project(Metric.HAMMING, 4).probs == mix4.probs)

# ...but its fixed-point fraction concentrates at two values instead of one
values = mixture_fixed_fractions([Fraction(1, 4), Fraction(3, 4)], 20_000, 30, make_rng(5))
print("F/n samples:", sorted(round(float(v), 3) for v in values))
print("two clusters:", bimodal(values, [0.25, 0.75], 0.03))
