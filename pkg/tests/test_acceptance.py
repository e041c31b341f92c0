"""End-to-end acceptance gate: one test and one PASS/FAIL line per criterion.

Each test also enforces its wall-clock budget.  Run alone with
``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the summary.
"""
import time
from fractions import Fraction

import pytest

from sphperm import suites
from sphperm.exact import (backward_recursion_check, extension_counts, hamming_limit_table,
                           hamming_recursion_check, reconstruct_from_derangement_column, sphere_count)
from sphperm.perm import Metric, all_permutations
from sphperm.samplers import Ewens, HammingAlpha, Mallows, exact_growth_law, make_rng, sample_batch, sample_sphere_uniform, spawn_rngs
from sphperm.verify import (brute_force_extension_counts, brute_force_sphere_count, chisquare_against,
                            kernel_matches_enumeration)

SEED = 20261014
GATE = 1e-4


def record(acceptance, number, title, passed, started, budget, detail=""):
    elapsed = time.perf_counter() - started
    within = elapsed <= budget
    status = "PASS" if passed and within else "FAIL"
    line = f"{status}  criterion {number}: {title}  ({elapsed:.1f}s of {budget}s)"
    if detail:
        line += f"  [{detail}]"
    acceptance.append(line)
    print(line)
    assert passed, line
    assert within, line


def test_criterion_1_exhaustive_oracle_equivalence(acceptance):
    t0 = time.perf_counter()
    bad = []
    for m in Metric:
        for nu in range(1, 8):
            for k in range(nu * nu + 1):
                if brute_force_sphere_count(m, nu, k) != sphere_count(m, nu, k):
                    bad.append(("sphere", m.value, nu, k))
            for kappa in m.stat_values(nu):
                table = extension_counts(m, nu, kappa)
                brute = brute_force_extension_counts(m, nu, kappa)
                for n in range(1, nu + 1):
                    if any(brute.get((n, s), 0) != table[(n, m.statistic(s))] for s in all_permutations(n)):
                        bad.append(("extension", m.value, nu, kappa, n))
            if not kernel_matches_enumeration(m, nu):
                bad.append(("projected law", m.value, nu))
    record(acceptance, 1, "exhaustive oracle equivalence, nu <= 7", not bad, t0, 60,
           f"{len(bad)} mismatches")


def test_criterion_2_recursions(acceptance):
    t0 = time.perf_counter()
    forward = all(hamming_recursion_check(n) for n in range(2, 13))
    backward = {}
    rebuilt = {}
    for alpha in (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1)):
        table = hamming_limit_table(alpha, 20)
        backward[alpha] = backward_recursion_check(table, 20)
        column = {n: table[(n, 0)] for n in range(2, 21)}
        rebuilt[alpha] = reconstruct_from_derangement_column(column, 20) == table
    ok = forward and all(backward.values()) and all(rebuilt.values())
    record(acceptance, 2, "count recursion n <= 12, backward recursion and rebuild n <= 20", ok, t0, 5,
           f"forward={forward} backward={all(backward.values())} rebuild={all(rebuilt.values())}")


def test_criterion_3_monotonicity(acceptance):
    t0 = time.perf_counter()
    checks = list(suites.monotonicity(max_nu=7))
    failed = [c.name for c in checks if not c.passed]
    record(acceptance, 3, "stochastic monotonicity, all metrics, nu <= 7, plus interlacing oracle",
           not failed, t0, 120, f"{len(checks)} checks, failed: {failed or 'none'}")


def test_criterion_4_kernel_convergence(acceptance):
    t0 = time.perf_counter()
    checks = list(suites.convergence())
    failed = [c.name for c in checks if not c.passed]
    details = "; ".join(f"{c.name}: {c.detail}" for c in checks if c.detail)
    record(acceptance, 4, "Martin kernel convergence and alternating-regime detection", not failed, t0, 600,
           f"failed: {failed or 'none'}; {details}")


def test_criterion_5_sampler_laws(acceptance):
    t0 = time.perf_counter()
    rngs = iter(spawn_rngs(SEED, 32))
    pvalues = {}
    for law in (HammingAlpha(Fraction(1, 2)), Mallows(Fraction(1, 2)), Ewens(2)):
        for n in range(1, 5):
            words = sample_batch(law, n, 10 ** 6, next(rngs))
            expected = {p.word: float(w) for p, w in exact_growth_law(law, n).items()}
            pvalues[f"{law!r}/n={n}"] = chisquare_against(words, expected)
    for metric, n, radius in ((Metric.HAMMING, 6, 6), (Metric.KENDALL, 5, 5), (Metric.CAYLEY, 6, 3)):
        k = metric.radius_to_stat(n, radius)
        support = [p.word for p in all_permutations(n) if metric.statistic(p) == k]
        words = sample_sphere_uniform(metric, n, radius, next(rngs), size=10 ** 6)
        pvalues[f"sphere/{metric.value}/n={n}/r={radius}"] = chisquare_against(
            words, {w: 1 / len(support) for w in support})
    worst = min(pvalues, key=pvalues.get)
    record(acceptance, 5, "sampler chi-square at 10^6 samples, p > 1e-4 each",
           all(p > GATE for p in pvalues.values()), t0, 600,
           f"{len(pvalues)} tests, smallest p={pvalues[worst]:.3g} ({worst})")


def test_criterion_6_asymptotics(acceptance):
    t0 = time.perf_counter()
    checks = list(suites.asymptotics(seed=SEED))
    failed = [c.name for c in checks if not c.passed]
    record(acceptance, 6, "almost-sure limits of F/n, I/n, I/n^2, C/log n", not failed, t0, 600,
           "; ".join(c.detail for c in checks))


def test_criterion_7_consistency(acceptance):
    t0 = time.perf_counter()
    checks = list(suites.symmetry(max_nu=5)) + list(suites.consistency(max_nu=5))
    failed = [c.name for c in checks if not c.passed]
    record(acceptance, 7, "projection symmetry, sampler consistency, backward transitions, nu <= 5",
           not failed, t0, 60, f"{len(checks)} checks, failed: {failed or 'none'}")
