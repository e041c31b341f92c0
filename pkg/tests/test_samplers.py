import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphperm.exact import limit_law, martin_kernels, sphere_count
from sphperm.perm import Metric, Permutation, all_permutations, cycle_count, from_cycles, reversal
from sphperm.samplers import (
    EnrichedPermutation, Ewens, GrowthProcess, HammingAlpha, Mallows, Uniform, bivariate_chain_step,
    bivariate_transitions, exact_growth_law, make_rng, run_bivariate_chain, sample_batch,
    sample_sphere_uniform, spawn_rngs, step_alpha, step_ewens, step_mallows, step_uniform,
)
from sphperm.samplers import _randbelow
from sphperm.verify import chisquare_against, law_of, law_parameter, total_variation

P = Permutation
GATE = 1e-4

LAWS = [Uniform(), HammingAlpha(Fraction(1, 2)), HammingAlpha(0), HammingAlpha(1),
        HammingAlpha(Fraction(1, 5)), Mallows(Fraction(1, 2)), Mallows(0), Mallows(1), Mallows(3),
        Mallows(math.inf), Ewens(2), Ewens(0), Ewens(1), Ewens(Fraction(1, 3)), Ewens(math.inf)]


def closed_form(law, n):
    metric, param = law_parameter(law)
    return {p: limit_law(metric, param, n, metric.statistic(p)) for p in all_permutations(n)}


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_exact_path_law_equals_closed_form(law):
    for n in range(1, 6):
        exact = exact_growth_law(law, n)
        target = closed_form(law, n)
        assert {p: exact.get(p, 0) for p in target} == target


def test_uniform_first_steps():
    g = GrowthProcess.start(Uniform(), seed=0).step()
    assert g.perm == P((1,))
    assert exact_growth_law(Uniform(), 2) == {P((2, 1)): Fraction(1, 2), P((1, 2)): Fraction(1, 2)}


def test_alpha_edge_cases():
    assert exact_growth_law(HammingAlpha(0), 5) == exact_growth_law(Uniform(), 5)
    assert all(not s.singular for s in exact_growth_law(HammingAlpha(0), 4, enriched=True))
    g = GrowthProcess.start(HammingAlpha(1), seed=3).run(6)
    assert g.perm.is_identity and g.state.singular == frozenset(range(1, 7))
    with pytest.raises(ValueError):
        HammingAlpha(Fraction(3, 2))
    with pytest.raises(ValueError):
        HammingAlpha(-0.1)


def test_mallows_edge_cases():
    assert GrowthProcess.start(Mallows(0), seed=1).run(7).perm == P.identity(7)
    assert GrowthProcess.start(Mallows(math.inf), seed=1).run(7).perm == reversal(P.identity(7))
    assert set(exact_growth_law(Mallows(1), 4).values()) == {Fraction(1, 24)}
    with pytest.raises(ValueError):
        Mallows(-1)


def test_mallows_above_one_is_the_reflected_law():
    hi, lo = exact_growth_law(Mallows(3), 5), exact_growth_law(Mallows(Fraction(1, 3)), 5)
    assert all(hi[p] == lo[reversal(p)] for p in all_permutations(5))


def test_ewens_edge_cases():
    law = exact_growth_law(Ewens(0), 3)
    assert law == {from_cycles([(1, 2, 3)]): Fraction(1, 2), from_cycles([(1, 3, 2)]): Fraction(1, 2)}
    assert exact_growth_law(Ewens(1), 5) == exact_growth_law(Uniform(), 5)
    assert GrowthProcess.start(Ewens(math.inf), seed=0).run(5).perm == P.identity(5)
    with pytest.raises(ValueError):
        Ewens(-2)


def test_step_functions_check_the_law():
    g = GrowthProcess.start(Mallows(Fraction(1, 2)), seed=0)
    assert step_mallows(g).n == 1
    for step in (step_uniform, step_alpha, step_ewens):
        with pytest.raises(TypeError):
            step(g)


@pytest.mark.parametrize("law", LAWS[:12], ids=repr)
def test_successive_states_are_consistent(law):
    g = GrowthProcess.start(law, seed=11)
    prev = None
    for _ in range(12):
        g = g.step()
        if prev is not None:
            assert law.metric.project(g.perm) == prev
        assert all(g.perm(j) == j for j in g.state.singular)
        prev = g.perm


def test_enriched_permutation_rejects_moving_singular_element():
    with pytest.raises(ValueError):
        EnrichedPermutation(P((2, 1, 3)), frozenset({1}))
    EnrichedPermutation(P((2, 1, 3)), frozenset({3}))


def test_same_seed_same_path():
    a = GrowthProcess.start(Ewens(2), seed=5).run(30).perm
    b = GrowthProcess.start(Ewens(2), seed=5).run(30).perm
    assert a == b
    x = sample_batch(Mallows(Fraction(1, 2)), 20, 50, make_rng(9))
    y = sample_batch(Mallows(Fraction(1, 2)), 20, 50, make_rng(9))
    assert np.array_equal(x, y)


def test_spawned_streams_differ():
    r1, r2 = spawn_rngs(1, 2)
    assert r1.integers(0, 2 ** 62) != r2.integers(0, 2 ** 62)


@pytest.mark.parametrize("law", [Uniform(), HammingAlpha(Fraction(1, 2)), Mallows(Fraction(1, 2)),
                                 Mallows(3), Ewens(2), Ewens(Fraction(1, 2))], ids=repr)
def test_batch_sampler_matches_exact_law(law):
    rng = make_rng(20240601)
    words = sample_batch(law, 4, 200_000, rng)
    assert words.shape == (200_000, 4)
    expected = {p.word: float(w) for p, w in exact_growth_law(law, 4).items()}
    assert chisquare_against(words, expected) > GATE


def test_batch_uniform_is_close_in_total_variation():
    words = sample_batch(Uniform(), 4, 10 ** 6, make_rng(77))
    counts = Counter(map(tuple, words.tolist()))
    emp = {w: c / len(words) for w, c in counts.items()}
    assert total_variation(emp, {p.word: 1 / 24 for p in all_permutations(4)}) < 0.005


def test_batch_edge_laws_are_deterministic():
    for law, target in [(HammingAlpha(1), P.identity(6)), (Mallows(0), P.identity(6)),
                        (Mallows(math.inf), reversal(P.identity(6))), (Ewens(math.inf), P.identity(6))]:
        words = sample_batch(law, 6, 20, make_rng(0))
        assert all(tuple(w) == target.word for w in words.tolist())
    cycles = sample_batch(Ewens(0), 6, 200, make_rng(0))
    assert all(cycle_count(Permutation(tuple(w))) == 1 for w in cycles.tolist())


def test_scalar_process_matches_exact_law():
    law = HammingAlpha(Fraction(1, 2))
    g = GrowthProcess.start(law, seed=123)
    counts = Counter()
    for _ in range(6000):
        counts[GrowthProcess(law, g.rng).run(3).perm.word] += 1
    words = np.array([w for w, c in counts.items() for _ in range(c)])
    expected = {p.word: float(w) for p, w in exact_growth_law(law, 3).items()}
    assert chisquare_against(words, expected) > GATE


def test_sphere_examples():
    rng = make_rng(4)
    for n in range(1, 7):
        assert sample_sphere_uniform(Metric.HAMMING, n, 0, rng) == P.identity(n)
    assert sample_sphere_uniform(Metric.KENDALL, 5, 10, rng) == P((5, 4, 3, 2, 1))
    words = sample_sphere_uniform("hamming", 6, 6, rng, size=2000)
    assert all(all(v != j for j, v in enumerate(w, 1)) for w in words.tolist())
    with pytest.raises(ValueError):
        sample_sphere_uniform(Metric.HAMMING, 5, 1, rng)
    with pytest.raises(ValueError):
        sample_sphere_uniform(Metric.CAYLEY, 5, 5, rng)


@pytest.mark.parametrize("metric,n,radius", [(Metric.HAMMING, 5, 5), (Metric.HAMMING, 6, 3),
                                             (Metric.KENDALL, 5, 4), (Metric.CAYLEY, 5, 2)])
def test_sphere_sampler_is_uniform(metric, n, radius):
    k = metric.radius_to_stat(n, radius)
    support = [p.word for p in all_permutations(n) if metric.statistic(p) == k]
    assert len(support) == sphere_count(metric, n, k)
    words = sample_sphere_uniform(metric, n, radius, make_rng(31), size=40 * len(support))
    assert chisquare_against(words, {w: 1 / len(support) for w in support}) > GATE


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(Metric)), st.integers(1, 40), st.data())
def test_sphere_sampler_lands_on_the_sphere(metric, n, data):
    if metric is Metric.KENDALL:
        n = min(n, 25)
    radius = data.draw(st.sampled_from(list(metric.radii(n))))
    p = sample_sphere_uniform(metric, n, radius, make_rng(data.draw(st.integers(0, 2 ** 32))))
    assert metric.radius(p) == radius


def test_large_spheres_are_reachable():
    p = sample_sphere_uniform(Metric.HAMMING, 300, 300, make_rng(0))
    assert all(p(j) != j for j in range(1, 301))
    q = sample_sphere_uniform(Metric.CAYLEY, 200, 190, make_rng(0))
    assert Metric.CAYLEY.radius(q) == 190


def test_projected_sphere_sample_reproduces_the_kernel():
    metric, nu, kappa, n = Metric.CAYLEY, 9, 4, 4
    words = sample_sphere_uniform(metric, nu, metric.stat_to_radius(nu, kappa), make_rng(8), size=20_000)
    stats = Counter(metric.statistic(metric.project_to(Permutation(tuple(w)), n)) for w in words.tolist())
    kern = martin_kernels(metric, nu, kappa, n)
    for k in metric.stat_values(n):
        expected = float(kern.get((n, k), 0) * sphere_count(metric, n, k))
        assert abs(stats[k] / len(words) - expected) < 4 * math.sqrt(expected * (1 - expected) / len(words)) + 1e-9


def test_randbelow_handles_huge_bounds():
    rng = make_rng(2)
    bound = math.factorial(60)
    draws = [_randbelow(rng, bound) for _ in range(2000)]
    assert all(0 <= d < bound for d in draws)
    assert 0.4 < sum(d < bound // 2 for d in draws) / 2000 < 0.6
    assert {_randbelow(rng, 3) for _ in range(200)} == {0, 1, 2}


def test_bivariate_examples():
    assert bivariate_chain_step(2, 1, 5, 1) == (3, 1)
    assert bivariate_chain_step(0, 0, 1, 0) == (0, 1)
    with pytest.raises(ValueError):
        bivariate_chain_step(3, 2, 5, Fraction(1, 2))
    for s in range(4):
        for r in range(4 - s):
            assert sum(p for _, p in bivariate_transitions(s, r, 5, Fraction(1, 3))) == 1


def exact_chain_law(n, alpha):
    law = {(0, 0): Fraction(1)}
    for m in range(1, n + 1):
        nxt = {}
        for (s, r), w in law.items():
            for state, p in bivariate_transitions(s, r, m, alpha):
                nxt[state] = nxt.get(state, 0) + w * p
        law = nxt
    return law


def test_bivariate_chain_agrees_with_the_enriched_process():
    alpha = Fraction(1, 2)
    for n in range(1, 7):
        from_process = {}
        for state, w in exact_growth_law(HammingAlpha(alpha), n, enriched=True).items():
            s = len(state.singular)
            key = (s, sum(state.perm(j) == j for j in range(1, n + 1)) - s)
            from_process[key] = from_process.get(key, 0) + w
        assert exact_chain_law(n, alpha) == from_process


def test_bivariate_chain_sampler_matches_its_law():
    sr = run_bivariate_chain(5, Fraction(1, 2), 10 ** 6, make_rng(5))
    emp = Counter(map(tuple, sr.tolist()))
    exact = exact_chain_law(5, Fraction(1, 2))
    assert total_variation({k: v / len(sr) for k, v in emp.items()}, exact) < 0.005
    scalar = Counter()
    rng = make_rng(6)
    for _ in range(3000):
        s = r = 0
        for m in range(1, 6):
            s, r = bivariate_chain_step(s, r, m, Fraction(1, 2), rng)
        scalar[(s, r)] += 1
    assert total_variation({k: v / 3000 for k, v in scalar.items()}, exact) < 0.05


def test_law_of_matches_path_law():
    for law in (HammingAlpha(Fraction(1, 2)), Mallows(Fraction(1, 2)), Ewens(2)):
        assert law_of(law, 4) == {p.word: w for p, w in exact_growth_law(law, 4).items()}


def _project_words(words, metric):
    """Vectorised one-step projection of an (N, n) word array."""
    n = words.shape[1]
    if metric is Metric.KENDALL:
        last = words[:, -1:]
        head = words[:, :-1]
        return head - (head > last)
    head = words[:, :-1].copy()
    rows, cols = np.nonzero(head == n)
    head[rows, cols] = words[rows, n - 1]
    return head


def _statistic_counts(words, metric):
    n = words.shape[1]
    lut = {}
    for p in all_permutations(n):
        lut[sum(v * (n + 1) ** i for i, v in enumerate(p.word))] = metric.statistic(p)
    codes = (words.astype(np.int64) * (n + 1) ** np.arange(n)).sum(axis=1)
    uniq, counts = np.unique(codes, return_counts=True)
    out = Counter()
    for c, m in zip(uniq.tolist(), counts.tolist()):
        out[lut[c]] += m
    return out


@pytest.mark.parametrize("law", [HammingAlpha(Fraction(1, 2)), Mallows(Fraction(1, 2)), Ewens(2)], ids=repr)
def test_monte_carlo_projection_consistency_at_seven(law):
    size = 10 ** 6
    words = sample_batch(law, 7, size, make_rng(70))
    projected = _project_words(words, law.metric)
    counts = _statistic_counts(projected, law.metric)
    exact = {}
    for p, w in exact_growth_law(law, 6).items():
        k = law.metric.statistic(p)
        exact[k] = exact.get(k, 0) + float(w)
    assert total_variation({k: v / size for k, v in counts.items()}, exact) < 0.005
