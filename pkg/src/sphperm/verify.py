"""Verification harness: exhaustive checks on small S_n, Monte Carlo law tests,
and Martin-kernel convergence experiments.

Exact laws are dictionaries ``Permutation -> Fraction`` wrapped in
:class:`ExactLaw`.  Exhaustive routines enumerate S_nu and are capped at
``MAX_EXHAUSTIVE_NU`` (8 by default, 40320 permutations).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from . import exact
from .exact import limit_law, martin_kernels, sphere_count
from .perm import Metric, Permutation, all_permutations
from .samplers import (Ewens, HammingAlpha, Mallows, Uniform, _truncated_geometric,
                       exact_growth_law, make_rng, sample_batch)

MAX_EXHAUSTIVE_NU = 8


class ExhaustiveLimitError(ValueError):
    """Raised when an exhaustive computation would enumerate too large an S_nu."""


# -- exact laws -------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactLaw:
    """Exact probability law on S_n."""

    n: int
    probs: Mapping[Permutation, Fraction]

    def __post_init__(self):
        if any(p.n != self.n for p in self.probs):
            raise ValueError(f"support is not contained in S_{self.n}")
        if any(w < 0 for w in self.probs.values()):
            raise ValueError("negative probability")
        if sum(self.probs.values()) != 1:
            raise ValueError("probabilities do not sum to 1")

    def __getitem__(self, p: Permutation) -> Fraction:
        return self.probs.get(p, Fraction(0))

    @classmethod
    def uniform(cls, n: int) -> "ExactLaw":
        w = Fraction(1, math.factorial(n))
        return cls(n, {p: w for p in all_permutations(n)})

    @classmethod
    def point_mass(cls, p: Permutation) -> "ExactLaw":
        return cls(p.n, {p: Fraction(1)})

    @classmethod
    def from_growth(cls, law, n: int) -> "ExactLaw":
        return cls(n, {p: Fraction(v) for p, v in exact_growth_law(law, n).items() if v})

    def mix(self, other: "ExactLaw", weight=Fraction(1, 2)) -> "ExactLaw":
        """weight * self + (1 - weight) * other."""
        if not 0 <= weight <= 1:
            raise ValueError(f"mixture weight must lie in [0, 1], got {weight}")
        keys = set(self.probs) | set(other.probs)
        return ExactLaw(self.n, {p: weight * self[p] + (1 - weight) * other[p] for p in keys})

    def project(self, metric: Metric, n: int) -> "ExactLaw":
        out: dict = {}
        for p, w in self.probs.items():
            s = metric.project_to(p, n)
            out[s] = out.get(s, 0) + w
        return ExactLaw(n, out)

    def statistic_law(self, metric: Metric) -> dict[int, Fraction]:
        out: dict = {}
        for p, w in self.probs.items():
            k = metric.statistic(p)
            out[k] = out.get(k, 0) + w
        return dict(sorted(out.items()))


def _metric(m) -> Metric:
    return Metric.parse(m)


def _sphere(metric: Metric, nu: int, kappa: int) -> list[Permutation]:
    return [p for p in _all(nu) if metric.statistic(p) == kappa]


@lru_cache(maxsize=16)
def _all(nu: int) -> tuple[Permutation, ...]:
    return tuple(all_permutations(nu))


def sphere_law(metric, nu: int, kappa: int) -> ExactLaw:
    """Uniform law on the sphere {statistic = kappa} of S_nu."""
    metric = _metric(metric)
    members = _sphere(metric, nu, kappa)
    if not members:
        raise ValueError(f"empty {metric.value} sphere: nu={nu}, statistic={kappa}")
    w = Fraction(1, len(members))
    return ExactLaw(nu, {p: w for p in members})


def exact_projected_law(metric, nu: int, kappa: int, n: int,
                        max_nu: int = MAX_EXHAUSTIVE_NU) -> ExactLaw:
    """Law of f_{nu -> n} applied to a uniform element of the statistic-kappa sphere in S_nu."""
    metric = _metric(metric)
    if nu > max_nu:
        raise ExhaustiveLimitError(f"nu={nu} exceeds the exhaustive cap {max_nu}")
    return sphere_law(metric, nu, kappa).project(metric, n)


def check_spherical_symmetry(law: ExactLaw, metric) -> bool:
    """True iff the law is constant on every sphere of S_n (zero outside the support included)."""
    metric = _metric(metric)
    level: dict[int, Fraction] = {}
    for p in _all(law.n) if law.n <= MAX_EXHAUSTIVE_NU else law.probs:
        k = metric.statistic(p)
        w = law[p]
        if level.setdefault(k, w) != w:
            return False
    return True


# -- stochastic order ----------------------------------------------------------------------

def stochastic_dominance(upper: Mapping[int, Fraction], lower: Mapping[int, Fraction]):
    """Return (holds, witness) for ``upper >=_st lower``.

    ``witness`` is None or (x, P(upper >= x), P(lower >= x)) at the first violation.
    """
    support = sorted(set(upper) | set(lower))
    tail_u = tail_l = Fraction(0)
    for x in reversed(support):
        tail_u += upper.get(x, 0)
        tail_l += lower.get(x, 0)
        if tail_u < tail_l:
            return False, (x, tail_u, tail_l)
    return True, None


@dataclass
class StochOrderReport:
    """Dominance verdicts for projected radius laws, one per (r, r', n) with r >= r'."""

    metric: Metric
    nu: int
    pairs: list[tuple[int, int, int]] = field(default_factory=list)
    verdicts: list[bool] = field(default_factory=list)
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.verdicts)

    @property
    def violations(self) -> list:
        return [(p, w) for p, v, w in zip(self.pairs, self.verdicts, self.witnesses) if not v]


def _radius_law(metric: Metric, law: ExactLaw) -> dict[int, Fraction]:
    return {metric.stat_to_radius(law.n, k): w for k, w in law.statistic_law(metric).items()}


def check_monotonicity(metric, nu: int) -> StochOrderReport:
    """Exhaustive stochastic monotonicity of |f_{nu -> n}(U_{nu,r})| in r, all r >= r', n < nu."""
    metric = _metric(metric)
    if nu > MAX_EXHAUSTIVE_NU:
        raise ExhaustiveLimitError(f"nu={nu} exceeds the exhaustive cap {MAX_EXHAUSTIVE_NU}")
    report = StochOrderReport(metric, nu)
    radii = metric.radii(nu)
    projected = {}
    for r in radii:
        law = sphere_law(metric, nu, metric.radius_to_stat(nu, r))
        for n in range(1, nu):
            projected[(r, n)] = _radius_law(metric, law.project(metric, n))
    for n in range(1, nu):
        for i, r in enumerate(radii):
            for r2 in radii[: i + 1]:
                holds, witness = stochastic_dominance(projected[(r, n)], projected[(r2, n)])
                report.pairs.append((r, r2, n))
                report.verdicts.append(holds)
                report.witnesses.append(witness)
    return report


def check_interlacing_lemma(law_v: Mapping[int, Fraction], k: int, total: int | None = None) -> bool:
    """V | V+U = total+1  dominates  V | V+U = total, for U uniform on {1..k} independent of V.

    ``total`` defaults to ``k``.  Raises ValueError when a conditioning event is null.
    """
    if k < 1:
        raise ValueError("U needs a nonempty range")
    if total is None:
        total = k

    def conditional(s):
        # P(V = v, U = s - v) = P(V = v) / k when 1 <= s - v <= k
        w = {v: p for v, p in law_v.items() if p and 1 <= s - v <= k}
        z = sum(w.values())
        if not z:
            raise ValueError(f"conditioning event V+U={s} has probability 0")
        return {v: Fraction(p) / z for v, p in w.items()}

    return stochastic_dominance(conditional(total + 1), conditional(total))[0]


def check_mallows_interlacing(nu: int) -> bool:
    """Lehmer-code form of the Kendall monotonicity step for every size j <= nu.

    V is the inversion count of a uniform permutation of [j-1] (Mahonian law),
    U - 1 the last code digit, uniform on {0..j-1}.  Adjacent spheres kappa+1
    and kappa of S_j must yield dominating projected inversion laws.
    """
    for j in range(2, nu + 1):
        row = exact.mahonian_row(j - 1)
        law_v = {v: Fraction(c, math.factorial(j - 1)) for v, c in enumerate(row)}
        top = j * (j - 1) // 2
        for kappa in range(top):
            if not check_interlacing_lemma(law_v, j, total=kappa + 1):
                return False
    return True


# -- backward transitions and consistency ----------------------------------------------------

def backward_transitions(metric, law: ExactLaw, n: int) -> dict[int, dict[int, Fraction]]:
    """P(statistic of f_{nu -> n}(Pi) = k | statistic of Pi = kappa), keyed by kappa then k."""
    metric = _metric(metric)
    joint: dict = {}
    for p, w in law.probs.items():
        if not w:
            continue
        key = (metric.statistic(p), metric.statistic(metric.project_to(p, n)))
        joint[key] = joint.get(key, 0) + w
    out: dict = {}
    for (kappa, k), w in joint.items():
        out.setdefault(kappa, {})[k] = w
    for row in out.values():
        z = sum(row.values())
        for k in row:
            row[k] /= z
    return out


def backward_transition_check(metric, law_a: ExactLaw, law_b: ExactLaw, n: int) -> bool:
    """Both spherically symmetric laws on S_nu induce the same backward chain nu -> n."""
    metric = _metric(metric)
    if law_a.n != law_b.n:
        raise ValueError("laws live on different S_nu")
    for law in (law_a, law_b):
        if not check_spherical_symmetry(law, metric):
            raise ValueError("input law is not spherically symmetric")
    if n == law_a.n:
        return True
    ta = backward_transitions(metric, law_a, n)
    tb = backward_transitions(metric, law_b, n)
    return all(ta[kappa] == tb[kappa] for kappa in set(ta) & set(tb))


def check_projection_consistency(law, n_max: int) -> bool:
    """Exact path laws satisfy law(Pi_n) o f_n^{-1} = law(Pi_{n-1}) for 2 <= n <= n_max."""
    prev = ExactLaw.from_growth(law, 1)
    for n in range(2, n_max + 1):
        cur = ExactLaw.from_growth(law, n)
        if cur.project(law.metric, n - 1).probs != prev.probs:
            return False
        prev = cur
    return True


def check_sufficiency(law: ExactLaw, metric) -> bool:
    """Conditioned on the radius, the law is uniform on the sphere."""
    metric = _metric(metric)
    by_k: dict[int, list] = {}
    for p in _all(law.n):
        by_k.setdefault(metric.statistic(p), []).append(law[p])
    for k, ws in by_k.items():
        z = sum(ws)
        if z and any(w / z != Fraction(1, sphere_count(metric, law.n, k)) for w in ws):
            return False
    return True


def brute_force_extension_counts(metric, nu: int, kappa: int) -> dict[tuple[int, Permutation], int]:
    """(n, sigma) -> number of pi in S_nu with statistic kappa and f_{nu -> n}(pi) = sigma."""
    metric = _metric(metric)
    out: dict = {}
    for p in _sphere(metric, nu, kappa):
        s = p
        out[(nu, s)] = out.get((nu, s), 0) + 1
        while s.n > 1:
            s = metric.project(s)
            out[(s.n, s)] = out.get((s.n, s), 0) + 1
    return out


def brute_force_sphere_count(metric, n: int, k: int) -> int:
    metric = _metric(metric)
    return sum(1 for p in _all(n) if metric.statistic(p) == k)


def kernel_matches_enumeration(metric, nu: int) -> bool:
    """Projected sphere laws from enumeration equal the Martin kernel, for all kappa, n, k."""
    metric = _metric(metric)
    for kappa in metric.stat_values(nu):
        kern = martin_kernels(metric, nu, kappa)
        law = sphere_law(metric, nu, kappa)
        for n in range(1, nu + 1):
            proj = law.project(metric, n)
            for p in _all(n):
                if proj[p] != kern.get((n, metric.statistic(p)), 0):
                    return False
    return True


# -- Monte Carlo law tests ---------------------------------------------------------------------

def empirical_counts(words: np.ndarray) -> dict[tuple[int, ...], int]:
    uniq, counts = np.unique(words, axis=0, return_counts=True)
    return {tuple(int(x) for x in u): int(c) for u, c in zip(uniq, counts)}


def chisquare_against(words: np.ndarray, expected: Mapping[tuple[int, ...], float]) -> float:
    """Pearson chi-square p-value of sampled words against an exact law (zero cells must be empty)."""
    counts = empirical_counts(words)
    support = [w for w, p in expected.items() if p > 0]
    if any(w not in expected or expected[w] <= 0 for w in counts):
        return 0.0
    if len(support) == 1:
        return 1.0
    total = len(words)
    obs = np.array([counts.get(w, 0) for w in support], dtype=float)
    exp = np.array([float(expected[w]) for w in support]) * total
    return float(stats.chisquare(obs, exp * (obs.sum() / exp.sum())).pvalue)


def total_variation(a: Mapping, b: Mapping) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(float(a.get(x, 0)) - float(b.get(x, 0))) for x in keys)


def law_of(law, n: int) -> dict[tuple[int, ...], Fraction]:
    """Closed-form marginal of an extreme law at size n (keys are words)."""
    metric, param = law_parameter(law)
    return {p.word: limit_law(metric, param, n, metric.statistic(p)) for p in _all(n)}


def law_parameter(law):
    if isinstance(law, Uniform):
        return Metric.HAMMING, Fraction(0)
    if isinstance(law, HammingAlpha):
        return Metric.HAMMING, law.alpha
    if isinstance(law, Mallows):
        return Metric.KENDALL, law.q
    return Metric.CAYLEY, law.theta


# -- convergence experiments -------------------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    """A sequence nu -> kappa(nu) together with the parameter of the expected limit (None: no limit)."""

    name: str
    kappa: Callable[[int], int]
    param: object = None


def linear_regime(alpha) -> Regime:
    """Hamming: kappa = round(alpha * nu) fixed points."""
    a = exact.to_param(alpha)
    return Regime(f"alpha={alpha}", lambda nu: round(a * nu), a)


def mallows_regime(q) -> Regime:
    """Kendall: kappa ~ q nu/(1-q) for q < 1, reflected C(nu,2) - kappa ~ nu/(q-1) for q > 1."""
    q = exact.to_param(q)
    if q == 1:
        return Regime("q=1", lambda nu: nu * (nu - 1) // 4, q)
    if q < 1:
        return Regime(f"q={q}", lambda nu: round(q * nu / (1 - q)), q)
    inv = 1 / q
    return Regime(f"q={q}", lambda nu: nu * (nu - 1) // 2 - round(inv * nu / (1 - inv)), q)


def ewens_regime(theta) -> Regime:
    """Cayley: kappa = round(theta * log nu) cycles (kept >= 1)."""
    t = exact.to_param(theta)
    return Regime(f"theta={theta}", lambda nu: max(1, round(float(t) * math.log(nu))), t)


def alternating_regime(a, b) -> Regime:
    """Hamming regime taking round(a nu) at even positions of the nu list and round(b nu) at odd ones.

    The position is encoded by the caller through :func:`nonconvergence_experiment`.
    """
    a, b = exact.to_param(a), exact.to_param(b)
    return Regime(f"alternating={a},{b}", lambda nu, first=True: round((a if first else b) * nu))


REPORT_HEADER = ["nu", "kappa", "n", "k", "exact_num", "exact_den", "float_value", "limit_value", "abs_err"]


@dataclass
class ConvergenceReport:
    metric: Metric
    regime: str
    rows: list[list] = field(default_factory=list)

    def errors(self, n: int, k: int) -> list[float]:
        return [r[8] for r in self.rows if r[2] == n and r[3] == k]

    def relative_errors(self, n: int, k: int) -> list[float]:
        return [r[8] / r[7] if r[7] else (math.inf if r[8] > 0 else 0.0)
                for r in self.rows if r[2] == n and r[3] == k]

    def cells(self) -> list[tuple[int, int]]:
        return sorted({(r[2], r[3]) for r in self.rows})

    def decreasing(self) -> bool:
        """Error strictly decreases along nu in every (n, k) cell whose limit is nonzero."""
        for n, k in self.cells():
            errs = self.errors(n, k)
            if max(errs) == 0:
                continue
            if any(b >= a for a, b in zip(errs, errs[1:])):
                return False
        return True

    def total_variation(self, nu: int, n: int) -> float:
        """Distance between the projected sphere law and the limit law on S_n at a given nu."""
        tv = 0.0
        for r in self.rows:
            if r[0] == nu and r[2] == n:
                tv += exact.sphere_count(self.metric, n, r[3]) * r[8]
        return tv / 2

    def to_csv(self, fh=None):
        return exact._write_csv(REPORT_HEADER, self.rows, fh)


def convergence_experiment(metric, regime: Regime, n_max: int, nu_list: Sequence[int],
                           k_values: Iterable[int] | None = None, n_min: int = 1) -> ConvergenceReport:
    """Exact kernel p^{nu,kappa(nu)}_{n,k} against the limit law, for n_min <= n <= n_max."""
    metric = _metric(metric)
    report = ConvergenceReport(metric, regime.name)
    ks = None if k_values is None else sorted(set(k_values))
    for nu in nu_list:
        kappa = regime.kappa(nu)
        kern = martin_kernels(metric, nu, kappa, n_max)
        for n in range(n_min, n_max + 1):
            for k in metric.stat_values(n) if ks is None else ks:
                v = kern.get((n, k), Fraction(0))
                lim = limit_law(metric, regime.param, n, k) if regime.param is not None else None
                err = abs(float(v - lim)) if lim is not None else float("nan")
                report.rows.append([nu, kappa, n, k, v.numerator, v.denominator, float(v),
                                    float(lim) if lim is not None else float("nan"), err])
    return report


@dataclass
class NonConvergenceReport:
    values_a: list[float]
    values_b: list[float]
    drift: float
    gap: float

    @property
    def nonconvergent(self) -> bool:
        return self.gap > 10 * self.drift


def nonconvergence_experiment(metric, regime: Regime, n: int, k: int, nu_list: Sequence[int]
                              ) -> NonConvergenceReport:
    """Kernel values on the two interleaved subsequences of an alternating regime.

    Flags non-convergence when the gap between the last values of the two
    subsequences exceeds 10x the largest within-subsequence drift over the
    last two points of each.
    """
    metric = _metric(metric)
    a_vals, b_vals = [], []
    for i, nu in enumerate(nu_list):
        kappa = regime.kappa(nu, i % 2 == 0)
        v = float(martin_kernels(metric, nu, kappa, n).get((n, k), 0))
        (a_vals if i % 2 == 0 else b_vals).append(v)
    drift = max(abs(a_vals[-1] - a_vals[-2]), abs(b_vals[-1] - b_vals[-2]))
    return NonConvergenceReport(a_vals, b_vals, drift, abs(a_vals[-1] - b_vals[-1]))


# -- asymptotics --------------------------------------------------------------------------------------

@dataclass
class AsymptoticsSummary:
    law: str
    n: int
    replicates: int
    statistic: str
    values: np.ndarray = field(repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def stderr(self) -> float:
        if len(self.values) < 2:
            return float("nan")
        return float(np.std(self.values, ddof=1) / math.sqrt(len(self.values)))

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return self.mean - z * self.stderr, self.mean + z * self.stderr


def _hamming_fixed_fraction(alpha, n, replicates, rng, chunk=100):
    out = []
    for start in range(0, replicates, chunk):
        size = min(chunk, replicates - start)
        words = sample_batch(HammingAlpha(alpha), n, size, rng)
        out.append((words == np.arange(1, n + 1)).sum(axis=1) / n)
    return np.concatenate(out)


def _mallows_inversions(q, n, replicates, rng):
    # I(Pi_n) is the sum of the independent Lehmer digits eta_1..eta_n
    q = float(q) if q != math.inf else math.inf
    total = np.zeros(replicates)
    for m in range(n):
        total += _truncated_geometric(q, replicates, m, rng)
    return total


def _mallows_inversions_fast(q, n, replicates, rng):
    if q == 1:
        total = np.zeros(replicates)
        for start in range(0, n, 4096):
            m = np.arange(start, min(n, start + 4096))
            total += (rng.random((replicates, len(m))) * (m + 1)).astype(np.int64).sum(axis=1)
        return total
    if q > 1 or q == 0 or q == math.inf:
        return _mallows_inversions(q, n, replicates, rng)
    lq = math.log(q)
    total = np.zeros(replicates)
    for start in range(0, n, 4096):
        m = np.arange(start, min(n, start + 4096))
        u = rng.random((replicates, len(m)))
        tail = -np.expm1((m + 1) * lq)
        eta = np.clip(np.floor(np.log1p(-u * tail) / lq), 0, m)
        total += eta.sum(axis=1)
    return total


def _ewens_cycles(theta, n, replicates, rng, block=1 << 16):
    # C(Pi_n) counts the steps that open a new cycle, independent Bernoulli(theta/(theta+j-1))
    theta = float(theta)
    total = np.zeros(replicates)
    for start in range(0, n, block):
        j = np.arange(start, min(n, start + block))
        p = np.ones(len(j)) if theta == math.inf else theta / (theta + j)
        if theta == 0:
            p = (j == 0).astype(float)
        for r0 in range(0, replicates, 64):
            r1 = min(replicates, r0 + 64)
            total[r0:r1] += (rng.random((r1 - r0, len(j))) < p).sum(axis=1)
    return total


def asymptotics_experiment(law, n: int, replicates: int, rng=None) -> AsymptoticsSummary:
    """Sample mean of the normalised statistic of Pi_n over independent replicates.

    HammingAlpha: F/n (full growth process).  Mallows: I/n, or I/n^2 at q = 1,
    from the Lehmer digits.  Ewens/Uniform: C/log n from the new-cycle indicators.
    """
    rng = make_rng(rng)
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if isinstance(law, HammingAlpha):
        vals = _hamming_fixed_fraction(law.alpha, n, replicates, rng)
        return AsymptoticsSummary(repr(law), n, replicates, "F/n", vals)
    if isinstance(law, Mallows):
        q = law.q if law.q == math.inf else float(law.q)
        inv = _mallows_inversions_fast(q, n, replicates, rng)
        if q == 1:
            return AsymptoticsSummary(repr(law), n, replicates, "I/n^2", inv / n ** 2)
        if q > 1:
            return AsymptoticsSummary(repr(law), n, replicates, "(C(n,2)-I)/n",
                                      (n * (n - 1) / 2 - inv) / n)
        return AsymptoticsSummary(repr(law), n, replicates, "I/n", inv / n)
    theta = 1 if isinstance(law, Uniform) else law.theta
    cyc = _ewens_cycles(theta, n, replicates, rng)
    return AsymptoticsSummary(repr(law), n, replicates, "C/log n", cyc / math.log(n))


def mixture_fixed_fractions(alphas: Sequence, n: int, replicates: int, rng=None) -> np.ndarray:
    """F/n for replicates of an equal-weight mixture of Pi^alpha laws (component drawn per replicate)."""
    rng = make_rng(rng)
    picks = rng.integers(0, len(alphas), size=replicates)
    out = np.empty(replicates)
    for i, a in enumerate(alphas):
        idx = np.flatnonzero(picks == i)
        if len(idx):
            out[idx] = _hamming_fixed_fraction(a, n, len(idx), rng)
    return out


def bimodal(values: np.ndarray, centres: Sequence[float], radius: float) -> bool:
    """Every value lies within ``radius`` of some centre, and every centre is hit."""
    centres = np.asarray(centres, dtype=float)
    nearest = np.abs(values[:, None] - centres[None, :])
    hit = nearest.min(axis=1) <= radius
    return bool(hit.all() and len(set(nearest.argmin(axis=1).tolist())) == len(centres))
