"""Named verification suites used by ``sphperm verify``.

Each suite yields :class:`Check` records; a suite passes when every check does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from . import verify as V
from .exact import limit_law
from .perm import Metric, all_permutations
from .samplers import Ewens, HammingAlpha, Mallows, Uniform, spawn_rngs

SUITES = ("symmetry", "monotonicity", "consistency", "convergence", "asymptotics")


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.suite}/{self.name}" + (f"  [{self.detail}]" if self.detail else "")


def symmetry(max_nu: int = 6, **_) -> Iterator[Check]:
    for m in Metric:
        for nu in range(2, max_nu + 1):
            ok = all(V.check_spherical_symmetry(V.exact_projected_law(m, nu, kappa, n), m)
                     for kappa in m.stat_values(nu) for n in range(1, nu))
            yield Check("symmetry", f"{m.value}/nu={nu}", ok)
            yield Check("symmetry", f"{m.value}/nu={nu}/kernel", V.kernel_matches_enumeration(m, nu))


def monotonicity(max_nu: int = 7, **_) -> Iterator[Check]:
    for m in Metric:
        for nu in range(2, max_nu + 1):
            report = V.check_monotonicity(m, nu)
            yield Check("monotonicity", f"{m.value}/nu={nu}", report.ok,
                        f"{len(report.pairs)} pairs, {len(report.violations)} violations")
    yield Check("monotonicity", f"kendall/interlacing/nu<={max_nu}", V.check_mallows_interlacing(max_nu))


CONSISTENCY_LAWS = (Uniform(), HammingAlpha(Fraction(1, 2)), HammingAlpha(0), HammingAlpha(1),
                    Mallows(Fraction(1, 2)), Mallows(3), Mallows(0), Mallows(math.inf),
                    Ewens(2), Ewens(0), Ewens(math.inf))


def consistency(max_nu: int = 5, **_) -> Iterator[Check]:
    nu = min(max_nu, 5)
    for law in CONSISTENCY_LAWS:
        metric, param = V.law_parameter(law)
        ok = V.check_projection_consistency(law, nu)
        exact = V.ExactLaw.from_growth(law, nu)
        closed = all(exact[p] == limit_law(metric, param, nu, metric.statistic(p))
                     for p in all_permutations(nu))
        sym = V.check_spherical_symmetry(exact, metric)
        yield Check("consistency", f"{law!r}", ok and closed and sym,
                    f"projection={ok} closed-form={closed} symmetric={sym}")
    pairs = [(Metric.HAMMING, Uniform(), HammingAlpha(Fraction(1, 2))),
             (Metric.KENDALL, Mallows(1), Mallows(Fraction(1, 2))),
             (Metric.CAYLEY, Ewens(1), Ewens(2))]
    for metric, a, b in pairs:
        la, lb = V.ExactLaw.from_growth(a, nu), V.ExactLaw.from_growth(b, nu)
        ok = all(V.backward_transition_check(metric, la, lb, n) for n in range(1, nu + 1))
        yield Check("consistency", f"backward/{metric.value}/nu={nu}", ok)


def convergence(**_) -> Iterator[Check]:
    for a in ("1/4", "1/2"):
        r = V.convergence_experiment(Metric.HAMMING, V.linear_regime(a), 5, [50, 100, 200, 400], k_values=[0])
        worst = max(r.relative_errors(n, 0)[-1] for n in range(2, 6))
        yield Check("convergence", f"hamming/alpha={a}", r.decreasing() and worst < 0.05,
                    f"max relative error at nu=400: {worst:.4f}")
    for q in ("1/3", "1/2"):
        r = V.convergence_experiment(Metric.KENDALL, V.mallows_regime(q), 4, [100, 200, 400])
        yield Check("convergence", f"kendall/q={q}", r.decreasing())
    for t in ("1/2", "2"):
        r = V.convergence_experiment(Metric.CAYLEY, V.ewens_regime(t), 4, [2000])
        worst = max(r.total_variation(2000, n) for n in range(1, 5))
        cell = max(r.relative_errors(n, k)[-1] for n, k in r.cells())
        yield Check("convergence", f"cayley/theta={t}", worst < 0.10,
                    f"max total variation at nu=2000: {worst:.4f}, worst single-cell relative error {cell:.3f}")
    nc = V.nonconvergence_experiment(Metric.HAMMING, V.alternating_regime("1/4", "3/4"), 3, 0,
                                     [50, 100, 150, 200, 300, 400])
    yield Check("convergence", "hamming/alternating", nc.nonconvergent,
                f"gap={nc.gap:.4g} drift={nc.drift:.4g}")


def asymptotics(seed=0, quick: bool = False, **_) -> Iterator[Check]:
    rngs = spawn_rngs(seed, 5)
    scale = 10 if quick else 1
    cases = [
        (HammingAlpha(Fraction(3, 10)), 10 ** 5 // scale, 100, (0.29, 0.31)),
        (Mallows(Fraction(1, 2)), 10 ** 5 // scale, 10, (0.98, 1.02)),
        (Mallows(1), 10 ** 4 // scale, 10, (0.24, 0.26)),
        (Ewens(1), 10 ** 6 // scale, 1000, (0.9, 1.1)),
        (Ewens(2), 10 ** 6 // scale, 1000, (1.8, 2.2)),
    ]
    for (law, n, reps, (lo, hi)), rng in zip(cases, rngs):
        s = V.asymptotics_experiment(law, n, reps, rng)
        yield Check("asymptotics", f"{law!r}/n={n}", lo <= s.mean <= hi,
                    f"{s.statistic}={s.mean:.4f} in [{lo}, {hi}], replicates={reps}")


RUNNERS = {"symmetry": symmetry, "monotonicity": monotonicity, "consistency": consistency,
           "convergence": convergence, "asymptotics": asymptotics}


def run(suite: str, **options) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        out.extend(RUNNERS[name](**options))
    return out
