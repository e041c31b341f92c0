"""Exact sphere counts, extension counts, Martin kernels and limit laws.

All counts are Python integers and all probabilities are
:class:`fractions.Fraction`.  Counts are indexed by the metric statistic k
(fixed points, inversions or cycles); an out-of-range k has count 0.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Mapping, Sequence

import mpmath

from .perm import Metric

__all__ = [
    "CountTable",
    "ExtensionCountTable",
    "backward_recursion_check",
    "count_table",
    "derangements",
    "derangements_alternating_sum",
    "derangements_nearest_integer",
    "eppf",
    "extension_counts",
    "hamming_extension_closed_form",
    "hamming_limit_table",
    "hamming_recursion_check",
    "limit_law",
    "mahonian_row",
    "martin_kernel",
    "martin_kernels",
    "reconstruct_from_derangement_column",
    "sphere_count",
    "stirling1_row",
    "to_param",
]

DEFAULT_PRECISION = 128


# -- primitive sequences --------------------------------------------------------

@lru_cache(maxsize=None)
def _derangement_list(n: int) -> tuple[int, ...]:
    d = [1, 0]
    for m in range(2, n + 1):
        d.append((m - 1) * (d[m - 1] + d[m - 2]))
    return tuple(d[: n + 1])


def derangements(n: int) -> int:
    """d_n via d_n = (n-1)(d_{n-1} + d_{n-2}), d_0 = 1, d_1 = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _derangement_list(max(n, 1))[n]


def derangements_alternating_sum(n: int) -> int:
    """d_n = n! * sum_j (-1)^j / j!, evaluated in integers."""
    total = 0
    term = math.factorial(n)
    for j in range(n + 1):
        total += term if j % 2 == 0 else -term
        if j < n:
            term //= j + 1
    return total


def derangements_nearest_integer(n: int, dps: int = 50) -> int:
    """floor(n!/e + 1/n) in high precision; the rounding identity holds from n = 2 on."""
    if n < 2:
        raise ValueError("formula needs n >= 2")
    with mpmath.workdps(dps + len(str(math.factorial(n)))):
        return int(mpmath.floor(mpmath.factorial(n) / mpmath.e + mpmath.mpf(1) / n))


@lru_cache(maxsize=64)
def mahonian_row(n: int, kmax: int | None = None) -> tuple[int, ...]:
    """M_{n,k} for k = 0..kmax (default n(n-1)/2).

    Uses the bounded-window recurrence M_{m,k} = M_{m,k-1} + M_{m-1,k} - M_{m-1,k-m}.
    """
    top = n * (n - 1) // 2
    if kmax is None:
        kmax = top
    width = min(kmax, top) + 1
    row = [1] + [0] * (width - 1)
    for m in range(2, n + 1):
        new = [0] * width
        acc = 0
        for k in range(width):
            acc += row[k]
            if k >= m:
                acc -= row[k - m]
            new[k] = acc
        row = new
    return tuple(row) + (0,) * (kmax + 1 - width)


@lru_cache(maxsize=64)
def stirling1_row(n: int, kmax: int | None = None) -> tuple[int, ...]:
    """Unsigned Stirling numbers c(n, k) for k = 0..kmax (default n)."""
    if kmax is None:
        kmax = n
    row = [1] + [0] * kmax
    for m in range(1, n + 1):
        for k in range(kmax, 0, -1):
            row[k] = row[k - 1] + (m - 1) * row[k]
        row[0] = 0
    return tuple(row)


def sphere_count(metric: Metric | str, n: int, k: int) -> int:
    """Number of permutations of [n] with statistic k (0 if k is out of range)."""
    metric = Metric.parse(metric)
    if n < 0 or k < 0:
        return 0
    if metric is Metric.HAMMING:
        return math.comb(n, k) * derangements(n - k) if k <= n else 0
    if metric is Metric.KENDALL:
        if k > n * (n - 1) // 2:
            return 0
        return mahonian_row(n, k)[k]
    if k > n:
        return 0
    return stirling1_row(n)[k] if n <= 400 else stirling1_row(n, k)[k]


def stat_bound(metric: Metric, n: int) -> int:
    """Largest statistic value a permutation of [n] can have."""
    return n * (n - 1) // 2 if metric is Metric.KENDALL else n


# -- count tables ---------------------------------------------------------------

@dataclass(frozen=True)
class CountTable:
    """Big-integer table (n, k) -> number of permutations of [n] with statistic k."""

    metric: Metric
    entries: Mapping[tuple[int, int], int]

    def row(self, n: int) -> list[int]:
        top = max((k for (m, k) in self.entries if m == n), default=-1)
        return [self.entries.get((n, k), 0) for k in range(top + 1)]

    def rows(self) -> list[tuple[int, int, int]]:
        return sorted((n, k, c) for (n, k), c in self.entries.items())

    def to_csv(self, fh=None) -> str | None:
        return _write_csv(["n", "k", "count"], self.rows(), fh)

    def to_json(self) -> str:
        return json.dumps({
            "metric": self.metric.value,
            "rows": [{"n": n, "k": k, "count": str(c)} for n, k, c in self.rows()],
        }, indent=1)


def count_table(metric: Metric | str, n_max: int, n_min: int = 1) -> CountTable:
    """Sphere counts for n_min <= n <= n_max, every k from the least to the largest statistic."""
    metric = Metric.parse(metric)
    if metric is Metric.KENDALL and n_max > 200:
        raise MemoryError("full Mahonian table beyond n = 200 is not supported; "
                          "use sphere_count with a bounded k")
    entries = {}
    low = 1 if metric is Metric.CAYLEY else 0
    for n in range(n_min, n_max + 1):
        for k in range(low, stat_bound(metric, n) + 1):
            entries[(n, k)] = sphere_count(metric, n, k)
    return CountTable(metric, entries)


def _write_csv(header, rows, fh=None):
    own = fh is None
    buf = io.StringIO() if own else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue() if own else None


# -- recursions -------------------------------------------------------------------

def hamming_recursion_check(n: int) -> bool:
    """D_{n,k} = (n-k-1) D_{n-1,k} + D_{n-1,k-1} + (k+1) D_{n-1,k+1} for 0 <= k <= n."""
    if n < 2:
        raise ValueError("recursion needs n >= 2")
    D = lambda m, j: sphere_count(Metric.HAMMING, m, j)  # noqa: E731
    for k in range(n + 1):
        rhs = (n - k - 1) * D(n - 1, k) + D(n - 1, k - 1) + (k + 1) * D(n - 1, k + 1)
        if D(n, k) != rhs:
            return False
    return True


# -- extension counts ---------------------------------------------------------------

def _children(metric: Metric, n: int, k: int, kcap: int) -> Iterator[tuple[int, int]]:
    """(statistic, multiplicity) of the n+1 extensions of a size-n permutation with statistic k."""
    if metric is Metric.HAMMING:
        yield k + 1, 1
        if k:
            yield k - 1, k
        if n - k:
            yield k, n - k
    elif metric is Metric.CAYLEY:
        yield k, n
        yield k + 1, 1
    else:
        for eta in range(min(n, kcap - k) + 1):
            yield k + eta, 1


def _extension_rows(metric: Metric, nu: int, kappa: int) -> Iterator[tuple[int, list[int]]]:
    """Yield (n, row) for n = nu, nu-1, ..., 1 where row[k] = D^{nu,kappa}_{n,k}."""
    # Statistics never decrease under Kendall/Cayley extension, and Hamming
    # statistics move by at most one per step, so row width kappa + nu - n suffices.
    if metric is Metric.HAMMING:
        width = lambda n: min(n, kappa + nu - n) + 1  # noqa: E731
    else:
        width = lambda n: min(stat_bound(metric, n), kappa) + 1  # noqa: E731
    row = [0] * (kappa + 1)
    row[kappa] = 1
    yield nu, row
    for n in range(nu - 1, 0, -1):
        nxt = row
        w = width(n)
        if metric is Metric.KENDALL:
            # D(n,k) = sum_{eta=0..n} D(n+1, k+eta): windowed suffix sums
            suffix = [0] * (len(nxt) + 1)
            for k in range(len(nxt) - 1, -1, -1):
                suffix[k] = suffix[k + 1] + nxt[k]
            row = [suffix[k] - suffix[min(k + n + 1, len(nxt))] for k in range(w)]
        else:
            get = lambda j: nxt[j] if 0 <= j < len(nxt) else 0  # noqa: E731
            row = [sum(mult * get(j) for j, mult in _children(metric, n, k, kappa))
                   for k in range(w)]
        yield n, row


@dataclass(frozen=True)
class ExtensionCountTable:
    """D^{nu,kappa}_{n,k}: extensions of one size-n, statistic-k permutation to statistic kappa in S_nu."""

    metric: Metric
    nu: int
    kappa: int
    entries: Mapping[tuple[int, int], int] = field(repr=False)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    def rows(self) -> list[tuple[int, int, int]]:
        return sorted((n, k, c) for (n, k), c in self.entries.items())

    def to_csv(self, fh=None) -> str | None:
        return _write_csv(["n", "k", "count"], self.rows(), fh)

    def to_json(self) -> str:
        return json.dumps({
            "metric": self.metric.value, "nu": self.nu, "kappa": self.kappa,
            "rows": [{"n": n, "k": k, "count": str(c)} for n, k, c in self.rows()],
        }, indent=1)


def _check_kappa(metric: Metric, nu: int, kappa: int) -> None:
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if sphere_count(metric, nu, kappa) == 0:
        raise ValueError(f"empty {metric.value} sphere: nu={nu}, statistic={kappa}")


def extension_counts(metric: Metric | str, nu: int, kappa: int, n_min: int = 1) -> ExtensionCountTable:
    """Backward DP from the boundary row at nu (entries kept for n >= n_min, zeros dropped)."""
    metric = Metric.parse(metric)
    _check_kappa(metric, nu, kappa)
    entries = {}
    for n, row in _extension_rows(metric, nu, kappa):
        if n < n_min:
            break
        for k, c in enumerate(row):
            if c:
                entries[(n, k)] = c
    return ExtensionCountTable(metric, nu, kappa, entries)


def hamming_extension_closed_form(nu: int, kappa: int, n: int) -> int:
    """D^{nu,kappa}_{n,0} from the allocation sum.

    (nu-n)!/kappa! * sum_m C(n+m-1, m) d_{nu-n-m-kappa} / (nu-n-m-kappa)!,
    evaluated term-wise as C(nu-n, m) (n+m-1)!/(n-1)! C(nu-n-m, kappa) d_{nu-n-m-kappa}.
    """
    if kappa > nu - n:
        return 0
    total = 0
    for m in range(nu - n - kappa + 1):
        rest = nu - n - m
        total += (math.comb(nu - n, m) * math.perm(n + m - 1, m)
                  * math.comb(rest, kappa) * derangements(rest - kappa))
    return total


# -- Martin kernel --------------------------------------------------------------------

def martin_kernels(metric: Metric | str, nu: int, kappa: int, n_max: int | None = None
                   ) -> dict[tuple[int, int], Fraction]:
    """All kernel values p^{nu,kappa}_{n,k} for n <= n_max (default nu), zero entries dropped."""
    metric = Metric.parse(metric)
    _check_kappa(metric, nu, kappa)
    if n_max is None:
        n_max = nu
    total = sphere_count(metric, nu, kappa)
    out = {}
    for n, row in _extension_rows(metric, nu, kappa):
        if n > n_max:
            continue
        for k, c in enumerate(row):
            if c:
                out[(n, k)] = Fraction(c, total)
    return out


def martin_kernel(metric: Metric | str, nu: int, kappa: int, n: int, k: int) -> Fraction:
    """p^{nu,kappa}_{n,k} = D^{nu,kappa}_{n,k} / D_{nu,kappa} as an exact fraction."""
    metric = Metric.parse(metric)
    if not 1 <= n <= nu:
        raise ValueError(f"need 1 <= n <= nu, got n={n}, nu={nu}")
    _check_kappa(metric, nu, kappa)
    for m, row in _extension_rows(metric, nu, kappa):
        if m == n:
            count = row[k] if 0 <= k < len(row) else 0
            return Fraction(count, sphere_count(metric, nu, kappa))
    raise AssertionError("unreachable")


# -- parameters and limit laws ---------------------------------------------------

def to_param(value) -> "Fraction | mpmath.mpf | float":
    """Normalise a family parameter.

    Integers, fractions and ``"p/q"`` strings stay exact; decimals become
    high-precision reals; ``inf`` / ``"inf"`` / ``"oo"`` stay ``math.inf``.
    """
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "infinity", "oo", "+inf"):
            return math.inf
        if "." in s or "e" in s:
            with mpmath.workprec(DEFAULT_PRECISION):
                return mpmath.mpf(s)
        return Fraction(s)
    if isinstance(value, bool):
        raise TypeError("boolean is not a parameter")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return math.inf if math.isinf(value) else mpmath.mpf(value)
    if isinstance(value, mpmath.mpf):
        return math.inf if mpmath.isinf(value) else value
    raise TypeError(f"unsupported parameter type {type(value).__name__}")


def is_exact(value) -> bool:
    return isinstance(value, Fraction)


def _q_integer(q, j):
    return sum(q ** i for i in range(j))


def limit_law(metric: Metric | str, param, n: int, k: int, prec: int = DEFAULT_PRECISION):
    """Probability of one permutation of [n] with statistic k under the extreme law.

    Hamming: Pi^alpha, alpha in [0, 1].  Kendall: Mallows(q), q in [0, inf].
    Cayley: Ewens(theta), theta in [0, inf].  Rational parameters give a
    Fraction; real ones an mpmath number at ``prec`` bits.
    """
    metric = Metric.parse(metric)
    t = to_param(param)
    if n < 1:
        raise ValueError("n must be >= 1")
    if metric is Metric.HAMMING:
        if t == math.inf or not 0 <= t <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {param}")
        if not 0 <= k <= n or k == n - 1:
            return Fraction(0)
    elif t < 0:
        raise ValueError(f"parameter must lie in [0, inf], got {param}")
    if metric is Metric.KENDALL and not 0 <= k <= n * (n - 1) // 2:
        return Fraction(0)
    if metric is Metric.CAYLEY and not 1 <= k <= n:
        return Fraction(0)

    if t == math.inf:
        target = n * (n - 1) // 2 if metric is Metric.KENDALL else n
        return Fraction(int(k == target))
    if not is_exact(t):
        with mpmath.workprec(prec):
            return _limit_law_value(metric, mpmath.mpf(t), n, k, mpmath.factorial, mpmath.binomial)
    return _limit_law_value(metric, t, n, k, math.factorial, math.comb)


def _limit_law_value(metric, t, n, k, fact, binom):
    one = t ** 0
    if metric is Metric.HAMMING:
        return sum(binom(k, j) * t ** j * (one - t) ** (n - j) / fact(n - j) for j in range(k + 1))
    if metric is Metric.KENDALL:
        if t == 0:
            return one * int(k == 0)
        norm = one
        for j in range(1, n + 1):
            norm *= _q_integer(t, j)
        return t ** k / norm
    if t == 0:
        # uniform n-cycle; for n = 1 the single cycle is the identity
        return (one / fact(n - 1)) * int(k == 1)
    rising = one
    for i in range(n):
        rising *= t + i
    return t ** k / rising


def hamming_limit_table(alpha, n_max: int) -> dict[tuple[int, int], Fraction]:
    """Probability function p_{n,k}(alpha) for 1 <= n <= n_max and valid k."""
    return {(n, k): limit_law(Metric.HAMMING, alpha, n, k)
            for n in range(1, n_max + 1) for k in Metric.HAMMING.stat_values(n)}


# -- backward recursion and reconstruction ------------------------------------------

def backward_recursion_check(p: Mapping[tuple[int, int], Fraction], N: int) -> bool:
    """Check p_{n,k} = (n-k) p_{n+1,k} + p_{n+1,k+1} + k p_{n+1,k-1} for all n < N.

    Also rebuilds the whole table from the derangement column p_{n,0} and
    requires the rebuild to agree with ``p`` on every entry for n <= N.
    """
    get = lambda n, k: p.get((n, k), 0)  # noqa: E731
    for n in range(1, N):
        for k in Metric.HAMMING.stat_values(n):
            rhs = (n - k) * get(n + 1, k) + get(n + 1, k + 1) + k * get(n + 1, k - 1)
            if get(n, k) != rhs:
                return False
    column = {n: get(n, 0) for n in range(2, N + 1)}
    rebuilt = reconstruct_from_derangement_column(column, N, get(1, 1))
    return all(rebuilt[(n, k)] == get(n, k)
               for n in range(1, N + 1) for k in Metric.HAMMING.stat_values(n))


def reconstruct_from_derangement_column(column: Mapping[int, Fraction], N: int, p11=1
                                        ) -> dict[tuple[int, int], Fraction]:
    """Rebuild p_{n,k} for n <= N from the derangement column ``column[n] = p_{n,0}``.

    Runs p_{n+1,k+1} = p_{n,k} - (n-k) p_{n+1,k} - k p_{n+1,k-1} upward in k.
    ``p11`` is the mass of the identity of S_1 (1 for a probability function).
    Only valid entries k in {0, ..., n-2, n} are returned.
    """
    p = {(1, 1): p11}
    for n in range(1, N):
        p[(n + 1, 0)] = column[n + 1]
        for k in Metric.HAMMING.stat_values(n):
            p[(n + 1, k + 1)] = (p[(n, k)] - (n - k) * p.get((n + 1, k), 0)
                                 - k * p.get((n + 1, k - 1), 0))
    return {(n, k): v for (n, k), v in p.items() if k != n - 1}


# -- EPPF -------------------------------------------------------------------------------

def eppf(p: "Mapping[tuple[int, int], Fraction] | Callable[[int, int], Fraction]",
         parts: Sequence[int]) -> Fraction:
    """p(n_1, ..., n_l) = p_{n,k} * prod (n_j - 1)!, k = number of parts equal to 1."""
    parts = [int(x) for x in parts]
    if not parts or any(x < 1 for x in parts):
        raise ValueError("parts must be a nonempty list of positive integers")
    n = sum(parts)
    k = parts.count(1)
    value = p(n, k) if callable(p) else p.get((n, k), 0)
    return value * math.prod(math.factorial(x - 1) for x in parts)
