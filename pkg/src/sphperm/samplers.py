"""Growth processes for the extreme virtual permutations and sphere samplers.

Four laws are supported as permutation-valued growth processes:

* :class:`Uniform`, the Chinese restaurant process with parameter 1,
* :class:`HammingAlpha` (Pi^alpha), the CRP with singular elements,
* :class:`Mallows`, built by appending truncated-geometric Lehmer digits,
* :class:`Ewens`, the CRP with new-cycle weight theta.

Each law exposes its exact one-step kernel (:meth:`moves`), which drives
both the scalar :class:`GrowthProcess` and the exact path enumeration in
:func:`exact_growth_law`.  :func:`sample_batch` is an independent numpy
implementation of the same dynamics for high-volume Monte Carlo.

Randomness always comes from a :class:`numpy.random.Generator`; use
:func:`make_rng` / :func:`spawn_rngs` to get seeded, reproducible streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .exact import derangements, extension_counts, mahonian_row, to_param
from .perm import Metric, Permutation, lehmer_decode

__all__ = [
    "EnrichedPermutation",
    "Ewens",
    "GrowthProcess",
    "HammingAlpha",
    "Mallows",
    "Uniform",
    "bivariate_chain_step",
    "exact_growth_law",
    "make_rng",
    "run_bivariate_chain",
    "sample_batch",
    "sample_sphere_uniform",
    "spawn_rngs",
    "step_alpha",
    "step_ewens",
    "step_mallows",
    "step_uniform",
]


def make_rng(seed=None) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent child streams for parallel replicas."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(count)]


# -- laws ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnrichedPermutation:
    """A permutation whose elements are flagged singular or regular.

    Singular elements are fixed points that stay fixed forever; the rest are
    regular.  Laws other than :class:`HammingAlpha` never flag anything.
    """

    perm: Permutation
    singular: frozenset = frozenset()

    def __post_init__(self):
        for j in self.singular:
            if self.perm(j) != j:
                raise ValueError(f"singular element {j} is not a fixed point")

    @property
    def n(self) -> int:
        return self.perm.n


# A move is ("insert", j): place the new element right after j in its cycle;
# ("single", flag): new singleton cycle, singular if flag; ("code", eta): new
# Lehmer digit.
Move = tuple


@dataclass(frozen=True)
class Uniform:
    """The uniform virtual permutation Pi* under cycle deletion."""

    metric = Metric.HAMMING

    def moves(self, state: EnrichedPermutation) -> list[tuple[Move, Fraction]]:
        n = state.n + 1
        p = Fraction(1, n)
        return [(("insert", j), p) for j in range(1, n)] + [(("single", False), p)]


@dataclass(frozen=True)
class HammingAlpha:
    """Pi^alpha: each new element is singular w.p. alpha, otherwise a CRP step among regulars."""

    alpha: object = Fraction(1, 2)
    metric = Metric.HAMMING

    def __post_init__(self):
        a = to_param(self.alpha)
        if a == math.inf or not 0 <= a <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", a)

    def moves(self, state):
        a = self.alpha
        if a == 1:
            return [(("single", True), 1)]
        n = state.n + 1
        s = len(state.singular)
        share = (1 - a) / (n - s)
        out = [(("single", True), a)] if a else []
        out += [(("insert", j), share) for j in range(1, n) if j not in state.singular]
        out.append((("single", False), share))
        return out


@dataclass(frozen=True)
class Mallows:
    """Mallows(q) under order restriction, q in [0, inf]."""

    q: object = Fraction(1, 2)
    metric = Metric.KENDALL

    def __post_init__(self):
        q = to_param(self.q)
        if q < 0:
            raise ValueError(f"q must lie in [0, inf], got {self.q}")
        object.__setattr__(self, "q", q)

    def digit_law(self, j: int) -> list:
        """Masses of the new digit eta_j on {0, ..., j-1}."""
        q = self.q
        if q == 0:
            return [1] + [0] * (j - 1)
        if q == math.inf:
            return [0] * (j - 1) + [1]
        if q > 1:
            return self._reflected().digit_law(j)[::-1]
        w = [q ** i for i in range(j)]
        total = sum(w)
        return [x / total for x in w]

    def _reflected(self) -> "Mallows":
        return Mallows(1 / self.q)

    def moves(self, state):
        n = state.n + 1
        return [(("code", eta), w) for eta, w in enumerate(self.digit_law(n)) if w]


@dataclass(frozen=True)
class Ewens:
    """Ewens(theta) as a Chinese restaurant process, theta in [0, inf]."""

    theta: object = Fraction(1)
    metric = Metric.CAYLEY

    def __post_init__(self):
        t = to_param(self.theta)
        if t < 0:
            raise ValueError(f"theta must lie in [0, inf], got {self.theta}")
        object.__setattr__(self, "theta", t)

    def moves(self, state):
        n = state.n + 1
        t = self.theta
        if t == math.inf or n == 1:
            return [(("single", False), Fraction(1))]
        denom = t + n - 1
        out = [(("insert", j), 1 / denom) for j in range(1, n)]
        if t:
            out.append((("single", False), t / denom))
        return out


Law = Union[Uniform, HammingAlpha, Mallows, Ewens]


def _empty_state() -> EnrichedPermutation:
    return EnrichedPermutation(Permutation((), check=False))


def _apply(state: EnrichedPermutation, move: Move) -> EnrichedPermutation:
    kind, arg = move
    w = list(state.perm.word)
    n = len(w) + 1
    if kind == "insert":
        w.append(w[arg - 1])
        w[arg - 1] = n
        return EnrichedPermutation(Permutation(w, check=False), state.singular)
    if kind == "single":
        w.append(n)
        singular = state.singular | {n} if arg else state.singular
        return EnrichedPermutation(Permutation(w, check=False), singular)
    v = n - arg
    w = [x + 1 if x >= v else x for x in w]
    w.append(v)
    return EnrichedPermutation(Permutation(w, check=False), state.singular)


# -- scalar growth process -----------------------------------------------------------

@dataclass(frozen=True)
class GrowthProcess:
    """One realisation of a growth process; ``state`` holds Pi_n (n = ``n``).

    Instances are values: :meth:`step` returns a new process sharing the RNG.
    """

    law: Law
    rng: np.random.Generator = field(repr=False)
    state: EnrichedPermutation = field(default_factory=_empty_state)

    @classmethod
    def start(cls, law: Law, seed=None) -> "GrowthProcess":
        return cls(law, make_rng(seed))

    @property
    def n(self) -> int:
        return self.state.n

    @property
    def perm(self) -> Permutation:
        return self.state.perm

    def step(self) -> "GrowthProcess":
        return _STEPPERS[type(self.law)](self)

    def run(self, n: int) -> "GrowthProcess":
        g = self
        while g.n < n:
            g = g.step()
        return g


def _draw(g: GrowthProcess) -> GrowthProcess:
    options = g.law.moves(g.state)
    if len(options) == 1:
        return replace(g, state=_apply(g.state, options[0][0]))
    probs = np.array([float(p) for _, p in options])
    i = g.rng.choice(len(options), p=probs / probs.sum())
    return replace(g, state=_apply(g.state, options[i][0]))


def _require(g: GrowthProcess, kind) -> None:
    if not isinstance(g.law, kind):
        raise TypeError(f"process law is {type(g.law).__name__}, expected {kind.__name__}")


def step_uniform(g: GrowthProcess) -> GrowthProcess:
    """Insert n right of a uniform element, or as a new cycle, each w.p. 1/n."""
    _require(g, Uniform)
    return _draw(g)


def step_alpha(g: GrowthProcess) -> GrowthProcess:
    """Pi^alpha step: singular w.p. alpha, else uniform over regular slots and a regular singleton."""
    _require(g, HammingAlpha)
    return _draw(g)


def step_mallows(g: GrowthProcess) -> GrowthProcess:
    """Append a truncated-geometric Lehmer digit and decode."""
    _require(g, Mallows)
    return _draw(g)


def step_ewens(g: GrowthProcess) -> GrowthProcess:
    """New cycle w.p. theta/(theta+n-1), else right of a uniform j in [n-1]."""
    _require(g, Ewens)
    return _draw(g)


_STEPPERS = {Uniform: step_uniform, HammingAlpha: step_alpha,
             Mallows: step_mallows, Ewens: step_ewens}


def exact_growth_law(law: Law, n: int, enriched: bool = False) -> dict:
    """Exact law of Pi_n obtained by summing path probabilities.

    Returns ``{Permutation: probability}``; with ``enriched=True`` keys are
    :class:`EnrichedPermutation`.  Exponential in n; meant for n <= 6.
    """
    layer = {_empty_state(): 1}
    for _ in range(n):
        nxt: dict = {}
        for state, p in layer.items():
            for move, w in law.moves(state):
                s = _apply(state, move)
                nxt[s] = nxt.get(s, 0) + p * w
        layer = nxt
    if enriched:
        return layer
    out: dict = {}
    for state, p in layer.items():
        out[state.perm] = out.get(state.perm, 0) + p
    return out


# -- vectorised batch sampler -----------------------------------------------------------

def _as_float(x) -> float:
    return math.inf if x == math.inf else float(x)


def _truncated_geometric(q: float, size: int, m: int, rng) -> np.ndarray:
    """Draws on {0..m} with masses proportional to q^i, by inverse CDF."""
    if q == 0:
        return np.zeros(size, dtype=np.int64)
    if q == math.inf:
        return np.full(size, m, dtype=np.int64)
    if q == 1:
        return rng.integers(0, m + 1, size=size)
    if q > 1:
        return m - _truncated_geometric(1 / q, size, m, rng)
    u = rng.random(size)
    # P(eta <= i) = (1 - q^(i+1)) / (1 - q^(m+1))
    tail = -np.expm1((m + 1) * math.log(q))
    eta = np.floor(np.log1p(-u * tail) / math.log(q))
    return np.clip(eta, 0, m).astype(np.int64)


def sample_batch(law: Law, n: int, size: int, rng=None) -> np.ndarray:
    """``size`` independent draws of Pi_n as an int array of 1-indexed words, shape (size, n)."""
    rng = make_rng(rng)
    word = np.zeros((size, n), dtype=np.int32)
    rows = np.arange(size)
    if isinstance(law, Mallows):
        q = _as_float(law.q)
        for m in range(n):
            v = m - _truncated_geometric(q, size, m, rng)
            if m:
                head = word[:, :m]
                head += head >= v[:, None]
            word[:, m] = v
        return word + 1

    if isinstance(law, HammingAlpha):
        alpha = float(law.alpha)
        regular = np.zeros((size, n), dtype=np.int32)
        n_reg = np.zeros(size, dtype=np.int64)
    for m in range(n):
        # element m (0-indexed) joins a permutation of {0..m-1}
        word[:, m] = m
        if m == 0 and not isinstance(law, HammingAlpha):
            continue
        if isinstance(law, HammingAlpha):
            singular = rng.random(size) < alpha
            choice = (rng.random(size) * (n_reg + 1)).astype(np.int64)
            choice = np.minimum(choice, n_reg)
            insert = ~singular & (choice < n_reg)
            target = regular[rows, np.minimum(choice, max(m - 1, 0))]
            reg = ~singular
            regular[rows[reg], n_reg[reg]] = m
            n_reg += reg
        else:
            j = rng.integers(0, m, size=size)
            if isinstance(law, Uniform):
                insert = rng.random(size) * (m + 1) >= 1
            else:
                theta = _as_float(law.theta)
                if theta == math.inf:
                    continue
                insert = rng.random(size) * (theta + m) >= theta
            target = j
        r = rows[insert]
        t = target[insert]
        word[r, m] = word[r, t]
        word[r, t] = m
    return word + 1


# -- uniform sampling on spheres ----------------------------------------------------------

def _randbelow(rng, bound: int) -> int:
    """Exactly uniform integer in [0, bound) for arbitrary-size ``bound``."""
    if bound <= 2 ** 62:
        return int(rng.integers(0, bound))
    nbits = bound.bit_length()
    words = (nbits + 63) // 64
    while True:
        x = 0
        for w in rng.bit_generator.random_raw(words).tolist():
            x = (x << 64) | w
        x >>= words * 64 - nbits
        if x < bound:
            return x


@lru_cache(maxsize=32)
def _cayley_completions(n: int, c: int) -> dict:
    """(j, k) -> completions of a size-j, k-cycle prefix to n elements with c cycles."""
    return dict(extension_counts(Metric.CAYLEY, n, c).entries)


def _uniform_derangement(labels: list[int], rng) -> dict[int, int]:
    """Uniform derangement of ``labels`` as a map, via the 2-cycle / longer-cycle split."""
    image: dict[int, int] = {}
    pending = []  # (x, y): insert x right after y once the rest is built
    rest = list(labels)
    while rest:
        m = len(rest)
        x = rest.pop()
        # P(x sits in a 2-cycle) = (m-1) d_{m-2} / d_m
        two = _randbelow(rng, derangements(m)) < (m - 1) * derangements(m - 2)
        i = int(rng.integers(0, m - 1))
        y = rest[i]
        if two:
            rest[i] = rest[-1]
            rest.pop()
            image[x], image[y] = y, x
        else:
            pending.append((x, y))
    for x, y in reversed(pending):
        image[x] = image[y]
        image[y] = x
    return image


def _sphere_hamming(n, k, rng) -> Permutation:
    fixed = set((rng.choice(n, size=k, replace=False) + 1).tolist()) if k else set()
    moved = [j for j in range(1, n + 1) if j not in fixed]
    image = _uniform_derangement(moved, rng)
    return Permutation((image.get(j, j) for j in range(1, n + 1)), check=False)


def _sphere_kendall(n, r, rng) -> Permutation:
    code = [0] * n
    left = r
    for j in range(n, 0, -1):
        row = mahonian_row(j - 1, left)
        weights = [row[left - e] if left - e >= 0 else 0 for e in range(j)]
        total = sum(weights)
        u = _randbelow(rng, total)
        acc = 0
        for e, w in enumerate(weights):
            acc += w
            if u < acc:
                break
        code[j - 1] = e
        left -= e
    return lehmer_decode(code)


def _sphere_cayley(n, c, rng) -> Permutation:
    table = _cayley_completions(n, c)
    word: list[int] = []
    k = 0
    for j in range(1, n + 1):
        opens = table.get((j, k + 1), 0)
        total = opens + (j - 1) * table.get((j, k), 0)
        if _randbelow(rng, total) < opens:
            word.append(j)
            k += 1
        else:
            t = int(rng.integers(0, j - 1))
            word.append(word[t])
            word[t] = j
    return Permutation(word, check=False)


def sample_sphere_uniform(metric: Metric | str, n: int, r: int, rng=None, size: int | None = None):
    """Exactly uniform draw from {pi in S_n : |pi| = r}.

    With ``size`` given, returns an int array of shape (size, n) of words.
    """
    metric = Metric.parse(metric)
    rng = make_rng(rng)
    k = metric.radius_to_stat(n, r)
    if k not in metric.stat_values(n):
        raise ValueError(f"empty {metric.value} sphere: n={n}, radius={r}")
    draw = {Metric.HAMMING: _sphere_hamming, Metric.KENDALL: _sphere_kendall,
            Metric.CAYLEY: _sphere_cayley}[metric]
    if size is None:
        return draw(n, k, rng)
    return np.array([draw(n, k, rng).word for _ in range(size)], dtype=np.int32).reshape(size, n)


# -- bivariate (singular, regular) fixed-point chain ------------------------------------------

def bivariate_transitions(s: int, r: int, n: int, alpha) -> list[tuple[tuple[int, int], object]]:
    """Transitions of (singular, regular fixed points) when element n arrives."""
    a = to_param(alpha)
    if a == 1:
        return [((s + 1, r), 1)]
    free = n - s
    out = [((s + 1, r), a),
           ((s, r + 1), (1 - a) / free),
           ((s, r - 1), (1 - a) * r / free),
           ((s, r), (1 - a) * (n - 1 - r - s) / free)]
    return [(state, p) for state, p in out if p]


def bivariate_chain_step(s: int, r: int, n: int, alpha, rng=None) -> tuple[int, int]:
    """Advance (s, r) from size n-1 to size n."""
    if s < 0 or r < 0 or s + r > n - 1:
        raise ValueError(f"invalid state (s={s}, r={r}) before step {n}")
    options = bivariate_transitions(s, r, n, alpha)
    probs = [p for _, p in options]
    assert sum(probs) == 1 or abs(float(sum(probs)) - 1) < 1e-12, "transition probabilities do not sum to 1"
    if len(options) == 1:
        return options[0][0]
    rng = make_rng(rng)
    p = np.array([float(x) for x in probs])
    return options[rng.choice(len(options), p=p / p.sum())][0]


def run_bivariate_chain(n: int, alpha, size: int, rng=None) -> np.ndarray:
    """Vectorised chain; returns (size, 2) array of (s, r) at step n."""
    rng = make_rng(rng)
    a = float(to_param(alpha))
    s = np.zeros(size, dtype=np.int64)
    r = np.zeros(size, dtype=np.int64)
    for m in range(1, n + 1):
        u = rng.random(size)
        sing = u < a
        # remaining mass (1-a) is split over m - s equally likely regular slots
        slot = ((u - a) / (1 - a) * (m - s)).astype(np.int64) if a < 1 else np.zeros(size, dtype=np.int64)
        slot = np.minimum(slot, m - s - 1)
        new_fixed = ~sing & (slot == m - s - 1)
        kill = ~sing & (slot < r)
        s += sing
        r += new_fixed.astype(np.int64) - kill.astype(np.int64)
    return np.stack([s, r], axis=1)
