"""Permutations of [n], the three metrics and their projection systems.

Permutations are stored in one-line notation with 1-indexed values, so
``Permutation((2, 5, 1, 4, 3))`` sends 1 -> 2, 2 -> 5, 3 -> 1 and so on.
Each metric owns exactly one system of n-to-1 projections S_n -> S_{n-1}:

* Hamming and Cayley use cycle deletion (remove element n from its cycle).
* Kendall-tau uses order restriction (drop the last entry and relabel),
  which acts on the Lehmer code as truncation.
"""
from __future__ import annotations

import enum
import itertools
import re
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Metric",
    "Permutation",
    "all_permutations",
    "cycle_count",
    "distance",
    "extensions",
    "fixed_points",
    "from_cycles",
    "inversions",
    "lehmer_decode",
    "lehmer_encode",
    "parse_permutation",
    "project_cycle_delete",
    "project_letter_delete",
    "project_order_restrict",
    "reversal",
    "to_cycles",
]


class Permutation:
    """Immutable bijection of {1, ..., n} in one-line notation."""

    __slots__ = ("_word", "_hash")

    def __init__(self, word: Iterable[int], check: bool = True):
        word = tuple(int(v) for v in word)
        if check:
            n = len(word)
            if n < 1:
                raise ValueError("a permutation needs n >= 1")
            if sorted(word) != list(range(1, n + 1)):
                raise ValueError(f"{word} is not a permutation of 1..{n}")
        self._word = word
        self._hash = hash(word)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @property
    def word(self) -> tuple[int, ...]:
        return self._word

    @property
    def n(self) -> int:
        return len(self._word)

    def __len__(self) -> int:
        return len(self._word)

    def __iter__(self) -> Iterator[int]:
        return iter(self._word)

    def __call__(self, j: int) -> int:
        return self._word[j - 1]

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            return self._word == other._word
        return NotImplemented

    def __lt__(self, other: "Permutation") -> bool:
        return (len(self._word), self._word) < (len(other._word), other._word)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({self._word})"

    def __str__(self) -> str:
        return self.format()

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self._word, 1):
            inv[v - 1] = i
        return Permutation(inv, check=False)

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self o other``, i.e. ``j -> self(other(j))``."""
        if other.n != self.n:
            raise ValueError(f"size mismatch: {self.n} != {other.n}")
        w = self._word
        return Permutation((w[v - 1] for v in other._word), check=False)

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self._word, 1))

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        return to_cycles(self)

    def format(self, style: str = "oneline") -> str:
        """Render as ``"2 5 1 4 3"`` (``oneline``) or ``"(1 2 5 3)(4)"`` (``cycle``)."""
        if style == "oneline":
            return " ".join(map(str, self._word))
        if style == "cycle":
            return "".join("(" + " ".join(map(str, c)) + ")" for c in to_cycles(self))
        raise ValueError(f"unknown style {style!r}")


def all_permutations(n: int) -> Iterator[Permutation]:
    """All of S_n in lexicographic order of the one-line word."""
    for w in itertools.permutations(range(1, n + 1)):
        yield Permutation(w, check=False)


def reversal(p: Permutation) -> Permutation:
    """The map w -> (n+1-w(1), ..., n+1-w(n)), which reverses the order relation."""
    n = p.n
    return Permutation((n + 1 - v for v in p.word), check=False)


# -- cycle form ---------------------------------------------------------------

def to_cycles(p: Permutation) -> tuple[tuple[int, ...], ...]:
    """Canonical cycle form: each cycle starts at its minimum, cycles sorted by minimum."""
    w = p.word
    seen = [False] * (len(w) + 1)
    out = []
    for start in range(1, len(w) + 1):
        if seen[start]:
            continue
        cyc = []
        j = start
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = w[j - 1]
        out.append(tuple(cyc))
    return tuple(out)


def from_cycles(cycles: Iterable[Sequence[int]], n: int | None = None) -> Permutation:
    """Build a permutation from cycles; elements not mentioned are fixed points."""
    cycles = [tuple(int(x) for x in c) for c in cycles]
    elems = [x for c in cycles for x in c]
    if len(set(elems)) != len(elems):
        raise ValueError("cycles are not disjoint")
    if n is None:
        n = max(elems, default=0)
    if any(x < 1 or x > n for x in elems):
        raise ValueError(f"cycle element outside 1..{n}")
    word = list(range(1, n + 1))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            word[a - 1] = b
    return Permutation(word)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, n: int | None = None) -> Permutation:
    """Parse one-line ``"2 5 1 4 3"`` or cycle ``"(1 5 3)(2 4)"`` notation.

    Entries may be separated by spaces or commas. In cycle notation ``n``
    defaults to the largest element mentioned.
    """
    text = text.strip()
    if text.startswith("("):
        rest = _CYCLE_RE.sub("", text).strip()
        if rest:
            raise ValueError(f"cannot parse cycle notation {text!r}")
        cycles = [[int(t) for t in re.split(r"[\s,]+", body.strip()) if t]
                  for body in _CYCLE_RE.findall(text)]
        return from_cycles([c for c in cycles if c], n)
    p = Permutation(int(t) for t in re.split(r"[\s,]+", text) if t)
    if n is not None and p.n != n:
        raise ValueError(f"expected {n} entries, got {p.n}")
    return p


# -- statistics ---------------------------------------------------------------

def fixed_points(p: Permutation) -> int:
    """F(p), the number of j with p(j) = j."""
    return sum(1 for i, v in enumerate(p.word, 1) if i == v)


def _merge_count(a: list[int]) -> tuple[list[int], int]:
    if len(a) <= 1:
        return a, 0
    mid = len(a) // 2
    left, x = _merge_count(a[:mid])
    right, y = _merge_count(a[mid:])
    merged = []
    count = x + y
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def inversions(p: Permutation) -> int:
    """I(p), the number of pairs i < j with p(i) > p(j); O(n log n) merge count."""
    return _merge_count(list(p.word))[1]


def cycle_count(p: Permutation) -> int:
    """C(p), the number of cycles including fixed points."""
    w = p.word
    seen = bytearray(len(w) + 1)
    count = 0
    for start in range(1, len(w) + 1):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = 1
            j = w[j - 1]
    return count


# -- Lehmer code --------------------------------------------------------------

def lehmer_encode(p: Permutation) -> tuple[int, ...]:
    """eta_j = #{i < j : p(i) > p(j)}, so 0 <= eta_j <= j - 1 and sum(eta) = I(p)."""
    n = p.n
    # Fenwick tree over values, counts values already seen.
    tree = [0] * (n + 1)
    code = []
    for j, v in enumerate(p.word):
        below = 0
        i = v
        while i > 0:
            below += tree[i]
            i -= i & -i
        code.append(j - below)
        i = v
        while i <= n:
            tree[i] += 1
            i += i & -i
    return tuple(code)


def lehmer_decode(code: Sequence[int]) -> Permutation:
    """Inverse of :func:`lehmer_encode`."""
    code = [int(e) for e in code]
    if not code:
        raise ValueError("empty Lehmer code")
    for j, e in enumerate(code, 1):
        if not 0 <= e <= j - 1:
            raise ValueError(f"code entry eta_{j} = {e} outside [0, {j - 1}]")
    # Build ranks backwards: the entry at position j is the (j - eta_j)-th smallest
    # among the first j; process as an order-statistic insertion.
    word: list[int] = []
    for j, e in enumerate(code, 1):
        v = j - e
        word = [x + 1 if x >= v else x for x in word]
        word.append(v)
    return Permutation(word, check=False)


# -- projections --------------------------------------------------------------

def _require_n2(p: Permutation) -> None:
    if p.n < 2:
        raise ValueError("cannot project a permutation of [1]")


def project_cycle_delete(p: Permutation) -> Permutation:
    """Delete element n from the cycle notation of p."""
    _require_n2(p)
    n = p.n
    w = list(p.word)
    image = w.pop()
    if image != n:
        w[w.index(n)] = image
    return Permutation(w, check=False)


def project_order_restrict(p: Permutation) -> Permutation:
    """Drop the last entry and relabel the rest increasingly onto [n-1]."""
    _require_n2(p)
    last = p.word[-1]
    return Permutation((v - 1 if v > last else v for v in p.word[:-1]), check=False)


def project_letter_delete(p: Permutation) -> Permutation:
    """Delete the letter n from the one-line notation."""
    _require_n2(p)
    n = p.n
    return Permutation((v for v in p.word if v != n), check=False)


def _cycle_extensions(s: Permutation) -> list[Permutation]:
    n = s.n + 1
    base = list(s.word)
    out = []
    for j in range(1, n):
        w = base + [base[j - 1]]
        w[j - 1] = n
        out.append(Permutation(w, check=False))
    out.append(Permutation(base + [n], check=False))
    return out


def _order_extensions(s: Permutation) -> list[Permutation]:
    n = s.n + 1
    out = []
    for eta in range(n):
        v = n - eta
        out.append(Permutation([x + 1 if x >= v else x for x in s.word] + [v], check=False))
    return out


# -- metrics ------------------------------------------------------------------

class Metric(enum.Enum):
    """Hamming, Kendall-tau and Cayley metrics with their projection systems.

    Every count in this package is indexed by the *statistic* k of a metric:
    fixed points F for Hamming, inversions I for Kendall and cycles C for
    Cayley.  The radius (distance to the identity) is n - F, I and n - C.
    """

    HAMMING = "hamming"
    KENDALL = "kendall"
    CAYLEY = "cayley"

    @classmethod
    def parse(cls, value: "str | Metric") -> "Metric":
        if isinstance(value, Metric):
            return value
        try:
            return cls(value.lower().replace("-", "").replace("_", "").replace("tau", ""))
        except ValueError:
            raise ValueError(f"unknown metric {value!r}") from None

    def statistic(self, p: Permutation) -> int:
        if self is Metric.HAMMING:
            return fixed_points(p)
        if self is Metric.KENDALL:
            return inversions(p)
        return cycle_count(p)

    def radius(self, p: Permutation) -> int:
        return self.stat_to_radius(p.n, self.statistic(p))

    def stat_to_radius(self, n: int, k: int) -> int:
        return k if self is Metric.KENDALL else n - k

    radius_to_stat = stat_to_radius  # the conversion is an involution

    def stat_values(self, n: int) -> list[int]:
        """Statistics k for which the sphere in S_n is nonempty."""
        if self is Metric.HAMMING:
            return [k for k in range(n + 1) if k != n - 1]
        if self is Metric.KENDALL:
            return list(range(n * (n - 1) // 2 + 1))
        return list(range(1, n + 1))

    def radii(self, n: int) -> list[int]:
        return sorted(self.stat_to_radius(n, k) for k in self.stat_values(n))

    def project(self, p: Permutation) -> Permutation:
        if self is Metric.KENDALL:
            return project_order_restrict(p)
        return project_cycle_delete(p)

    def project_to(self, p: Permutation, n: int) -> Permutation:
        """Iterated projection f_{nu -> n}."""
        if not 1 <= n <= p.n:
            raise ValueError(f"cannot project S_{p.n} to S_{n}")
        while p.n > n:
            p = self.project(p)
        return p

    def extensions(self, s: Permutation) -> list[Permutation]:
        if self is Metric.KENDALL:
            return _order_extensions(s)
        return _cycle_extensions(s)


def distance(p: Permutation, s: Permutation, metric: Metric | str) -> int:
    """Distance between p and s; ``distance(p, identity)`` is the radius of p."""
    metric = Metric.parse(metric)
    if p.n != s.n:
        raise ValueError(f"size mismatch: {p.n} != {s.n}")
    if metric is Metric.HAMMING:
        return sum(1 for a, b in zip(p.word, s.word) if a != b)
    # discordant pairs of (p, s) are the inversions of p o s^-1
    t = p.compose(s.inverse())
    if metric is Metric.KENDALL:
        return inversions(t)
    return p.n - cycle_count(t)


def extensions(s: Permutation, metric: Metric | str) -> list[Permutation]:
    """All n permutations of S_n projecting onto ``s`` in S_{n-1}."""
    return Metric.parse(metric).extensions(s)
