"""Pruning of 3-qubit circuit structures by qubit relabeling and gate-order reversal.

Two structures are merged when one maps to the other under any of the six
relabelings of {0, 1, 2}, optionally followed by reversal. Orbits ("closures")
have 3, 6 or 12 members once N >= 1; each is represented by its lexicographic
minimum. Pairs are coded (0,1) -> 0, (0,2) -> 1, (1,2) -> 2, which preserves
the lexicographic order, so a structure reads as a base-3 numeral.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circuit import THREE_QUBIT_PAIRS, Pair, Structure

MAX_N = 15
STATEMENT, PROOF = "statement", "proof"

PAIR_CODE = {p: i for i, p in enumerate(THREE_QUBIT_PAIRS)}
PERMUTATIONS: tuple[tuple[int, int, int], ...] = tuple(itertools.permutations(range(3)))


def _relabel_pair(p: Pair, perm) -> Pair:
    a, b = perm[p[0]], perm[p[1]]
    return (a, b) if a < b else (b, a)


# CODE_MAP[k][c]: code of pair c after relabeling k
CODE_MAP = np.array([[PAIR_CODE[_relabel_pair(p, perm)] for p in THREE_QUBIT_PAIRS]
                     for perm in PERMUTATIONS], dtype=np.int8)


def _normalize(c) -> Structure:
    out = []
    for p in c:
        i, j = sorted(int(q) for q in p)
        if (i, j) not in PAIR_CODE:
            raise ValueError(f"{p} is not a pair of distinct qubits in {{0, 1, 2}}")
        out.append((i, j))
    return tuple(out)


def relabel(c: Structure, perm) -> Structure:
    return tuple(_relabel_pair(p, perm) for p in _normalize(c))


def rearrangements(c: Structure) -> set[Structure]:
    """Orbit of ``c`` under the six qubit relabelings."""
    c = _normalize(c)
    return {relabel(c, perm) for perm in PERMUTATIONS}


def reverse(c: Structure) -> Structure:
    return tuple(reversed(_normalize(c)))


def closure(c: Structure) -> set[Structure]:
    """Everything reachable from ``c`` by relabelings and reversal (at most 12 members)."""
    r = rearrangements(c)
    return r | {reverse(s) for s in r}


def canonical_representative(c: Structure) -> Structure:
    return min(closure(c))


def encode(c: Structure) -> tuple[int, ...]:
    return tuple(PAIR_CODE[p] for p in _normalize(c))


def decode(codes) -> Structure:
    return tuple(THREE_QUBIT_PAIRS[int(k)] for k in codes)


def _check_size(n: int):
    if n < 0:
        raise ValueError("N must be >= 0")
    if n > MAX_N:
        raise MemoryError(f"N = {n} exceeds the enumeration guard N <= {MAX_N} (3^N structures)")


def _variant_values(codes: np.ndarray) -> np.ndarray:
    """Base-3 values of the 12 images of each row of ``codes``; shape (rows, 12)."""
    n = codes.shape[1]
    w = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    out = np.empty((codes.shape[0], 12), dtype=np.int64)
    for k, table in enumerate(CODE_MAP):
        mapped = table[codes].astype(np.int64)
        out[:, 2 * k] = mapped @ w
        out[:, 2 * k + 1] = mapped @ w[::-1]
    return out


def _digits(values: np.ndarray, n: int) -> np.ndarray:
    """Base-3 digits (most significant first) of each value: the pair codes."""
    v = np.array(values, dtype=np.int64)
    digits = np.empty((len(v), n), dtype=np.int8)
    for k in range(n - 1, -1, -1):
        digits[:, k] = v % 3
        v //= 3
    return digits


def _all_codes(n: int, start: int, stop: int) -> np.ndarray:
    return _digits(np.arange(start, stop, dtype=np.int64), n)


_CHUNK = 3 ** 10


def _shards(n: int):
    """Chunks of the full space as ``(own values, orbit sizes, is-representative mask)``."""
    total = 3 ** n
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        values = _variant_values(_all_codes(n, start, stop))
        own = np.arange(start, stop, dtype=np.int64)
        srt = np.sort(values, axis=1)
        sizes = 1 + np.count_nonzero(np.diff(srt, axis=1), axis=1)
        yield own, sizes, srt[:, 0] == own


def enumerate_pruned(n: int) -> list[Structure]:
    """One representative (the lexicographic minimum) per closure, sorted."""
    _check_size(n)
    if n == 0:
        return [()]
    reps = []
    for own, _, is_rep in _shards(n):
        reps.append(own[is_rep])
    reps = np.concatenate(reps)
    return [decode(row) for row in _digits(reps, n)]


@dataclass(frozen=True)
class ClosureCensus:
    n: int
    count3: int
    count6: int
    count12: int

    @property
    def pruned_size(self) -> int:
        return self.count3 + self.count6 + self.count12

    def covers_space(self) -> bool:
        return 3 * self.count3 + 6 * self.count6 + 12 * self.count12 == 3 ** self.n


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


UNION_FIND_MAX_N = 9


def _census_union_find(n: int) -> ClosureCensus:
    total = 3 ** n
    uf = UnionFind(total)
    values = _variant_values(_all_codes(n, 0, total))
    for s in range(total):
        for v in values[s]:
            uf.union(s, int(v))
    sizes: dict[int, int] = {}
    for s in range(total):
        r = uf.find(s)
        sizes[r] = sizes.get(r, 0) + 1
    return _from_sizes(n, list(sizes.values()))


def _census_hashing(n: int) -> ClosureCensus:
    counts = {3: 0, 6: 0, 12: 0}
    for _, sizes, is_rep in _shards(n):
        for k, c in zip(*np.unique(sizes[is_rep], return_counts=True)):
            counts[int(k)] = counts.get(int(k), 0) + int(c)
    return _from_counts(n, counts)


def _from_sizes(n: int, sizes: list[int]) -> ClosureCensus:
    counts: dict[int, int] = {3: 0, 6: 0, 12: 0}
    for s in sizes:
        counts[s] = counts.get(s, 0) + 1
    return _from_counts(n, counts)


def _from_counts(n: int, counts: dict[int, int]) -> ClosureCensus:
    odd = {k: v for k, v in counts.items() if k not in (3, 6, 12) and v}
    if odd:
        raise ArithmeticError(f"unexpected closure sizes {odd} at N = {n}")
    return ClosureCensus(n, counts[3], counts[6], counts[12])


def closure_census(n: int, method: str = "auto") -> ClosureCensus:
    """Exhaustive partition of all ``3^N`` structures into closures.

    ``method`` is ``"union-find"`` (full space, N <= 9), ``"hashing"``
    (representative counting, memory-bounded) or ``"auto"``.
    """
    _check_size(n)
    if n < 1:
        raise ValueError("the census needs N >= 1")
    if method == "auto":
        method = "union-find" if n <= UNION_FIND_MAX_N else "hashing"
    if method == "union-find":
        if n > UNION_FIND_MAX_N:
            raise MemoryError(f"union-find census is limited to N <= {UNION_FIND_MAX_N}")
        return _census_union_find(n)
    if method == "hashing":
        return _census_hashing(n)
    raise ValueError(f"unknown census method {method!r}")


def theorem3_prediction(n: int, variant: str = PROOF) -> Fraction:
    """Predicted pruned size.

    ``STATEMENT``: 3^N/12 + 3^floor((N-1)/2) + 1/4.
    ``PROOF``: the same for even N; 3^N/12 + 3^floor(N/2)/2 + 1/4 for odd N.
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    base = Fraction(3 ** n, 12) + Fraction(1, 4)
    if variant == STATEMENT:
        return base + 3 ** ((n - 1) // 2)
    if variant == PROOF:
        return base + (3 ** (n // 2 - 1) if n % 2 == 0 else Fraction(3 ** (n // 2), 2))
    raise ValueError(f"unknown variant {variant!r}")


def predicted_census(n: int) -> ClosureCensus:
    """Closure counts from the case analysis: one 3-closure, self-reversing 6-closures, the rest 12."""
    if n < 1:
        raise ValueError("N must be >= 1")
    h = n // 2
    # structures whose reversal equals one of their relabelings, minus the 3-closure
    fixed = 4 * 3 ** h - 6 if n % 2 == 0 else 2 * 3 ** (h + 1) - 6
    c6 = fixed // 6
    c12 = (3 ** n - fixed - 3) // 12
    return ClosureCensus(n, 1, c6, c12)


def prune_in_discovery_order(structures, full_closure: bool = False) -> list[Structure]:
    """Sweep in the given order, keeping each structure not yet removed.

    By default only the relabelings and the reversal of a kept structure are
    dropped; reversed relabelings then survive, so some closures keep two
    members. ``full_closure`` drops the whole closure and matches
    :func:`enumerate_pruned` in size.
    """
    alive = {_normalize(s) for s in structures}
    kept = []
    for c in (_normalize(s) for s in structures):
        if c not in alive:
            continue
        kept.append(c)
        gone = closure(c) if full_closure else rearrangements(c) | {reverse(c)}
        alive -= gone - {c}
    return kept


def all_structures(n: int) -> list[Structure]:
    _check_size(n)
    return [tuple(p) for p in itertools.product(THREE_QUBIT_PAIRS, repeat=n)]
