"""Truth tables over +-1 variables, NPN canonical forms and variable symmetry.

Bit k of a table is F at the assignment whose variable i is +1 (true) iff
bit i of k is set.  Canonical forms minimise the table read as an integer,
which is the lexicographic order of the bit vector written most significant
assignment first (the order of the "ttN:<hex>" literal).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError, ParseError

MAX_ARITY = 10
MAX_CANON_ARITY = 6


@dataclass(frozen=True, order=True)
class TruthTable:
    arity: int
    bits: int

    def __post_init__(self):
        if not 0 <= self.arity <= MAX_ARITY:
            raise DomainError(f"arity {self.arity} outside 0..{MAX_ARITY}")
        if not 0 <= self.bits < (1 << (1 << self.arity)):
            raise DomainError("bit vector longer than 2^arity")

    @property
    def size(self) -> int:
        return 1 << self.arity

    def value(self, k: int) -> bool:
        return bool((self.bits >> k) & 1)

    def __call__(self, *spins: int) -> bool:
        return self.value(assignment_index(spins))

    @classmethod
    def from_function(cls, arity: int, fn: Callable[..., bool]) -> "TruthTable":
        """fn receives one bool per variable."""
        bits = 0
        for k in range(1 << arity):
            if fn(*[bool((k >> i) & 1) for i in range(arity)]):
                bits |= 1 << k
        return cls(arity, bits)

    @classmethod
    def from_models(cls, arity: int, models: Iterable[int]) -> "TruthTable":
        bits = 0
        for k in models:
            bits |= 1 << k
        return cls(arity, bits)

    def model_indices(self) -> list[int]:
        return [k for k in range(self.size) if self.value(k)]

    def countermodel_indices(self) -> list[int]:
        return [k for k in range(self.size) if not self.value(k)]

    def complement(self) -> "TruthTable":
        return TruthTable(self.arity, ((1 << self.size) - 1) ^ self.bits)

    def literal(self) -> str:
        width = max(1, self.size // 4)
        return f"tt{self.arity}:{self.bits:0{width}x}"

    def __str__(self):
        return self.literal()

    def to_array(self) -> np.ndarray:
        return np.array([(self.bits >> k) & 1 for k in range(self.size)], dtype=bool)


_LITERAL = re.compile(r"^tt(\d+):([0-9a-fA-F]+)$")


def parse_tt(text: str) -> TruthTable:
    m = _LITERAL.match(text.strip())
    if not m:
        raise ParseError(f"bad truth table literal {text!r}")
    arity = int(m.group(1))
    bits = int(m.group(2), 16)
    if arity > MAX_ARITY or bits >= 1 << (1 << arity):
        raise ParseError(f"truth table literal {text!r} does not fit arity {arity}")
    return TruthTable(arity, bits)


def assignment_index(spins: Sequence[int]) -> int:
    k = 0
    for i, s in enumerate(spins):
        if s not in (1, -1, True, False):
            raise DomainError(f"spin {s!r} is not +-1")
        if s is True or s == 1:
            k |= 1 << i
    return k


def assignment_spins(k: int, arity: int) -> tuple[int, ...]:
    return tuple(1 if (k >> i) & 1 else -1 for i in range(arity))


def models(tt: TruthTable) -> list[tuple[int, ...]]:
    return [assignment_spins(k, tt.arity) for k in tt.model_indices()]


def countermodels(tt: TruthTable) -> list[tuple[int, ...]]:
    return [assignment_spins(k, tt.arity) for k in tt.countermodel_indices()]


# ---------------------------------------------------------------------------
# common tables


def relation(fn_tt: TruthTable) -> TruthTable:
    """y <-> f(x) with y appended as the last variable."""
    n = fn_tt.arity
    return TruthTable.from_function(n + 1, lambda *v: v[n] == fn_tt.value(sum(1 << i for i in range(n) if v[i])))


def and_relation() -> TruthTable:
    return TruthTable.from_function(3, lambda a, b, y: y == (a and b))


def or_relation() -> TruthTable:
    return TruthTable.from_function(3, lambda a, b, y: y == (a or b))


def xor_relation() -> TruthTable:
    return TruthTable.from_function(3, lambda a, b, y: y == (a != b))


def equivalence() -> TruthTable:
    return TruthTable.from_function(2, lambda a, b: a == b)


def cardinality(arity: int, allowed: Iterable[int]) -> TruthTable:
    allowed = set(allowed)
    return TruthTable.from_function(arity, lambda *v: sum(v) in allowed)


def exactly(k: int, arity: int) -> TruthTable:
    return cardinality(arity, [k])


def at_most(k: int, arity: int) -> TruthTable:
    return cardinality(arity, range(k + 1))


def at_least(k: int, arity: int) -> TruthTable:
    return cardinality(arity, range(k, arity + 1))


def clause(signs: Sequence[bool]) -> TruthTable:
    """OR of literals; signs[i] False means the variable appears negated."""
    return TruthTable.from_function(len(signs), lambda *v: any(x == s for x, s in zip(v, signs)))


# ---------------------------------------------------------------------------
# NPN transforms


@dataclass(frozen=True)
class NPNTransform:
    """G = T(F) with G(y) = out XOR F(x), where x[perm[i]] = y[i] XOR neg_i.

    Read the other way: input i of G carries variable perm[i] of F, negated
    when bit i of `input_negations` is set.
    """

    permutation: tuple
    input_negations: int = 0
    output_negation: bool = False

    def __post_init__(self):
        object.__setattr__(self, "permutation", tuple(self.permutation))
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise DomainError(f"{self.permutation} is not a permutation")

    @property
    def arity(self) -> int:
        return len(self.permutation)

    @classmethod
    def identity(cls, n: int) -> "NPNTransform":
        return cls(tuple(range(n)), 0, False)

    def index_map(self) -> np.ndarray:
        return _index_map(self.permutation, self.input_negations)

    def apply(self, tt: TruthTable) -> TruthTable:
        if tt.arity != self.arity:
            raise DomainError("transform and table arity differ")
        src = tt.to_array()[self.index_map()]
        if self.output_negation:
            src = ~src
        return TruthTable(tt.arity, _pack(src))

    def inverse(self) -> "NPNTransform":
        n = self.arity
        inv = [0] * n
        neg = 0
        for i, p in enumerate(self.permutation):
            inv[p] = i
            if (self.input_negations >> i) & 1:
                neg |= 1 << p
        return NPNTransform(tuple(inv), neg, self.output_negation)

    def then(self, other: "NPNTransform") -> "NPNTransform":
        """Transform equivalent to applying self, then other."""
        n = self.arity
        perm = tuple(self.permutation[other.permutation[i]] for i in range(n))
        neg = 0
        for i in range(n):
            bit = ((other.input_negations >> i) & 1) ^ ((self.input_negations >> other.permutation[i]) & 1)
            neg |= bit << i
        return NPNTransform(perm, neg, self.output_negation ^ other.output_negation)


def _pack(bits: np.ndarray) -> int:
    return int(sum(1 << int(k) for k in np.flatnonzero(bits)))


@lru_cache(maxsize=None)
def _index_map_cached(perm: tuple, neg: int) -> np.ndarray:
    n = len(perm)
    ys = np.arange(1 << n)
    xs = np.zeros(1 << n, dtype=np.int64)
    for i, p in enumerate(perm):
        bit = ((ys >> i) & 1) ^ ((neg >> i) & 1)
        xs |= bit << p
    xs.setflags(write=False)
    return xs


def _index_map(perm, neg):
    return _index_map_cached(tuple(perm), int(neg))


@lru_cache(maxsize=None)
def _all_maps(n: int):
    """Every (perm, neg) pair with its index map, in a fixed order."""
    transforms = []
    maps = []
    for perm in permutations(range(n)):
        for neg in range(1 << n):
            transforms.append((perm, neg))
            maps.append(_index_map(perm, neg))
    arr = np.array(maps, dtype=np.int64).reshape(len(maps), 1 << n)
    weights = [1 << k for k in range(1 << n)]
    return transforms, arr, weights


def _orbit_values(tt: TruthTable, with_output: bool):
    """Integer value of every transformed table; rows follow _all_maps order."""
    transforms, maps, _ = _all_maps(tt.arity)
    table = tt.to_array()[maps]  # (T, 2^n) bool
    vals = _rows_to_ints(table)
    if with_output:
        full = (1 << tt.size) - 1
        return transforms, vals, [full ^ v for v in vals]
    return transforms, vals, None


def _rows_to_ints(table: np.ndarray) -> list[int]:
    n_bits = table.shape[1]
    if n_bits <= 63:
        w = (np.int64(1) << np.arange(n_bits, dtype=np.int64))
        return [int(v) for v in table.astype(np.int64) @ w]
    packed = np.packbits(table, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _check_canon_arity(n):
    if n > MAX_CANON_ARITY:
        raise CapacityError(f"canonicalization supports arity <= {MAX_CANON_ARITY}, got {n}")


def npn_canonical(tt: TruthTable) -> tuple[TruthTable, NPNTransform]:
    _check_canon_arity(tt.arity)
    transforms, vals, negs = _orbit_values(tt, True)
    best_plain = min(range(len(vals)), key=lambda i: (vals[i], i))
    best_neg = min(range(len(negs)), key=lambda i: (negs[i], i))
    if negs[best_neg] < vals[best_plain]:
        perm, neg = transforms[best_neg]
        return TruthTable(tt.arity, negs[best_neg]), NPNTransform(perm, neg, True)
    perm, neg = transforms[best_plain]
    return TruthTable(tt.arity, vals[best_plain]), NPNTransform(perm, neg, False)


def np_canonical(tt: TruthTable) -> tuple[TruthTable, NPNTransform]:
    """Canonical form under input permutation and input negation only.

    Output negation complements a constraint and cannot be realised on a
    penalty function, so library lookups use this form.
    """
    _check_canon_arity(tt.arity)
    transforms, vals, _ = _orbit_values(tt, False)
    best = min(range(len(vals)), key=lambda i: (vals[i], i))
    perm, neg = transforms[best]
    return TruthTable(tt.arity, vals[best]), NPNTransform(perm, neg, False)


def np_transforms_between(src: TruthTable, dst: TruthTable) -> list[NPNTransform]:
    """All NP transforms T (no output negation) with T(src) == dst."""
    transforms, vals, _ = _orbit_values(src, False)
    return [NPNTransform(p, m, False) for (p, m), v in zip(transforms, vals) if v == dst.bits]


def npn_class_count(arity: int) -> int:
    """Number of NPN classes over all functions of the given arity (orbit marking)."""
    _check_canon_arity(arity)
    if arity > 4:
        raise CapacityError("class census enumerates all 2^(2^n) tables; arity <= 4 supported")
    size = 1 << arity
    total = 1 << size
    _, maps, _ = _all_maps(arity)
    seen = np.zeros(total, dtype=bool)
    full = total - 1
    count = 0
    for f in range(total):
        if seen[f]:
            continue
        count += 1
        bits = np.array([(f >> k) & 1 for k in range(size)], dtype=bool)
        vals = np.array(_rows_to_ints(bits[maps]), dtype=np.int64)
        seen[vals] = True
        seen[full ^ vals] = True
    return count


def npn_symmetry_classes(tt: TruthTable) -> list[list[int]]:
    """Partition of variable indices; i ~ j when swapping x_i and x_j plus some
    set of input negations leaves F unchanged (closed transitively)."""
    n = tt.arity
    _check_canon_arity(n)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    base = tt.to_array()
    for i in range(n):
        for j in range(i + 1, n):
            if find(i) == find(j):
                continue
            perm = list(range(n))
            perm[i], perm[j] = j, i
            for neg in range(1 << n):
                if np.array_equal(base[_index_map(tuple(perm), neg)], base):
                    parent[find(j)] = find(i)
                    break
    classes: dict[int, list[int]] = {}
    for v in range(n):
        classes.setdefault(find(v), []).append(v)
    return sorted(classes.values())


__all__ = [
    "TruthTable", "NPNTransform", "parse_tt", "models", "countermodels", "npn_canonical", "np_canonical",
    "npn_symmetry_classes", "npn_class_count", "relation", "and_relation", "or_relation", "xor_relation",
    "equivalence", "exactly", "at_most", "at_least", "clause", "cardinality", "assignment_index",
    "assignment_spins", "np_transforms_between",
]
