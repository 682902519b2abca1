"""Seeds, mutations and mutation-tree exploration for cluster algebras.

Indices in the public API are 1-based, matching the usual notation mu_1..mu_N.
A permutation ``perm`` means: new position i takes the old entry perm[i].
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .laurent import (LaurentPoly, degree_profile, div_exact, format_poly, parse_poly)

MAX_SYMMETRIZER = 720

Matrix = Tuple[Tuple[int, ...], ...]


def _pos(v: int) -> int:
    return v if v > 0 else 0


def _sgn(v: int) -> int:
    return (v > 0) - (v < 0)


def skew_symmetrizer(entries: Sequence[Sequence[int]], bound: int = MAX_SYMMETRIZER) -> Optional[Tuple[int, ...]]:
    """Positive integer diagonal D with DB skew-symmetric, or None.

    Each connected block fixes the ratios d_j/d_i = -b_ij/b_ji; the smallest
    integer solution is returned if all its entries are <= ``bound``.
    """
    n = len(entries)
    if any(len(row) != n for row in entries):
        return None
    for i in range(n):
        if entries[i][i] != 0:
            return None
        for j in range(n):
            a, b = entries[i][j], entries[j][i]
            if (a == 0) != (b == 0) or (a and _sgn(a) == _sgn(b)):
                return None
    d: List[Optional[Fraction]] = [None] * n
    for root in range(n):
        if d[root] is not None:
            continue
        d[root] = Fraction(1)
        block, stack = [root], [root]
        while stack:
            i = stack.pop()
            for j in range(n):
                if entries[i][j] == 0:
                    continue
                want = d[i] * Fraction(-entries[i][j], entries[j][i])
                if d[j] is None:
                    d[j] = want
                    block.append(j)
                    stack.append(j)
                elif d[j] != want:
                    return None
        scale = lcm(*(d[i].denominator for i in block))
        ints = [int(d[i] * scale) for i in block]
        g = 0
        for v in ints:
            g = gcd(g, v)
        for i, v in zip(block, ints):
            d[i] = Fraction(v // g)
    out = tuple(int(v) for v in d)
    if max(out) > bound:
        return None
    return out


@dataclass(frozen=True)
class ExchangeMatrix:
    entries: Matrix

    def __init__(self, entries: Sequence[Sequence[int]], validate: bool = True):
        rows = tuple(tuple(int(v) for v in row) for row in entries)
        object.__setattr__(self, "entries", rows)
        if validate and skew_symmetrizer(rows) is None:
            raise ValueError("exchange matrix is not skew-symmetrizable "
                             f"(with symmetrizer entries <= {MAX_SYMMETRIZER})")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: Tuple[int, int]) -> int:
        """0-based entry access."""
        i, j = ij
        return self.entries[i][j]

    def symmetrizer(self) -> Optional[Tuple[int, ...]]:
        return skew_symmetrizer(self.entries)

    def permuted(self, perm: Sequence[int]) -> "ExchangeMatrix":
        """0-based perm: new (i, j) = old (perm[i], perm[j])."""
        return ExchangeMatrix([[self.entries[pi][pj] for pj in perm] for pi in perm], validate=False)

    def __neg__(self) -> "ExchangeMatrix":
        return ExchangeMatrix([[-v for v in row] for row in self.entries], validate=False)

    def tolist(self) -> List[List[int]]:
        return [list(row) for row in self.entries]


def _check_index(k: int, n: int) -> int:
    if not 1 <= k <= n:
        raise IndexError(f"mutation index {k} out of range 1..{n}")
    return k - 1


def mutate_matrix(B: ExchangeMatrix, k: int) -> ExchangeMatrix:
    """Matrix mutation at 1-based index k."""
    kk = _check_index(k, B.n)
    b = B.entries
    out = []
    for i in range(B.n):
        row = []
        for j in range(B.n):
            if i == kk or j == kk:
                row.append(-b[i][j])
            else:
                row.append(b[i][j] + _sgn(b[i][kk]) * _pos(b[i][kk] * b[kk][j]))
        out.append(row)
    return ExchangeMatrix(out, validate=False)


@dataclass(frozen=True)
class Seed:
    cluster: Tuple[LaurentPoly, ...]
    matrix: ExchangeMatrix

    def __post_init__(self):
        object.__setattr__(self, "cluster", tuple(self.cluster))
        if len(self.cluster) != self.matrix.n:
            raise ValueError("cluster length must equal matrix size")
        if len({p.nvars for p in self.cluster}) > 1:
            raise ValueError("cluster variables must share one ambient ring")

    @classmethod
    def initial(cls, matrix, nvars: Optional[int] = None) -> "Seed":
        B = matrix if isinstance(matrix, ExchangeMatrix) else ExchangeMatrix(matrix)
        nv = nvars or B.n
        return cls(tuple(LaurentPoly.var(nv, i) for i in range(B.n)), B)

    @property
    def n(self) -> int:
        return self.matrix.n

    def permuted(self, perm: Sequence[int]) -> "Seed":
        """0-based perm applied to cluster and matrix together."""
        return Seed(tuple(self.cluster[p] for p in perm), self.matrix.permuted(perm))

    def max_degree(self) -> int:
        return max(degree_profile(p).rational_degree for p in self.cluster)

    def texts(self) -> List[str]:
        return [format_poly(p) for p in self.cluster]


def exchange_binomial(seed: Seed, k: int) -> LaurentPoly:
    """prod x_j^[b_kj]_+ + prod x_j^[-b_kj]_+ for 1-based k."""
    kk = _check_index(k, seed.n)
    nv = seed.cluster[0].nvars
    row = seed.matrix.entries[kk]
    plus = LaurentPoly.constant(nv, 1)
    minus = LaurentPoly.constant(nv, 1)
    for j, b in enumerate(row):
        if b > 0:
            plus = plus * seed.cluster[j] ** b
        elif b < 0:
            minus = minus * seed.cluster[j] ** (-b)
    return plus + minus


def mutate_cluster(seed: Seed, k: int) -> Seed:
    """Cluster mutation at 1-based index k (matrix mutated alongside)."""
    kk = _check_index(k, seed.n)
    new = div_exact(exchange_binomial(seed, k), seed.cluster[kk])
    cluster = list(seed.cluster)
    cluster[kk] = new
    return Seed(tuple(cluster), mutate_matrix(seed.matrix, k))


@dataclass(frozen=True)
class MutationSequence:
    indices: Tuple[int, ...]
    permutation: Optional[Tuple[int, ...]] = None

    def __init__(self, indices: Sequence[int], permutation: Optional[Sequence[int]] = None):
        object.__setattr__(self, "indices", tuple(int(k) for k in indices))
        perm = tuple(int(p) for p in permutation) if permutation is not None else None
        if perm is not None and sorted(perm) != list(range(1, len(perm) + 1)):
            raise ValueError("permutation must be a bijection of 1..N")
        object.__setattr__(self, "permutation", perm)

    def validate(self, n: int) -> None:
        for k in self.indices:
            _check_index(k, n)
        if self.permutation is not None and len(self.permutation) != n:
            raise ValueError("permutation length must equal N")


def apply_sequence(seed: Seed, seq: MutationSequence) -> Seed:
    """Mutations left to right, then the optional relabelling."""
    seq.validate(seed.n)
    for k in seq.indices:
        seed = mutate_cluster(seed, k)
    if seq.permutation is not None:
        seed = seed.permuted([p - 1 for p in seq.permutation])
    return seed


def find_relabelling(a: Seed, b: Seed) -> Optional[Tuple[int, ...]]:
    """1-based perm with b.permuted(perm) == a, if one exists."""
    if a.n != b.n:
        return None
    where = {}
    for i, p in enumerate(b.cluster):
        where.setdefault(p, []).append(i)
    perm = []
    for p in a.cluster:
        slots = where.get(p)
        if not slots:
            return None
        perm.append(slots.pop(0))
    if b.permuted(perm).matrix != a.matrix:
        return None
    return tuple(i + 1 for i in perm)


@dataclass(frozen=True)
class PeriodCheck:
    exact: bool
    relabelling: Optional[Tuple[int, ...]]
    final: Seed

    @property
    def periodic(self) -> bool:
        return self.exact or self.relabelling is not None


def check_period(seed: Seed, seq: MutationSequence) -> PeriodCheck:
    """Does ``seq`` return ``seed`` exactly, or up to relabelling?"""
    final = apply_sequence(seed, seq)
    exact = final == seed
    return PeriodCheck(exact, None if exact else find_relabelling(seed, final), final)


def matrix_period_check(B: ExchangeMatrix, indices: Sequence[int],
                        permutation: Optional[Sequence[int]] = None) -> bool:
    M = B
    for k in indices:
        M = mutate_matrix(M, k)
    if permutation is not None:
        M = M.permuted([p - 1 for p in permutation])
    return M == B


# ----------------------------------------------------------------------
# mutation tree
# ----------------------------------------------------------------------
def canonical_form(seed: Seed) -> Tuple[Tuple, Tuple[int, ...]]:
    """(key, order): cluster sorted by text, matrix permuted to match."""
    texts = seed.texts()
    order = tuple(sorted(range(seed.n), key=lambda i: (texts[i], i)))
    perm_matrix = seed.matrix.permuted(order)
    key = (tuple(texts[i] for i in order), perm_matrix.entries)
    return key, order


@dataclass
class TreeReport:
    max_degrees: List[int]
    seeds_per_depth: List[int]
    truncated: bool = False
    reason: str = ""


def explore_mutation_tree(seed: Seed, depth: int, *, max_seeds: int = 200_000,
                          max_terms: int = 2_000_000) -> TreeReport:
    """Per-depth supremum of the cluster's max rational degree.

    Sequences never repeat the preceding index.  Seeds equal up to
    relabelling are merged within each depth; the merged entry keeps only
    the moves forbidden along every path that reached it.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    key, order = canonical_form(seed)
    canon = seed.permuted(order)
    frontier: Dict[Tuple, Tuple[Seed, frozenset]] = {key: (canon, frozenset())}
    max_degrees, counts = [], []
    for level in range(1, depth + 1):
        nxt: Dict[Tuple, Tuple[Seed, frozenset]] = {}
        best = 0
        for s, forbidden in frontier.values():
            for k in range(s.n):
                if k in forbidden:
                    continue
                child = mutate_cluster(s, k + 1)
                if len(child.cluster[k]) > max_terms:
                    return TreeReport(max_degrees, counts, True,
                                      f"term limit reached at depth {level}")
                ckey, corder = canonical_form(child)
                # position of the mutated variable after canonical relabelling
                fpos = corder.index(k)
                if ckey in nxt:
                    prev_seed, prev_forb = nxt[ckey]
                    nxt[ckey] = (prev_seed, prev_forb & {fpos})
                else:
                    nxt[ckey] = (child.permuted(corder), frozenset({fpos}))
                    best = max(best, child.max_degree())
                if len(nxt) > max_seeds:
                    return TreeReport(max_degrees, counts, True,
                                      f"seed limit {max_seeds} reached at depth {level}")
        max_degrees.append(best)
        counts.append(len(nxt))
        frontier = nxt
    return TreeReport(max_degrees, counts, False, "")


# ----------------------------------------------------------------------
# built-in seeds and JSON
# ----------------------------------------------------------------------
A2_MATRIX = ((0, 1), (-1, 0))
MARKOFF_MATRIX = ((0, 2, -2), (-2, 0, 2), (2, -2, 0))
SOMOS4_MATRIX = ((0, 1, -2, 1), (-1, 0, 3, -2), (2, -3, 0, 1), (-1, 2, -1, 0))


def rank2_matrix(r: int) -> Matrix:
    return ((0, r), (-r, 0))


def builtin_seed(name: str) -> Seed:
    """a2, rank2:r, markoff, somos4."""
    base, _, arg = name.partition(":")
    if base == "a2":
        return Seed.initial(A2_MATRIX)
    if base == "rank2":
        if not arg.isdigit() or int(arg) < 1:
            raise ValueError("rank2 seed needs r >= 1, e.g. rank2:3")
        return Seed.initial(rank2_matrix(int(arg)))
    if base == "markoff":
        return Seed.initial(MARKOFF_MATRIX)
    if base == "somos4":
        return Seed.initial(SOMOS4_MATRIX)
    raise ValueError(f"unknown seed {name!r}; known: a2, rank2:r, markoff, somos4")


def seed_from_json(data) -> Seed:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    B = ExchangeMatrix(data["matrix"])
    if B.n != n:
        raise ValueError(f"matrix is {B.n}x{B.n} but n={n}")
    names = [f"x{i + 1}" for i in range(n)]
    if "cluster" in data and data["cluster"] is not None:
        cluster = tuple(parse_poly(str(t), names) for t in data["cluster"])
        if len(cluster) != n:
            raise ValueError("cluster length must equal n")
    else:
        cluster = tuple(LaurentPoly.var(n, i) for i in range(n))
    return Seed(cluster, B)


def seed_to_json(seed: Seed) -> dict:
    return {"n": seed.n, "matrix": seed.matrix.tolist(), "cluster": seed.texts()}
