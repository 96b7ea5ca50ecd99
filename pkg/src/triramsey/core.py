"""Graphs, triple systems, partite hypergraphs and exact density arithmetic.

Vertices are always 0..n-1.  Graph adjacency is one int bitmask per vertex,
so neighborhood intersection and counting are single big-int operations;
every search loop in the package leans on that.  Densities are exact
Fractions: certificates must re-verify bit for bit, so floating point is
reserved for sampled statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from ._rng import derive, p_threshold

RED = "red"
BLUE = "blue"
COLORS = (RED, BLUE)
# tie-breaks order red before blue throughout
COLOR_RANK = {RED: 0, BLUE: 1}


def other_color(color: str) -> str:
    return BLUE if color == RED else RED


class BudgetExceeded(Exception):
    """An exhaustive scan was refused because it would exceed its budget."""

    def __init__(self, message: str, estimate: int | None = None):
        super().__init__(message)
        self.estimate = estimate


class UndefinedRatio(ValueError):
    """Raised when a density ratio has an empty denominator."""


# ---------------------------------------------------------------------------
# bitmask helpers


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits_of(mask: int) -> Iterator[int]:
    """Yield set bit positions in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Graph


class Graph:
    """Simple undirected graph on vertices 0..n-1 with bitmask adjacency rows."""

    __slots__ = ("n", "rows", "_hash")

    def __init__(self, n: int, rows: Sequence[int], _trusted: bool = False):
        self.n = n
        self.rows = tuple(rows)
        self._hash = None
        if not _trusted:
            self._validate()

    def _validate(self) -> None:
        if self.n < 0 or len(self.rows) != self.n:
            raise ValueError("row count must equal vertex count")
        full = (1 << self.n) - 1
        for u, row in enumerate(self.rows):
            if row & ~full:
                raise ValueError(f"row {u} references vertices outside 0..{self.n - 1}")
            if row >> u & 1:
                raise ValueError(f"self-loop at vertex {u}")
        for u in range(self.n):
            for v in bits_of(self.rows[u]):
                if not self.rows[v] >> u & 1:
                    raise ValueError(f"adjacency not symmetric at ({u}, {v})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows, _trusted=True)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, [full ^ (1 << v) for v in range(n)], _trusted=True)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, [0] * n, _trusted=True)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in range(self.n):
            row = self.rows[u] >> (u + 1) << (u + 1)
            for v in bits_of(row):
                out.append((u, v))
        return out

    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def edges_within(self, mask: int) -> int:
        """Number of edges with both endpoints in the mask."""
        total = 0
        for v in bits_of(mask):
            total += (self.rows[v] & mask).bit_count()
        return total // 2

    def complement(self) -> "Graph":
        full = (1 << self.n) - 1
        return Graph(
            self.n,
            [(~r & full) ^ (1 << v) for v, r in enumerate(self.rows)],
            _trusted=True,
        )

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Image of the graph under vertex -> perm[vertex]."""
        rows = [0] * self.n
        for u in range(self.n):
            for v in bits_of(self.rows[u]):
                rows[perm[u]] |= 1 << perm[v]
        return Graph(self.n, rows, _trusted=True)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.rows))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


# ---------------------------------------------------------------------------
# TripleSystem


class TripleSystem:
    """A 3-uniform hypergraph: a duplicate-free set of 3-element subsets."""

    __slots__ = ("n", "triples", "_hash")

    def __init__(self, n: int, triples: Iterable[Sequence[int]]):
        canon = set()
        for t in triples:
            a, b, c = sorted(t)
            if a == b or b == c:
                raise ValueError(f"triple {tuple(t)} has repeated vertices")
            if a < 0 or c >= n:
                raise ValueError(f"triple {tuple(t)} out of range for n={n}")
            canon.add((a, b, c))
        self.n = n
        self.triples = frozenset(canon)
        self._hash = None

    def sorted_triples(self) -> list[tuple[int, int, int]]:
        return sorted(self.triples)

    def __contains__(self, triple: Sequence[int]) -> bool:
        return tuple(sorted(triple)) in self.triples

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return iter(self.sorted_triples())

    def spanned_vertices(self) -> set[int]:
        out: set[int] = set()
        for t in self.triples:
            out.update(t)
        return out

    def pair_degree(self, u: int, v: int) -> int:
        a, b = (u, v) if u < v else (v, u)
        return sum(1 for t in self.triples if a in t and b in t)

    def pair_index(self) -> dict[tuple[int, int], list[tuple[int, int, int]]]:
        """Map each unordered pair to the sorted triples containing it."""
        idx: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
        for t in self.sorted_triples():
            for pair in combinations(t, 2):
                idx.setdefault(pair, []).append(t)
        return idx

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TripleSystem)
            and self.n == other.n
            and self.triples == other.triples
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.triples))
        return self._hash

    def __repr__(self) -> str:
        return f"TripleSystem(n={self.n}, t={len(self.triples)})"


def triangles(g: Graph) -> TripleSystem:
    """The triple system of all triangles of g (exact, bit-parallel)."""
    out = []
    rows = g.rows
    for u in range(g.n):
        row_u = rows[u] >> (u + 1) << (u + 1)
        for v in bits_of(row_u):
            common = rows[u] & rows[v]
            common = common >> (v + 1) << (v + 1)
            for w in bits_of(common):
                out.append((u, v, w))
    return TripleSystem(g.n, out)


def is_linear(ts: TripleSystem) -> bool:
    """True iff every two distinct triples share at most one vertex.

    Two triples share two vertices iff they share an unordered pair, so one
    pass over pair incidences suffices.
    """
    seen: set[tuple[int, int]] = set()
    for t in ts.triples:
        for pair in combinations(sorted(t), 2):
            if pair in seen:
                return False
            seen.add(pair)
    return True


def tight_tree_order(
    ts: TripleSystem,
) -> tuple[list[tuple[int, int, int]], list[int]] | None:
    """A tight-tree ordering e_1..e_t with apex vertices v_2..v_t, or None.

    Found by peeling leaf edges from the back with backtracking; memoizing
    dead edge sets keeps the search exhaustive without blowing up on the
    sizes this package handles.
    """
    edges = ts.sorted_triples()
    if not edges:
        return [], []
    all_set = frozenset(edges)
    dead: set[frozenset] = set()

    def peel(remaining: frozenset) -> list[tuple[tuple[int, int, int], int]] | None:
        if len(remaining) == 1:
            (e,) = remaining
            return [(e, -1)]
        if remaining in dead:
            return None
        degree: dict[int, int] = {}
        for e in remaining:
            for v in e:
                degree[v] = degree.get(v, 0) + 1
        for e in sorted(remaining):
            lonely = [v for v in e if degree[v] == 1]
            for v in sorted(lonely):
                pair = set(e) - {v}
                rest = remaining - {e}
                if any(pair <= set(f) for f in rest):
                    sub = peel(rest)
                    if sub is not None:
                        return sub + [(e, v)]
                    break  # any apex of e leaves the same remaining set
        dead.add(remaining)
        return None

    chain = peel(all_set)
    if chain is None:
        return None
    order = [e for e, _ in chain]
    apexes = [v for _, v in chain[1:]]
    return order, apexes


def check_tight_tree_order(
    ts: TripleSystem, order: Sequence[Sequence[int]], apexes: Sequence[int]
) -> bool:
    """Replay an ordering forward and confirm it certifies a tight tree."""
    if len(order) != len(ts.triples) or {tuple(sorted(e)) for e in order} != ts.triples:
        return False
    if not order:
        return True
    if len(apexes) != len(order) - 1:
        return False
    seen_vertices = set(order[0])
    seen_edges = [set(order[0])]
    for e, apex in zip(order[1:], apexes):
        es = set(e)
        if apex not in es or apex in seen_vertices:
            return False
        pair = es - {apex}
        if not any(pair <= f for f in seen_edges):
            return False
        seen_vertices |= es
        seen_edges.append(es)
    return True


# ---------------------------------------------------------------------------
# pair statistics and partite densities


def pair_stats(
    g: Graph, xs: Iterable[int], ys: Iterable[int]
) -> tuple[int, int, Fraction]:
    """(P, e, e/P) where P counts unordered pairs {x, y} with x in X, y in Y.

    X and Y may overlap; each qualifying pair is counted once.  Raises
    UndefinedRatio when P = 0.
    """
    mx = mask_of(xs)
    my = mask_of(ys)
    full = (1 << g.n) - 1
    if (mx | my) & ~full:
        raise ValueError("subset contains vertices outside the graph")
    a = mx.bit_count()
    b = my.bit_count()
    i = (mx & my).bit_count()
    pairs = i * (i - 1) // 2 + i * (a - i) + i * (b - i) + (a - i) * (b - i)
    if pairs == 0:
        raise UndefinedRatio("no vertex pairs between the given subsets")
    ordered = 0
    for x in bits_of(mx):
        ordered += (g.rows[x] & my).bit_count()
    edges = ordered - g.edges_within(mx & my)
    return pairs, edges, Fraction(edges, pairs)


class PartiteFamily:
    """An ordered tuple of disjoint blocks plus an r-uniform transversal edge set.

    Edges are r-element sets meeting r distinct blocks, at most one vertex
    per block.  The number of blocks may exceed r (e.g. triples spread over
    n blocks).
    """

    __slots__ = ("blocks", "r", "edges", "block_of", "_by_blockset")

    def __init__(
        self,
        blocks: Sequence[Iterable[int]],
        r: int,
        edges: Iterable[Sequence[int]],
    ):
        self.blocks = tuple(tuple(sorted(b)) for b in blocks)
        self.r = r
        block_of: dict[int, int] = {}
        for i, blk in enumerate(self.blocks):
            for v in blk:
                if v in block_of:
                    raise ValueError(f"vertex {v} appears in two blocks")
                block_of[v] = i
        self.block_of = block_of
        canon = set()
        for e in edges:
            t = tuple(sorted(e))
            if len(t) != r or len(set(t)) != r:
                raise ValueError(f"edge {tuple(e)} is not a set of {r} vertices")
            touched = set()
            for v in t:
                if v not in block_of:
                    raise ValueError(f"edge vertex {v} lies in no block")
                touched.add(block_of[v])
            if len(touched) != r:
                raise ValueError(f"edge {t} meets a block twice")
            canon.add(t)
        self.edges = frozenset(canon)
        self._by_blockset = None

    def sorted_edges(self) -> list[tuple[int, ...]]:
        return sorted(self.edges)

    def edges_by_blockset(self) -> dict[frozenset, list[tuple[int, ...]]]:
        if self._by_blockset is None:
            by: dict[frozenset, list[tuple[int, ...]]] = {}
            for e in self.sorted_edges():
                key = frozenset(self.block_of[v] for v in e)
                by.setdefault(key, []).append(e)
            self._by_blockset = by
        return self._by_blockset

    @property
    def universe(self) -> int:
        return 1 + max((v for b in self.blocks for v in b), default=-1)

    def as_graph(self) -> Graph:
        """The uniformity-2 family viewed as a plain graph on 0..universe-1."""
        if self.r != 2:
            raise ValueError("as_graph requires uniformity 2")
        return Graph.from_edges(self.universe, [tuple(e) for e in self.edges])

    def __repr__(self) -> str:
        return (
            f"PartiteFamily(blocks={len(self.blocks)}, r={self.r}, "
            f"edges={len(self.edges)})"
        )


def partite_density(
    fam: PartiteFamily, parts: Sequence[Iterable[int]]
) -> Fraction:
    """Exact density of the edges induced on r sub-blocks.

    Each part must be a nonempty subset of one distinct block; the owning
    block is inferred from membership.
    """
    sets = [frozenset(p) for p in parts]
    if len(sets) != fam.r:
        raise ValueError(f"expected {fam.r} parts, got {len(sets)}")
    indices = []
    for s in sets:
        if not s:
            raise ValueError("empty part in density query")
        owners = {fam.block_of.get(v) for v in s}
        if len(owners) != 1 or None in owners:
            raise ValueError("part is not contained in a single block")
        indices.append(next(iter(owners)))
    if len(set(indices)) != fam.r:
        raise ValueError("parts must lie in distinct blocks")
    key = frozenset(indices)
    part_at = {idx: s for idx, s in zip(indices, sets)}
    count = 0
    for e in fam.edges_by_blockset().get(key, ()):
        if all(v in part_at[fam.block_of[v]] for v in e):
            count += 1
    denom = math.prod(len(s) for s in sets)
    return Fraction(count, denom)


# ---------------------------------------------------------------------------
# triangle colorings


class TriangleColoring:
    """Total 2-coloring of the edges of a triple system."""

    def __init__(self, domain: TripleSystem, colors: Mapping[Sequence[int], str]):
        mapping: dict[tuple[int, int, int], str] = {}
        for t, c in colors.items():
            key = tuple(sorted(t))
            if c not in COLORS:
                raise ValueError(f"unknown color {c!r}")
            mapping[key] = c
        missing = domain.triples - mapping.keys()
        extra = mapping.keys() - domain.triples
        if missing:
            raise ValueError(f"coloring misses {len(missing)} domain triples")
        if extra:
            raise ValueError(f"coloring has {len(extra)} triples outside the domain")
        self.domain = domain
        self.mapping = mapping

    def color_of(self, triple: Sequence[int]) -> str:
        return self.mapping[tuple(sorted(triple))]

    def items(self) -> list[tuple[tuple[int, int, int], str]]:
        return sorted(self.mapping.items())

    def swapped(self) -> "TriangleColoring":
        return TriangleColoring(
            self.domain, {t: other_color(c) for t, c in self.mapping.items()}
        )

    @classmethod
    def constant(cls, domain: TripleSystem, color: str) -> "TriangleColoring":
        return cls(domain, {t: color for t in domain.triples})


class SeededColoring:
    """Deterministic pseudorandom 2-coloring defined by a seed.

    Total on whatever triangle domain `is_valid` accepts; colors are pure
    functions of (seed, sorted triple), so batch and scalar queries agree
    and the coloring never needs materializing.
    """

    def __init__(self, seed: int, is_valid: Callable[[int, int, int], bool] | None = None):
        self.seed = seed
        self.is_valid = is_valid
        self._salt = derive(seed, 0xC0102)

    def color_of(self, triple: Sequence[int]) -> str:
        a, b, c = sorted(triple)
        if self.is_valid is not None and not self.is_valid(a, b, c):
            raise ValueError(f"triple {(a, b, c)} is not in the coloring domain")
        return RED if derive(self._salt, a, b, c) >> 63 == 0 else BLUE

    @classmethod
    def for_graph(cls, g: Graph, seed: int) -> "SeededColoring":
        def valid(a: int, b: int, c: int) -> bool:
            return bool(
                g.rows[a] >> b & 1 and g.rows[a] >> c & 1 and g.rows[b] >> c & 1
            )

        return cls(seed, valid)


# ---------------------------------------------------------------------------
# symbolic parameter towers


@dataclass(frozen=True)
class Tower:
    """2^(2^(...^(top))) with `height` many exponentiations, never expanded."""

    height: int
    top: int

    _EXPAND_BITS = 1 << 22  # largest int we are willing to materialize

    def stack(self) -> list[int]:
        """Exponent stack with the base-2 levels explicit, e.g. 2^(2^8) -> [2, 8]."""
        return [2] * (self.height - 1) + [self.top] if self.height else [self.top]

    def log2(self) -> "Tower":
        if self.height == 0:
            raise ValueError("cannot take log2 of a bare integer tower symbolically")
        return Tower(self.height - 1, self.top)

    def expandable(self) -> bool:
        if self.height == 0:
            return True
        if self.height == 1:
            return self.top <= self._EXPAND_BITS
        if self.height == 2:
            return self.top <= 22
        return False

    def value(self) -> int:
        if not self.expandable():
            raise OverflowError(f"tower {self} is too large to expand")
        v = self.top
        for _ in range(self.height):
            v = 1 << v
        return v

    def _cmp(self, other: "Tower | int") -> int:
        a, b = self, _as_tower(other)
        while a.height >= 1 and b.height >= 1:
            a, b = a.log2(), b.log2()
        if a.height == 0 and b.height == 0:
            return (a.top > b.top) - (a.top < b.top)
        if b.height >= 1:
            return -b._cmp_int(a.top)
        return a._cmp_int(b.top)

    def _cmp_int(self, k: int) -> int:
        # self.height >= 1 here: compare 2^(inner) with the plain integer k
        if k <= 0:
            return 1
        inner = Tower(self.height - 1, self.top)
        bl = k.bit_length()
        if inner._cmp(bl) >= 0:
            # k < 2^bl <= 2^inner
            return 1
        if inner._cmp(bl - 1) < 0:
            # 2^inner <= 2^(bl-2) < 2^(bl-1) <= k
            return -1
        # inner == bl - 1 exactly: 2^(bl-1) vs k
        return ((1 << (bl - 1)) > k) - ((1 << (bl - 1)) < k)

    def __lt__(self, other: "Tower | int") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "Tower | int") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "Tower | int") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "Tower | int") -> bool:
        return self._cmp(other) >= 0

    def equals(self, other: "Tower | int") -> bool:
        return self._cmp(other) == 0

    def __repr__(self) -> str:
        body = "2^" * self.height + str(self.top)
        return f"Tower({body})"


def _as_tower(x: "Tower | int") -> Tower:
    return x if isinstance(x, Tower) else Tower(0, int(x))


@dataclass(frozen=True)
class ParameterSchedule:
    """The symbolic host/regularity parameter block for a target order n.

    Quantities are stored as exponent towers and compared without
    expansion; only their relationships matter at full scale.
    """

    n: int
    host_order: Tower = field(init=False)  # N = 2^2^2^(40n)
    ramsey_block: Tower = field(init=False)  # m = 2^2^(4n)
    inv_epsilon: Tower = field(init=False)  # 1/eps = 2^2^(16n)
    inv_density: Tower = field(init=False)  # 1/d = 2^2^(32n)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("schedule requires n >= 2")
        object.__setattr__(self, "host_order", Tower(3, 40 * self.n))
        object.__setattr__(self, "ramsey_block", Tower(2, 4 * self.n))
        object.__setattr__(self, "inv_epsilon", Tower(2, 16 * self.n))
        object.__setattr__(self, "inv_density", Tower(2, 32 * self.n))

    def log2_log2_log2_host_order(self) -> int:
        return self.host_order.log2().log2().log2().value()

    def log2_inv_epsilon(self) -> int:
        return self.inv_epsilon.log2().value()

    def log2_inv_density(self) -> int:
        return self.inv_density.log2().value()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "host_order_stack": self.host_order.stack(),
            "ramsey_block_stack": self.ramsey_block.stack(),
            "inv_epsilon_stack": self.inv_epsilon.stack(),
            "inv_density_stack": self.inv_density.stack(),
            "log2_log2_log2_host_order": self.log2_log2_log2_host_order(),
            "log2_log2_ramsey_block": self.ramsey_block.log2().log2().value(),
            "log2_inv_epsilon": self.log2_inv_epsilon(),
            "log2_inv_density": self.log2_inv_density(),
        }


def schedule(n: int) -> ParameterSchedule:
    return ParameterSchedule(n)


# ---------------------------------------------------------------------------
# shared witness type


@dataclass
class EmbeddingWitness:
    """A certified vertex map from a pattern into a host."""

    mapping: dict[int, int]
    color: str | None = None
    verified: bool = False
    note: str = ""

    def image(self) -> list[int]:
        return sorted(self.mapping.values())

    def to_json(self) -> dict:
        out = {
            "mapping": {str(k): v for k, v in sorted(self.mapping.items())},
            "color": self.color,
            "verified": self.verified,
        }
        if self.note:
            out["note"] = self.note
        return out


def ceil_frac(num: Fraction, count: int) -> int:
    """ceil(num * count) for an exact Fraction threshold."""
    scaled = num * count
    return -((-scaled.numerator) // scaled.denominator)
