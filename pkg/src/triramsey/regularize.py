"""Weak regularization of r-partite r-graphs by density increment, plus the
monochromatic clique hypergraph and its triple-shadow projection.

The exhaustive violation scan enumerates sub-block prefixes and optimizes
the last block in closed form: for a fixed prefix the minimum density over
size-k sub-blocks is attained by the k smallest codegree vertices, so one
sorted prefix-sum per prefix covers every last-block subset exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from ._rng import local_rng
from .core import (
    BudgetExceeded,
    Graph,
    PartiteFamily,
    TripleSystem,
    bits_of,
    ceil_frac,
)

DEFAULT_PREFIX_BUDGET = 10**7


def _subsets_at_least(universe: tuple[int, ...], minimum: int) -> list[tuple[int, ...]]:
    """All subsets of size >= minimum, ordered by (size, lexicographic)."""
    out = []
    for k in range(minimum, len(universe) + 1):
        out.extend(combinations(universe, k))
    return out


def _edge_tensor(fam: PartiteFamily, parts: list[tuple[int, ...]], indices: list[int]) -> np.ndarray:
    """0/1 tensor of fam edges restricted to the given sub-blocks."""
    pos = [{v: i for i, v in enumerate(p)} for p in parts]
    shape = tuple(len(p) for p in parts)
    tensor = np.zeros(shape, dtype=np.int64)
    key = frozenset(indices)
    slot_of = {b: i for i, b in enumerate(indices)}
    for e in fam.edges_by_blockset().get(key, ()):
        coord = [0] * len(indices)
        ok = True
        for v in e:
            slot = slot_of[fam.block_of[v]]
            if v not in pos[slot]:
                ok = False
                break
            coord[slot] = pos[slot][v]
        if ok:
            tensor[tuple(coord)] = 1
    return tensor


def _resolve_parts(
    fam: PartiteFamily, parts: list[tuple[int, ...]]
) -> list[int]:
    indices = []
    for p in parts:
        owners = {fam.block_of.get(v) for v in p}
        if len(owners) != 1 or None in owners:
            raise ValueError("each part must sit inside a single block")
        indices.append(next(iter(owners)))
    if len(set(indices)) != len(indices):
        raise ValueError("parts must occupy distinct blocks")
    return indices


def find_violation(
    fam: PartiteFamily,
    parts: list[tuple[int, ...] | list[int]],
    epsilon: Fraction | float,
    d: Fraction | float,
    mode: str = "exhaustive",
    *,
    threshold: Fraction | None = None,
    budget: int = DEFAULT_PREFIX_BUDGET,
    seed: int = 0,
    restarts: int = 8,
) -> tuple[tuple[int, ...], ...] | None:
    """A tuple (W_1..W_r) with |W_i| >= eps|U_i| and density below d/2, or None.

    Exhaustive mode is complete: None means no violation exists.  Heuristic
    mode is a greedy min-degree local search with seeded restarts; None then
    only means "not found".  `threshold` overrides the default d/2 cut, which
    lets density verifiers reuse the same scan.
    """
    eps = Fraction(epsilon)
    dd = Fraction(d)
    if not 0 < eps < 1 or not 0 < dd <= 1:
        raise ValueError("need 0 < epsilon < 1 and 0 < d <= 1")
    cut = threshold if threshold is not None else dd / 2
    parts = [tuple(sorted(p)) for p in parts]
    if any(not p for p in parts):
        raise ValueError("empty sub-block")
    indices = _resolve_parts(fam, parts)
    if len(parts) != fam.r:
        raise ValueError(f"expected {fam.r} parts")
    minima = [max(1, ceil_frac(eps, len(p))) for p in parts]
    if mode == "exhaustive":
        return _scan_violation(fam, parts, indices, minima, cut, budget)
    if mode == "heuristic":
        return _greedy_violation(fam, parts, indices, minima, cut, seed, restarts)
    raise ValueError(f"unknown mode {mode!r}")


def _scan_violation(
    fam: PartiteFamily,
    parts: list[tuple[int, ...]],
    indices: list[int],
    minima: list[int],
    cut: Fraction,
    budget: int,
) -> tuple[tuple[int, ...], ...] | None:
    r = len(parts)
    prefix_subsets = [_subsets_at_least(parts[i], minima[i]) for i in range(r - 1)]
    n_prefixes = math.prod(len(s) for s in prefix_subsets)
    if n_prefixes > budget:
        raise BudgetExceeded(
            f"violation scan needs {n_prefixes} prefix tuples (budget {budget})",
            estimate=n_prefixes,
        )
    tensor = _edge_tensor(fam, parts, indices)
    last = parts[-1]
    n_last = len(last)
    m_last = minima[-1]
    num, den = cut.numerator, cut.denominator
    # ks[j] = subset size k = m_last + j for the cumulative sums below
    ks = np.arange(m_last, n_last + 1, dtype=np.int64)

    def last_block_violation(counts: np.ndarray, prefix_size: int):
        """Smallest k whose k cheapest last-block vertices violate, or None."""
        order = np.argsort(counts, kind="stable")
        csum = np.cumsum(counts[order])[m_last - 1 :]
        # density < cut  <=>  e * den < num * prefix_size * k, all integers
        bad = csum * den < num * prefix_size * ks
        if not bad.any():
            return None
        j = int(np.argmax(bad))
        members = tuple(sorted(last[i] for i in order[: m_last + j]))
        return members

    flat = tensor.reshape(tensor.shape[0], -1) if r > 1 else None

    if r == 1:
        raise ValueError("need uniformity at least 2")

    # iterate prefixes in canonical (size, lex) order per block
    def rec(level: int, chosen: list[tuple[int, ...]], sub: np.ndarray):
        if level == r - 1:
            prefix_size = math.prod(len(c) for c in chosen)
            counts = sub
            hit = last_block_violation(counts, prefix_size)
            if hit is not None:
                return tuple(chosen) + (hit,)
            return None
        pos = {v: i for i, v in enumerate(parts[level])}
        for subset in prefix_subsets[level]:
            rows = [pos[v] for v in subset]
            reduced = sub[rows].sum(axis=0)
            got = rec(level + 1, chosen + [subset], reduced)
            if got is not None:
                return got
        return None

    return rec(0, [], tensor)


def _greedy_violation(
    fam: PartiteFamily,
    parts: list[tuple[int, ...]],
    indices: list[int],
    minima: list[int],
    cut: Fraction,
    seed: int,
    restarts: int,
) -> tuple[tuple[int, ...], ...] | None:
    r = len(parts)
    tensor = _edge_tensor(fam, parts, indices)

    def density_edges(masks: list[list[int]]) -> int:
        sub = tensor
        for axis, rows in enumerate(masks):
            sub = np.take(sub, rows, axis=axis)
        return int(sub.sum())

    for attempt in range(restarts):
        rng = local_rng(seed, 0x6EED, attempt)
        current: list[list[int]] = []
        for i, p in enumerate(parts):
            if attempt == 0:
                size = len(p)
            else:
                size = rng.randint(minima[i], len(p))
            current.append(sorted(rng.sample(range(len(p)), size)))
        while True:
            edges = density_edges(current)
            prod = math.prod(len(c) for c in current)
            if Fraction(edges, prod) < cut:
                return tuple(
                    tuple(parts[i][j] for j in current[i]) for i in range(r)
                )
            # delete the vertex of smallest relative degree among blocks
            # that can still shrink
            best = None
            for i in range(r):
                if len(current[i]) <= minima[i]:
                    continue
                others = prod // len(current[i])
                sub = tensor
                for axis, rows in enumerate(current):
                    sub = np.take(sub, rows, axis=axis)
                deg = sub.sum(axis=tuple(a for a in range(r) if a != i))
                for j_pos, j in enumerate(current[i]):
                    rel = Fraction(int(deg[j_pos]), others)
                    key = (rel, i, parts[i][j])
                    if best is None or key < best[0]:
                        best = (key, i, j)
            if best is None:
                break
            _, bi, bj = best
            current[bi] = [x for x in current[bi] if x != bj]
    return None


@dataclass
class DenseCertificate:
    """Result of the density-increment loop on one block tuple."""

    epsilon: str
    d: str
    mode: str
    steps: int
    blocks_initial: list[list[int]]
    blocks_final: list[list[int]]
    size_ratios: list[str]
    trace: list[dict] = field(default_factory=list)
    step_limit: int = 0
    step_bound_ok: bool = True
    size_bound_ok: bool = True
    dense_verified: bool = False

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "d": self.d,
            "mode": self.mode,
            "steps": self.steps,
            "step_limit": self.step_limit,
            "step_bound_ok": self.step_bound_ok,
            "size_bound_ok": self.size_bound_ok,
            "dense_verified": self.dense_verified,
            "blocks_initial": self.blocks_initial,
            "blocks_final": self.blocks_final,
            "size_ratios": self.size_ratios,
            "trace": self.trace,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DenseCertificate":
        return cls(**{k: doc[k] for k in (
            "epsilon", "d", "mode", "steps", "blocks_initial", "blocks_final",
            "size_ratios", "trace", "step_limit", "step_bound_ok",
            "size_bound_ok", "dense_verified")})


def _tuple_density(fam: PartiteFamily, parts: list[tuple[int, ...]]) -> Fraction:
    from .core import partite_density

    return partite_density(fam, parts)


def density_increment(
    fam: PartiteFamily,
    parts: list[tuple[int, ...] | list[int]],
    epsilon: Fraction | float,
    d: Fraction | float,
    mode: str = "exhaustive",
    *,
    budget: int = DEFAULT_PREFIX_BUDGET,
    seed: int = 0,
) -> DenseCertificate:
    """Shrink the blocks until no sub-tuple of relative size eps falls below
    density d/2, recording every increment step.

    While a violation W exists, each block splits into W_i and its
    complement; of the nonzero index vectors with no empty side, the one of
    maximum density wins (ties: lexicographically smallest vector), and the
    density must grow by the factor 1 + eps^r/2 at every step, which is
    asserted exactly.
    """
    eps = Fraction(epsilon)
    dd = Fraction(d)
    parts = [tuple(sorted(p)) for p in parts]
    r = fam.r
    if len(parts) != r:
        raise ValueError(f"expected {r} parts")
    start_density = _tuple_density(fam, parts)
    if start_density < dd:
        raise ValueError(f"initial density {start_density} is below d={dd}")
    gain = 1 + eps**r / 2
    step_limit = math.ceil(4 * math.log(1 / float(dd)) / float(eps) ** r) if dd < 1 else 0

    current = list(parts)
    density = start_density
    trace: list[dict] = []
    steps = 0
    while True:
        violation = find_violation(
            fam, current, eps, dd, mode, budget=budget, seed=seed
        )
        if violation is None:
            break
        options = []
        for vec_bits in range(1, 1 << r):
            vec = tuple(vec_bits >> (r - 1 - i) & 1 for i in range(r))
            cand = []
            ok = True
            for i in range(r):
                side = (
                    violation[i]
                    if vec[i] == 0
                    else tuple(v for v in current[i] if v not in set(violation[i]))
                )
                if not side:
                    ok = False
                    break
                cand.append(side)
            if ok:
                options.append((vec, cand))
        if not options:
            raise RuntimeError(
                "no nonzero split vector with all blocks nonempty; "
                "violation equals the full tuple, which contradicts the "
                "density precondition"
            )
        scored = [
            (_tuple_density(fam, cand), vec, cand) for vec, cand in options
        ]
        best_density, best_vec, best_parts = max(
            scored, key=lambda x: (x[0], tuple(-b for b in x[1]))
        )
        steps += 1
        if best_density < density * gain:
            raise RuntimeError(
                f"increment step {steps} gained only {best_density}/{density}; "
                f"expected factor {gain} (counting argument violated)"
            )
        trace.append(
            {
                "violation_sizes": [len(w) for w in violation],
                "vector": list(best_vec),
                "density_before": str(density),
                "density_after": str(best_density),
                "sizes": [len(p) for p in best_parts],
            }
        )
        current = best_parts
        density = best_density

    bound = float(dd) ** (float(4 / eps**r) * math.log(1 / float(eps)))
    size_ok = all(
        len(u) >= bound * len(v) for u, v in zip(current, parts)
    )
    cert = DenseCertificate(
        epsilon=str(eps),
        d=str(dd),
        mode=mode,
        steps=steps,
        blocks_initial=[list(p) for p in parts],
        blocks_final=[list(p) for p in current],
        size_ratios=[str(Fraction(len(u), len(v))) for u, v in zip(current, parts)],
        trace=trace,
        step_limit=step_limit,
        step_bound_ok=steps <= step_limit or steps == 0,
        size_bound_ok=size_ok,
        dense_verified=(mode == "exhaustive"),
    )
    return cert


def verify_certificate(
    fam: PartiteFamily,
    cert: DenseCertificate,
    *,
    budget: int = DEFAULT_PREFIX_BUDGET,
) -> bool:
    """Re-verify a certificate from its serialized content alone."""
    eps = Fraction(cert.epsilon)
    dd = Fraction(cert.d)
    violation = find_violation(
        fam, [tuple(b) for b in cert.blocks_final], eps, dd, "exhaustive",
        budget=budget,
    )
    return violation is None


# ---------------------------------------------------------------------------
# clique hypergraph and triple shadow


def build_clique_hypergraph(
    g: Graph, chi, n: int, color: str
) -> list[tuple[int, ...]]:
    """All n-vertex cliques of g whose triangles all carry the given color.

    Exact bit-parallel clique extension: a vertex joins only if every
    triangle it closes with the current clique has the right color.
    """
    if n < 1:
        raise ValueError("n must be positive")
    out: list[tuple[int, ...]] = []
    rows = g.rows

    def grow(clique: list[int], candidates: int) -> None:
        if len(clique) == n:
            out.append(tuple(clique))
            return
        need = n - len(clique)
        for v in bits_of(candidates):
            higher = candidates & rows[v] & ~((1 << (v + 1)) - 1)
            if higher.bit_count() < need - 1:
                continue
            good = True
            for a, b in combinations(clique, 2):
                if chi.color_of((a, b, v)) != color:
                    good = False
                    break
            if good:
                grow(clique + [v], higher)

    grow([], (1 << g.n) - 1)
    return out


def project_triples(
    hn_edges: list[tuple[int, ...]], blocks: list[list[int]]
) -> PartiteFamily:
    """The 3-uniform shadow of an n-uniform transversal edge set.

    A triple is present iff it lies in at least one edge; every returned
    triple meets three distinct blocks because the edges are transversal.
    """
    fam_n = PartiteFamily(blocks, len(blocks), hn_edges) if hn_edges else None
    if hn_edges and fam_n is None:
        raise AssertionError
    triples = set()
    for e in hn_edges:
        for t in combinations(sorted(e), 3):
            triples.add(t)
    return PartiteFamily(blocks, 3, sorted(triples))
