"""Random graphs, equitable partitions and sampled concentration checks.

G(t, p) edges are pure functions of (seed, pair), so the same seed yields
the same graph whether rows are materialized or queried lazily, and sampled
checks are reproducible independent of chunking or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._rng import derive, derive_np, local_rng, p_threshold
from .core import BudgetExceeded, Graph, bits_of, pair_stats

_EDGE_TAG = 0xED6E
_PAIR_SAMPLE_TAG = 0x5A17
_CONC_SAMPLE_TAG = 0xC0C0

DEFAULT_PAIR_BUDGET = 10**7


def _pair_keys(a: np.ndarray, b: np.ndarray, t: int) -> np.ndarray:
    lo = np.minimum(a, b).astype(np.uint64)
    hi = np.maximum(a, b).astype(np.uint64)
    return lo * np.uint64(t) + hi


def _edge_bits(seed: int, a: np.ndarray, b: np.ndarray, t: int, p: float) -> np.ndarray:
    """Vectorized edge indicators for vertex arrays a, b (a[i] != b[i])."""
    thresh = p_threshold(p)
    if thresh is None:
        return np.ones(a.shape, dtype=bool)
    if thresh == 0:
        return np.zeros(a.shape, dtype=bool)
    h = derive_np(derive(seed, _EDGE_TAG), _pair_keys(a, b, t))
    return h < np.uint64(thresh)


def gen_gnp(t: int, p: float, seed: int) -> Graph:
    """Materialize G(t, p): each pair is an edge independently, given the seed."""
    if t < 1:
        raise ValueError("t must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if t == 1:
        return Graph.empty(1)
    rows = []
    idx = np.arange(t, dtype=np.uint64)
    for u in range(t):
        uu = np.full(t, u, dtype=np.uint64)
        bits = _edge_bits(seed, uu, idx, t, p)
        bits[u] = False
        packed = np.packbits(bits.astype(np.uint8), bitorder="little").tobytes()
        rows.append(int.from_bytes(packed, "little"))
    return Graph(t, rows, _trusted=True)


class LazyGnp:
    """G(t, p) addressed by hash, never materialized.

    Agrees bit for bit with gen_gnp(t, p, seed); used when t is too large
    for explicit rows (e.g. t = 2^16 discrepancy sampling).
    """

    def __init__(self, t: int, p: float, seed: int):
        if t < 1:
            raise ValueError("t must be positive")
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        self.n = t
        self.p = p
        self.seed = seed

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a = np.array([u], dtype=np.uint64)
        b = np.array([v], dtype=np.uint64)
        return bool(_edge_bits(self.seed, a, b, self.n, self.p)[0])

    def cross_pair_counts(self, xs: list[int], ys: list[int]) -> tuple[int, int]:
        """(P, e) over unordered pairs {x, y}, x in X, y in Y, x != y."""
        x = np.asarray(sorted(xs), dtype=np.int64)
        y = np.asarray(sorted(ys), dtype=np.int64)
        gx, gy = np.meshgrid(x, y, indexing="ij")
        gx = gx.ravel()
        gy = gy.ravel()
        keep = gx != gy
        ordered = int(
            _edge_bits(self.seed, gx[keep].astype(np.uint64), gy[keep].astype(np.uint64), self.n, self.p).sum()
        )
        inter = np.intersect1d(x, y)
        i = len(inter)
        inside = 0
        if i >= 2:
            ia, ib = np.meshgrid(inter, inter, indexing="ij")
            sel = ia < ib
            inside = int(
                _edge_bits(self.seed, ia[sel].astype(np.uint64), ib[sel].astype(np.uint64), self.n, self.p).sum()
            )
        a, b = len(x), len(y)
        pairs = i * (i - 1) // 2 + i * (a - i) + i * (b - i) + (a - i) * (b - i)
        edges = ordered - inside
        return pairs, edges

    def to_graph(self) -> Graph:
        return gen_gnp(self.n, self.p, self.seed)


def _cross_counts(g, xs: list[int], ys: list[int]) -> tuple[int, int]:
    if isinstance(g, LazyGnp):
        return g.cross_pair_counts(xs, ys)
    pairs, edges, _ = pair_stats(g, xs, ys)
    return pairs, edges


def equitable_partition(t: int, n: int, seed: int) -> list[list[int]]:
    """Split [t] into n blocks with sizes differing by at most one.

    Uniform over all ordered equitable partitions for the given seed:
    which blocks carry the extra vertex is drawn uniformly, then a uniform
    permutation fills them.
    """
    if not 1 <= n <= t:
        raise ValueError("need 1 <= n <= t")
    rng = local_rng(seed, 0xE407)
    q, r = divmod(t, n)
    big = set(rng.sample(range(n), r))
    perm = rng.sample(range(t), t)
    blocks = []
    pos = 0
    for i in range(n):
        size = q + 1 if i in big else q
        blocks.append(sorted(perm[pos : pos + size]))
        pos += size
    return blocks


def neighborhoods(g: Graph, s: set[int] | list[int]) -> tuple[set[int], set[int]]:
    """(common neighborhood N(S), joint neighborhood Gamma(S)).

    Convention: N({}) is all of V(G) and Gamma({}) is empty.
    """
    vs = list(s)
    if not vs:
        return set(range(g.n)), set()
    common = (1 << g.n) - 1
    joint = 0
    for v in vs:
        common &= g.rows[v]
        joint |= g.rows[v]
    return set(bits_of(common)), set(bits_of(joint))


# ---------------------------------------------------------------------------
# discrepancy (all large subset pairs have edge ratio near 1/2)


@dataclass
class DiscrepancyReport:
    """Outcome of checking |e(X,Y)/P(X,Y) - 1/2| < t^(-1/8) over subset pairs."""

    t: int
    mode: str
    threshold: float
    subset_size: int
    samples: int
    worst_deviation: float
    verdict: str
    witness: tuple[list[int], list[int]] | None = None
    pass_rate: float = 1.0
    statistical: bool = False

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "mode": self.mode,
            "threshold": self.threshold,
            "subset_size": self.subset_size,
            "samples": self.samples,
            "worst_deviation": self.worst_deviation,
            "verdict": self.verdict,
            "witness": None
            if self.witness is None
            else {"X": self.witness[0], "Y": self.witness[1]},
            "pass_rate": self.pass_rate,
            "statistical": self.statistical,
        }


def _pair_within_threshold(pairs: int, edges: int, t: int) -> bool:
    # |e/P - 1/2| < t^(-1/8)  <=>  |2e - P|^8 * t < (2P)^8, exactly
    return abs(2 * edges - pairs) ** 8 * t < (2 * pairs) ** 8


def check_discrepancy(
    g,
    mode: str = "exhaustive",
    *,
    samples: int = 10**4,
    seed: int = 0,
    budget: int = DEFAULT_PAIR_BUDGET,
) -> DiscrepancyReport:
    """Check the near-half edge distribution property of a graph.

    Exhaustive mode enumerates every unordered pair of ceil(sqrt(t))-subsets
    (including X = Y) and is refused over budget; sampled mode draws seeded
    uniform pairs and is labeled statistical, never a certificate.
    """
    t = g.n
    s = math.isqrt(t) if math.isqrt(t) ** 2 == t else math.isqrt(t) + 1
    s = max(s, 1)
    threshold = t ** (-1 / 8)
    worst = 0.0
    worst_pair = None
    checked = 0
    failed = 0

    worst_fail = -1.0

    def consider(xs: list[int], ys: list[int]) -> None:
        nonlocal worst, worst_pair, worst_fail, checked, failed
        pairs, edges = _cross_counts(g, xs, ys)
        if pairs == 0:
            return
        checked += 1
        dev = abs(edges / pairs - 0.5)
        worst = max(worst, dev)
        if not _pair_within_threshold(pairs, edges, t):
            failed += 1
            if dev > worst_fail:
                worst_fail = dev
                worst_pair = (list(xs), list(ys))

    if mode == "exhaustive":
        if isinstance(g, LazyGnp):
            raise ValueError("exhaustive discrepancy check needs an explicit graph")
        n_subsets = math.comb(t, s)
        n_pairs = n_subsets * (n_subsets + 1) // 2
        if n_pairs > budget:
            raise BudgetExceeded(
                f"exhaustive scan needs {n_pairs} subset pairs (budget {budget})",
                estimate=n_pairs,
            )
        subsets = [list(c) for c in combinations(range(t), s)]
        for i, xs in enumerate(subsets):
            for ys in subsets[i:]:
                consider(xs, ys)
        verdict = "pass" if failed == 0 else "fail-with-witness"
        statistical = False
        n_samples = checked
    elif mode == "sampled":
        base = derive(seed, _PAIR_SAMPLE_TAG)
        for i in range(samples):
            rng = local_rng(base, i)
            xs = sorted(rng.sample(range(t), s))
            ys = sorted(rng.sample(range(t), s))
            consider(xs, ys)
        verdict = "pass" if failed == 0 else ("fail-with-witness" if worst_pair else "fail")
        statistical = True
        n_samples = samples
    else:
        raise ValueError(f"unknown mode {mode!r}")

    rate = 1.0 if checked == 0 else (checked - failed) / checked
    return DiscrepancyReport(
        t=t,
        mode=mode,
        threshold=threshold,
        subset_size=s,
        samples=n_samples,
        worst_deviation=worst,
        verdict=verdict,
        witness=worst_pair,
        pass_rate=rate,
        statistical=statistical,
    )


# ---------------------------------------------------------------------------
# neighborhood concentration events


@dataclass
class EventStat:
    checked: int
    failed: int
    worst_ratio: float
    witness: dict | None

    def passed(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "checked": self.checked,
            "failed": self.failed,
            "worst_ratio": self.worst_ratio,
            "witness": self.witness,
            "pass": self.passed(),
        }


@dataclass
class ConcentrationReport:
    """Sampled/exhaustive check of the pair and avoided-set neighborhood events."""

    p: float
    n: int
    epsilon: float
    mode: str
    event_pair: EventStat | None = None  # |N({x,y})| near p^2 N
    event_avoid: EventStat | None = None  # |N({x,y}) \ Gamma(S)| near p^2 (1-p)^|S| N

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "event_pair": self.event_pair.to_json(),
            "event_avoid": self.event_avoid.to_json(),
        }


def check_concentration(
    g: Graph,
    p: float,
    epsilon: float,
    s_max: int,
    mode: str = "sampled",
    *,
    samples: int = 200,
    seed: int = 0,
) -> ConcentrationReport:
    """Check both neighborhood concentration events on an explicit graph.

    The pair event runs over all pairs in exhaustive mode or seeded samples
    otherwise; the avoided-set event is always sampled over (S, {x, y})
    with |S| <= s_max and S disjoint from the pair.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    n = g.n
    target_pair = p * p * n

    def band_check(value: int, target: float) -> tuple[bool, float]:
        if target == 0:
            return value == 0, math.inf if value else 0.0
        ratio = abs(value - target) / target
        return ratio <= epsilon, ratio

    worst = EventStat(0, 0, 0.0, None)
    if mode == "exhaustive":
        pair_iter = combinations(range(n), 2)
    else:
        base = derive(seed, _CONC_SAMPLE_TAG, 1)

        def sampled_pairs():
            for i in range(samples):
                rng = local_rng(base, i)
                yield tuple(rng.sample(range(n), 2))

        pair_iter = sampled_pairs()

    for x, y in pair_iter:
        size = (g.rows[x] & g.rows[y]).bit_count()
        ok, ratio = band_check(size, target_pair)
        worst.checked += 1
        if not ok:
            worst.failed += 1
        if ratio > worst.worst_ratio:
            worst.worst_ratio = ratio
            if not ok:
                worst.witness = {"x": x, "y": y, "size": size, "target": target_pair}
    event_pair = worst

    worst = EventStat(0, 0, 0.0, None)
    base = derive(seed, _CONC_SAMPLE_TAG, 2)
    for i in range(samples):
        rng = local_rng(base, i)
        x, y = rng.sample(range(n), 2)
        k = rng.randint(0, s_max)
        others = [v for v in range(n) if v != x and v != y]
        s = rng.sample(others, min(k, len(others)))
        joint = 0
        for v in s:
            joint |= g.rows[v]
        size = (g.rows[x] & g.rows[y] & ~joint).bit_count()
        target = p * p * (1 - p) ** len(s) * n
        ok, ratio = band_check(size, target)
        worst.checked += 1
        if not ok:
            worst.failed += 1
        if ratio > worst.worst_ratio:
            worst.worst_ratio = ratio
            if not ok:
                worst.witness = {
                    "x": x,
                    "y": y,
                    "s": sorted(s),
                    "size": size,
                    "target": target,
                }
    event_avoid = worst

    return ConcentrationReport(
        p=p,
        n=n,
        epsilon=epsilon,
        mode=mode,
        event_pair=event_pair,
        event_avoid=event_avoid,
    )
