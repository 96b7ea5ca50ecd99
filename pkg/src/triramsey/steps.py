"""Stepping-up extraction of cliques whose triangle colors depend only on
the first pair, and the derived monochromatic-triangle clique finder.

Failure is a first-class result here: small or sparse hosts may
legitimately run out of candidates, and callers are told at which step.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

from .core import BLUE, COLOR_RANK, RED, Graph, bits_of

# known diagonal 2-color Ramsey numbers R(k) = R(k, k)
RAMSEY2 = {1: 1, 2: 2, 3: 6, 4: 18}


@dataclass
class StepFailure:
    step: int
    reason: str
    partial: list[int] | None = None

    def to_json(self) -> dict:
        return {"failed": True, "step": self.step, "reason": self.reason,
                "partial": self.partial}


@dataclass
class StepState:
    """Prefix clique plus candidate set; triangle colors through any prefix
    pair are constant over later prefix vertices and all candidates."""

    prefix: list[int]
    candidates: int  # bitmask
    color_table: dict[tuple[int, int], str]

    def verify(self, host: Graph, chi) -> None:
        """Re-check every invariant by direct scan; raises on any mismatch."""
        for u, v in combinations(self.prefix, 2):
            if not host.has_edge(u, v):
                raise AssertionError(f"prefix not a clique at ({u}, {v})")
        for x in bits_of(self.candidates):
            for xi in self.prefix:
                if not host.has_edge(xi, x):
                    raise AssertionError(f"candidate {x} misses prefix vertex {xi}")
        r = len(self.prefix)
        for i in range(r):
            for j in range(i + 1, r):
                tail = self.prefix[j + 1 :] + list(bits_of(self.candidates))
                want = self.color_table.get((i, j))
                if want is None:
                    # only the final pair may be unconstrained, and only
                    # when nothing comes after it
                    if tail:
                        raise AssertionError(f"pair ({i}, {j}) missing from table")
                    continue
                for v in tail:
                    got = chi.color_of((self.prefix[i], self.prefix[j], v))
                    if got != want:
                        raise AssertionError(
                            f"color table broken at pair ({i}, {j}) via {v}"
                        )


@dataclass
class MonoCliqueWitness:
    vertices: list[int]
    color: str
    verified: bool = False

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "color": self.color,
                "verified": self.verified}


def _lex_smallest_clique(n: int, rows: list[int], size: int) -> list[int] | None:
    """Lexicographically smallest clique of the given size, or None.

    Vertices are added in ascending order, so the first clique the DFS
    completes is the lexicographically smallest one.
    """
    best: list[int] | None = None

    def grow(clique: list[int], candidates: int) -> bool:
        nonlocal best
        if len(clique) == size:
            best = list(clique)
            return True
        need = size - len(clique)
        for v in bits_of(candidates):
            higher = candidates & rows[v] & ~((1 << (v + 1)) - 1)
            if higher.bit_count() < need - 1:
                continue
            if grow(clique + [v], higher):
                return True
        return False

    grow([], (1 << n) - 1)
    return best


def base_graph_ramsey(
    q: int, pair_colors: Mapping[tuple[int, int], str], target: int
) -> tuple[list[int], str] | None:
    """A monochromatic clique of the given size in a 2-colored complete graph.

    pair_colors must be total on all pairs of 0..q-1.  Red is tried first;
    within a color the lexicographically smallest clique wins.
    """
    rows = {RED: [0] * q, BLUE: [0] * q}
    seen = 0
    for (u, v), color in pair_colors.items():
        if u == v or not (0 <= u < q and 0 <= v < q):
            raise ValueError(f"bad pair ({u}, {v})")
        rows[color][u] |= 1 << v
        rows[color][v] |= 1 << u
        seen += 1
    if seen != q * (q - 1) // 2:
        raise ValueError("pair coloring is not total on the complete graph")
    if target == 1:
        return [0], RED
    for color in (RED, BLUE):
        clique = _lex_smallest_clique(q, rows[color], target)
        if clique is not None:
            return clique, color
    return None


def stepup_select(host: Graph, chi, ell: int) -> StepState | StepFailure:
    """Grow a clique x_1..x_ell whose triangle colors depend on the first pair.

    Vertex choice takes the maximum degree into the current candidate set
    (smallest id on ties); the candidate set is then restricted to the
    largest color-vector class (ties: lexicographically smallest vector,
    red before blue).  The returned state is re-verified by direct scan.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    full = (1 << host.n) - 1
    prefix: list[int] = []
    candidates = full
    table: dict[tuple[int, int], str] = {}

    while len(prefix) < ell:
        if candidates == 0:
            return StepFailure(
                step=len(prefix),
                reason="candidate set exhausted",
                partial=list(prefix),
            )
        best_v, best_d = -1, -1
        for v in bits_of(candidates):
            d = (host.rows[v] & candidates).bit_count()
            if d > best_d:
                best_v, best_d = v, d
        v = best_v
        r = len(prefix)
        shrunk = candidates & host.rows[v] & ~(1 << v)
        if r == 0:
            prefix.append(v)
            candidates = shrunk
            continue
        # split the shrunk candidates by their color vector against the
        # prefix and keep the largest class
        classes: dict[tuple[int, ...], int] = {}
        for w in bits_of(shrunk):
            vec = tuple(
                COLOR_RANK[chi.color_of((prefix[i], v, w))] for i in range(r)
            )
            classes[vec] = classes.get(vec, 0) | (1 << w)
        if classes:
            vec = min(classes, key=lambda k: (-classes[k].bit_count(), k))
            chosen = classes[vec]
            # exact candidate-count guarantee from the class split
            assert chosen.bit_count() * (1 << r) >= shrunk.bit_count()
            for i in range(r):
                table[(i, r)] = RED if vec[i] == 0 else BLUE
            candidates = chosen
        else:
            candidates = 0
        prefix.append(v)

    state = StepState(prefix=prefix, candidates=candidates, color_table=table)
    state.verify(host, chi)
    return state


def default_ell(n: int, host_order: int) -> int:
    """R(n-1) + 1 when the Ramsey number is known, else min(4^n, host size)."""
    if n - 1 in RAMSEY2:
        ell = RAMSEY2[n - 1] + 1
    else:
        ell = 4**n
    return min(ell, host_order)


def verify_mono_clique(host: Graph, chi, vertices: list[int]) -> str:
    """Independent re-verification: returns the common triangle color.

    Raises if the vertices do not span a clique or the triangle colors
    disagree.
    """
    for u, v in combinations(vertices, 2):
        if not host.has_edge(u, v):
            raise AssertionError(f"witness not a clique at ({u}, {v})")
    colors = {chi.color_of(t) for t in combinations(sorted(vertices), 3)}
    if len(colors) != 1:
        raise AssertionError(f"witness triangles are not monochromatic: {colors}")
    return colors.pop()


def mono_triangle_clique(
    host: Graph, chi, n: int, ell: int | None = None
) -> MonoCliqueWitness | StepFailure:
    """A clique of size n all of whose triangles share one color.

    Runs the stepping-up selection to length ell, colors the pairs of the
    first ell-1 vertices by the looking-ahead rule, applies the base Ramsey
    search for a monochromatic (n-1)-clique and appends the last prefix
    vertex.  The witness is re-verified triangle by triangle before return.
    """
    if n < 3:
        raise ValueError("need n >= 3 for triangle cliques")
    if ell is None:
        ell = default_ell(n, host.n)
    if ell < n:
        return StepFailure(step=0, reason=f"ell={ell} below target {n}")
    state = stepup_select(host, chi, ell)
    if isinstance(state, StepFailure):
        return state
    prefix = state.prefix
    pair_colors = {}
    for i in range(ell - 1):
        for j in range(i + 1, ell - 1):
            color = state.color_table[(i, j)]
            # the looking-ahead color is exactly the color-table entry
            assert color == chi.color_of((prefix[i], prefix[j], prefix[j + 1]))
            pair_colors[(i, j)] = color
    base = base_graph_ramsey(ell - 1, pair_colors, n - 1)
    if base is None:
        return StepFailure(
            step=ell,
            reason="no monochromatic base clique",
            partial=list(prefix),
        )
    indices, color = base
    vertices = sorted(prefix[i] for i in indices) + [prefix[ell - 1]]
    vertices = sorted(vertices)
    got = verify_mono_clique(host, chi, vertices)
    assert got == color
    return MonoCliqueWitness(vertices=vertices, color=color, verified=True)
