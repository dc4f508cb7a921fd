"""Brute-force ground truth on tiny instances.

Everything here is exhaustive enumeration and shares no code path with the
rearrangement operators beyond the lattice primitives.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .functionals import Bivariate, Kernel
from .lattice import (
    LatticePoint,
    ShapeClass,
    SparseFunction,
    ValueMultiset,
    canonical_shape,
    diamond_ball,
    neighbors,
    signed_permutations,
)

MAX_SHAPE_SIZE = 8
MAX_MINIMIZER_SIZE = 6

PLUS = canonical_shape(diamond_ball(1, 2))
P_PENTOMINO_CELLS = ((0, 0), (0, 1), (1, 0), (0, -1), (1, 1))
P_PENTOMINO = canonical_shape(P_PENTOMINO_CELLS)


class BudgetExceeded(ValueError):
    pass


def enumerate_connected_supports(n: int, d: int = 2) -> list[ShapeClass]:
    """All free polyominoes with ``n`` cells, sorted by canonical form."""
    if d != 2:
        raise ValueError("only d = 2 is supported")
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_SHAPE_SIZE:
        raise BudgetExceeded(f"n = {n} exceeds the budget {MAX_SHAPE_SIZE}")
    level = {canonical_shape([(0, 0)])}
    for _ in range(n - 1):
        grown = set()
        for shape in level:
            cells = set(shape.points)
            for c in cells:
                for nb in neighbors(c):
                    if nb not in cells:
                        grown.add(canonical_shape(cells | {nb}))
        level = grown
    return sorted(level)


def _edge_structure(cells: Sequence[LatticePoint]) -> tuple[np.ndarray, list[tuple[int, int]]]:
    index = {c: k for k, c in enumerate(cells)}
    outside = np.zeros(len(cells))
    inner = []
    for k, c in enumerate(cells):
        for nb in neighbors(c):
            if nb in index:
                if index[nb] > k:
                    inner.append((k, index[nb]))
            else:
                outside[k] += 1
    return outside, inner


def distinct_permutations(values: Sequence[float]) -> Iterator[tuple[float, ...]]:
    """Permutations of a multiset without repeats, in lexicographic order of sorted input."""
    items = sorted(values)
    n = len(items)
    counts: dict[float, int] = {}
    for v in items:
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(counts)
    perm: list[float] = []

    def rec() -> Iterator[tuple[float, ...]]:
        if len(perm) == n:
            yield tuple(perm)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                perm.append(k)
                yield from rec()
                perm.pop()
                counts[k] += 1

    yield from rec()


def _placement_energies(values: Sequence[float], cells: Sequence[LatticePoint]
                        ) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(distinct_permutations(values)), dtype=float)
    outside, inner = _edge_structure(cells)
    energy = perms ** 2 @ outside
    for a, b in inner:
        energy = energy + (perms[:, a] - perms[:, b]) ** 2
    return perms, energy


@dataclass(frozen=True)
class AssignmentResult:
    """``energy`` is ||grad u||_2^2 of the optimal placement."""

    energy: float
    placement: dict
    shape: ShapeClass

    def as_function(self) -> SparseFunction:
        return SparseFunction(self.placement, dim=self.shape.dim)


def min_energy_assignment(values: Sequence[float], shape: ShapeClass) -> AssignmentResult:
    values = ValueMultiset(values)
    if len(values) != shape.size:
        raise ValueError(f"{len(values)} values for a shape with {shape.size} cells")
    if shape.size > MAX_SHAPE_SIZE:
        raise BudgetExceeded(f"shape size {shape.size} exceeds {MAX_SHAPE_SIZE}")
    perms, energy = _placement_energies(values, shape.points)
    best = int(np.argmin(energy))  # first minimum = lexicographically smallest placement
    placement = dict(zip(shape.points, (float(v) for v in perms[best])))
    return AssignmentResult(float(energy[best]), placement, shape)


@dataclass(frozen=True)
class MinimizerSet:
    shapes: tuple[ShapeClass, ...]
    energy: float
    by_shape: dict


def equimeasurable_minimizers(values: Sequence[float], rtol: float = 1e-12) -> MinimizerSet:
    """Connected supports whose best placement attains the least Sobolev energy."""
    values = ValueMultiset(values)
    if not values:
        raise ValueError("need at least one value")
    if len(values) > MAX_MINIMIZER_SIZE:
        raise BudgetExceeded(f"{len(values)} values exceed the budget {MAX_MINIMIZER_SIZE}")
    results = {s: min_energy_assignment(values, s) for s in enumerate_connected_supports(len(values))}
    low = min(r.energy for r in results.values())
    winners = tuple(s for s, r in results.items() if r.energy <= low + rtol * max(abs(low), 1e-300))
    return MinimizerSet(winners, low, results)


def dirichlet_laplacian(cells: Sequence[LatticePoint]) -> np.ndarray:
    """-Delta restricted to ``cells`` with zero values outside."""
    index = {c: k for k, c in enumerate(cells)}
    d = len(cells[0])
    M = 2.0 * d * np.eye(len(cells))
    for k, c in enumerate(cells):
        for nb in neighbors(c):
            if nb in index:
                M[k, index[nb]] = -1.0
    return M


def plus_eigenvector() -> SparseFunction:
    """Unit-norm positive first Dirichlet eigenvector of the plus pentomino."""
    cells = sorted(diamond_ball(1, 2))
    lam, vecs = np.linalg.eigh(dirichlet_laplacian(cells))
    v = vecs[:, 0]
    v = v * np.sign(v.sum())
    return SparseFunction(dict(zip(cells, v / np.linalg.norm(v))), dim=2)


# ---------------------------------------------------------------------------
# Obstruction to a rearrangement by a total order on Z^2

AXIS_NEIGHBORS = frozenset({(1, 0), (-1, 0), (0, 1), (0, -1)})
DIAGONAL_NEIGHBORS = frozenset({(1, 1), (1, -1), (-1, 1), (-1, -1)})


def _forced_segment(result: AssignmentResult) -> frozenset[LatticePoint]:
    """Cells of the optimal placement translated so that the largest value sits at the origin."""
    top = max(result.placement, key=lambda c: (result.placement[c], c))
    return frozenset(tuple(a - b for a, b in zip(c, top)) for c in result.placement)


def _segments_up_to_symmetry(result: AssignmentResult) -> set[frozenset[LatticePoint]]:
    base = _forced_segment(result)
    return {frozenset(g(c) for c in base) for g in signed_permutations(2)}


def candidate_multisets(size: int = 5, max_top: int = 40) -> Iterator[tuple[int, ...]]:
    """Distinct positive integers, swept by increasing largest entry, then lexicographically."""
    for top in range(size, max_top + 1):
        for rest in itertools.combinations(range(top - 1, 0, -1), size - 1):
            yield (top,) + rest


def search_unique_multiset(target: ShapeClass, max_top: int = 40) -> tuple[float, ...] | None:
    """First candidate multiset whose energy minimizer is ``target`` and nothing else.

    Uniqueness is demanded with a relative margin of 1e-9 over the runner-up.
    """
    shapes = enumerate_connected_supports(target.size)
    for combo in candidate_multisets(target.size, max_top):
        vals = [float(v) for v in combo]
        energies = {s: float(_placement_energies(vals, s.points)[1].min()) for s in shapes}
        low = energies[target]
        runner_up = min(e for s, e in energies.items() if s != target)
        if runner_up > low * (1 + 1e-9):
            return tuple(vals)
    return None


@dataclass(frozen=True)
class ObstructionReport:
    multiset1: tuple[float, ...]
    shape1: ShapeClass
    segment1: frozenset
    multiset2: tuple[float, ...]
    shape2: ShapeClass
    segment2: frozenset
    contradiction: bool
    multiset1_source: str  # "eigenvector" or "search"
    eigenvector_multiset: tuple[float, ...]
    eigenvector_minimizers: tuple[ShapeClass, ...]

    def to_dict(self) -> dict:
        return {
            "multiset1": list(self.multiset1),
            "multiset1_source": self.multiset1_source,
            "shape1": [list(p) for p in self.shape1.points],
            "segment1": sorted(list(p) for p in self.segment1),
            "multiset2": list(self.multiset2),
            "shape2": [list(p) for p in self.shape2.points],
            "segment2": sorted(list(p) for p in self.segment2),
            "eigenvector_multiset": list(self.eigenvector_multiset),
            "eigenvector_minimizers": [[list(p) for p in s.points] for s in self.eigenvector_minimizers],
            "contradiction": self.contradiction,
        }


def _unique_minimizer(values: Sequence[float]) -> tuple[ShapeClass, AssignmentResult] | None:
    mins = equimeasurable_minimizers(values)
    if len(mins.shapes) != 1:
        return None
    return mins.shapes[0], mins.by_shape[mins.shapes[0]]


def pruss_obstruction() -> ObstructionReport:
    """Two 5-value multisets forcing incompatible first-five segments of any total order.

    With the largest value at the least element (the origin), the first five
    elements of an order must carry the unique energy minimizer of each
    multiset. One multiset must force the plus, i.e. the origin and its axis
    neighbours; the other must force a segment holding a diagonal neighbour.

    The plus eigenvector values are tried first for the plus-forcing multiset.
    Their minimizer is not unique (the P-pentomino ties), so a searched
    multiset is used when that happens; the report records both.
    """
    eig = tuple(ValueMultiset(plus_eigenvector().values()))
    eig_mins = equimeasurable_minimizers(eig)
    first = _unique_minimizer(eig)
    source = "eigenvector"
    m1 = eig
    if first is None or first[0] != PLUS:
        source = "search"
        m1 = search_unique_multiset(PLUS)
        if m1 is None:
            raise RuntimeError("no multiset with the plus as unique minimizer was found")
        first = _unique_minimizer(m1)
    m2 = search_unique_multiset(P_PENTOMINO)
    if m2 is None:
        raise RuntimeError("no multiset with the P-pentomino as unique minimizer was found")
    second = _unique_minimizer(m2)
    if first is None or second is None:
        raise RuntimeError("searched multiset lost uniqueness on re-verification")
    (shape1, res1), (shape2, res2) = first, second
    segs1 = _segments_up_to_symmetry(res1)
    segs2 = _segments_up_to_symmetry(res2)
    forced1 = frozenset({(0, 0)}) | AXIS_NEIGHBORS
    contradiction = (segs1 == {forced1}
                     and all(s & DIAGONAL_NEIGHBORS for s in segs2)
                     and not (segs1 & segs2))
    seg1 = min(segs1, key=sorted)
    seg2 = min(segs2, key=sorted)
    return ObstructionReport(m1, shape1, seg1, m2, shape2, seg2, contradiction,
                             source, eig, eig_mins.shapes)


# ---------------------------------------------------------------------------
# Exhaustive 1-D Riesz maximization

MAX_RIESZ_VALUES = 3
MAX_RIESZ_WINDOW = 7


def _placements(values: Sequence[float], positions: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """All injective placements: (position array, value array), one row per placement."""
    k = len(values)
    pos_rows, val_rows = [], []
    seen = set()
    for pos in itertools.permutations(positions, k):
        key = frozenset(zip(pos, values))
        if key in seen:
            continue
        seen.add(key)
        pos_rows.append(pos)
        val_rows.append(values)
    return np.array(pos_rows, dtype=int).reshape(-1, k), np.array(val_rows, dtype=float).reshape(-1, k)


@dataclass(frozen=True)
class RieszMax:
    value: float
    argmax: tuple  # tuple of (u placement dict, v placement dict)


def brute_force_riesz_max(values_u: Sequence[float], values_v: Sequence[float], window: int,
                          G: Bivariate, H: Kernel, rtol: float = 1e-12) -> RieszMax:
    """Maximum over all placements in [-window, window] of sum G(u(x), v(y)) H(|x-y|) on Z.

    G(0,0) = 0 is required. Terms involving one zero value are handled through
    the margin part G(s,0) + G(0,t), whose contribution does not depend on the
    placement when H is summable, so only the pair part is maximized.
    """
    values_u, values_v = list(ValueMultiset(values_u)), list(ValueMultiset(values_v))
    if max(len(values_u), len(values_v)) > MAX_RIESZ_VALUES or window > MAX_RIESZ_WINDOW:
        raise BudgetExceeded("instance exceeds the brute-force budget")
    if G(0.0, 0.0) != 0:
        raise ValueError("G(0,0) must vanish")
    margins_vanish = G.claims_zero_margins
    if not margins_vanish and not H.finite_support:
        raise ValueError("nonzero margins need a finitely supported kernel")
    positions = list(range(-window, window + 1))
    pu, vu = _placements(values_u, positions)
    pv, vv = _placements(values_v, positions)
    total = np.zeros((len(pu), len(pv)))
    table = np.array([H(t) for t in range(2 * window + 1)])
    for a in range(len(values_u)):
        for b in range(len(values_v)):
            s, t = values_u[a], values_v[b]
            g = G(s, t) - G(s, 0.0) - G(0.0, t)
            dist = np.abs(pu[:, a][:, None] - pv[:, b][None, :])
            total += g * table[dist]
    constant = 0.0
    if not margins_vanish:
        mass = H(0) + 2 * sum(H(t) for t in range(1, H.radius + 1))
        constant = mass * (sum(G(s, 0.0) for s in values_u) + sum(G(0.0, t) for t in values_v))
    best = total.max()
    tol = rtol * max(1.0, abs(best))
    idx = np.argwhere(total >= best - tol)
    argmax = tuple(
        (dict(zip(map(int, pu[i]), vu[i].tolist())), dict(zip(map(int, pv[j]), vv[j].tolist())))
        for i, j in idx
    )
    return RieszMax(float(best + constant), argmax)
