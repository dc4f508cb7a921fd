"""Lattice geometry, finitely supported functions and support classes on Z^d."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

LatticePoint = tuple[int, ...]


def _check_dim(d: int) -> None:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")


def graph_distance(x: LatticePoint, y: LatticePoint) -> int:
    """Combinatorial (l1) distance between two lattice points."""
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    return sum(abs(a - b) for a, b in zip(x, y))


def diamond_ball(l: int, d: int) -> frozenset[LatticePoint]:
    """Points with ||y||_1 <= l."""
    _check_dim(d)
    if l < 0:
        raise ValueError("radius must be nonnegative")
    out: list[LatticePoint] = []

    def rec(prefix: tuple[int, ...], budget: int) -> None:
        if len(prefix) == d:
            out.append(prefix)
            return
        for c in range(-budget, budget + 1):
            rec(prefix + (c,), budget - abs(c))

    rec((), l)
    return frozenset(out)


def box_ball(l: int, d: int) -> frozenset[LatticePoint]:
    """Points with ||y||_inf <= l."""
    _check_dim(d)
    if l < 0:
        raise ValueError("radius must be nonnegative")
    return frozenset(itertools.product(range(-l, l + 1), repeat=d))


def neighbors(x: LatticePoint) -> Iterator[LatticePoint]:
    for i, c in enumerate(x):
        yield x[:i] + (c + 1,) + x[i + 1:]
        yield x[:i] + (c - 1,) + x[i + 1:]


# ---------------------------------------------------------------------------
# Directions and lines


@dataclass(frozen=True)
class Direction:
    """One of the one-step rearrangement directions.

    ``i`` and ``j`` are 0-based coordinate indices. ``sign`` is 0 for the unit
    vector e_i, +1 for (e_i + e_j)/2 and -1 for (e_i - e_j)/2 (with i < j).
    """

    i: int
    j: int | None = None
    sign: int = 0

    def __post_init__(self) -> None:
        if self.i < 0:
            raise ValueError("coordinate index must be nonnegative")
        if self.sign == 0:
            if self.j is not None:
                raise ValueError("axis direction takes a single index")
        elif self.sign in (1, -1):
            if self.j is None or not self.i < self.j:
                raise ValueError("diagonal direction needs indices i < j")
        else:
            raise ValueError("sign must be -1, 0 or +1")

    @classmethod
    def axis(cls, i: int) -> "Direction":
        return cls(i)

    @classmethod
    def plus(cls, i: int, j: int) -> "Direction":
        return cls(i, j, 1)

    @classmethod
    def minus(cls, i: int, j: int) -> "Direction":
        return cls(i, j, -1)

    @property
    def is_axis(self) -> bool:
        return self.sign == 0

    @property
    def squared_length(self) -> Fraction:
        return Fraction(1) if self.is_axis else Fraction(1, 2)

    def vector(self, d: int) -> tuple[Fraction, ...]:
        v = [Fraction(0)] * d
        if self.is_axis:
            v[self.i] = Fraction(1)
        else:
            v[self.i] = Fraction(1, 2)
            v[self.j] = Fraction(self.sign, 2)
        return tuple(v)

    def fits(self, d: int) -> bool:
        top = self.i if self.j is None else self.j
        return top < d

    def __str__(self) -> str:
        if self.is_axis:
            return f"e{self.i + 1}"
        op = "+" if self.sign > 0 else "-"
        return f"e{self.i + 1}{op}e{self.j + 1}"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        """Parse ``e1``, ``e1+e2`` or ``e1-e2`` (1-based indices)."""
        s = text.strip().replace(" ", "")
        if s.startswith("(") and s.endswith(")/2"):
            s = s[1:-3]
        try:
            for op, sign in (("+", 1), ("-", -1)):
                if op in s:
                    a, b = s.split(op)
                    i, j = int(a.lstrip("e")) - 1, int(b.lstrip("e")) - 1
                    if not (a.startswith("e") and b.startswith("e")):
                        raise ValueError
                    return cls(i, j, sign)
            if not s.startswith("e"):
                raise ValueError
            return cls(int(s[1:]) - 1)
        except ValueError:
            raise ValueError(f"cannot parse direction {text!r}") from None


def direction_set(d: int) -> list[Direction]:
    """Canonical cycle: axes in index order, then (e_i+e_j)/2, (e_i-e_j)/2 for i<j."""
    _check_dim(d)
    out = [Direction.axis(i) for i in range(d)]
    for i, j in itertools.combinations(range(d), 2):
        out.append(Direction.plus(i, j))
        out.append(Direction.minus(i, j))
    return out


@dataclass(frozen=True)
class LineKey:
    """Identifies the class V_e^alpha of points on one line parallel to ``direction``.

    For an axis direction ``alpha`` holds all other coordinates; for a diagonal
    it starts with the invariant x_i - x_j (plus) or x_i + x_j (minus), followed
    by the coordinates other than i, j.
    """

    direction: Direction
    alpha: tuple[int, ...]
    half: bool  # positions range over Z + 1/2


def _line_coords(x: LatticePoint, e: Direction) -> tuple[tuple[int, ...], int]:
    """(alpha, 2*<e,x>) with integer arithmetic."""
    i = e.i
    if e.sign == 0:
        return x[:i] + x[i + 1:], 2 * x[i]
    j = e.j
    rest = x[:i] + x[i + 1:j] + x[j + 1:]
    if e.sign > 0:
        return (x[i] - x[j],) + rest, x[i] + x[j]
    return (x[i] + x[j],) + rest, x[i] - x[j]


def _point_on_line(alpha: tuple[int, ...], pos2: int, e: Direction) -> LatticePoint:
    i = e.i
    if e.sign == 0:
        return alpha[:i] + (pos2 // 2,) + alpha[i:]
    j = e.j
    inv, rest = alpha[0], alpha[1:]
    if e.sign > 0:
        xi, xj = (pos2 + inv) // 2, (pos2 - inv) // 2
    else:
        xi, xj = (inv + pos2) // 2, (inv - pos2) // 2
    # rest excludes i and j; re-insert in order (i < j)
    return rest[:i] + (xi,) + rest[i:j - 1] + (xj,) + rest[j - 1:]


def line_of(x: LatticePoint, e: Direction) -> tuple[LineKey, Fraction]:
    if not e.fits(len(x)):
        raise ValueError(f"direction {e} does not fit dimension {len(x)}")
    alpha, pos2 = _line_coords(x, e)
    return LineKey(e, alpha, pos2 % 2 == 1), Fraction(pos2, 2)


def point_from_line(key: LineKey, position: Fraction) -> LatticePoint:
    pos2 = Fraction(position) * 2
    if pos2.denominator != 1 or (int(pos2) % 2 == 1) != key.half:
        raise ValueError(f"position {position} does not lie on {key}")
    return _point_on_line(key.alpha, int(pos2), key.direction)


# ---------------------------------------------------------------------------
# Sparse functions


class SparseFunction(Mapping):
    """Finitely supported nonnegative function on Z^d.

    Only strictly positive values are stored. ``u(x)`` evaluates anywhere
    (0 off the support); ``u[x]`` and iteration follow the Mapping protocol
    over the support.
    """

    __slots__ = ("dim", "_data")

    def __init__(self, entries: Mapping[LatticePoint, float] | Iterable[tuple[LatticePoint, float]] = (),
                 dim: int | None = None):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[LatticePoint, float] = {}
        for x, val in items:
            x = tuple(int(c) for c in x)
            if dim is None:
                dim = len(x)
            if len(x) != dim:
                raise ValueError(f"point {x} does not have dimension {dim}")
            val = float(val)
            if not val >= 0 or math.isinf(val):
                raise ValueError(f"value at {x} must be finite and nonnegative, got {val}")
            if val > 0:
                data[x] = val
        if dim is None:
            raise ValueError("dimension of an empty function must be given")
        _check_dim(dim)
        self.dim = dim
        self._data = data

    @classmethod
    def _trusted(cls, data: dict[LatticePoint, float], dim: int) -> "SparseFunction":
        obj = cls.__new__(cls)
        obj.dim = dim
        obj._data = data
        return obj

    @classmethod
    def indicator(cls, points: Iterable[LatticePoint], dim: int | None = None) -> "SparseFunction":
        return cls(((p, 1.0) for p in points), dim=dim)

    def __call__(self, x: LatticePoint) -> float:
        return self._data.get(tuple(x), 0.0)

    def __getitem__(self, x: LatticePoint) -> float:
        return self._data[x]

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseFunction):
            return NotImplemented
        return self.dim == other.dim and self._data == other._data

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {v!r}" for x, v in sorted(self._data.items()))
        return f"SparseFunction({{{body}}}, dim={self.dim})"

    @property
    def support(self) -> frozenset[LatticePoint]:
        return frozenset(self._data)

    def scaled(self, factor: float) -> "SparseFunction":
        return SparseFunction({x: factor * v for x, v in self._data.items()}, dim=self.dim)

    def translated(self, shift: LatticePoint) -> "SparseFunction":
        return SparseFunction._trusted(
            {tuple(a + b for a, b in zip(x, shift)): v for x, v in self._data.items()}, self.dim)

    def max_abs_coord(self) -> int:
        return max((max(abs(c) for c in x) for x in self._data), default=0)


class ValueMultiset(tuple):
    """Positive values sorted non-increasingly, i.e. ran(u)."""

    def __new__(cls, values: Iterable[float] = ()):
        vals = sorted((float(v) for v in values), reverse=True)
        if vals and not vals[-1] > 0:
            raise ValueError("value multiset entries must be positive")
        return super().__new__(cls, vals)


def values_multiset(u: SparseFunction) -> ValueMultiset:
    return ValueMultiset(u.values())


def _ranked_points(u: SparseFunction) -> list[LatticePoint]:
    # Largest values first; ties broken by lexicographic point order.
    return sorted(u, key=lambda x: (-u[x], x))


def cutoff(u: SparseFunction, n: int) -> SparseFunction:
    """Keep the ``n`` largest values (ties broken by lexicographic point order)."""
    if n < 0:
        raise ValueError("cut-off size must be nonnegative")
    keep = _ranked_points(u)[:n]
    return SparseFunction._trusted({x: u[x] for x in keep}, u.dim)


def random_function(rng: np.random.Generator, dim: int, size: int, radius: int,
                    distinct: bool = True, low: float = 0.05, high: float = 1.0) -> SparseFunction:
    """Random function with ``size`` support points drawn from the box of given radius."""
    side = 2 * radius + 1
    if size > side ** dim:
        raise ValueError("support larger than the box")
    flat = rng.choice(side ** dim, size=size, replace=False)
    pts = [tuple(int(c) - radius for c in np.unravel_index(k, (side,) * dim)) for k in flat]
    if distinct:
        vals = rng.uniform(low, high, size=size)
    else:
        vals = rng.integers(1, 4, size=size).astype(float)
    return SparseFunction(zip(pts, vals), dim=dim)


# ---------------------------------------------------------------------------
# Shape classes


@dataclass(frozen=True, order=True)
class ShapeClass:
    """Canonical representative of a finite support up to translations and
    signed coordinate permutations."""

    points: tuple[LatticePoint, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.points[0])


def signed_permutations(d: int) -> list[Callable[[LatticePoint], LatticePoint]]:
    """All 2^d * d! maps x -> (s_k x_{p(k)})_k."""
    ops = []
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            ops.append(lambda x, perm=perm, signs=signs: tuple(s * x[p] for s, p in zip(signs, perm)))
    return ops


def _normalize(points: Iterable[LatticePoint]) -> tuple[LatticePoint, ...]:
    pts = list(points)
    lo = [min(c) for c in zip(*pts)]
    return tuple(sorted(tuple(a - m for a, m in zip(x, lo)) for x in pts))


def canonical_shape(support: Iterable[LatticePoint]) -> ShapeClass:
    pts = [tuple(x) for x in support]
    if not pts:
        raise ValueError("cannot canonicalize an empty support")
    d = len(pts[0])
    if any(len(x) != d for x in pts):
        raise ValueError("support points have mixed dimensions")
    best = min(_normalize(g(x) for x in pts) for g in signed_permutations(d))
    return ShapeClass(best)
