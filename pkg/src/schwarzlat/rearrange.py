"""Discrete Schwarz rearrangement: 1-D layer, polarization, one-step and iterated."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import (
    Direction,
    SparseFunction,
    _line_coords,
    _point_on_line,
    direction_set,
)


class ConvergenceError(RuntimeError):
    """The rearrangement iteration did not reach a fixed point in the cycle budget."""

    def __init__(self, message: str, last: SparseFunction):
        super().__init__(message)
        self.last = last


# ---------------------------------------------------------------------------
# 1-D layer


def _slot(k: int, half: bool) -> int:
    """Doubled position of the k-th largest value (0-based).

    Z: 0, 1, -1, 2, -2, ...   Z+1/2: 1/2, -1/2, 3/2, -3/2, ...
    """
    if half:
        return k + 1 if k % 2 == 0 else -k
    if k == 0:
        return 0
    return k + 1 if k % 2 == 1 else -k


@dataclass(frozen=True)
class LineFunction:
    """Finitely supported nonnegative function on Z (``half=False``) or Z+1/2."""

    entries: Mapping[Fraction, float]
    half: bool = False

    def __post_init__(self) -> None:
        clean: dict[Fraction, float] = {}
        for pos, val in dict(self.entries).items():
            pos = Fraction(pos)
            if (pos * 2).denominator != 1 or ((pos * 2).numerator % 2 == 1) != self.half:
                lattice = "Z+1/2" if self.half else "Z"
                raise ValueError(f"position {pos} does not lie on {lattice}")
            val = float(val)
            if not val >= 0:
                raise ValueError("line function values must be nonnegative")
            if val > 0:
                clean[pos] = val
        object.__setattr__(self, "entries", clean)

    def __call__(self, pos: Fraction | int | float) -> float:
        return self.entries.get(Fraction(pos), 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LineFunction):
            return NotImplemented
        return self.half == other.half and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.half, frozenset(self.entries.items())))


@dataclass(frozen=True)
class HalfLine:
    """Open half-line (boundary, inf) if ``right`` else (-inf, boundary); 2*boundary in Z."""

    boundary: Fraction
    right: bool = True

    def __post_init__(self) -> None:
        b = Fraction(self.boundary)
        if (2 * b).denominator != 1:
            raise ValueError(f"half-line boundary must lie in Z/2, got {b}")
        object.__setattr__(self, "boundary", b)

    def contains(self, x: Fraction) -> bool:
        return x > self.boundary if self.right else x < self.boundary

    def reflect(self, x: Fraction) -> Fraction:
        return 2 * self.boundary - x


H_PLUS = HalfLine(Fraction(0), right=True)
H_MINUS = HalfLine(Fraction(1, 2), right=False)


def rearrange_line(f: LineFunction) -> LineFunction:
    vals = sorted(f.entries.values(), reverse=True)
    return LineFunction({Fraction(_slot(k, f.half), 2): v for k, v in enumerate(vals)}, f.half)


def _polarize2(entries: dict[int, float], b2: int, right: bool) -> dict[int, float]:
    """Polarization on doubled positions; the half-line boundary is b2 / 2."""
    out: dict[int, float] = {}
    for x in entries:
        for y in (x, 2 * b2 - x):
            if y in out:
                continue
            a, b = entries.get(y, 0.0), entries.get(2 * b2 - y, 0.0)
            inside = y > b2 if right else y < b2
            val = max(a, b) if inside else min(a, b)
            if val > 0:
                out[y] = val
    return out


def _doubled(f: LineFunction) -> dict[int, float]:
    return {int(2 * p): v for p, v in f.entries.items()}


def _undoubled(entries: dict[int, float], half: bool) -> LineFunction:
    return LineFunction({Fraction(p, 2): v for p, v in entries.items()}, half)


def polarize(f: LineFunction, H: HalfLine) -> LineFunction:
    return _undoubled(_polarize2(_doubled(f), int(2 * H.boundary), H.right), f.half)


def _T2(entries: dict[int, float]) -> dict[int, float]:
    out = _polarize2(entries, int(2 * H_MINUS.boundary), H_MINUS.right)
    return _polarize2(out, int(2 * H_PLUS.boundary), H_PLUS.right)


def two_point_T(f: LineFunction) -> LineFunction:
    return _undoubled(_T2(_doubled(f)), f.half)


# ---------------------------------------------------------------------------
# n-D layer


def _one_step(u: SparseFunction, e: Direction) -> tuple[SparseFunction, bool]:
    lines: dict[tuple[int, ...], list[tuple[int, float]]] = {}
    for x, val in u.items():
        alpha, pos2 = _line_coords(x, e)
        lines.setdefault(alpha, []).append((pos2, val))
    out: dict = {}
    changed = False
    for alpha, entries in lines.items():
        half = entries[0][0] % 2 == 1
        vals = sorted((v for _, v in entries), reverse=True)
        placed = {_slot(k, half): v for k, v in enumerate(vals)}
        if not changed and placed != dict(entries):
            changed = True
        for pos2, v in placed.items():
            out[_point_on_line(alpha, pos2, e)] = v
    if not changed:
        return u, False
    return SparseFunction._trusted(out, u.dim), True


def one_step(u: SparseFunction, e: Direction) -> SparseFunction:
    """Rearrange ``u`` along every line parallel to ``e``."""
    if not e.fits(u.dim):
        raise ValueError(f"direction {e} does not fit dimension {u.dim}")
    return _one_step(u, e)[0]


def default_max_cycles(u: SparseFunction) -> int:
    return 10 * (len(u) + u.dim ** 2)


def _check_cycle(cycle: Sequence[Direction], d: int) -> list[Direction]:
    cycle = list(cycle)
    if sorted(cycle, key=str) != sorted(direction_set(d), key=str):
        raise ValueError("cycle must be a permutation of the direction set")
    return cycle


def schwarz_rearrange(u: SparseFunction, max_cycles: int | None = None,
                      cycle: Sequence[Direction] | None = None,
                      trace: Callable[[int, Direction, SparseFunction], None] | None = None
                      ) -> SparseFunction:
    """Iterate full cycles of one-step rearrangements until nothing moves.

    ``trace(step, direction, iterate)`` is called after every one-step
    rearrangement when given.
    """
    d = u.dim
    cycle = direction_set(d) if cycle is None else _check_cycle(cycle, d)
    if max_cycles is None:
        max_cycles = default_max_cycles(u)
    if max_cycles < 1:
        raise ValueError("max_cycles must be positive")
    step = 0
    for _ in range(max_cycles):
        moved = False
        for e in cycle:
            u, changed = _one_step(u, e)
            moved |= changed
            step += 1
            if trace is not None:
                trace(step, e, u)
        if not moved:
            return u
    raise ConvergenceError(f"no fixed point after {max_cycles} cycles", u)


def schwarz_rearrange_alt_order(u: SparseFunction, cycle: Sequence[Direction],
                                max_cycles: int | None = None) -> SparseFunction:
    return schwarz_rearrange(u, max_cycles=max_cycles, cycle=cycle)


def is_schwarz_symmetric(u: SparseFunction) -> bool:
    return not any(_one_step(u, e)[1] for e in direction_set(u.dim))


def support_sandwich_bounds(N: int) -> tuple[int, int]:
    """(floor((sqrt N - 5)/2), ceil(sqrt(N/2)) + 2), computed in exact integer arithmetic."""
    if N < 1:
        raise ValueError("N must be positive")
    L1 = (math.isqrt(N) - 5) // 2
    m = math.isqrt(N // 2)
    while 2 * m * m < N:
        m += 1
    return L1, m + 2


def iterate_T(f: LineFunction, max_iter: int = 10_000) -> tuple[LineFunction, int]:
    """Apply T until it stabilizes; returns the fixed point and the number of applications."""
    cur = _doubled(f)
    for k in range(max_iter):
        nxt = _T2(cur)
        if nxt == cur:
            return _undoubled(cur, f.half), k
        cur = nxt
    raise RuntimeError("T iteration did not stabilize")
