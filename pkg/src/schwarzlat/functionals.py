"""Norms, Sobolev energies and the rearrangement-inequality functionals."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .lattice import SparseFunction, box_ball, diamond_ball, graph_distance
from .rearrange import schwarz_rearrange


class DivergentSumError(ValueError):
    """The requested double sum is infinite for finitely supported inputs."""


def lp_norm(u: SparseFunction, p: float) -> float:
    if p == math.inf:
        return max(u.values(), default=0.0)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return math.fsum(v ** p for v in u.values()) ** (1.0 / p)


def sobolev_energy(u: SparseFunction, p: float) -> float:
    """||grad u||_p^p: sum over lattice edges of |u(x) - u(y)|^p, each edge once."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    terms = []
    for x, ux in u.items():
        for i in range(u.dim):
            up = x[:i] + (x[i] + 1,) + x[i + 1:]
            terms.append(abs(ux - u(up)) ** p)
            down = x[:i] + (x[i] - 1,) + x[i + 1:]
            if down not in u:
                terms.append(ux ** p)
    return math.fsum(terms)


def gradient_norm(u: SparseFunction, p: float) -> float:
    return sobolev_energy(u, p) ** (1.0 / p)


def cavalieri_sum(u: SparseFunction, f: Callable[[float], float]) -> float:
    if f(0.0) != 0:
        raise ValueError("f(0) must vanish")
    return math.fsum(f(v) for v in u.values())


# ---------------------------------------------------------------------------
# Kernels and bivariate integrands


@dataclass(frozen=True)
class Kernel:
    """Non-increasing H on integer distances: ``samples[t]`` for t <= radius, ``tail`` beyond."""

    samples: tuple[float, ...]
    tail: float = 0.0
    name: str = ""

    def __post_init__(self) -> None:
        vals = tuple(float(s) for s in self.samples) + (float(self.tail),)
        if not vals[:-1]:
            raise ValueError("kernel needs at least one sample")
        if any(v < 0 for v in vals):
            raise ValueError("kernel values must be nonnegative")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise ValueError("kernel must be non-increasing")
        object.__setattr__(self, "samples", vals[:-1])

    @property
    def radius(self) -> int:
        return len(self.samples) - 1

    @property
    def finite_support(self) -> bool:
        return self.tail == 0.0

    def __call__(self, t: int) -> float:
        return self.samples[t] if t <= self.radius else self.tail

    @classmethod
    def delta0(cls) -> "Kernel":
        return cls((1.0,), name="delta0")

    @classmethod
    def geometric(cls, base: float, cutoff: int) -> "Kernel":
        return cls(tuple(base ** -t for t in range(cutoff + 1)), name=f"geometric:{base:g}:{cutoff}")

    @classmethod
    def step(cls, radius: int) -> "Kernel":
        return cls((1.0,) * (radius + 1), name=f"step:{radius}")

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """``delta0 | geometric:BASE:CUTOFF | step:RADIUS``."""
        parts = text.strip().split(":")
        try:
            if parts == ["delta0"]:
                return cls.delta0()
            if parts[0] == "geometric" and len(parts) == 3:
                return cls.geometric(float(parts[1]), int(parts[2]))
            if parts[0] == "step" and len(parts) == 2:
                return cls.step(int(parts[1]))
        except ValueError:
            pass
        raise ValueError(f"bad kernel description {text!r}")


_FLAG_GRID = (0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 10.0)


@dataclass(frozen=True)
class Bivariate:
    """G(s, t) with claimed vanishing properties checked on construction."""

    func: Callable[[float, float], float]
    claims_zero_zero: bool = True
    claims_zero_margins: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        if self.claims_zero_zero and self.func(0.0, 0.0) != 0:
            raise ValueError(f"{self.name or 'G'}: G(0,0) != 0")
        if self.claims_zero_margins:
            for s in _FLAG_GRID:
                if self.func(s, 0.0) != 0 or self.func(0.0, s) != 0:
                    raise ValueError(f"{self.name or 'G'}: margins do not vanish at {s}")

    def __call__(self, s: float, t: float) -> float:
        return self.func(s, t)

    @classmethod
    def product(cls) -> "Bivariate":
        return cls(lambda s, t: s * t, True, True, "product")

    @classmethod
    def negabsdiff(cls, p: float) -> "Bivariate":
        return cls(lambda s, t: -abs(s - t) ** p, True, False, f"negabsdiff:{p:g}")

    @classmethod
    def parse(cls, text: str) -> "Bivariate":
        """``product | negabsdiff:P``."""
        parts = text.strip().split(":")
        if parts == ["product"]:
            return cls.product()
        if parts[0] == "negabsdiff" and len(parts) == 2:
            try:
                return cls.negabsdiff(float(parts[1]))
            except ValueError:
                pass
        raise ValueError(f"bad bivariate description {text!r}")


def reduce_to_tilde(G: Bivariate) -> Bivariate:
    """G~(s,t) = G(s,t) - G(s,0) - G(0,t), which has vanishing margins."""
    if G(0.0, 0.0) != 0:
        raise ValueError("G(0,0) must vanish")
    f = G.func
    return Bivariate(lambda s, t: f(s, t) - f(s, 0.0) - f(0.0, t), True, True,
                     f"tilde({G.name})" if G.name else "")


# ---------------------------------------------------------------------------
# Riesz-type sums


def _offsets(radius: int, d: int) -> list[tuple[tuple[int, ...], int]]:
    return [(y, sum(abs(c) for c in y)) for y in diamond_ball(radius, d)]


def riesz_sum(u: SparseFunction, v: SparseFunction, G: Bivariate, H: Kernel) -> float:
    """sum_{x,y} G(u(x), v(y)) H(d(x,y)), computed as an exact finite sum."""
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    terms = []
    if G.claims_zero_margins:
        for x, ux in u.items():
            for y, vy in v.items():
                h = H(graph_distance(x, y))
                if h:
                    terms.append(G(ux, vy) * h)
        return math.fsum(terms)
    if G(0.0, 0.0) != 0 or not H.finite_support:
        raise DivergentSumError("G must have zero margins, or G(0,0)=0 with a finitely supported kernel")
    offs = _offsets(H.radius, u.dim)
    for x, ux in u.items():
        for off, t in offs:
            y = tuple(a + b for a, b in zip(x, off))
            terms.append(G(ux, v(y)) * H(t))
    for y, vy in v.items():
        for off, t in offs:
            x = tuple(a + b for a, b in zip(y, off))
            if x not in u:
                terms.append(G(0.0, vy) * H(t))
    return math.fsum(terms)


def extended_riesz_sum(us: Sequence[SparseFunction], G: Callable[..., float],
                       Hs: Sequence[Sequence[Kernel | None]]) -> float:
    """sum G(u_1(x_1), ..., u_m(x_m)) prod_{i<j} H_ij(d(x_i, x_j)).

    G must vanish whenever one argument is zero; the sum then runs over the
    product of supports.
    """
    m = len(us)
    if m < 1:
        raise ValueError("need at least one function")
    if len({u.dim for u in us}) != 1:
        raise ValueError("dimension mismatch")
    for k in range(m):
        for s in _FLAG_GRID[1:]:
            args = [s] * m
            args[k] = 0.0
            if G(*args) != 0:
                raise DivergentSumError("G must vanish when any argument is zero")
    pairs = [(i, j, Hs[i][j]) for i in range(m) for j in range(i + 1, m)]
    if any(H is None for _, _, H in pairs):
        raise ValueError("kernel matrix must define H_ij for every i < j")
    terms = []
    for combo in itertools.product(*(list(u.items()) for u in us)):
        w = 1.0
        for i, j, H in pairs:
            w *= H(graph_distance(combo[i][0], combo[j][0]))
            if not w:
                break
        if w:
            terms.append(G(*(val for _, val in combo)) * w)
    return math.fsum(terms)


def hardy_littlewood_sum(u: SparseFunction, v: SparseFunction) -> float:
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    small, big = (u, v) if len(u) <= len(v) else (v, u)
    return math.fsum(val * big(x) for x, val in small.items())


def lp_contraction_gap(u: SparseFunction, v: SparseFunction, p: float) -> float:
    """||u - v||_p^p - ||u* - v*||_p^p (nonnegative by the contraction property)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")

    def dist(a: SparseFunction, b: SparseFunction) -> float:
        return math.fsum(abs(a(x) - b(x)) ** p for x in set(a) | set(b))

    return dist(u, v) - dist(schwarz_rearrange(u), schwarz_rearrange(v))


def f_weighted_sum(u: SparseFunction, F: Callable[[float, float], float], window: int) -> float:
    """sum over the box of radius ``window`` of F(|x|_2, u(x))."""
    if u.max_abs_coord() > window:
        raise ValueError("window does not cover the support")
    return math.fsum(F(math.sqrt(sum(c * c for c in x)), u(x)) for x in box_ball(window, u.dim))


# ---------------------------------------------------------------------------
# Supermodularity


@dataclass(frozen=True)
class SupermodularVerdict:
    passed: bool
    witness: tuple[float, float, float, float] | None = None
    margin: float | None = None  # G(s+s0,t+t0)+G(s,t)-G(s,t+t0)-G(s+s0,t) at the witness
    checked: int = 0


DEFAULT_SUPERMODULAR_LEVELS = (0.0, 0.25, 0.5, 1.0, 2.0, 5.0)


def default_supermodular_grid(n_random: int = 100, seed: int = 42) -> list[tuple[float, ...]]:
    lv = DEFAULT_SUPERMODULAR_LEVELS
    grid = list(itertools.product(lv, repeat=4))
    rng = np.random.default_rng(seed)
    grid += [tuple(float(c) for c in row) for row in rng.uniform(0, 5, size=(n_random, 4))]
    return grid


def check_supermodular(G: Callable[[float, float], float],
                       grid: Sequence[tuple[float, float, float, float]] | None = None,
                       strict: bool = False, rtol: float = 1e-12) -> SupermodularVerdict:
    """Falsification test of G(s+s0,t+t0) + G(s,t) >= G(s,t+t0) + G(s+s0,t) on a grid.

    Sampling can refute supermodularity but never prove it.
    """
    if grid is None:
        grid = default_supermodular_grid()
    for n, (s, t, s0, t0) in enumerate(grid, start=1):
        a, b = G(s + s0, t + t0), G(s, t)
        c, e = G(s, t + t0), G(s + s0, t)
        gap = (a + b) - (c + e)
        tol = rtol * max(1.0, abs(a), abs(b), abs(c), abs(e))
        bad = gap < -tol or (strict and s0 > 0 and t0 > 0 and gap <= tol)
        if bad:
            return SupermodularVerdict(False, (s, t, s0, t0), gap, n)
    return SupermodularVerdict(True, None, None, len(grid))
