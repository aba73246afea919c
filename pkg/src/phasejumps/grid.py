"""Fine and coarse lattice geometry.

All lattice points are kept as integer index pairs on the *fine* grid of
spacing ``delta``; complex coordinates are derived on demand.  Coarse grid
points are fine-grid points whose indices are multiples of
``delta_star / delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument


def as_fraction(x) -> Fraction:
    """Exact rational value of a decimal or dyadic literal.

    Floats are converted through their shortest ``repr`` so that ``0.01``
    becomes ``1/100`` rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(repr(float(x)))


def _ceil_sqrt_inverse(r: Fraction, scale: int = 1) -> int:
    # smallest integer m >= 0 with (scale*m)**2 >= 1/r
    num, den = r.numerator, r.denominator
    m = math.isqrt(den // (num * scale * scale))
    while (scale * m) ** 2 * num < den:
        m += 1
    while m > 0 and (scale * (m - 1)) ** 2 * num >= den:
        m -= 1
    return m


def coarse_step_counts(delta) -> tuple[int, int]:
    """Coarse spacings in units of ``delta``: ``(delta_star/delta, delta_dstar/delta)``."""
    d = as_fraction(delta)
    if d <= 0 or d > 1:
        raise InvalidArgument(f"grid spacing must satisfy 0 < delta <= 1, got {delta}")
    return 2 * _ceil_sqrt_inverse(d, 4), _ceil_sqrt_inverse(d, 1)


def coarse_spacings(delta) -> tuple[float, float]:
    """Return ``(delta_star, delta_dstar)`` for fine spacing ``delta``.

    ``delta_star = 2*ceil(delta**-0.5 / 4)*delta`` and
    ``delta_dstar = ceil(delta**-0.5)*delta``, with both ceilings evaluated on
    exact rationals.

    >>> coarse_spacings(0.01)
    (0.06, 0.1)
    """
    s, h = coarse_step_counts(delta)
    d = as_fraction(delta)
    return float(s * d), float(h * d)


def _ratio_steps(L, delta, what="L/delta") -> int:
    q = as_fraction(L) / as_fraction(delta)
    if q.denominator != 1 or q <= 0:
        raise InvalidArgument(f"{what} must be a positive integer, got {float(q)!r}")
    return int(q)


@dataclass(frozen=True)
class GridSpec:
    """Square domain ``[-L, L]^2`` sampled with spacing ``delta``."""

    L: float
    delta: float

    def __post_init__(self):
        if not (self.delta > 0) or not (self.L > 0):
            raise InvalidArgument("L and delta must be positive")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "delta", float(self.delta))
        _ratio_steps(self.L, self.delta)

    @property
    def n_steps(self) -> int:
        """``L / delta``."""
        return _ratio_steps(self.L, self.delta)

    @property
    def star_steps(self) -> int:
        return coarse_step_counts(self.delta)[0]

    @property
    def dstar_steps(self) -> int:
        return coarse_step_counts(self.delta)[1]

    @property
    def delta_star(self) -> float:
        return coarse_spacings(self.delta)[0]

    @property
    def delta_dstar(self) -> float:
        return coarse_spacings(self.delta)[1]

    def coarse_steps(self) -> int:
        """``L / delta_star``; raises unless it is a positive integer."""
        n, s = self.n_steps, self.star_steps
        if n % s:
            raise InvalidArgument(
                f"L/delta_star must be a positive integer (L={self.L}, "
                f"delta_star={self.delta_star})")
        return n // s

    def check_coarse_invariant(self) -> bool:
        """``delta_star < delta_dstar <= 2*delta_star``; holds whenever delta < 1/16."""
        s, h = coarse_step_counts(self.delta)
        return s < h <= 2 * s


@dataclass(frozen=True, order=True)
class GridPoint:
    """Lattice point ``delta*k + i*delta*j`` (fine-grid indices)."""

    k: int
    j: int
    delta: float = 1.0

    @property
    def z(self) -> complex:
        return complex(self.delta * self.k, self.delta * self.j)

    @property
    def x(self) -> float:
        return self.delta * self.k

    @property
    def y(self) -> float:
        return self.delta * self.j


def _principal_arg(k: int, j: int) -> float:
    if j == 0 and k < 0:
        return math.pi
    return math.atan2(j, k)


@lru_cache(maxsize=64)
def boundary_offsets(h: int) -> np.ndarray:
    """Integer offsets ``(a, b)`` with ``max(|a|, |b|) == h`` sorted by argument.

    Returns an ``(8h, 2)`` array; row ``i`` is ``mu_{i+1}`` in index units.
    """
    if h < 1:
        raise InvalidArgument("half_side_steps must be >= 1")
    pts = [(a, -h) for a in range(-h, h + 1)]
    pts += [(h, b) for b in range(-h + 1, h + 1)]
    pts += [(a, h) for a in range(h - 1, -h - 1, -1)]
    pts += [(-h, b) for b in range(h - 1, -h, -1)]
    args = [_principal_arg(a, b) for a, b in pts]
    order = sorted(range(len(pts)), key=args.__getitem__)
    sorted_args = [args[i] for i in order]
    assert all(x < y for x, y in zip(sorted_args, sorted_args[1:])), "argument tie on box boundary"
    out = np.array([pts[i] for i in order], dtype=np.int64)
    out.setflags(write=False)
    return out


def box_boundary(half_side_steps: int, delta: float = 1.0) -> list[GridPoint]:
    """Grid points on the square of half-side ``half_side_steps*delta``.

    Points are sorted by principal argument in ``(-pi, pi]``, so the first
    point is just past ``-pi`` and ``(-h, 0)`` comes last.
    """
    return [GridPoint(int(a), int(b), delta) for a, b in boundary_offsets(half_side_steps)]


def enumerate_interior(spec: GridSpec, coarse: bool = False) -> list[GridPoint]:
    """Fine (or coarse) lattice points in ``[-L, L]^2``, row-major (y outer)."""
    n = spec.n_steps
    step = 1
    if coarse:
        spec.coarse_steps()
        step = spec.star_steps
    idx = range(-n, n + 1, step)
    return [GridPoint(k, j, spec.delta) for j in idx for k in idx]
