"""Charge benchmarks, empirical charge curves and zero-set matching."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cubature
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgument, QuadratureError
from .gwhf import twisted_derivatives


def first_intensity_charge(F1: Callable, sigma: float, c1: complex, c2: complex, z,
                           h: float = 1e-4):
    """Expected charge density of the zeros of ``F1 + sigma*F0`` at ``z``.

    ``c1`` and ``c2`` are the Wirtinger derivatives of the twisted kernel at
    the origin; both vanish for real-valued kernels.  With ``F1 == 0`` the
    density is ``1/pi`` everywhere.
    """
    if not sigma > 0:
        raise InvalidArgument("sigma must be positive")
    z = np.asarray(z, dtype=complex)
    f = np.asarray(F1(z), dtype=complex)
    d1, d2 = twisted_derivatives(F1, z, h)
    s2 = sigma * sigma
    core = np.abs(d1 - c1 * f) ** 2 - np.abs(d2 - c2 * f) ** 2 + s2
    rho = np.exp(-np.abs(f) ** 2 / s2) * core / (math.pi * s2)
    return rho.real[()] if np.ndim(rho) == 0 else rho.real


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)


def expected_charge(region: Rect, rho: Callable, rtol: float = 1e-6, atol: float = 1e-12) -> float:
    """Integrate a vectorized density ``rho(z)`` over ``region``."""
    if region.area == 0:
        return 0.0

    def f(xy):
        return np.asarray(rho(xy[:, 0] + 1j * xy[:, 1]), dtype=float)

    res = cubature(f, [region.x0, region.y0], [region.x1, region.y1], rtol=rtol, atol=atol)
    if res.status != "converged":
        raise QuadratureError(f"quadrature over {region} did not converge "
                              f"(error estimate {float(res.error):.3g})", float(res.error))
    return float(res.estimate)


@dataclass(frozen=True)
class RegionSequence:
    regions: tuple

    def __post_init__(self):
        for a, b in zip(self.regions, self.regions[1:]):
            if not (b.x0 <= a.x0 and b.y0 <= a.y0 and b.x1 >= a.x1 and b.y1 >= a.y1
                    and b.area > a.area):
                raise InvalidArgument("regions must be strictly nested")

    def __len__(self):
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)

    def __getitem__(self, i):
        return self.regions[i]


def spiral_regions(step: float, count: int) -> RegionSequence:
    """Boxes growing from ``[-step/2, step/2]^2`` by one ``step`` per side, E, N, W, S."""
    if not step > 0:
        raise InvalidArgument("step must be positive")
    h = step / 2
    x0, y0, x1, y1 = -h, -h, h, h
    out = [Rect(x0, y0, x1, y1)]
    for n in range(count - 1):
        side = n % 4
        if side == 0:
            x1 += step
        elif side == 1:
            y1 += step
        elif side == 2:
            x0 -= step
        else:
            y0 -= step
        out.append(Rect(x0, y0, x1, y1))
    return RegionSequence(tuple(out))


def expected_charges(regions: RegionSequence, rho: Callable, rtol: float = 1e-6) -> list[float]:
    """Expected charge for each nested region, integrating only the new strip each time."""
    out = []
    total = 0.0
    prev = None
    for r in regions:
        if prev is None:
            total = expected_charge(r, rho, rtol)
        else:
            for strip in _difference_strips(prev, r):
                total += expected_charge(strip, rho, rtol)
        out.append(total)
        prev = r
    return out


def _difference_strips(inner: Rect, outer: Rect):
    strips = []
    if outer.y0 < inner.y0:
        strips.append(Rect(outer.x0, outer.y0, outer.x1, inner.y0))
    if outer.y1 > inner.y1:
        strips.append(Rect(outer.x0, inner.y1, outer.x1, outer.y1))
    if outer.x0 < inner.x0:
        strips.append(Rect(outer.x0, inner.y0, inner.x0, inner.y1))
    if outer.x1 > inner.x1:
        strips.append(Rect(inner.x1, inner.y0, outer.x1, inner.y1))
    return strips


REPORT_FIELDS = ("region_index", "x0", "y0", "x1", "y1", "area", "mean_charge", "se_charge",
                 "mean_count", "se_count", "theory_charge")


@dataclass
class ChargeReport:
    """Per-region mean charge and count over realizations."""

    regions: RegionSequence
    n_realizations: int
    mean_charge: list
    se_charge: list
    mean_count: list
    se_count: list
    theory_charge: list

    def rows(self) -> list[dict]:
        out = []
        for i, r in enumerate(self.regions):
            out.append({
                "region_index": i, "x0": r.x0, "y0": r.y0, "x1": r.x1, "y1": r.y1,
                "area": r.area, "mean_charge": self.mean_charge[i], "se_charge": self.se_charge[i],
                "mean_count": self.mean_count[i], "se_count": self.se_count[i],
                "theory_charge": self.theory_charge[i],
            })
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_FIELDS)
            for row in self.rows():
                w.writerow([_fmt(row[k]) for k in REPORT_FIELDS])

    def to_dict(self) -> dict:
        rows = [{k: _json_num(v) for k, v in row.items()} for row in self.rows()]
        return {"n_realizations": self.n_realizations, "regions": rows}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.17g}"


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _mean_se(values):
    n = len(values)
    if n == 0:
        return 0.0, math.nan
    mean = math.fsum(values) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def empirical_curves(zero_sets: Sequence, regions: RegionSequence,
                     theory: Optional[Sequence[float]] = None) -> ChargeReport:
    """Mean net charge and zero count per region across realizations.

    Region membership uses closed rectangles; regions are nested so a zero
    counts in every region that contains it.
    """
    charges = [[] for _ in regions]
    counts = [[] for _ in regions]
    for zs in zero_sets:
        z = np.array([c.z for c in zs], dtype=complex)
        th = np.array([c.theta for c in zs], dtype=np.int64)
        for i, r in enumerate(regions):
            inside = r.contains(z) if len(z) else np.zeros(0, bool)
            charges[i].append(float(th[inside].sum()))
            counts[i].append(float(inside.sum()))
    mc, sc, mn, sn = [], [], [], []
    for i in range(len(regions)):
        m, s = _mean_se(charges[i])
        mc.append(m)
        sc.append(s)
        m, s = _mean_se(counts[i])
        mn.append(m)
        sn.append(s)
    th = list(theory) if theory is not None else [None] * len(regions)
    return ChargeReport(regions, len(zero_sets), mc, sc, mn, sn, th)


# --- matching ---------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceZero:
    """A known zero at an arbitrary (off-grid) position with its charge."""

    z: complex
    theta: Optional[int] = None


@dataclass
class MatchResult:
    pairs: list = field(default_factory=list)          # (ref_index, comp_index, distance)
    unmatched_reference: list = field(default_factory=list)
    unmatched_computed: list = field(default_factory=list)
    charge_agreement: list = field(default_factory=list)  # per pair: True/False/None
    threshold: float = 0.0

    @property
    def n_matched(self) -> int:
        return len(self.pairs)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "pairs": [{"reference": r, "computed": c, "distance": d} for r, c, d in self.pairs],
            "unmatched_reference": list(self.unmatched_reference),
            "unmatched_computed": list(self.unmatched_computed),
            "charge_agreement": list(self.charge_agreement),
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _positions(items):
    z = []
    th = []
    for it in items:
        if isinstance(it, (complex, float, int)):
            z.append(complex(it))
            th.append(None)
        else:
            z.append(complex(it.z))
            th.append(getattr(it, "theta", None))
    return np.array(z, dtype=complex), th


def linf(a, b):
    d = np.asarray(a) - np.asarray(b)
    return np.maximum(np.abs(d.real), np.abs(d.imag))


def match_zeros(reference, computed, threshold: float) -> MatchResult:
    """Injective matching with ``|r - c|_inf <= threshold``.

    Maximizes the number of pairs, then minimizes the total distance; exact
    ties prefer earlier references.
    """
    if not threshold > 0:
        raise InvalidArgument("threshold must be positive")
    rz, rth = _positions(reference)
    cz, cth = _positions(computed)
    res = MatchResult(threshold=threshold)
    if len(rz) == 0 or len(cz) == 0:
        res.unmatched_reference = list(range(len(rz)))
        res.unmatched_computed = list(range(len(cz)))
        return res
    dist = linf(rz[:, None], cz[None, :])
    feasible = dist <= threshold
    eps = 1e-9 * threshold / (len(rz) + 1)
    big = 10.0 * (threshold + 1.0) * (len(rz) + len(cz) + 1)
    cost = np.where(feasible, dist + eps * np.arange(len(rz))[:, None], big)
    rows, cols = linear_sum_assignment(cost)
    used_r, used_c = set(), set()
    for r, c in sorted(zip(rows.tolist(), cols.tolist())):
        if feasible[r, c]:
            res.pairs.append((r, c, float(dist[r, c])))
            used_r.add(r)
            used_c.add(c)
            a, b = rth[r], cth[c]
            res.charge_agreement.append(None if a is None or b is None else a == b)
    res.unmatched_reference = [i for i in range(len(rz)) if i not in used_r]
    res.unmatched_computed = [i for i in range(len(cz)) if i not in used_c]
    return res
