"""Zero detection from grid samples: PhaseJumps, PhaseJumps-coarse and MGN."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgument, NonClosingSum, NonClosingSumWarning, OutOfBounds
from .field import ComplexField, PhaseFactor, arg_diff_array, twisted_phase
from .grid import GridPoint, boundary_offsets


class Algorithm(enum.Enum):
    PJ = "PJ"
    PJC = "PJC"
    MGN = "MGN"


class Norm(enum.Enum):
    L2 = "L2"
    LINF = "Linf"


@dataclass(frozen=True)
class ChargedZero:
    """A detected zero at a grid point with its winding number."""

    position: GridPoint
    theta: int
    chi: float
    algorithm: Algorithm

    @property
    def z(self) -> complex:
        return self.position.z


@dataclass(frozen=True)
class DetectionConfig:
    factor: PhaseFactor = PhaseFactor.TWISTED
    chi_max: float = 0.9
    pj_box_steps: int = 2
    pj_sep_steps: int = 6
    pjc_sep_multiplier: int = 5
    theta_round_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.chi_max <= 1:
            raise InvalidArgument("chi_max must lie in (0, 1]")
        if self.pj_box_steps < 1 or self.pj_sep_steps < 1 or self.pjc_sep_multiplier < 1:
            raise InvalidArgument("box sizes and separations must be positive")
        object.__setattr__(self, "factor", PhaseFactor.parse(self.factor))


# --- winding sums -------------------------------------------------------------

def _shifted_boundary(F: ComplexField, ks, js, offsets, factor):
    """Yield ``F_lam(mu_i)`` for each boundary offset, vectorized over ``lam``."""
    for a, b in offsets:
        v = F.take(ks + a, js + b)
        if factor is PhaseFactor.TWISTED:
            v = v * np.exp(1j * twisted_phase(a, b, ks, js, F.delta))
        yield v


def winding_arrays(F: ComplexField, ks, js, half_side_steps: int,
                   factor: PhaseFactor = PhaseFactor.TWISTED):
    """Raw winding ``theta_raw``, ``chi`` and a zero-sample mask for many centers.

    Memory stays at a few arrays of the size of ``ks`` regardless of the box.
    """
    ks = np.asarray(ks, dtype=np.int64)
    js = np.asarray(js, dtype=np.int64)
    offsets = boundary_offsets(half_side_steps)
    total = np.zeros(ks.shape)
    chi = np.zeros(ks.shape)
    has_zero = np.zeros(ks.shape, dtype=bool)
    first = prev = None
    for v in _shifted_boundary(F, ks, js, offsets, factor):
        has_zero |= v == 0
        if prev is None:
            first = v
        else:
            t = arg_diff_array(v, prev)
            total += t
            np.maximum(chi, np.abs(t), out=chi)
        prev = v
    # closing step mu_0 := mu_N
    t = arg_diff_array(first, prev)
    total += t
    np.maximum(chi, np.abs(t), out=chi)
    return total / (2 * math.pi), chi / math.pi, has_zero


def winding_raw(F: ComplexField, lam: GridPoint, half_side_steps: int,
                factor: PhaseFactor = PhaseFactor.TWISTED) -> tuple[float, float]:
    """Unrounded ``(theta_raw, chi)`` for a single center."""
    raw, chi, _ = winding_arrays(F, [lam.k], [lam.j], half_side_steps, factor)
    return float(raw[0]), float(chi[0])


def winding_sum(F: ComplexField, lam: GridPoint, half_side_steps: int,
                factor: PhaseFactor = PhaseFactor.TWISTED,
                round_tol: float = 1e-6) -> tuple[int, float]:
    """Discrete winding number of ``F_lam`` around the box of half-side ``h*delta``.

    Returns ``(theta, chi)``.  If any boundary sample vanishes the result is
    ``(0, 1.0)``.

    Raises
    ------
    NonClosingSum
        If the summed argument steps are not within ``round_tol`` of a multiple
        of ``2*pi``.
    """
    raw, chi, zero = winding_arrays(F, [lam.k], [lam.j], half_side_steps, factor)
    if zero[0]:
        return 0, 1.0
    theta = round(float(raw[0]))
    if abs(raw[0] - theta) > round_tol:
        raise NonClosingSum(f"winding sum {raw[0]!r} at {lam} is not an integer")
    return int(theta), float(chi[0])


def _rounded_theta(raw, zero, tol, where):
    theta = np.rint(raw)
    bad = (np.abs(raw - theta) > tol) & ~zero
    if bad.any():
        warnings.warn(f"{where}: dropped {int(bad.sum())} point(s) with non-closing winding sum",
                      NonClosingSumWarning, stacklevel=3)
    theta[zero | bad] = 0
    return theta.astype(np.int64), bad


def _center_grid(n: int, step: int = 1):
    idx = np.arange(-n, n + 1, step, dtype=np.int64)
    ks, js = np.meshgrid(idx, idx)  # row-major: j outer, k inner
    return ks.ravel(), js.ravel()


# --- sieve -------------------------------------------------------------------

def sieve(candidates, min_sep: float, norm: Norm = Norm.L2, per_charge: bool = True):
    """Greedy maximal separated subset in row-major scan order.

    A candidate is accepted unless it lies strictly closer than ``min_sep`` to
    an already accepted point (of the same ``theta`` when ``per_charge``).
    """
    cands = sorted(candidates, key=lambda c: (c.position.j, c.position.k))
    if not cands:
        return []
    norm = Norm(norm)
    deltas = {c.position.delta for c in cands}
    if len(deltas) != 1:
        raise InvalidArgument("sieve candidates must share one grid spacing")
    delta = deltas.pop()
    # thresholds in index units; an integral ratio makes every comparison exact
    ratio = min_sep / delta
    thr = round(ratio) if math.isclose(ratio, round(ratio), rel_tol=1e-9) else ratio
    thr2 = thr * thr
    cell = max(math.ceil(thr), 1)
    buckets: dict = {}
    accepted = []
    for c in cands:
        k, j = c.position.k, c.position.j
        cls = c.theta if per_charge else None
        ck, cj = k // cell, j // cell
        ok = True
        for dk in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for (k2, j2) in buckets.get((cls, ck + dk, cj + dj), ()):
                    if norm is Norm.L2:
                        close = (k - k2) ** 2 + (j - j2) ** 2 < thr2
                    else:
                        close = max(abs(k - k2), abs(j - j2)) < thr
                    if close:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            accepted.append(c)
            buckets.setdefault((cls, ck, cj), []).append((k, j))
    return accepted


# --- PhaseJumps ---------------------------------------------------------------

def phasejumps(F: ComplexField, cfg: DetectionConfig = DetectionConfig()) -> list[ChargedZero]:
    """PhaseJumps: winding test on boxes of half-side ``pj_box_steps*delta``.

    Keeps centers with nonzero winding and ``chi < chi_max`` and sieves them to
    a per-charge Euclidean separation of ``pj_sep_steps*delta``.
    """
    h = cfg.pj_box_steps
    if F.pad_steps < h:
        raise OutOfBounds(f"PhaseJumps needs pad_steps >= {h}, field has {F.pad_steps}")
    ks, js = _center_grid(F.spec.n_steps)
    raw, chi, zero = winding_arrays(F, ks, js, h, cfg.factor)
    theta, _ = _rounded_theta(raw, zero, cfg.theta_round_tol, "phasejumps")
    keep = np.nonzero((theta != 0) & (chi < cfg.chi_max))[0]
    d = F.delta
    cands = [ChargedZero(GridPoint(int(ks[i]), int(js[i]), d), int(theta[i]), float(chi[i]),
                         Algorithm.PJ) for i in keep]
    return sieve(cands, cfg.pj_sep_steps * d, Norm.L2, per_charge=True)


# --- PhaseJumps-coarse ---------------------------------------------------------

def _adjacent_pairs(h: int):
    off = boundary_offsets(h)
    n = len(off)
    pairs = []
    for i in range(n):
        for s in (1, 2):
            i2 = (i + s) % n
            if max(abs(off[i] - off[i2])) == 1:
                pairs.append((i, i2))
    return pairs


def _step1_arrays(F: ComplexField, ks, js, h: int, factor: PhaseFactor):
    offs = boundary_offsets(h)
    vals = list(_shifted_boundary(F, ks, js, offs, factor))
    ok = np.ones(np.shape(ks), dtype=bool)
    for i, i2 in _adjacent_pairs(h):
        a, b = vals[i], vals[i2]
        diff2 = 2 * np.abs(a - b)
        ok &= (np.abs(a) >= diff2) & (np.abs(b) >= diff2)
    return ok


def pjc_step1_test(F: ComplexField, lam: GridPoint, spec=None,
                   factor: PhaseFactor = PhaseFactor.TWISTED) -> bool:
    """Oscillation test ``|F_lam(mu)| >= 2|F_lam(mu) - F_lam(mu')|``.

    Checked for all pairs of adjacent fine-grid points on the boundary of the
    box of half-side ``delta_dstar`` around ``lam``.
    """
    spec = spec or F.spec
    return bool(_step1_arrays(F, np.array([lam.k]), np.array([lam.j]), spec.dstar_steps,
                              PhaseFactor.parse(factor))[0])


def phasejumps_coarse(F: ComplexField, cfg: DetectionConfig = DetectionConfig()) -> list[ChargedZero]:
    """PhaseJumps-coarse on the coarse grid of spacing ``delta_star``."""
    spec = F.spec
    spec.coarse_steps()
    s, h = spec.star_steps, spec.dstar_steps
    if F.pad_steps < h:
        raise OutOfBounds(f"PhaseJumps-coarse needs pad_steps >= {h}, field has {F.pad_steps}")
    ks, js = _center_grid(spec.n_steps, s)
    sel = _step1_arrays(F, ks, js, h, cfg.factor)
    ks, js = ks[sel], js[sel]
    raw, chi, zero = winding_arrays(F, ks, js, h, cfg.factor)
    theta, _ = _rounded_theta(raw, zero, cfg.theta_round_tol, "phasejumps_coarse")
    chi[zero] = 1.0
    keep = np.nonzero(theta != 0)[0]
    d = F.delta
    cands = [ChargedZero(GridPoint(int(ks[i]), int(js[i]), d), int(theta[i]), float(chi[i]),
                         Algorithm.PJC) for i in keep]
    return sieve(cands, cfg.pjc_sep_multiplier * h * d, Norm.LINF, per_charge=False)


# --- Minimal Grid Neighbors ------------------------------------------------------

def mgn(F: ComplexField, weighted: bool = True) -> list[ChargedZero]:
    """Grid points whose (weighted) magnitude is minimal among the 8 neighbors.

    The weighted variant compares ``exp(-|lam|^2/2)|F(lam)|``.  Outputs carry
    ``theta = 0``.
    """
    if F.pad_steps < 1:
        raise OutOfBounds("MGN needs pad_steps >= 1")
    with np.errstate(divide="ignore"):
        w = np.log(np.abs(F.values))
    if weighted:
        w = w - np.abs(F.coordinates()) ** 2 / 2
    m, n = F.half_steps, F.spec.n_steps
    lo, hi = m - n, m + n + 1
    center = w[lo:hi, lo:hi]
    ok = np.ones(center.shape, dtype=bool)
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            if dj or dk:
                ok &= center <= w[lo + dj:hi + dj, lo + dk:hi + dk]
    jj, kk = np.nonzero(ok)
    d = F.delta
    return [ChargedZero(GridPoint(int(k - n), int(j - n), d), 0, 0.0, Algorithm.MGN)
            for j, k in zip(jj, kk)]


def detect(F: ComplexField, algorithm, cfg: DetectionConfig = DetectionConfig(),
           weighted: bool = True) -> list[ChargedZero]:
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.PJ:
        return phasejumps(F, cfg)
    if algorithm is Algorithm.PJC:
        return phasejumps_coarse(F, cfg)
    return mgn(F, weighted)


# --- PJZ1 text format -------------------------------------------------------------

@dataclass
class ZeroSet:
    algorithm: Algorithm
    L: float
    delta: float
    zeros: list = field(default_factory=list)


def write_zeros(zeros, path, algorithm, L: float, delta: float) -> None:
    """Write detections as PJZ1: header, then ``x y theta chi`` per line."""
    algorithm = Algorithm(algorithm)
    lines = [f"PJZ1 {algorithm.value} {L:.17g} {delta:.17g}"]
    for c in zeros:
        lines.append(f"{c.position.x:.17g} {c.position.y:.17g} {c.theta:d} {c.chi:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_zeros(path) -> ZeroSet:
    """Read a PJZ1 file back into :class:`ChargedZero` objects."""
    path = str(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty file", 1, 1, path)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "PJZ1":
        raise FormatError("header must read 'PJZ1 algorithm L delta'", 1, 1, path)
    try:
        alg = Algorithm(head[1])
    except ValueError:
        raise FormatError(f"unknown algorithm {head[1]!r}", 1, lines[0].index(head[1]) + 1,
                          path) from None
    try:
        L, delta = float(head[2]), float(head[3])
    except ValueError:
        raise FormatError("L and delta must be numbers", 1, 1, path) from None
    out = ZeroSet(alg, L, delta)
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split()
        if len(toks) != 4:
            raise FormatError(f"expected 4 fields, found {len(toks)}", n, 1, path)
        try:
            x, y, theta, chi = float(toks[0]), float(toks[1]), int(toks[2]), float(toks[3])
        except ValueError as exc:
            col = 1
            for t in toks:
                try:
                    float(t)
                except ValueError:
                    col = line.index(t) + 1
                    break
            else:
                col = line.index(toks[2]) + 1
            raise FormatError(f"bad value ({exc})", n, col, path) from None
        k, j = round(x / delta), round(y / delta)
        out.zeros.append(ChargedZero(GridPoint(k, j, delta), theta, chi, alg))
    return out
