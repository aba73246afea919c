"""Sampled complex fields and phase-stabilized shifts."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgument, OutOfBounds
from .grid import GridPoint, GridSpec


class PhaseFactor(enum.Enum):
    """Phase-stabilizing factor ``nu(z, w)`` used to center a field at ``w``."""

    IDENTITY = "identity"
    TWISTED = "twisted"

    @classmethod
    def parse(cls, value) -> "PhaseFactor":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown phase factor {value!r}") from None


def factor(kind: PhaseFactor, z: complex, w: complex) -> complex:
    """Evaluate ``nu(z, w)``: ``1`` or ``exp(-i*Im(z*conj(w)))``."""
    if kind is PhaseFactor.IDENTITY:
        return 1.0 + 0.0j
    z, w = complex(z), complex(w)
    im = z.imag * w.real - z.real * w.imag
    return complex(math.cos(im), -math.sin(im))


def twisted_phase(a, b, k, j, delta):
    """Phase of ``nu(mu, lam)`` for ``mu = delta*(a+ib)``, ``lam = delta*(k+ij)``.

    The integer product is formed first so the only rounding is the final
    multiplication by ``delta**2``.
    """
    return -(delta * delta) * (np.multiply(b, k) - np.multiply(a, j))


def arg_diff(a: complex, b: complex) -> float:
    """Principal ``arg(a*conj(b))`` in ``(-pi, pi]`` with ``arg(0) = 0``."""
    p = complex(a) * complex(b).conjugate()
    if p == 0:
        return 0.0
    t = math.atan2(p.imag, p.real)
    return math.pi if t == -math.pi else t


def arg_diff_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized :func:`arg_diff`."""
    p = a * np.conj(b)
    t = np.angle(p)
    t[t == -np.pi] = np.pi
    t[p == 0] = 0.0
    return t


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Samples of ``F`` on ``Lambda_{L + pad_steps*delta}``.

    ``values[j + m, k + m]`` holds ``F(delta*k + i*delta*j)`` where
    ``m = L/delta + pad_steps``; rows run along y from the most negative value.
    """

    spec: GridSpec
    pad_steps: int
    values: np.ndarray

    def __post_init__(self):
        if self.pad_steps < 0:
            raise InvalidArgument("pad_steps must be nonnegative")
        v = np.array(self.values, dtype=np.complex128, copy=True, order="C")
        size = 2 * self.half_steps + 1
        if v.shape != (size, size):
            raise InvalidArgument(f"expected a {size}x{size} array, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("field samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def delta(self) -> float:
        return self.spec.delta

    @property
    def half_steps(self) -> int:
        """Index radius of the stored array, ``L/delta + pad_steps``."""
        return self.spec.n_steps + self.pad_steps

    @classmethod
    def from_function(cls, spec: GridSpec, pad_steps: int, func) -> "ComplexField":
        """Sample a vectorized callable ``func(z)`` on the padded grid."""
        m = spec.n_steps + pad_steps
        idx = np.arange(-m, m + 1)
        z = spec.delta * idx[None, :] + 1j * spec.delta * idx[:, None]
        vals = np.broadcast_to(np.asarray(func(z), dtype=np.complex128), z.shape)
        return cls(spec, pad_steps, vals)

    def coordinates(self) -> np.ndarray:
        m = self.half_steps
        idx = np.arange(-m, m + 1)
        return self.delta * idx[None, :] + 1j * self.delta * idx[:, None]

    def sample(self, k: int, j: int) -> complex:
        m = self.half_steps
        if abs(k) > m or abs(j) > m:
            raise OutOfBounds(
                f"sample ({k}, {j}) at {complex(self.delta * k, self.delta * j)} "
                f"outside padded field of index radius {m}")
        return complex(self.values[j + m, k + m])

    def take(self, k, j) -> np.ndarray:
        """Vectorized sample lookup by integer index arrays."""
        k = np.asarray(k)
        j = np.asarray(j)
        m = self.half_steps
        if k.size and (np.abs(k).max() > m or np.abs(j).max() > m):
            bad = np.argmax((np.abs(k) > m) | (np.abs(j) > m))
            raise OutOfBounds(
                f"sample ({int(k.flat[bad])}, {int(j.flat[bad])}) outside padded "
                f"field of index radius {m}")
        return self.values[j + m, k + m]

    def crop(self, L, pad_steps: int) -> "ComplexField":
        """Restrict to ``Lambda_{L + pad_steps*delta}`` (same spacing)."""
        spec = GridSpec(L, self.delta)
        m_new = spec.n_steps + pad_steps
        if m_new > self.half_steps:
            raise OutOfBounds(f"crop radius {m_new} exceeds stored radius {self.half_steps}")
        c = self.half_steps
        sl = slice(c - m_new, c + m_new + 1)
        return ComplexField(spec, pad_steps, self.values[sl, sl])

    def subsample(self, factor: int) -> "ComplexField":
        """Keep every ``factor``-th sample, giving spacing ``factor*delta``.

        Samples beyond the largest whole coarse ring are discarded; the result
        keeps as much padding as fits.
        """
        if factor < 1:
            raise InvalidArgument("subsample factor must be >= 1")
        n, m = self.spec.n_steps, self.half_steps
        if n % factor:
            raise InvalidArgument("L/delta must be divisible by the subsample factor")
        new_m = m // factor
        c = m
        sl = slice(c - new_m * factor, c + new_m * factor + 1, factor)
        spec = GridSpec(self.spec.L, self.delta * factor)
        return ComplexField(spec, new_m - n // factor, self.values[sl, sl])


def shifted_sample(F: ComplexField, lam: GridPoint, mu: GridPoint,
                   kind: PhaseFactor = PhaseFactor.TWISTED) -> complex:
    """``nu(mu, lam) * F(lam + mu)`` from integer indices."""
    v = F.sample(lam.k + mu.k, lam.j + mu.j)
    if kind is PhaseFactor.IDENTITY:
        return v
    ph = float(twisted_phase(mu.k, mu.j, lam.k, lam.j, F.delta))
    return v * complex(math.cos(ph), math.sin(ph))


def fd_jacobian_sign(F, z: complex, h: float) -> int:
    """Sign of ``|dF|^2 - |dbar F|^2`` from central differences.

    Values with magnitude below ``10*h**2`` are reported as 0.
    """
    z = complex(z)
    fx = (F(z + h) - F(z - h)) / (2 * h)
    fy = (F(z + 1j * h) - F(z - 1j * h)) / (2 * h)
    d = 0.5 * (fx - 1j * fy)
    dbar = 0.5 * (fx + 1j * fy)
    det = abs(d) ** 2 - abs(dbar) ** 2
    if abs(det) < 10 * h * h:
        return 0
    return 1 if det > 0 else -1


# --- PJF1 text format -------------------------------------------------------

def write_field(F: ComplexField, path) -> None:
    """Write ``F`` as a PJF1 text file (17 significant digits, row-major)."""
    rows, cols = F.values.shape
    lines = ["PJF1", f"{F.spec.L:.17g} {F.delta:.17g} {F.pad_steps}", f"{rows} {cols}"]
    flat = F.values.ravel()
    lines.extend(f"{v.real:.17g} {v.imag:.17g}" for v in flat.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_float(tok, line, col, path):
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"expected a number, got {tok!r}", line, col, path) from None


def _parse_int(tok, line, col, path):
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"expected an integer, got {tok!r}", line, col, path) from None


def _fields(text_line, expected, lineno, path):
    toks = text_line.split()
    if len(toks) != expected:
        raise FormatError(f"expected {expected} fields, found {len(toks)}", lineno, 1, path)
    cols, pos = [], 0
    for t in toks:
        pos = text_line.index(t, pos)
        cols.append(pos + 1)
        pos += len(t)
    return toks, cols


def read_field(path) -> ComplexField:
    """Read a PJF1 file; malformed input raises :class:`FormatError`."""
    path = str(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "PJF1":
        raise FormatError("missing PJF1 magic", 1, 1, path)
    if len(lines) < 3:
        raise FormatError("truncated header", len(lines) + 1, 1, path)
    toks, cols = _fields(lines[1], 3, 2, path)
    L = _parse_float(toks[0], 2, cols[0], path)
    delta = _parse_float(toks[1], 2, cols[1], path)
    pad = _parse_int(toks[2], 2, cols[2], path)
    toks, cols = _fields(lines[2], 2, 3, path)
    nrows = _parse_int(toks[0], 3, cols[0], path)
    ncols = _parse_int(toks[1], 3, cols[1], path)
    body = lines[3:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != nrows * ncols:
        raise FormatError(f"expected {nrows * ncols} sample lines, found {len(body)}",
                          4 + min(len(body), nrows * ncols), 1, path)
    vals = np.empty(nrows * ncols, dtype=np.complex128)
    for i, line in enumerate(body):
        toks, cols = _fields(line, 2, i + 4, path)
        vals[i] = complex(_parse_float(toks[0], i + 4, cols[0], path),
                          _parse_float(toks[1], i + 4, cols[1], path))
    try:
        return ComplexField(GridSpec(L, delta), pad, vals.reshape(nrows, ncols))
    except InvalidArgument as exc:
        raise FormatError(str(exc), 2, 1, path) from None
