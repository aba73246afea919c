"""Monte-Carlo simulation of short-time Fourier transforms of noisy signals.

A signal ``f = f1 + sigma*f0`` (``f0`` complex white noise) is analysed with
a window ``g`` and mapped to the plane through

    F(x + iy) = exp(-i*x*y) * V_g f(x/sqrt(pi), -y/sqrt(pi)),

which makes the noise part a Gaussian field with twisted-stationary
covariance ``H(z - w) * exp(i*Im(z*conj(w)))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.signal import CZT

from .errors import InvalidArgument
from .field import ComplexField
from .grid import GridSpec, as_fraction

SQRT_PI = math.sqrt(math.pi)


class WindowKind(enum.Enum):
    GAUSSIAN = "gaussian"   # exp(-pi t^2): twisted kernel exp(-|z|^2/2)
    HERMITE0 = "hermite0"   # exp(-t^2/2)
    HERMITE1 = "hermite1"   # t exp(-t^2/2)
    CUSTOM = "custom"


@dataclass(frozen=True)
class WindowSpec:
    """Analysis window; ``samples`` is ``(times, values)`` for custom windows.

    Custom windows are linearly interpolated between samples and vanish
    outside the sampled range.
    """

    kind: WindowKind = WindowKind.HERMITE1
    samples: Optional[tuple] = None
    normalize_l2: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.kind is WindowKind.CUSTOM:
            if self.samples is None:
                raise InvalidArgument("custom window requires samples")
            t, v = self.samples
            t = tuple(float(x) for x in t)
            v = tuple(complex(x) for x in v)
            if len(t) != len(v) or len(t) < 2 or any(b <= a for a, b in zip(t, t[1:])):
                raise InvalidArgument("custom window needs >= 2 samples at increasing times")
            object.__setattr__(self, "samples", (t, v))

    def raw(self, t) -> np.ndarray:
        """Unnormalized window values."""
        t = np.asarray(t, dtype=float)
        if self.kind is WindowKind.GAUSSIAN:
            return np.exp(-np.pi * t * t) + 0j
        if self.kind is WindowKind.HERMITE0:
            return np.exp(-t * t / 2) + 0j
        if self.kind is WindowKind.HERMITE1:
            return t * np.exp(-t * t / 2) + 0j
        ts, vs = self.samples
        vs = np.asarray(vs)
        re = np.interp(t, ts, vs.real, left=0.0, right=0.0)
        im = np.interp(t, ts, vs.imag, left=0.0, right=0.0)
        return re + 1j * im

    def l2_norm(self) -> float:
        """Continuous L2 norm of :meth:`raw`."""
        if self.kind is WindowKind.GAUSSIAN:
            return 2 ** -0.25
        if self.kind is WindowKind.HERMITE0:
            return math.pi ** 0.25
        if self.kind is WindowKind.HERMITE1:
            return (math.sqrt(math.pi) / 2) ** 0.5
        ts, vs = self.samples
        # exact integral of |piecewise-linear|^2
        t = np.asarray(ts)
        v = np.asarray(vs)
        a, b, h = v[:-1], v[1:], np.diff(t)
        seg = h * (np.abs(a) ** 2 + np.abs(b) ** 2 + (a * np.conj(b)).real) / 3
        return float(np.sqrt(seg.sum()))

    def continuous(self) -> Callable:
        """Window normalized so that ``||g||_2 = 1`` (if ``normalize_l2``)."""
        c = 1.0 / self.l2_norm() if self.normalize_l2 else 1.0
        return lambda t: c * self.raw(t)


@dataclass(frozen=True)
class SimConfig:
    L: float
    delta: float
    sigma: float = 1.0
    signal: Optional[Callable] = None
    window: WindowSpec = field(default_factory=WindowSpec)
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgument("sigma must be nonnegative")
        GridSpec(self.L, self.delta)


def noise_stream(seed: int, realization: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, realization)``."""
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, int(realization) & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def complex_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard complex normals, ``E|xi|^2 = 1``."""
    z = rng.standard_normal(2 * n)
    return (z[:n] + 1j * z[n:]) / math.sqrt(2)


class Simulator:
    """Precomputed discretization of the STFT for one configuration.

    The field is simulated on ``Lambda_S`` with ``S = L + pad_steps*delta``.
    Time samples ``t = 0, ..., 2S/delta - 1`` sit at ``(t - S/delta)*delta``,
    covering one period ``[-S, S)`` of the periodized window.
    """

    def __init__(self, cfg: SimConfig, pad_steps: int = 0):
        self.cfg = cfg
        self.pad_steps = int(pad_steps)
        d = cfg.delta
        spec = GridSpec(cfg.L, d)
        S = float(as_fraction(cfg.L) + self.pad_steps * as_fraction(d))
        M = spec.n_steps + self.pad_steps
        N = 2 * M
        self.spec, self.M, self.N, self.S = spec, M, N, S
        t_idx = np.arange(N) - M
        self.times = t_idx * d
        k = np.arange(-M, M + 1)

        g = cfg.window.raw
        if cfg.window.normalize_l2:
            gnorm = 1.0 / math.sqrt(d * float(np.sum(np.abs(g(self.times)) ** 2)))
        else:
            gnorm = 1.0
        self.window_scale = gnorm
        s = d * (t_idx[None, :] - k[:, None] / SQRT_PI)
        s = np.mod(s + S, 2 * S) - S  # periodized window g^L
        self._window = np.conj(gnorm * g(s))  # (k, t)

        self.alpha = 2 * SQRT_PI * d * d
        self._czt = CZT(N, m=2 * M + 1, w=np.exp(1j * self.alpha), a=np.exp(1j * self.alpha * M))
        j = np.arange(-M, M + 1)
        self._post = np.exp(-1j * self.alpha * M * j[None, :]) * np.exp(-1j * d * d * np.outer(k, j))

        if cfg.signal is not None:
            self._signal = d * np.asarray(cfg.signal(self.times), dtype=np.complex128)
        else:
            self._signal = np.zeros(N, dtype=np.complex128)

    def coefficients(self, realization: int = 0) -> np.ndarray:
        """Time-domain coefficients ``delta*f1(t) + sigma*sqrt(delta)*xi_t``."""
        a = self._signal.copy()
        if self.cfg.sigma > 0:
            xi = complex_normals(noise_stream(self.cfg.seed, realization), self.N)
            a += self.cfg.sigma * math.sqrt(self.cfg.delta) * xi
        return a

    def values_from_coefficients(self, a: np.ndarray) -> np.ndarray:
        X = self._window * np.asarray(a)[None, :]
        C = self._czt(X, axis=-1) * self._post  # (k, j)
        return C.T

    def field(self, realization: int = 0) -> ComplexField:
        vals = self.values_from_coefficients(self.coefficients(realization))
        return ComplexField(self.spec, self.pad_steps, vals)


def simulate_field(cfg: SimConfig, realization: int = 0, pad_steps: int = 0) -> ComplexField:
    """Simulate one realization of the STFT field on ``Lambda_{L + pad}``."""
    return Simulator(cfg, pad_steps).field(realization)


# --- twisted kernels -------------------------------------------------------

class KernelForm(enum.Enum):
    GAUSSIAN_GEF = "GaussianGEF"
    NONE = "None"


@dataclass(frozen=True)
class TwistedKernel:
    closed_form: KernelForm
    evaluator: Callable

    def __call__(self, z):
        return self.evaluator(z)


def gaussian_kernel() -> TwistedKernel:
    """``H(z) = exp(-|z|^2/2)``, the kernel of the Gaussian window."""
    return TwistedKernel(KernelForm.GAUSSIAN_GEF,
                         lambda z: np.exp(-np.abs(np.asarray(z)) ** 2 / 2) + 0j)


def stft_value(f: Callable, g: Callable, u: float, v: float, epsabs: float = 1e-11) -> complex:
    """``V_g f(u, v)`` by adaptive quadrature on the real line."""
    def integrand(t):
        return complex(f(t) * np.conj(g(t - u)) * np.exp(-2j * np.pi * v * t))
    val, _ = integrate.quad(integrand, -np.inf, np.inf, complex_func=True,
                            epsabs=epsabs, epsrel=1e-10, limit=400)
    return val


def quadrature_kernel(window: WindowSpec) -> TwistedKernel:
    """Twisted kernel ``exp(-ixy) V_g g(x/sqrt(pi), -y/sqrt(pi))`` by quadrature."""
    g = window.continuous()
    gs = lambda t: complex(g(np.asarray(t))[()])

    @lru_cache(maxsize=4096)
    def _one(z: complex) -> complex:
        x, y = z.real, z.imag
        return np.exp(-1j * x * y) * stft_value(gs, gs, x / SQRT_PI, -y / SQRT_PI)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        return np.vectorize(lambda w: _one(complex(w)), otypes=[complex])(z)[()]

    return TwistedKernel(KernelForm.NONE, evaluate)


def kernel_for(window: WindowSpec) -> TwistedKernel:
    if window.kind is WindowKind.GAUSSIAN and window.normalize_l2:
        return gaussian_kernel()
    return quadrature_kernel(window)


def _grid_index(z: complex, delta: float) -> tuple[int, int]:
    k, j = round(z.real / delta), round(z.imag / delta)
    if not (math.isclose(k * delta, z.real, abs_tol=1e-12) and
            math.isclose(j * delta, z.imag, abs_tol=1e-12)):
        raise InvalidArgument(f"{z} is not a grid point for delta={delta}")
    return k, j


def empirical_covariance(cfg: SimConfig, pairs, n_realizations: int,
                         kernel: Optional[TwistedKernel] = None):
    """Monte-Carlo estimate of ``E[F(z) conj(F(w))]`` for each pair.

    Returns a list of ``(estimate, reference, |estimate - reference|)`` where
    the reference is ``H(z - w) exp(i Im(z conj(w)))``.
    """
    kernel = kernel or kernel_for(cfg.window)
    sim = Simulator(cfg)
    m = sim.M
    idx = []
    for z, w in pairs:
        kz, jz = _grid_index(complex(z), cfg.delta)
        kw, jw = _grid_index(complex(w), cfg.delta)
        idx.append((jz + m, kz + m, jw + m, kw + m))
    idx = np.array(idx)
    acc = np.zeros(len(pairs), dtype=complex)
    for r in range(n_realizations):
        v = sim.values_from_coefficients(sim.coefficients(r))
        acc += v[idx[:, 0], idx[:, 1]] * np.conj(v[idx[:, 2], idx[:, 3]])
    est = acc / n_realizations
    out = []
    for e, (z, w) in zip(est, pairs):
        z, w = complex(z), complex(w)
        ref = complex(kernel(z - w)) * np.exp(1j * (z * w.conjugate()).imag)
        out.append((complex(e), complex(ref), float(abs(e - ref))))
    return out


# --- deterministic part ----------------------------------------------------

def wirtinger(F: Callable, z, h: float):
    """Central-difference ``(dF, dbarF)``."""
    z = np.asarray(z, dtype=complex)
    fx = (F(z + h) - F(z - h)) / (2 * h)
    fy = (F(z + 1j * h) - F(z - 1j * h)) / (2 * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def twisted_derivatives(F1: Callable, z, h: float = 1e-4):
    """``(D1 F, D2 F) = (dF - conj(z)/2 F, dbarF + z/2 F)`` by central differences."""
    z = np.asarray(z, dtype=complex)
    d, dbar = wirtinger(F1, z, h)
    f = np.asarray(F1(z), dtype=complex)
    return d - np.conj(z) / 2 * f, dbar + z / 2 * f


class STFTField:
    """``F1(x+iy) = exp(-ixy) V_g f(x/sqrt(pi), -y/sqrt(pi))`` for a deterministic signal.

    Evaluated with the trapezoidal rule on ``[-T, T]``; for smooth, rapidly
    decaying signals and windows this is accurate to near machine precision.
    """

    def __init__(self, signal: Callable, window: WindowSpec, T: float = 12.0, dt: float = 1 / 32):
        self.g = window.continuous()
        n = int(round(2 * T / dt))
        self.t = np.linspace(-T, T, n + 1)
        self.dt = self.t[1] - self.t[0]
        self.f = np.asarray(signal(self.t), dtype=complex)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        w = np.full(self.t.shape, self.dt)
        w[0] = w[-1] = self.dt / 2
        fw = self.f * w
        for s in range(0, flat.size, 256):
            zz = flat[s:s + 256]
            u = zz.real / SQRT_PI
            v = -zz.imag / SQRT_PI
            kern = np.conj(self.g(self.t[None, :] - u[:, None])) * np.exp(
                -2j * np.pi * v[:, None] * self.t[None, :])
            out[s:s + 256] = np.exp(-1j * zz.real * zz.imag) * (kern @ fw)
        return out.reshape(z.shape)[()]
