import cmath
import math

import numpy as np
import pytest

from phasejumps.errors import InvalidArgument
from phasejumps.experiments import gaussian_signal
from oracles import CONFIGS, direct_sum_field
from phasejumps.gwhf import (SimConfig, Simulator, STFTField, WindowKind, WindowSpec,
                             empirical_covariance, gaussian_kernel, kernel_for,
                             quadrature_kernel, simulate_field, stft_value,
                             twisted_derivatives)

SQRT_PI = math.sqrt(math.pi)
GAUSS = WindowSpec(WindowKind.GAUSSIAN)


def g0(t):
    return 2 ** 0.25 * np.exp(-np.pi * np.asarray(t) ** 2)


@pytest.mark.parametrize("i", range(len(CONFIGS)))
def test_fast_transform_matches_direct_sum(i):
    L, d, sigma, sig, kind, pad = CONFIGS[i]
    cfg = SimConfig(L, d, sigma, gaussian_signal if sig else None, WindowSpec(WindowKind(kind)),
                    seed=1000 + i)
    fast = simulate_field(cfg, realization=i, pad_steps=pad).values
    ref = direct_sum_field(cfg, i, pad)
    assert np.max(np.abs(fast - ref)) <= 1e-10


def test_zero_input_gives_zero_field():
    F = simulate_field(SimConfig(1, 1 / 16, sigma=0.0))
    assert not np.any(F.values)


def test_gaussian_closed_form():
    F = simulate_field(SimConfig(4, 1 / 32, sigma=0.0, signal=g0, window=GAUSS))
    z = F.coordinates()
    inner = (np.abs(z.real) <= 2) & (np.abs(z.imag) <= 2)
    assert np.max(np.abs(F.values - np.exp(-np.abs(z) ** 2 / 2))[inner]) <= 1e-3


def test_determinism_and_realization_keying():
    cfg = SimConfig(1, 1 / 16, seed=7)
    a = simulate_field(cfg, 3).values
    b = Simulator(cfg).field(3).values
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, simulate_field(cfg, 4).values)
    assert not np.array_equal(a, simulate_field(SimConfig(1, 1 / 16, seed=8), 3).values)


def test_linearity_in_coefficients():
    sim = Simulator(SimConfig(0.5, 1 / 16, window=GAUSS))
    rng = np.random.default_rng(3)
    x = rng.normal(size=sim.N) + 1j * rng.normal(size=sim.N)
    y = rng.normal(size=sim.N) + 1j * rng.normal(size=sim.N)
    lhs = sim.values_from_coefficients(2 * x - 1j * y)
    rhs = 2 * sim.values_from_coefficients(x) - 1j * sim.values_from_coefficients(y)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_sim_config_validates():
    with pytest.raises(InvalidArgument):
        SimConfig(1, 0.3)
    with pytest.raises(InvalidArgument):
        SimConfig(1, 1 / 16, sigma=-1)


def test_gaussian_kernel_and_quadrature_agree():
    H = gaussian_kernel()
    assert H(1) == pytest.approx(math.exp(-0.5))
    Q = quadrature_kernel(GAUSS)
    for z in [0, 1, 1 + 1j, -0.5 + 2j]:
        assert abs(Q(z) - H(z)) < 1e-9
    assert kernel_for(GAUSS).closed_form.value == "GaussianGEF"


def test_hermite1_kernel_is_real():
    Q = kernel_for(WindowSpec(WindowKind.HERMITE1))
    assert Q(0) == pytest.approx(1, abs=1e-9)
    for z in [0.3 + 0.4j, 1 - 1j]:
        assert abs(complex(Q(z)).imag) < 1e-9


def test_stft_value_gaussian():
    g = lambda t: 2 ** 0.25 * np.exp(-np.pi * t * t)
    assert abs(stft_value(g, g, 0, 0) - 1) < 1e-9


def test_empirical_covariance_small():
    cfg = SimConfig(2, 1 / 16, window=GAUSS, seed=11)
    res = empirical_covariance(cfg, [(0, 0), (1, 0), (1 + 1j, 1)], 400)
    refs = [r for _, r, _ in res]
    assert refs[1] == pytest.approx(math.exp(-0.5))
    assert refs[2] == pytest.approx(math.exp(-0.5) * cmath.exp(1j))
    assert all(dev <= 5 / math.sqrt(400) for _, _, dev in res)


def test_twisted_derivatives_examples():
    c = 0.3 - 0.2j
    d1, d2 = twisted_derivatives(lambda z: c + 0 * z, 2)
    assert d1 == pytest.approx(-c) and d2 == pytest.approx(c)
    d1, d2 = twisted_derivatives(lambda z: np.exp(-np.abs(z) ** 2 / 2), 0)
    assert abs(d1) < 1e-8 and abs(d2) < 1e-8
    d1, d2 = twisted_derivatives(lambda z: z, 0)
    assert d1 == pytest.approx(1) and abs(d2) < 1e-12


def test_stft_field_matches_simulator():
    sig = gaussian_signal
    F1 = STFTField(sig, WindowSpec(WindowKind.HERMITE1))
    F = simulate_field(SimConfig(4, 1 / 32, sigma=0.0, signal=sig))
    z = F.coordinates()[::8, ::8]
    inner = (np.abs(z.real) <= 2.5) & (np.abs(z.imag) <= 2.5)
    assert np.max(np.abs(F1(z) - F.values[::8, ::8])[inner]) < 1e-3
