"""Acceptance criteria 1-9, each reported as one PASS/FAIL line.

Criteria 5-8 run full Monte-Carlo experiments and take several minutes in
total; they are marked ``slow`` (deselect with ``-m "not slow"``).
"""
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import CONFIGS, direct_sum_field, exhaustive_match
from phasejumps.cli import DEFAULT_PAIRS, write_experiment
from phasejumps.detect import Algorithm, ChargedZero, Norm, phasejumps, phasejumps_coarse, sieve
from phasejumps.detect import winding_raw, winding_sum
from phasejumps.experiments import charge_equilibrium, exp1, exp2, exp3, gaussian_signal
from phasejumps.field import ComplexField, PhaseFactor
from phasejumps.grid import GridPoint, GridSpec, coarse_spacings
from phasejumps.gwhf import SimConfig, WindowKind, WindowSpec, empirical_covariance, simulate_field
from phasejumps.stats import ReferenceZero, match_zeros

GAUSS = WindowSpec(WindowKind.GAUSSIAN)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_1_winding_exactness():
    t0 = time.perf_counter()
    d = 1 / 64
    F = lambda f: ComplexField.from_function(GridSpec(1, d), 2, f)
    lam = GridPoint(0, 0, d)
    cases = [(lambda z: z, 1), (np.conj, -1), (lambda z: z * z, 2), (lambda z: 1 + 0 * z, 0)]
    worst = 0.0
    ok = True
    for f, want in cases:
        field = F(f)
        theta, _ = winding_sum(field, lam, 2)
        raw, _ = winding_raw(field, lam, 2)
        worst = max(worst, abs(raw - want))
        ok &= theta == want and abs(raw - want) < 1e-9
    dt = time.perf_counter() - t0
    ok &= dt < 1
    assert report(1, ok, f"max |theta_raw - theta| = {worst:.2e}, {dt:.3f} s")


def test_criterion_2_coarse_spacings():
    got = coarse_spacings(1 / 100)
    assert report(2, got == (0.06, 0.10), f"coarse_spacings(1/100) = {got}")


def _synthetic_pairs(n=10, seed=20240601):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, bbar = rng.uniform(-1.5, 1.5, 2) + 1j * rng.uniform(-1.5, 1.5, 2)
        if abs(a - bbar) >= 0.5:
            out.append((complex(a), complex(bbar)))
    return out


def test_criterion_3_synthetic_detection():
    d = 2.0 ** -6
    thr = 2 * math.sqrt(d)
    spec = GridSpec(2, d)
    failures, slowest = [], 0.0
    for i, (a, bbar) in enumerate(_synthetic_pairs()):
        b = bbar.conjugate()
        f = lambda z: (z - a) * (np.conj(z) - b)
        ref = [ReferenceZero(a, 1), ReferenceZero(bbar, -1)]
        for name, pad, algo in [("PJ", 2, phasejumps), ("PJC", spec.dstar_steps, phasejumps_coarse)]:
            t0 = time.perf_counter()
            zs = algo(ComplexField.from_function(spec, pad, f))
            slowest = max(slowest, time.perf_counter() - t0)
            m = match_zeros(ref, zs, thr)
            if m.unmatched_reference or m.unmatched_computed or not all(m.charge_agreement):
                failures.append(f"{name}#{i}")
    ok = not failures and slowest < 10
    assert report(3, ok, f"20 runs, failures={failures or 'none'}, slowest {slowest:.2f} s")


def test_criterion_4_simulator_fidelity():
    t0 = time.perf_counter()
    g0 = lambda t: 2 ** 0.25 * np.exp(-np.pi * np.asarray(t) ** 2)
    F = simulate_field(SimConfig(4, 1 / 32, sigma=0.0, signal=g0, window=GAUSS))
    z = F.coordinates()
    inner = (np.abs(z.real) <= 2) & (np.abs(z.imag) <= 2)
    closed = float(np.max(np.abs(F.values - np.exp(-np.abs(z) ** 2 / 2))[inner]))
    n = 2000
    res = empirical_covariance(SimConfig(4, 1 / 32, window=GAUSS, seed=0), DEFAULT_PAIRS, n)
    worst = max(dev for _, _, dev in res)
    dt = time.perf_counter() - t0
    ok = closed <= 1e-3 and worst <= 0.112 and dt < 300
    assert report(4, ok, f"closed-form dev {closed:.2e}, covariance max dev {worst:.4f} "
                         f"(bound 0.112), {dt:.1f} s")


@pytest.mark.slow
def test_criterion_5_charge_equilibrium():
    t0 = time.perf_counter()
    r = charge_equilibrium(100)
    dt = time.perf_counter() - t0
    ok = r["passed"] and dt < 900
    assert report(5, ok, f"mean net charge {r['mean_charge']:.3f} vs {r['target']:.3f} "
                         f"(rel err {r['relative_error']:.3f}, tol 0.2), {dt:.0f} s")


@pytest.mark.slow
def test_criterion_6_signal_experiment():
    r = exp2(100)
    ok = r["passed"]
    assert report(6, ok, f"max |empirical - expected| {r['max_deviation']:.3f} (tol 0.35); "
                         f"innermost mean charge {r['inner_mean_charge']:.3f} "
                         f"(expected {r['inner_theory']:.3f}, required <= -0.7)")


@pytest.mark.slow
def test_criterion_7_scale_consistency():
    r = exp1(20)
    ok = r["checks"]["pj_scale_consistency"] and r["checks"]["pjc_vs_pj_fine"]
    assert report(7, ok, f"PJ 2^-7 vs 2^-5 match {r['pj_match_rate']:.3f} (>= 0.90); "
                         f"PJC vs PJ at 2^-7 match {r['pjc_match_rate']:.3f} (>= 0.85); "
                         f"{r['reference_zeros']} reference zeros")


@pytest.mark.slow
def test_criterion_8_twisted_vs_identity():
    r = exp3(5)
    rel = r["relative_error"]
    assert report(8, r["passed"], f"twisted annulus density {r['charge_density']['twisted']:.4f} "
                                  f"vs 1/pi (rel err {rel['twisted']:.3f}, tol 0.25); identity "
                                  f"rel err {rel['identity']:.3f} (recorded)")


def _sieve_ok(cands, sep, norm):
    out = sieve(cands, sep, norm)
    dist = (lambda p, q: math.hypot(p.k - q.k, p.j - q.j)) if norm is Norm.L2 else \
        (lambda p, q: max(abs(p.k - q.k), abs(p.j - q.j)))
    for i, a in enumerate(out):
        for b in out[i + 1:]:
            if a.theta == b.theta and dist(a.position, b.position) < sep:
                return False
    kept = {c.position for c in out}
    return all(any(a.theta == c.theta and dist(a.position, c.position) < sep for a in out)
               for c in cands if c.position not in kept)


def test_criterion_9_property_suites(tmp_path):
    rng = np.random.default_rng(9)
    notes = []
    # sieve maximality
    sieve_ok = True
    for _ in range(200):
        n = int(rng.integers(0, 60))
        idx = rng.choice(41 * 41, size=n, replace=False)
        cands = [ChargedZero(GridPoint(int(i % 41) - 20, int(i // 41) - 20, 1.0),
                             int(rng.choice([-1, 1])), 0.0, Algorithm.PJ) for i in idx]
        sieve_ok &= _sieve_ok(cands, float(rng.integers(1, 9)), Norm(rng.choice(["L2", "Linf"])))
    notes.append(f"sieve {'ok' if sieve_ok else 'BAD'}")
    # matching vs exhaustive search
    match_ok = True
    for _ in range(300):
        nr, nc = rng.integers(0, 9, size=2)
        rz = tuple(complex(x, y) for x, y in np.round(rng.uniform(-1, 1, (nr, 2)), 3))
        cz = tuple(complex(x, y) for x, y in np.round(rng.uniform(-1, 1, (nc, 2)), 3))
        thr = float(rng.choice([0.05, 0.2, 0.5, 1.5]))
        res = match_zeros(rz, cz, thr)
        cnt, tot = exhaustive_match(rz, cz, thr)
        match_ok &= len(res.pairs) == cnt and abs(sum(p[2] for p in res.pairs) - tot) < 1e-7
    notes.append(f"matching {'ok' if match_ok else 'BAD'}")
    # fast transform vs direct sum
    worst = 0.0
    for i, (L, d, sigma, sig, kind, pad) in enumerate(CONFIGS):
        cfg = SimConfig(L, d, sigma, gaussian_signal if sig else None,
                        WindowSpec(WindowKind(kind)), seed=1000 + i)
        fast = simulate_field(cfg, realization=i, pad_steps=pad).values
        worst = max(worst, float(np.max(np.abs(fast - direct_sum_field(cfg, i, pad)))))
    notes.append(f"simulator max dev {worst:.1e}")
    # byte-identical reports for repeated seeds
    blobs = []
    for run in ("a", "b"):
        r = exp3(1, L=5.0, delta=1 / 16, seed=3)
        out = tmp_path / run
        write_experiment(r, out)
        blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = blobs[0] == blobs[1]
    notes.append(f"determinism {'ok' if same else 'BAD'}")
    ok = sieve_ok and match_ok and worst <= 1e-10 and same
    assert report(9, ok, ", ".join(notes))
