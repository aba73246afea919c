import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import exhaustive_match
from phasejumps.detect import Algorithm, ChargedZero
from phasejumps.errors import InvalidArgument
from phasejumps.grid import GridPoint
from phasejumps.stats import (Rect, ReferenceZero, RegionSequence, empirical_curves,
                              expected_charge, expected_charges, first_intensity_charge, linf,
                              match_zeros, spiral_regions)

INV_PI = 1 / math.pi


def const(c):
    return lambda z: np.full(np.shape(z), c, dtype=complex)


@pytest.mark.parametrize("z", [0, 1 + 2j, -3.5j])
@pytest.mark.parametrize("sigma, c1, c2", [(1, 0, 0), (0.3, 0.2j, -1), (5, 1 + 1j, 0.5)])
def test_first_intensity_zero_mean(z, sigma, c1, c2):
    assert abs(first_intensity_charge(const(0), sigma, c1, c2, z) - INV_PI) < 1e-12


def test_first_intensity_constant_signal():
    rho = first_intensity_charge(const(1), 1.0, 0, 0, 0)
    assert rho == pytest.approx(math.exp(-1) / math.pi, abs=1e-9)
    assert rho == pytest.approx(0.117099, abs=1e-6)


def test_first_intensity_large_sigma_limit():
    F1 = lambda z: np.sin(np.asarray(z).real) + 0.5j
    assert first_intensity_charge(F1, 1e4, 0, 0, 0.7 - 0.2j) == pytest.approx(INV_PI, rel=1e-6)


def test_first_intensity_rejects_sigma():
    with pytest.raises(InvalidArgument):
        first_intensity_charge(const(0), 0, 0, 0, 0)


def test_expected_charge_examples():
    rho = lambda z: np.full(np.shape(z), INV_PI)
    assert expected_charge(Rect(-2, -2, 2, 2), rho) == pytest.approx(16 / math.pi, rel=1e-9)
    assert expected_charge(Rect(0, 0, 1, 2), rho) == pytest.approx(2 / math.pi, rel=1e-9)
    assert expected_charge(Rect(-1, -1, 1, 1), lambda z: np.zeros(np.shape(z))) == 0


def test_expected_charges_incremental_matches_direct():
    rho = lambda z: np.exp(-np.abs(z) ** 2) * (1 + np.asarray(z).real)
    regs = spiral_regions(0.5, 7)
    inc = expected_charges(regs, rho)
    direct = [expected_charge(r, rho) for r in regs]
    np.testing.assert_allclose(inc, direct, rtol=1e-6, atol=1e-10)


def test_spiral_examples():
    assert list(spiral_regions(1, 1)) == [Rect(-0.5, -0.5, 0.5, 0.5)]
    assert spiral_regions(1, 2)[1] == Rect(-0.5, -0.5, 1.5, 0.5)
    assert spiral_regions(1, 5)[4] == Rect(-1.5, -1.5, 1.5, 1.5)
    with pytest.raises(InvalidArgument):
        spiral_regions(0, 3)
    with pytest.raises(InvalidArgument):
        RegionSequence((Rect(-1, -1, 1, 1), Rect(0, 0, 1, 1)))


def _cz(z, theta):
    return ReferenceZero(complex(z), theta)


def test_empirical_curves_examples():
    regs = spiral_regions(1, 5)
    rep = empirical_curves([[_cz(0, 1)]], regs)
    assert rep.mean_charge == [1.0] * 5 and rep.mean_count == [1.0] * 5
    assert all(math.isnan(s) for s in rep.se_charge)
    rep = empirical_curves([[], []], regs)
    assert rep.mean_charge == [0.0] * 5 and rep.mean_count == [0.0] * 5
    rep = empirical_curves([[_cz(0, 1)], [_cz(0.1j, -1)]], regs)
    assert rep.mean_charge[0] == 0 and rep.se_charge[0] == pytest.approx(1.0)


def test_report_serialization(tmp_path):
    regs = spiral_regions(1, 3)
    rep = empirical_curves([[_cz(0, 1)]], regs, theory=[0.1, 0.2, 0.3])
    rep.to_csv(tmp_path / "r.csv")
    rep.to_json(tmp_path / "r.json")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("region_index,x0,y0,x1,y1,area,mean_charge")
    assert len(lines) == 4
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["regions"][0]["se_charge"] is None
    assert data["regions"][2]["theory_charge"] == 0.3


def test_match_examples():
    r = match_zeros([0.30 + 0.10j], [0.31 + 0.09j], 0.25)
    assert len(r.pairs) == 1 and r.pairs[0][2] == pytest.approx(0.01)
    assert r.unmatched_reference == [] and r.unmatched_computed == []
    r = match_zeros([0], [], 0.25)
    assert r.unmatched_reference == [0] and r.pairs == []
    r = match_zeros([-0.1, 0.1], [0], 0.15)
    assert [(a, b) for a, b, _ in r.pairs] == [(0, 0)]
    assert r.unmatched_reference == [1]
    with pytest.raises(InvalidArgument):
        match_zeros([0], [0], 0)


def test_match_charge_agreement():
    comp = [ChargedZero(GridPoint(0, 0, 0.1), -1, 0.0, Algorithm.PJ)]
    r = match_zeros([_cz(0.02, 1)], comp, 0.25)
    assert r.charge_agreement == [False]
    d = r.to_dict()
    assert d["pairs"][0]["reference"] == 0


coord = st.floats(-1, 1, allow_nan=False).map(lambda x: round(x, 3))
pts = st.lists(st.builds(complex, coord, coord), max_size=8)


@settings(max_examples=300, deadline=None)
@given(pts, pts, st.sampled_from([0.05, 0.2, 0.5, 1.5]))
def test_match_agrees_with_exhaustive(rz, cz, thr):
    res = match_zeros(rz, cz, thr)
    cnt, tot = exhaustive_match(tuple(rz), tuple(cz), thr)
    assert len(res.pairs) == cnt
    assert sum(d for _, _, d in res.pairs) == pytest.approx(tot, abs=1e-7)
    rs = [a for a, _, _ in res.pairs]
    cs = [b for _, b, _ in res.pairs]
    assert len(set(rs)) == len(rs) and len(set(cs)) == len(cs)
    for a, b, d in res.pairs:
        assert d <= thr and d == pytest.approx(float(linf(rz[a], cz[b])))
    assert sorted(rs + res.unmatched_reference) == list(range(len(rz)))
    assert sorted(cs + res.unmatched_computed) == list(range(len(cz)))
