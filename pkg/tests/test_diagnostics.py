import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helfrich_ch.diagnostics import (
    SeparationTracker,
    degiorgi_decay,
    degiorgi_threshold,
    level_set_measures,
    lp_norm,
    separation_monitor,
    sobolev_constant_probe,
)
from helfrich_ch.fields import Discretization, ModelParams, homogeneous_phase, init_phase


@pytest.fixture(scope="module")
def setup():
    return ModelParams(), Discretization(8, 1.0)


def test_separation_monitor(setup):
    p, d = setup
    rep = separation_monitor(homogeneous_phase(p, d), t=0.5)
    assert rep.delta_min == pytest.approx(0.25) and rep.delta_max == pytest.approx(0.4)
    np.testing.assert_allclose(rep.comp_min, p.alpha)
    assert rep.separated and not rep.left_simplex and rep.t == 0.5


def test_level_set_measures_examples(setup):
    p, d = setup
    phi = homogeneous_phase(p, d)
    lv = level_set_measures(phi.values, 0.2, 4, d.grid)
    # alpha = (0.4, 0.35, 0.25) against k = 0.4, 0.3, 0.25, 0.225, 0.2125
    np.testing.assert_allclose(lv.k, 0.2 + 0.2 / 2.0 ** np.arange(5))
    area = 4 * math.pi
    assert lv.z[0].tolist() == pytest.approx([area, area, area])
    assert lv.z[1].tolist() == pytest.approx([0.0, 0.0, area])
    assert lv.z[4].tolist() == pytest.approx([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        level_set_measures(phi.values, 0.34, 4, d.grid)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.16))
def test_level_set_properties(seed, delta):
    p = ModelParams()
    d = Discretization(6, 1.0)
    phi, _ = init_phase(p, d, 0.3, seed=seed % 1000)
    lv = level_set_measures(phi.values, delta, 10, d.grid)
    assert np.all(np.diff(lv.z, axis=0) <= 0)
    # k_0 = 2 delta < 1/N: at most N-1 components can sit below it at any point
    assert np.all(lv.z.sum(axis=1) <= (p.n - 1) * 4 * math.pi * (1 + 1e-12))
    # direct count for one level
    n = 3
    direct = np.array([(d.grid.weights * (phi.values[i] <= lv.k[n])).sum() for i in range(3)])
    np.testing.assert_allclose(lv.z[n], direct)


def test_threshold_example():
    assert degiorgi_threshold(1.0, 2.0, 1.0) == pytest.approx(0.5)
    assert degiorgi_threshold(4.0, 16.0, 2.0) == pytest.approx(4 ** -0.5 * 16 ** -0.25)
    with pytest.raises(ValueError):
        degiorgi_threshold(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        degiorgi_threshold(1.0, 2.0, 0.0)


def test_decay_at_threshold():
    r = degiorgi_decay("theta", 1.0, 2.0, 1.0, n_max=50)
    assert r.bound_holds and r.to_zero
    # equality case: y_n = theta b^(-n/gamma)
    np.testing.assert_allclose(r.y[:20], 0.5 * 2.0 ** -np.arange(20), rtol=1e-12)


def test_decay_matches_float_iteration():
    C, b, g = 2.0, 3.0, 0.5
    r = degiorgi_decay(0.01, C, b, g, n_max=8)
    y = [0.01]
    for n in range(8):
        y.append(C * b**n * y[-1] ** (1 + g))
    np.testing.assert_allclose(r.y, y, rtol=1e-12)


def test_decay_above_threshold_fails():
    th = degiorgi_threshold(1.0, 2.0, 1.0)
    r = degiorgi_decay(1.01 * th, 1.0, 2.0, 1.0, n_max=30)
    assert not r.bound_holds and not r.to_zero


@given(st.floats(0.1, 10), st.floats(1.1, 8), st.floats(0.1, 3), st.floats(1e-6, 0.999))
def test_decay_below_threshold_property(C, b, g, frac):
    th = degiorgi_threshold(C, b, g)
    r = degiorgi_decay(frac * th, C, b, g, n_max=50)
    assert r.bound_holds and r.to_zero


def test_decay_rejects():
    with pytest.raises(ValueError):
        degiorgi_decay(-1.0, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        degiorgi_decay("start", 1.0, 2.0, 1.0)


def test_lp_norm_of_constant():
    d = Discretization(4, 1.0)
    v = np.full(d.grid.shape, 2.0)
    for p in (2, 4, 64):
        assert lp_norm(v, d.grid, p) == pytest.approx(2.0 * (4 * math.pi) ** (1 / p), rel=1e-12)


def test_sobolev_probe():
    d = Discretization(8, 1.0)
    pr = sobolev_constant_probe(d, samples=100)
    # |f|_2 <= |f|_{H^1} gives C(2) <= 1/sqrt(2)
    assert 0 < pr.C[0] <= 1 / math.sqrt(2)
    assert np.all(np.isfinite(pr.C)) and np.all(pr.C > 0)
    with pytest.raises(ValueError):
        sobolev_constant_probe(d, p_list=(1,))


def test_tracker_floor(setup):
    p, d = setup
    tr = SeparationTracker(t_start=0.1)
    phi = homogeneous_phase(p, d)
    low, _ = init_phase(p, d, 0.2, seed=1)
    tr.record(0.0, low)
    tr.record(0.1, phi)
    tr.record(0.2, phi)
    assert tr.floor() == pytest.approx(0.25)
    assert tr.positive_after_start()
