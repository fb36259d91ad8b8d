import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nyquist_tdm import frac_calc as fc
from nyquist_tdm.quadrature import adaptive_simpson
from nyquist_tdm.signal_core import TimeGrid, Waveform


def _wave(fn, t0, t1, dt):
    n = int(round((t1 - t0) / dt)) + 1
    g = TimeGrid(t0, dt, n)
    return Waveform(g, fn(g.times()))


def test_half_derivative_of_t():
    f = _wave(lambda t: t, 0.0, 1.01, 1e-3)
    assert fc.rl_derivative(f, 0.5, a=0.0, t=1.0) == pytest.approx(2 / math.sqrt(math.pi), abs=1e-5)


def test_convergence_order():
    errs = []
    for dt in (0.02, 0.01, 0.005):
        f = _wave(lambda t: t, 0.0, 1.0 + 2 * dt, dt)
        errs.append(abs(fc.rl_derivative(f, 0.5, 0.0, 1.0) - 2 / math.sqrt(math.pi)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.4)


@pytest.mark.parametrize(
    "alpha, fn, exact",
    [
        (0.0, lambda t: t**2, 1.0),
        (1.0, lambda t: t**2, 2.0),
        (0.5, lambda t: np.ones_like(t), 1 / math.sqrt(math.pi)),
        (0.25, lambda t: t, 1 / math.gamma(1.75)),
        (1.5, lambda t: t**2, 2 / math.gamma(1.5)),
    ],
)
def test_power_law_oracles(alpha, fn, exact):
    f = _wave(fn, 0.0, 1.01, 1e-3)
    assert fc.rl_derivative(f, alpha, 0.0, 1.0) == pytest.approx(exact, rel=2e-3)


def test_semigroup_on_t():
    f = _wave(lambda t: t, 0.0, 1.5, 1e-3)
    half = fc.rl_derivative_grid(f, 0.5)
    # D^1/2 t = 2 sqrt(t / pi); its half derivative is 1
    g = half.grid
    ok = g.times() > 0.05
    np.testing.assert_allclose(half.samples[ok], 2 * np.sqrt(g.times()[ok] / math.pi), rtol=5e-3)


def test_grid_and_point_agree(backend):
    f = _wave(np.sin, 0.0, 2.0, 2e-3)
    grid_val = fc.rl_derivative_grid(f, 0.7)
    i = 500
    pt = fc.rl_derivative(f, 0.7, 0.0, f.times()[i])
    assert grid_val.samples[i] == pytest.approx(pt, abs=1e-4)


def test_order_range_and_span_errors():
    f = _wave(lambda t: t, 0.0, 1.0, 0.01)
    with pytest.raises(ValueError):
        fc.rl_derivative(f, 2.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        fc.rl_derivative(f, -0.1, 0.0, 0.5)
    with pytest.raises(ValueError):
        fc.rl_derivative(f, 0.5, 0.0, 1.0)  # needs one step past t
    with pytest.raises(ValueError):
        fc.rl_derivative(f, 0.5, -1.0, 0.5)


def test_weyl_rule_examples():
    d = fc.weyl_sinusoid_derivative(2.0, 3.0, 0.1, 1.0)
    # first derivative of 3 cos(2t + 0.1) is -6 sin(2t + 0.1)
    t = np.linspace(0, 3, 7)
    np.testing.assert_allclose(d(t), -6 * np.sin(2 * t + 0.1), atol=1e-12)
    z = fc.weyl_sinusoid_derivative(2.0, 3.0, 0.1, 0.0)
    np.testing.assert_allclose(z(t), 3 * np.cos(2 * t + 0.1))
    with pytest.raises(ValueError):
        fc.weyl_sinusoid_derivative(0.0, 1.0, 0.0, 0.5)


def test_weyl_matches_long_history_rl():
    w = 2 * math.pi
    f = _wave(lambda t: np.cos(w * t), -50.0, 1.01, 2e-3)
    for alpha in (0.3, 0.5, 0.8):
        rl = fc.rl_derivative(f, alpha, -50.0, 1.0)
        weyl = float(fc.weyl_sinusoid_derivative(w, 1.0, 0.0, alpha)(1.0))
        assert rl == pytest.approx(weyl, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.0, 1.9), b=st.floats(0.0, 1.9), w=st.floats(0.1, 10.0))
def test_weyl_composes(a, b, w):
    if a + b >= 2.0:
        b = 1.9 - a
    one = fc.weyl_sinusoid_derivative(w, 1.0, 0.2, a)
    two = fc.weyl_sinusoid_derivative(one.omega, one.amplitude, one.phase, b)
    direct = fc.weyl_sinusoid_derivative(w, 1.0, 0.2, a + b)
    assert two.amplitude == pytest.approx(direct.amplitude, rel=1e-12)
    assert math.cos(two.phase - direct.phase) == pytest.approx(1.0, abs=1e-12)


def test_tangent_line():
    tone = fc.Tone(1.0)
    line = fc.tangent_line(tone, 0.5, 1.0, [0.5, 1.5])
    assert line[0] == pytest.approx(math.cos(0.5))
    assert line[1] - line[0] == pytest.approx(-math.sin(0.5))
    with pytest.raises(TypeError):
        fc.tangent_line(lambda t: t, 0.0, 0.5, [0.0])


def test_trajectory_peak_and_zero():
    g = TimeGrid.from_span(fc.SINC_ANCHOR - 10, fc.SINC_ANCHOR + 10, 2001)
    traj = fc.sine_to_sinc_trajectory(g)
    assert traj(fc.SINC_ANCHOR) == pytest.approx(1.0, abs=1e-12)
    nodes = TimeGrid(fc.SINC_ANCHOR, math.pi / 4, 9)
    assert fc.sine_to_sinc_trajectory(nodes).alpha_samples[4] == pytest.approx(0.0, abs=1e-12)
    norm = fc.sine_to_sinc_trajectory(TimeGrid(fc.SINC_ANCHOR, 0.25, 9), "norm")
    assert norm.alpha_samples[4] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        fc.sine_to_sinc_trajectory(g, "bogus")


def test_trajectory_roundtrip():
    g = TimeGrid.from_span(fc.SINC_ANCHOR - 30, fc.SINC_ANCHOR + 30, 10_000)
    rec = fc.reconstruct_from_trajectory(fc.sine_to_sinc_trajectory(g))
    x = rec.times()
    assert np.max(np.abs(rec.samples - fc.sinc_u(x))) < 1e-12


def test_trajectory_csv_roundtrip(tmp_path):
    g = TimeGrid.from_span(-1.0, 1.0, 9)
    tr = fc.Trajectory(g, np.linspace(0, 1, 9))
    tr.to_csv(tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "t_seconds,alpha"
    back = fc.Trajectory.from_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(back.alpha_samples, tr.alpha_samples)
    assert back(0.125) == pytest.approx(tr(0.125))
    (tmp_path / "bad.csv").write_text("t_seconds,alpha\n0,0\n1,0\n3,0\n")
    with pytest.raises(ValueError):
        fc.Trajectory.from_csv(tmp_path / "bad.csv")


def test_trajectory_interpolates_and_clamps():
    tr = fc.Trajectory(TimeGrid(0.0, 1.0, 3), [0.0, 1.0, 0.0])
    assert tr(0.5) == 0.5
    assert tr(-5.0) == 0.0
    np.testing.assert_allclose(tr(np.array([1.5, 9.0])), [0.5, 0.0])


def test_orthogonality_residuals():
    r0 = fc.orthogonality_residuals(0, 200.0)
    # integral of sinc_u^2 is pi; truncation at W costs about 1/W
    assert r0["unnorm"] == pytest.approx(math.pi - 1 - 1 / 200, abs=2e-3)
    assert abs(r0["norm"]) < 1e-3
    r3 = fc.orthogonality_residuals(3, 200.0)
    assert abs(r3["norm"]) < 1e-3


def test_residual_needs_coverage():
    g = TimeGrid.from_span(0.0, 10.0, 101)
    with pytest.raises(ValueError):
        fc.sinc_orthogonality_residual(fc.sine_to_sinc_trajectory(g), 0, 20.0)


def test_adaptive_simpson():
    assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-11)
    assert adaptive_simpson(math.sqrt, 0.0, 1.0, 1e-10) == pytest.approx(2 / 3, abs=1e-9)
    assert adaptive_simpson(math.exp, 1.0, 1.0) == 0.0


@pytest.mark.parametrize("omega, window", [(1.0, math.pi), (2.5, 1.3), (1.0, 2 * math.pi)])
def test_dimensional_transform_matches_closed_form(omega, window):
    alphas = np.linspace(0, 1.5, 31)
    tone = fc.Tone(omega)
    spec = fc.dimensional_transform(tone, alphas, window, tol=1e-12)
    envelope = 2 * omega ** (alphas - 1) * max(abs(math.sin(omega * window / 2)), 1e-300)
    err = np.abs(spec.values - spec.closed_form)
    assert np.all(err <= 1e-8 * envelope + 1e-14)


def test_dimensional_metadata_keeps_stated_result(tmp_path):
    spec = fc.dimensional_transform(fc.Tone(1.0), [0.0, 0.5, 1.0], math.pi)
    meta = spec.metadata()
    assert meta["note"] == fc.STATED_RESULT_NOTE
    np.testing.assert_allclose(meta["stated_result"], [0.0, math.sin(math.pi / 4), 1.0])
    assert not np.allclose(meta["stated_result"], meta["closed_form"])
    json.dumps(meta)
    spec.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().startswith("alpha,value\n")


def test_dimensional_full_period_alpha_zero():
    spec = fc.dimensional_transform(fc.Tone(1.0), [0.0], 2 * math.pi)
    assert abs(spec.values[0]) < 1e-12
