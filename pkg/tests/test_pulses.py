import math

import numpy as np
import pytest

from ipq.pulses import PulseTrain, build_grid, refine_grid

LEO = PulseTrain(50.0, 0.02 * math.pi, 0.005 * math.pi, math.pi)


def test_per_pulse_phase_is_pi():
    assert abs(LEO.phase_per_pulse - math.pi) <= 1e-12


def test_pulses_are_closed_left_open_right():
    assert LEO.mu(0.0) == 50.0
    assert LEO.mu(LEO.width) == 0.0
    assert LEO.mu(LEO.period) == 50.0


def test_phase_closed_form_matches_integral():
    t = np.linspace(0, math.pi, 20001)
    numeric = np.concatenate([[0.0], np.cumsum(0.5 * (LEO.mu(t[1:]) + LEO.mu(t[:-1])) * np.diff(t))])
    assert np.max(np.abs(LEO.phase(t) - numeric)) <= 0.05
    assert LEO.phase(4 * LEO.period) == pytest.approx(4 * math.pi)


def test_edges_inside_window():
    e = LEO.edges()
    assert np.all((e > 0) & (e < math.pi))
    assert e[0] == pytest.approx(LEO.width)
    assert len(e) == 2 * round(math.pi / LEO.period) - 1


def test_off_train():
    off = PulseTrain.off(2.0)
    assert not off.active
    assert off.edges().size == 0
    assert np.all(off.mu(np.linspace(0, 2, 5)) == 0)


def test_time_outside_window_rejected():
    with pytest.raises(ValueError):
        LEO.mu(4.0)


@pytest.mark.parametrize("kw", [dict(strength=-1.0), dict(width=0.0), dict(spacing=-0.1), dict(total_duration=0.0)])
def test_invalid_parameters(kw):
    args = dict(strength=1.0, width=0.1, spacing=0.1, total_duration=1.0) | kw
    with pytest.raises(ValueError):
        PulseTrain(**args)


def test_grid_contains_every_edge_and_enough_steps():
    g = build_grid(LEO, 0.01)
    for e in LEO.edges():
        assert np.min(np.abs(g - e)) <= 1e-12
    inside = (LEO.mu(0.5 * (g[:-1] + g[1:])) > 0)
    first = np.flatnonzero(inside)[:8]
    assert inside[first].all() and len(first) == 8


def test_refine_grid():
    g = np.array([0.0, 1.0, 3.0])
    assert np.allclose(refine_grid(g, 2), [0, 0.5, 1, 2, 3])
    assert refine_grid(g, 1) is not None


def test_grid_cap():
    with pytest.raises(ValueError):
        build_grid(PulseTrain.off(10.0), 1e-6, cap=1000)
