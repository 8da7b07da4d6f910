import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from frengate.errors import DomainError, WindowWarning
from frengate.spectral import (BiphotonField, ChannelLabel, FrequencyGrid, PhysicalParams,
                               default_grid, from_collective, integrate2d, lorentzian_emission,
                               to_collective)


def test_default_params_are_consistent():
    p = PhysicalParams()
    assert p.omega_2X == pytest.approx(2 * p.omega_X - p.delta_X, abs=1e-15)


def test_inconsistent_energies_rejected():
    with pytest.raises(DomainError):
        PhysicalParams(omega_X=0.6, delta_X=0.005)


@pytest.mark.parametrize("bad", [{"Gamma": 0.0}, {"Gamma": -1e-5}, {"S": math.nan}])
def test_invalid_params_rejected(bad):
    with pytest.raises(DomainError):
        PhysicalParams().replace(**bad)


def test_from_binding_keeps_biexciton_frequency():
    p = PhysicalParams.from_binding(1e-3)
    assert p.omega_2X == 1.0
    assert p.omega_X == pytest.approx(0.5005)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_collective_round_trip(w, wp):
    S, D = to_collective(w, wp)
    a, b = from_collective(S, D)
    assert a == pytest.approx(w, abs=1e-15) and b == pytest.approx(wp, abs=1e-15)


def test_grid_axes_and_cells():
    g = FrequencyGrid.centered(0.5, 0.4, 1e-3, 11)
    assert g.omega[0] == pytest.approx(0.499) and g.omega[-1] == pytest.approx(0.501)
    assert g.d_omega == pytest.approx(2e-4)
    assert g.has_square_cells()
    assert g.refined().n_omega == 21
    w, wp = g.mesh()
    assert w.shape == (11, 11) and np.all(w[:, 0] == g.omega) and np.all(wp[0] == g.omega_prime)


def test_grid_rejects_degenerate():
    with pytest.raises(DomainError):
        FrequencyGrid(0, 0, 10, 0, 1, 10)
    with pytest.raises(DomainError):
        FrequencyGrid(0, 1, 1, 0, 1, 10)


def test_default_grid_half_width_and_warning():
    p = PhysicalParams()
    g = default_grid(p, 1e-6, 4e-6, n=512)
    assert g.omega_max - p.omega_e == pytest.approx(6 * p.Gamma / 2)
    with pytest.warns(WindowWarning):
        default_grid(p, 1e-8, 1e-8, n=64)


def test_field_norm_matches_analytic_gaussian():
    g = FrequencyGrid.centered(0.0, 0.0, 8.0, 401)
    w, wp = g.mesh()
    f = BiphotonField(g, np.exp(-(w * w + wp * wp) / 2))
    assert f.norm() == pytest.approx(math.pi, rel=1e-10)
    assert f.normalize().norm() == pytest.approx(1.0, abs=1e-12)


def test_field_validation():
    g = FrequencyGrid.centered(0, 0, 1, 5)
    with pytest.raises(DomainError):
        BiphotonField(g, np.zeros((4, 5)))
    with pytest.raises(DomainError):
        BiphotonField(g, np.full((5, 5), np.nan))
    with pytest.raises(DomainError):
        BiphotonField(g, np.ones((5, 5)), normalized=True)
    with pytest.raises(DomainError):
        BiphotonField(g, np.zeros((5, 5))).normalize()


def test_field_values_are_read_only():
    g = FrequencyGrid.centered(0, 0, 1, 5)
    f = BiphotonField(g, np.ones((5, 5)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 2


def test_channel_labels():
    assert ChannelLabel.PP.key == "++"
    assert ChannelLabel.parse("-+") is ChannelLabel.MP
    assert ChannelLabel.parse("MM") is ChannelLabel.MM
    assert (ChannelLabel.PP.sigma_prime, ChannelLabel.PP.sigma) == ("L", "R")
    with pytest.raises(DomainError):
        ChannelLabel.parse("+0")


def test_lorentzian_peak_and_width():
    p = PhysicalParams()
    assert lorentzian_emission(1.0, p) == pytest.approx(2.0)
    off = lorentzian_emission(1.0 + p.Gamma / 2, p)
    assert abs(off) ** 2 == pytest.approx(2.0)


def test_integrate2d_is_trapezoid():
    g = FrequencyGrid(0, 1, 3, 0, 1, 3)
    f = BiphotonField(g, np.ones((3, 3)))
    assert integrate2d(f) == pytest.approx(1.0)
