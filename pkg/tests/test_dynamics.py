import math

import numpy as np
import pytest
from scipy.linalg import expm

from oracles import assemble_from_sectors

from frengate import dynamics
from frengate.dynamics import (DecayConfig, DecayCoupling, DecayTrajectory, _Generator,
                               calibrate_g0, evolve, fit_decay_rate, preset, px_bound,
                               sector_hamiltonian)
from frengate.errors import ConfigError, ConvergenceError, DomainError
from frengate.spectral import PhysicalParams

P = PhysicalParams.from_binding(0.005, S=1e-5)


def small_config(n=50, g0=0.02, **kw):
    c = DecayCoupling(g0, P.omega_X - P.delta_X / 2, 2.5e-4)
    return DecayConfig(P, c, n_freq=n, **kw)


def dense_from_sectors(cfg):
    w = cfg.omega
    dw = w[1] - w[0]
    g = lambda x: cfg.coupling(x) * math.sqrt(dw)
    p = cfg.params

    def sector(i, j):
        H = sector_hamiltonian(p, g, w[i], w[j], "emitted")
        return H - p.omega_2X * np.eye(6)

    return assemble_from_sectors(sector, len(w))


def pack(c, X, Phi, pairs):
    r2 = math.sqrt(2.0)
    A = [Phi[i, j] * (1.0 if i == j else r2) for i, j in pairs]
    return np.concatenate([[c], X[0], X[1], A])


def random_state(n, rng):
    c = rng.normal() + 1j * rng.normal()
    X = rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n))
    Phi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return c, X, Phi + Phi.T


def test_generator_matches_dense_sector_assembly():
    cfg = small_config(50)
    H, pairs = dense_from_sectors(cfg)
    assert np.allclose(H, H.conj().T)
    gen = _Generator(cfg)
    rng = np.random.default_rng(7)
    c, X, Phi = random_state(50, rng)
    dX, dP = np.empty_like(X), np.empty_like(Phi)
    dc = gen(c, X, Phi, dX, dP)
    got = pack(dc, dX, dP, pairs)
    want = -1j * H @ pack(c, X, Phi, pairs)
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


def test_short_evolution_matches_matrix_exponential():
    cfg = small_config(50, g0=0.05, t_max=2000.0, step=5.0)
    H, pairs = dense_from_sectors(cfg)
    psi0 = np.zeros(H.shape[0], complex)
    psi0[0] = 1
    psi = expm(-1j * H * cfg.t_max) @ psi0
    tr = evolve(cfg)
    n = cfg.n_freq
    assert tr.p2x[-1] == pytest.approx(abs(psi[0]) ** 2, abs=2e-9)
    assert tr.px[-1] == pytest.approx(np.sum(np.abs(psi[1:1 + 2 * n]) ** 2), abs=2e-9)


def test_sector_hamiltonian_conventions():
    g = lambda w: 2.0 * w
    a = sector_hamiltonian(P, g, 0.49, 0.51, "first")
    b = sector_hamiltonian(P, g, 0.49, 0.51, "emitted")
    assert np.allclose(a, a.conj().T) and np.allclose(b, b.conj().T)
    assert a[0, 1] == pytest.approx(g(0.49)) and b[0, 1] == pytest.approx(g(0.51))
    assert np.allclose(a[1:, 1:], b[1:, 1:])
    assert a[5, 5] == pytest.approx(P.omega_2X) and a[1, 2] == P.S
    with pytest.raises(DomainError):
        sector_hamiltonian(P, g, 0.49, 0.51, "other")


def test_no_coupling_means_no_decay():
    tr = evolve(small_config(g0=0.0, t_max=5000.0))
    assert np.all(tr.p2x == 1.0) and np.all(tr.px == 0.0)


def test_step_halving_shrinks_drift():
    base = small_config(60, g0=0.05, t_max=2e4, step=25.0)
    d1 = evolve(base).norm_drift
    d2 = evolve(base.replace(step=12.5)).norm_drift
    assert d1 > 0 and d2 <= d1 / 8


def test_energy_is_conserved():
    tr = evolve(small_config(60, t_max=2e4))
    assert np.ptp(tr.energy) < 1e-8
    assert tr.norm_drift < 1e-6


def test_unstable_step_rejected():
    with pytest.raises(ConfigError):
        evolve(small_config(step=1e5, t_max=1e6))


def test_drift_gate_raises(monkeypatch):
    monkeypatch.setattr(dynamics, "DRIFT_ABORT", 0.0)
    with pytest.raises(ConvergenceError):
        evolve(small_config(g0=0.05, t_max=2000.0, step=100.0))


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(n=10)
    with pytest.raises(ConfigError):
        small_config(freq_window=(0.4999, 0.5001))
    with pytest.raises(ConfigError):
        DecayCoupling(-1.0, 0.5, 1e-4)
    cfg = small_config(100)
    assert cfg.state_dimension == 1 + 200 + 5050
    lo, hi = cfg.window
    assert (lo + hi) / 2 == pytest.approx(P.omega_2X / 2)
    with pytest.raises(ConfigError):
        preset("nope")


def test_fit_recovers_synthetic_rate():
    t = np.linspace(0, 1e6, 400)
    f = fit_decay_rate(t, np.exp(-3e-6 * t))
    assert f.gamma == pytest.approx(3e-6, rel=1e-12)
    assert f.residual < 1e-12 and f.monotone
    with pytest.raises(DomainError):
        fit_decay_rate(t, np.ones_like(t))


def test_two_photon_rate_scales_with_fourth_power_of_g0():
    # runs stay short of the grid recurrence time 2 pi / d_omega
    cfg = preset("adiabatic", n_freq=150).replace(t_max=5e4)
    g0 = cfg.coupling.g0
    weak = cfg.replace(coupling=DecayCoupling(g0 / math.sqrt(2), cfg.coupling.center,
                                              cfg.coupling.bandwidth), t_max=2e5)
    assert weak.t_max < 2 * math.pi / (cfg.omega[1] - cfg.omega[0])
    a = fit_decay_rate(evolve(cfg), lo=0.5, hi=0.95).gamma
    b = fit_decay_rate(evolve(weak), lo=0.5, hi=0.95).gamma
    assert a / b == pytest.approx(4.0, rel=0.15)


def test_calibration_rescales_g0():
    cfg = small_config(g0=0.01)
    t = np.linspace(0, 1e6, 500)
    p2x = np.exp(-2e-6 * t)
    px = 0.05 * np.ones_like(t)
    ref = DecayTrajectory(t, 1 - p2x - px, px, p2x, np.ones_like(t), np.zeros_like(t), cfg)
    assert calibrate_g0(ref, target_gamma=32e-6) == pytest.approx(0.02, rel=1e-12)
    both = calibrate_g0(ref, target_gamma=32e-6, target_max_px=0.2)
    assert both == pytest.approx(0.02, rel=1e-12)


def test_px_bound_scales_with_coupling():
    a = px_bound(small_config(g0=0.01))
    b = px_bound(small_config(g0=0.02))
    assert b == pytest.approx(4 * a, rel=1e-12)


def test_trajectory_outputs(tmp_path):
    tr = evolve(small_config(g0=0.05, t_max=3000.0))
    s = tr.summary()
    assert {"max_px", "plateau_px", "norm_drift", "config"} <= set(s)
    tr.save_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().startswith("t,p0,px,p2x,norm\n")


def test_resonant_preset_smoke():
    # one-photon channel open: the exciton fills well past the adiabatic level, then leaks slowly
    tr = evolve(preset("resonant", n_freq=200))
    assert 0.35 <= tr.max_px <= 0.60
    assert tr.px[-1] < tr.max_px and tr.p2x[-1] < 0.1
    assert tr.norm_drift <= 1e-6
