import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import (double_gaussian, grid_svd_lambdas, success_probability_quad,
                     thermal_entropy, thermal_schmidt)

from frengate.entanglement import (MAX_ORDER, BasisSpec, SweepTable, auto_bases,
                                   distribution_stats, entanglement_entropy, hermite_gauss,
                                   hermite_gauss_table, marginal_moments, project, qudit_regime,
                                   schmidt_decompose, schmidt_from_field, schmidt_number,
                                   success_probability_analytic, success_probability_numeric,
                                   tradeoff_sweep)
from frengate.errors import DomainError, TruncationWarning
from frengate.scattering import GaussianInput, gaussian_input, scatter
from frengate.coupling import GaussianCoupling
from frengate.spectral import BiphotonField, FrequencyGrid, PhysicalParams


def field_of(r, n=257, half=None):
    half = half or 8 * max(1.0, r)
    w, wp, v = double_gaussian(n, half, 1.0, r)
    g = FrequencyGrid(w[0], w[-1], n, wp[0], wp[-1], n)
    return BiphotonField(g, v)


def test_hermite_gauss_orthonormal():
    x = np.linspace(-40, 40, 8001)
    H = hermite_gauss_table(60, BasisSpec(0.0, 1.0, 60), x)
    G = (H * (x[1] - x[0])) @ H.T
    assert np.max(np.abs(G - np.eye(60))) < 1e-10


def test_hermite_gauss_low_orders_closed_form():
    x = np.linspace(-3, 3, 13)
    b = BasisSpec(0.0, 1.0)
    h2 = (4 * x * x - 2) * np.exp(-x * x / 2) / math.sqrt(8 * math.sqrt(math.pi))
    assert np.allclose(hermite_gauss(2, b, x), h2, atol=1e-14)


def test_hermite_gauss_scaled_and_bounded():
    b = BasisSpec(0.5, 1e-6, 3)
    x = 0.5 + np.linspace(-8e-6, 8e-6, 4001)
    v = hermite_gauss(1, b, x)
    assert np.trapezoid(v * v, x) == pytest.approx(1.0, rel=1e-8)
    assert np.all(np.isfinite(hermite_gauss_table(MAX_ORDER + 1, BasisSpec(0, 1, 2), np.linspace(-50, 50, 11))))
    with pytest.raises(DomainError):
        hermite_gauss(MAX_ORDER + 1, b, x)
    with pytest.raises(DomainError):
        BasisSpec(0, -1.0)


def test_marginal_moments_of_gaussian():
    f = field_of(1.0)
    (m1, s1), (m2, s2) = marginal_moments(f)
    # |C|^2 = exp(-(w^2 + w'^2)) per axis: variance 1/2
    assert m1 == pytest.approx(0, abs=1e-12) and s1 == pytest.approx(math.sqrt(0.5), rel=1e-8)


def test_separable_input_is_unentangled():
    spec = schmidt_from_field(field_of(1.0), 20)
    assert spec.K == pytest.approx(1.0, abs=1e-8)
    assert spec.entropy_nats == pytest.approx(0.0, abs=1e-8)
    assert np.sum(spec.lambdas ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("r", [0.25, 0.5, 2.0, 3.0])
def test_double_gaussian_matches_grid_svd_and_thermal_law(r):
    f = field_of(r, n=301)
    spec = schmidt_from_field(f, 80)
    ref = grid_svd_lambdas(f.values)
    K, p = thermal_schmidt(r)
    assert spec.K == pytest.approx(K, rel=1e-3)
    assert schmidt_number(ref) == pytest.approx(K, rel=1e-3)
    assert np.allclose(spec.lambdas[:8] ** 2, ref[:8] ** 2, atol=1e-8)
    assert np.allclose(spec.lambdas[:6] ** 2, p[:6], rtol=1e-3, atol=1e-12)
    assert spec.entropy_nats == pytest.approx(thermal_entropy(r), rel=1e-3)


@given(st.floats(0.3, 3.0))
def test_schmidt_number_symmetric_in_ratio(r):
    a = schmidt_from_field(field_of(r, n=161), 50, warn=False).K
    b = schmidt_from_field(field_of(1 / r, n=161), 50, warn=False).K
    assert a == pytest.approx(b, rel=1e-6)


@given(st.integers(0, 2 ** 32 - 1))
def test_schmidt_invariant_under_local_phases(seed):
    rng = np.random.default_rng(seed)
    f = field_of(2.0, n=161)
    w, wp = f.grid.omega, f.grid.omega_prime
    c = rng.normal(size=3)
    ph = np.exp(1j * (c[0] * w + c[1] * w * w / 4))[:, None] * np.exp(1j * c[2] * wp)[None, :]
    a = grid_svd_lambdas(f.values)
    b = grid_svd_lambdas(f.values * ph)
    assert np.max(np.abs(a - b)) <= 1e-8


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12))
def test_lambdas_normalized(vals):
    spec = schmidt_decompose(np.diag(vals))
    assert abs(np.sum(spec.lambdas ** 2) - 1) <= 1e-10
    assert 1 <= spec.K <= len(vals) + 1e-9


def test_entropy_normalization_convention():
    lam = np.full(4, 0.5)
    nats, bits, norm = entanglement_entropy(lam)
    assert nats == pytest.approx(math.log(4)) and bits == pytest.approx(2.0) and norm == pytest.approx(1.0)


def test_projection_reports_truncation():
    f = field_of(4.0)
    b1, b2 = auto_bases(f.normalize(), 4)
    with pytest.warns(TruncationWarning):
        project(f.normalize(), b1, b2)


def test_schmidt_modes_reconstruct_field():
    f = field_of(2.0, n=201).normalize()
    spec = schmidt_from_field(f, 60)
    k = 20
    rec = np.einsum("k,ki,kj->ij", spec.lambdas[:k], spec.modes1[:k], spec.modes2[:k])
    assert np.max(np.abs(rec - f.values)) < 1e-6 * np.max(np.abs(f.values))


def test_success_probability_analytic_values():
    assert success_probability_analytic(1.0) == 0.75
    assert success_probability_analytic(10.0) == pytest.approx(0.14851, abs=1e-5)
    assert success_probability_analytic(30.0) == pytest.approx(0.04995, abs=1e-5)
    with pytest.raises(DomainError):
        success_probability_analytic(0.0)


@given(st.floats(0.05, 20))
def test_success_probability_matches_quadrature(r):
    assert success_probability_analytic(r) == pytest.approx(success_probability_quad(r), rel=1e-8)


@given(st.floats(0.05, 20))
def test_success_probability_symmetric_and_bounded(r):
    assert success_probability_analytic(r) == pytest.approx(success_probability_analytic(1 / r))
    assert 0 < success_probability_analytic(r) <= 0.75


def test_numeric_success_in_fast_emitter_limit():
    p = PhysicalParams(Gamma=1e-3)
    spec = GaussianInput.from_params(1e-6, p)
    g = FrequencyGrid.centered(p.omega_e, p.omega_b, 12e-6, 384)
    res = scatter(gaussian_input(spec, g), GaussianCoupling.isotropic(2e-6, p), p)
    probs = success_probability_numeric(res)
    assert probs["p_success"] == pytest.approx(success_probability_analytic(2.0), rel=2e-3)
    assert probs["p_success"] + probs["++"] == pytest.approx(1.0, abs=1e-4)


def test_distribution_stats_of_correlated_gaussian():
    f = field_of(3.0, n=301)
    st_ = distribution_stats(f)
    # |C|^2 has standard deviations a along S and b along D
    assert st_["sigma_sigma"] == pytest.approx(1.0, rel=1e-6)
    assert st_["sigma_delta"] == pytest.approx(3.0, rel=1e-6)
    assert st_["ellipticity"] == pytest.approx(math.sqrt(1 - 1 / 9), rel=1e-6)
    assert st_["ellipticity_contrast"] == pytest.approx(0.8, rel=1e-6)


def test_qudit_regime_labels():
    assert qudit_regime(1e-6, 1e-6, 2e-5) == "peak-matched"
    assert qudit_regime(2e-5, 1e-6, 2e-5) == "envelope-matched"
    assert qudit_regime(1e-7, 1e-6, 2e-5) == "anticorrelated"
    assert qudit_regime(1e-4, 1e-6, 2e-5) == "correlated"
    assert qudit_regime(5e-6, 1e-6, 2e-5) == "intermediate"


def test_tradeoff_sweep_small(tmp_path):
    t = tradeoff_sweep([0.5, 1.0, 2.0], PhysicalParams(), 1e-6, n=128, count=30)
    assert [r["status"] for r in t.rows] == ["ok"] * 3
    K = t.column("schmidt_number")
    assert K[1] < K[0] and K[1] < K[2]
    assert t.column("p_analytic")[1] == 0.75
    t.save(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0].startswith("ratio,p_success")


def test_sweep_records_failed_points():
    t = tradeoff_sweep([-1.0, 1.0], PhysicalParams(), 1e-6, n=64, count=10)
    assert t.rows[0]["status"].startswith("failed") and t.rows[1]["status"] == "ok"
    assert t.diagnostics["failed_points"] == 1
    assert isinstance(t, SweepTable)
