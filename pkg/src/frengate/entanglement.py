"""Schmidt decomposition of two-photon amplitudes and gate figures of merit.

The amplitude is expanded in two Hermite-Gauss bases, one per photon, and
the coefficient matrix is diagonalized by SVD. Basis centres and scales
default to the moments of each marginal of ``|C|^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, FrengateError, TruncationWarning
from .spectral import (BiphotonField, ChannelLabel, FrequencyGrid,
                       PhysicalParams, to_collective)

MAX_ORDER = 500
RECONSTRUCTION_GATE = 1e-3
DEFAULT_COUNT = 60


@dataclass(frozen=True)
class BasisSpec:
    """Hermite-Gauss family ``O_n((omega - center) / scale) / sqrt(scale)``, ``n < count``."""

    center: float
    scale: float
    count: int = DEFAULT_COUNT

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("basis scale must be positive")
        if self.count < 1:
            raise DomainError("basis count must be at least 1")
        if self.count - 1 > MAX_ORDER:
            raise DomainError(f"Hermite-Gauss order above {MAX_ORDER} is not supported")

    def table(self, omega) -> np.ndarray:
        """Rows ``O_0 .. O_{count-1}`` sampled at ``omega``."""
        return hermite_gauss_table(self.count, self, omega)


def hermite_gauss_table(count: int, spec: BasisSpec, omega) -> np.ndarray:
    """Orthonormal Hermite-Gauss functions of orders ``0..count-1``.

    Uses the normalized three-term recurrence, so the Gaussian weight is
    carried along and nothing overflows at high order.
    """
    if count - 1 > MAX_ORDER:
        raise DomainError(f"Hermite-Gauss order above {MAX_ORDER} is not supported")
    x = (np.asarray(omega, dtype=float) - spec.center) / spec.scale
    out = np.empty((count,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
    if count > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(2, count):
        out[j] = math.sqrt(2.0 / j) * x * out[j - 1] - math.sqrt((j - 1) / j) * out[j - 2]
    return out / math.sqrt(spec.scale)


def hermite_gauss(n: int, spec: BasisSpec, omega) -> np.ndarray:
    if n < 0:
        raise DomainError("Hermite-Gauss order must be non-negative")
    if n > MAX_ORDER:
        raise DomainError(f"Hermite-Gauss order above {MAX_ORDER} is not supported")
    return hermite_gauss_table(n + 1, spec, omega)[n]


def _weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def marginal_moments(field: BiphotonField) -> tuple[tuple[float, float], tuple[float, float]]:
    """``((mean, std) along omega, (mean, std) along omega_prime)`` of ``|C|^2``."""
    g = field.grid
    I = field.intensity
    p1 = trapezoid(I, dx=g.d_omega_prime, axis=1)
    p2 = trapezoid(I, dx=g.d_omega, axis=0)
    out = []
    for p, x, h in ((p1, g.omega, g.d_omega), (p2, g.omega_prime, g.d_omega_prime)):
        z = trapezoid(p, dx=h)
        if z <= 0:
            raise DomainError("field has zero norm")
        m = trapezoid(p * x, dx=h) / z
        v = trapezoid(p * (x - m) ** 2, dx=h) / z
        out.append((float(m), float(math.sqrt(max(v, 0.0)))))
    return out[0], out[1]


def auto_bases(field: BiphotonField, count: int = DEFAULT_COUNT,
               count_prime: int | None = None) -> tuple[BasisSpec, BasisSpec]:
    """Bases centred on the marginal means, scaled by the marginal standard deviations."""
    (m1, s1), (m2, s2) = marginal_moments(field)
    if s1 <= 0 or s2 <= 0:
        raise DomainError("field has a degenerate marginal")
    return (BasisSpec(m1, s1, count),
            BasisSpec(m2, s2, count if count_prime is None else count_prime))


@dataclass(frozen=True, eq=False)
class Projection:
    """Coefficients ``coeffs[m, n]`` on ``O_m(omega) O_n(omega')``."""

    coeffs: np.ndarray
    basis1: BasisSpec
    basis2: BasisSpec
    reconstruction_error: float
    modes1: np.ndarray
    modes2: np.ndarray


def project(field: BiphotonField, basis1: BasisSpec, basis2: BasisSpec,
            warn: bool = True) -> Projection:
    """Expand ``field`` on ``basis1`` (first axis) times ``basis2`` (second axis)."""
    g = field.grid
    H1 = basis1.table(g.omega)
    H2 = basis2.table(g.omega_prime)
    w1 = _weights(g.n_omega, g.d_omega)
    w2 = _weights(g.n_omega_prime, g.d_omega_prime)
    C = (H1 * w1) @ field.values @ (H2 * w2).T
    recon = H1.T @ C @ H2
    diff = np.abs(field.values - recon) ** 2
    err = math.sqrt(float(w1 @ diff @ w2))
    if warn and err > RECONSTRUCTION_GATE:
        warnings.warn(f"basis truncation ({basis1.count}, {basis2.count}) leaves reconstruction "
                      f"error {err:.2e}", TruncationWarning, stacklevel=2)
    return Projection(C, basis1, basis2, err, H1, H2)


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Schmidt coefficients and modes of a pure two-photon amplitude.

    ``normalized_entropy`` divides the entropy by ``ln(retained)``, where
    ``retained`` is the number of coefficients kept (the smaller basis count).
    """

    lambdas: np.ndarray
    modes1: np.ndarray
    modes2: np.ndarray
    K: float
    entropy_nats: float
    entropy_bits: float
    normalized_entropy: float
    truncation: tuple[int, int]
    reconstruction_error: float = 0.0
    grid: FrequencyGrid | None = None

    def to_dict(self, n_lambdas: int | None = None) -> dict:
        lam = self.lambdas if n_lambdas is None else self.lambdas[:n_lambdas]
        return {"lambdas": [float(x) for x in lam], "schmidt_number": self.K,
                "entropy_nats": self.entropy_nats, "entropy_bits": self.entropy_bits,
                "entropy_normalized": self.normalized_entropy,
                "entropy_normalization": "ln(retained mode count)",
                "truncation": list(self.truncation),
                "reconstruction_error": self.reconstruction_error}

    def save(self, path, n_modes: int = 5) -> list[Path]:
        from .io import write_csv, write_json
        path = Path(path)
        written = [write_json(path, self.to_dict())]
        if self.grid is not None:
            k = min(n_modes, len(self.lambdas))
            cols = [self.grid.omega]
            header = ["omega"]
            for j in range(k):
                cols += [self.modes1[j].real, self.modes1[j].imag]
                header += [f"mode{j}_re", f"mode{j}_im"]
            written.append(write_csv(path.with_name(path.stem + "_modes1.csv"), header, cols))
            cols = [self.grid.omega_prime]
            header[0] = "omega_prime"
            for j in range(k):
                cols += [self.modes2[j].real, self.modes2[j].imag]
            written.append(write_csv(path.with_name(path.stem + "_modes2.csv"), header, cols))
        return written


def schmidt_number(lambdas) -> float:
    lam = np.asarray(lambdas, dtype=float)
    if lam.size == 0:
        raise DomainError("empty Schmidt spectrum")
    p = lam ** 2
    return float(1.0 / np.sum(p * p))


def entanglement_entropy(lambdas) -> tuple[float, float, float]:
    """``(nats, bits, normalized)`` von Neumann entropy of ``lambda_k^2``."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.size == 0:
        raise DomainError("empty Schmidt spectrum")
    p = lam ** 2
    p = p[p > 0]
    s = float(-np.sum(p * np.log(p)))
    s = max(s, 0.0)
    norm = s / math.log(lam.size) if lam.size > 1 else 0.0
    return s, s / math.log(2.0), norm


def schmidt_decompose(C: np.ndarray, modes1: np.ndarray | None = None,
                      modes2: np.ndarray | None = None, reconstruction_error: float = 0.0,
                      grid: FrequencyGrid | None = None) -> SchmidtSpectrum:
    """SVD of a coefficient matrix; ``modesX`` are the basis tables, if any."""
    C = np.asarray(C, dtype=complex)
    if not np.all(np.isfinite(C)):
        raise DomainError("coefficient matrix is not finite")
    U, s, Vh = np.linalg.svd(C, full_matrices=False)
    total = math.sqrt(float(np.sum(s * s)))
    if total == 0:
        raise DomainError("coefficient matrix is zero")
    lam = s / total
    m1 = U.T @ modes1 if modes1 is not None else U.T
    m2 = Vh @ modes2 if modes2 is not None else Vh
    nats, bits, norm = entanglement_entropy(lam)
    return SchmidtSpectrum(lam, m1, m2, schmidt_number(lam), nats, bits, norm,
                           tuple(C.shape), reconstruction_error, grid)


def schmidt_from_field(field: BiphotonField, count: int = DEFAULT_COUNT,
                       bases: tuple[BasisSpec, BasisSpec] | None = None,
                       warn: bool = True) -> SchmidtSpectrum:
    """Normalize, project on Hermite-Gauss bases and decompose."""
    field = field.normalize()
    b1, b2 = bases or auto_bases(field, count)
    proj = project(field, b1, b2, warn=warn)
    return schmidt_decompose(proj.coeffs, proj.modes1, proj.modes2,
                             proj.reconstruction_error, field.grid)


def success_probability_numeric(result, input: BiphotonField | None = None) -> dict:
    """Per-channel probabilities and ``p_success`` from a scattering result."""
    inp = input if input is not None else result.input
    if inp.grid != result.input.grid:
        raise DomainError("input and output live on different grids")
    n_in = inp.norm()
    if n_in <= 0:
        raise DomainError("input field has zero norm")
    probs = {c: result.outputs[c].norm() / n_in for c in ChannelLabel}
    out = {c.key: p for c, p in probs.items()}
    out["p_success"] = sum(p for c, p in probs.items() if c is not inp.channel)
    return out


def success_probability_analytic(r: float) -> float:
    """``3r / (2(1 + r^2))`` with ``r = beta / alpha``."""
    if not r > 0:
        raise DomainError("ratio must be positive")
    return 3.0 * r / (2.0 * (1.0 + r * r))


def distribution_stats(field: BiphotonField) -> dict:
    """Widths of ``|C|^2`` along the collective axes and its ellipse shape.

    ``ellipticity`` is the eccentricity ``sqrt(1 - var_min/var_max)`` of the
    covariance ellipse in the ``(omega, omega')`` plane;
    ``ellipticity_contrast`` is ``(var_max - var_min)/(var_max + var_min)``.
    """
    g = field.grid
    w1 = _weights(g.n_omega, g.d_omega)
    w2 = _weights(g.n_omega_prime, g.d_omega_prime)
    P = field.intensity * np.outer(w1, w2)
    z = P.sum()
    if z <= 0:
        raise DomainError("field has zero norm")
    P = P / z
    W, Wp = g.mesh()
    S, D = to_collective(W, Wp)

    def var(a, b):
        ma, mb = np.sum(P * a), np.sum(P * b)
        return float(np.sum(P * (a - ma) * (b - mb)))

    cov = np.array([[var(W, W), var(W, Wp)], [var(W, Wp), var(Wp, Wp)]])
    ev = np.linalg.eigvalsh(cov)
    if ev[0] < 0 or ev[1] <= 0 or ev[0] <= 1e-30 * ev[1]:
        raise DomainError("degenerate (zero-variance) distribution")
    return {"sigma_sigma": math.sqrt(var(S, S)), "sigma_delta": math.sqrt(var(D, D)),
            "ellipticity": math.sqrt(1.0 - ev[0] / ev[1]),
            "ellipticity_contrast": (ev[1] - ev[0]) / (ev[1] + ev[0])}


SWEEP_COLUMNS = ("ratio", "p_success", "schmidt_number", "entropy_nats",
                 "entropy_normalized", "reconstruction_error")


@dataclass
class SweepTable:
    rows: list[dict]
    diagnostics: dict = field(default_factory=dict)
    extra_columns: tuple[str, ...] = ()

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, math.nan) for r in self.rows], dtype=float)

    def save(self, path) -> Path:
        from .io import fmt
        cols = SWEEP_COLUMNS + self.extra_columns
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(str(r.get(c, "")) if c in self.extra_columns and isinstance(r.get(c), str)
                                  else fmt(r.get(c, math.nan)) for c in cols))
        path = Path(path)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def _sweep_point(input_field: BiphotonField, beta: float, params: PhysicalParams,
                 count: int) -> dict:
    from .coupling import GaussianCoupling
    from .scattering import scatter
    res = scatter(input_field, GaussianCoupling.isotropic(beta, params), params)
    probs = success_probability_numeric(res)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        spec = schmidt_from_field(res[ChannelLabel.MM], count)
    return {"p_success": probs["p_success"], "schmidt_number": spec.K,
            "entropy_nats": spec.entropy_nats, "entropy_normalized": spec.normalized_entropy,
            "reconstruction_error": spec.reconstruction_error}


def _run_sweep(ratios, make_point) -> list[dict]:
    rows = []
    for r in ratios:
        row = {"ratio": float(r)}
        try:
            row.update(make_point(float(r)))
            row["status"] = "ok"
        except (FrengateError, ValueError, np.linalg.LinAlgError) as exc:
            row.update({c: math.nan for c in SWEEP_COLUMNS[1:]})
            row["status"] = f"failed: {exc}"
        rows.append(row)
    return rows


def _k_diagnostics(rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return {"failed_points": len(rows)}
    best = min(ok, key=lambda r: r["schmidt_number"])
    ps = max(ok, key=lambda r: r["p_success"])
    return {"k_min_ratio": best["ratio"], "k_min": best["schmidt_number"],
            "p_max_ratio": ps["ratio"], "p_max": ps["p_success"],
            "failed_points": len(rows) - len(ok)}


def sweep_grid(center: tuple[float, float], widths: Iterable[float], n: int) -> FrequencyGrid:
    half = 6.0 * max(widths)
    return FrequencyGrid.centered(center[0], center[1], half, n)


def tradeoff_sweep(r_values: Sequence[float], params: PhysicalParams, alpha: float,
                   n: int = 512, count: int = DEFAULT_COUNT) -> SweepTable:
    """Success probability and Schmidt metrics against ``r = beta / alpha``."""
    from .scattering import GaussianInput, gaussian_input
    if not params.Gamma > alpha:
        warnings.warn("tradeoff sweep assumes Gamma >> alpha", UserWarning, stacklevel=2)
    spec = GaussianInput.from_params(alpha, params)

    def point(r):
        grid = sweep_grid((params.omega_e, params.omega_b), (alpha, r * alpha), n)
        return _sweep_point(gaussian_input(spec, grid), r * alpha, params, count)

    rows = _run_sweep(r_values, point)
    for row in rows:
        row["p_analytic"] = success_probability_analytic(row["ratio"]) if row["ratio"] > 0 else math.nan
    diag = _k_diagnostics(rows)
    ok = sorted((r for r in rows if r["status"] == "ok"), key=lambda r: r["ratio"])
    K = [r["schmidt_number"] for r in ok]
    rr = [r["ratio"] for r in ok]
    diag["k_decreasing_below_1"] = all(b <= a for a, b, x in zip(K, K[1:], rr[1:]) if x <= 1)
    diag["k_increasing_above_1"] = all(b >= a for a, b, x in zip(K, K[1:], rr) if x >= 1)
    return SweepTable(rows, diag, ("p_analytic",))


def qudit_regime(beta: float, peak_width: float, alpha: float) -> str:
    """Which of the five qualitative output shapes ``beta`` falls in."""
    if abs(math.log(beta / peak_width)) <= math.log(2.0):
        return "peak-matched"
    if abs(math.log(beta / alpha)) <= math.log(2.0):
        return "envelope-matched"
    if beta < peak_width:
        return "anticorrelated"
    if beta > alpha:
        return "correlated"
    return "intermediate"


def qudit_sweep(ratio_values: Sequence[float], params: PhysicalParams, alpha: float,
                filt, n: int = 1024, count: int = DEFAULT_COUNT) -> SweepTable:
    """Sweep ``beta / peak_width`` for a comb-filtered Gaussian input."""
    from .scattering import GaussianInput, comb_filtered_input
    spec = GaussianInput.from_params(alpha, params)

    def point(r):
        beta = r * filt.peak_width
        grid = sweep_grid((params.omega_e, params.omega_b), (alpha, beta), n)
        row = _sweep_point(comb_filtered_input(spec, filt, grid), beta, params, count)
        row["regime"] = qudit_regime(beta, filt.peak_width, alpha)
        return row

    rows = _run_sweep(ratio_values, point)
    for row in rows:
        row.setdefault("regime", "failed")
    return SweepTable(rows, _k_diagnostics(rows), ("regime",))
