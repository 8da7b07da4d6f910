"""Design of the propagation-mode magnitude ``u`` for a target coupling.

The adiabatically eliminated coupling is ``u(w') u(w) h(w', w)`` with a
fixed non-separable bracket ``h``. Matching a target ``g`` means finding two
vectors whose outer product approximates ``T = g / h`` sampled over the two
photon windows; rows of ``T`` index ``w'``, columns index ``w``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .coupling import DEFAULT_POLE_FLOOR, ModeProfile, two_photon_bracket
from .errors import DomainError
from .spectral import PhysicalParams, to_collective

MAX_ITER = 500
REL_TOL = 1e-12
ILL_POSED = 0.5


def nonseparable_bracket(params: PhysicalParams, omega_prime, omega,
                         floor: float = DEFAULT_POLE_FLOOR):
    """``h(w', w)``: the four-term bracket without ``D`` and the mode product."""
    return two_photon_bracket(params, omega_prime, omega, floor)


@dataclass(frozen=True, eq=False)
class TargetMatrix:
    T: np.ndarray
    omega: np.ndarray
    omega_prime: np.ndarray
    h: np.ndarray
    g: np.ndarray
    provenance: dict = field(default_factory=dict)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.T, compute_uv=False)


def default_windows(params: PhysicalParams, alpha: float,
                    widths: float = 6.0) -> tuple[tuple[float, float], tuple[float, float]]:
    """``(omega window, omega' window)`` of half-width ``widths * alpha`` around the input centres."""
    hw = widths * alpha
    return ((params.omega_e - hw, params.omega_e + hw), (params.omega_b - hw, params.omega_b + hw))


def build_target(params: PhysicalParams, g_target: Callable, windows, n: int = 200,
                 floor: float = DEFAULT_POLE_FLOOR) -> TargetMatrix:
    """Sample ``T[i, j] = g(w_j, w'_i) / h(w'_i, w_j)``.

    ``g_target`` is called with collective coordinates ``(omega_sigma, omega_delta)``.
    """
    (lo, hi), (lop, hip) = windows
    w = np.linspace(lo, hi, n)
    wp = np.linspace(lop, hip, n)
    WP, W = np.meshgrid(wp, w, indexing="ij")
    h = nonseparable_bracket(params, WP, W, floor)
    if np.any(h == 0):
        raise DomainError("bracket vanishes inside the windows (is delta_X zero?)")
    S, D = to_collective(W, WP)
    g = np.real_if_close(np.asarray(g_target(S, D)) * np.ones_like(W))
    if np.iscomplexobj(g):
        raise DomainError("target coupling must be real")
    T = g / h
    if not np.all(np.isfinite(T)):
        raise DomainError("target matrix is not finite")
    return TargetMatrix(T, w, wp, h, g, {"n": n, "windows": [[lo, hi], [lop, hip]]})


def _canonical_sign(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.sum(a < 0) + np.sum(b < 0) > np.sum(a > 0) + np.sum(b > 0):
        return -a, -b
    return a, b


def rank1_init(T) -> tuple[np.ndarray, np.ndarray]:
    """``(u, u')`` from the leading singular triplet of ``T``."""
    M = T.T if isinstance(T, TargetMatrix) else np.asarray(T, dtype=float)
    V, s, Wt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        raise DomainError("target matrix is zero")
    u = math.sqrt(s[0]) * Wt[0]
    up = math.sqrt(s[0]) * V[:, 0]
    return _canonical_sign(u, up)


def _residual(T, u, up, norm_T) -> float:
    return float(np.linalg.norm(np.outer(up, u) - T) / norm_T)


def pearson(a, b) -> float:
    a = np.asarray(a, float) - np.mean(a)
    b = np.asarray(b, float) - np.mean(b)
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b / den) if den > 0 else 0.0


@dataclass(frozen=True, eq=False)
class ModeSolution:
    """Nonnegative ``u`` on the ``omega`` window and ``u_prime`` on the ``omega'`` window."""

    u: np.ndarray
    u_prime: np.ndarray
    omega: np.ndarray
    omega_prime: np.ndarray
    residual: float
    history: np.ndarray
    iterations: int
    gauge: dict
    sigma_head: np.ndarray
    ill_posed: bool = False

    @property
    def product(self) -> np.ndarray:
        """``u'_i u_j``, laid out like the target matrix."""
        return np.outer(self.u_prime, self.u)

    @property
    def correlation(self) -> float:
        """Pearson correlation of ``u`` and ``u'`` sampled in window order."""
        return pearson(self.u, self.u_prime)

    @property
    def anticorrelated(self) -> bool:
        return self.correlation < 0

    def metrics(self) -> dict:
        s = self.sigma_head
        return {"residual": self.residual, "iterations": self.iterations,
                "initial_residual": float(self.history[0]),
                "rank1_residual_bound": float(math.sqrt(max(np.sum(s[1:] ** 2), 0.0)) /
                                              math.sqrt(float(np.sum(s ** 2)))),
                "sigma_head": [float(x) for x in s[:8]], "gauge": self.gauge,
                "correlation": self.correlation, "anticorrelated": self.anticorrelated,
                "ill_posed": self.ill_posed}

    def save(self, directory) -> list[Path]:
        from .io import write_csv, write_json
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        return [write_csv(d / "mode_omega.csv", ["omega", "u"], [self.omega, self.u]),
                write_csv(d / "mode_omega_prime.csv", ["omega", "u"], [self.omega_prime, self.u_prime]),
                write_json(d / "mode_metrics.json", self.metrics())]


def refine(target: TargetMatrix, init: tuple[np.ndarray, np.ndarray] | None = None,
           max_iter: int = MAX_ITER, rel_tol: float = REL_TOL) -> ModeSolution:
    """Nonnegative alternating least squares on ``||u' u^T - T||_F``.

    Each half-step is the exact minimizer over one vector with the other
    fixed (a clamped one-dimensional quadratic per entry), so the residual
    never increases.
    """
    T = target.T
    norm_T = float(np.linalg.norm(T))
    if norm_T == 0:
        raise DomainError("target matrix is zero")
    s = target.singular_values()
    u, up = init if init is not None else rank1_init(target)
    u = np.maximum(np.asarray(u, dtype=float), 0.0)
    up = np.maximum(np.asarray(up, dtype=float), 0.0)
    if not (np.any(u > 0) and np.any(up > 0)):
        raise DomainError("no nonnegative rank-one fit: the target has the opposite sign to the bracket "
                          "(flip the sign of D) or the initial guess is non-positive")
    hist = [_residual(T, u, up, norm_T)]
    it = 0
    for it in range(1, max_iter + 1):
        u = np.maximum(T.T @ up / float(up @ up), 0.0)
        if not np.any(u > 0):
            break
        up = np.maximum(T @ u / float(u @ u), 0.0)
        if not np.any(up > 0):
            break
        r = _residual(T, u, up, norm_T)
        prev = hist[-1]
        hist.append(r)
        if prev == 0 or (prev - r) / prev < rel_tol:
            break
    nu, nup = float(np.linalg.norm(u)), float(np.linalg.norm(up))
    if nu == 0 or nup == 0:
        raise DomainError("refinement collapsed to zero")
    c = math.sqrt(nup / nu)
    u, up = u * c, up / c
    res = _residual(T, u, up, norm_T)
    bad = res > ILL_POSED
    if bad:
        warnings.warn(f"mode refinement stagnated at residual {res:.3f}; target is ill-posed",
                      UserWarning, stacklevel=2)
    return ModeSolution(u, up, target.omega, target.omega_prime, res, np.array(hist), it,
                        {"norm_u": float(np.linalg.norm(u)), "norm_u_prime": float(np.linalg.norm(up)),
                         "rule": "equal L2 norms"}, s, bad)


@dataclass(frozen=True)
class PiecewiseProfile:
    """Mode profile stitched from per-window interpolants; undefined between windows."""

    pieces: tuple[ModeProfile, ...]
    overlap_disagreement: float = 0.0

    def __call__(self, omega):
        x = np.asarray(omega, dtype=float)
        out = np.full(x.shape, np.nan)
        for p in self.pieces:
            m = (x >= p.omega[0]) & (x <= p.omega[-1]) & np.isnan(out)
            if np.any(m):
                out[m] = p(x[m])
        if np.any(np.isnan(out)):
            raise DomainError("mode profile evaluated outside the optimized windows")
        return out if out.ndim else float(out)

    @property
    def omega(self) -> np.ndarray:
        return np.concatenate([p.omega for p in self.pieces])

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([p.u for p in self.pieces])

    def save(self, path) -> Path:
        from .io import write_csv
        return write_csv(path, ["omega", "u"], [self.omega, self.u])


def interpolate_profile(solution: ModeSolution, kind: str = "cubic"):
    """Turn the two window solutions into one callable profile."""
    a = ModeProfile(solution.omega_prime, solution.u_prime, kind)
    b = ModeProfile(solution.omega, solution.u, kind)
    if a.omega[0] > b.omega[0]:
        a, b = b, a
    lo, hi = b.omega[0], a.omega[-1]
    if lo > hi:
        return PiecewiseProfile((a, b))
    # overlapping windows: compare, then merge samples by averaging both interpolants
    xs = np.union1d(a.omega, b.omega)
    inside = (xs >= lo) & (xs <= hi)
    va, vb = a(xs[inside]), b(xs[inside])
    scale = max(float(np.max(a.u)), float(np.max(b.u)), 1e-300)
    dis = float(np.max(np.abs(va - vb)) / scale) if inside.any() else 0.0
    if dis > 0.05:
        warnings.warn(f"overlapping windows disagree by {dis:.1%}", UserWarning, stacklevel=2)
    vals = np.empty_like(xs)
    vals[xs < lo] = a(xs[xs < lo])
    vals[xs > hi] = b(xs[xs > hi])
    vals[inside] = (va + vb) / 2
    return PiecewiseProfile((ModeProfile(xs, vals, kind),), dis)


def reconstructed_coupling(params: PhysicalParams, solution: ModeSolution,
                           floor: float = DEFAULT_POLE_FLOOR) -> np.ndarray:
    """``u'(w'_i) u(w_j) h(w'_i, w_j)`` on the solution's sample grid."""
    WP, W = np.meshgrid(solution.omega_prime, solution.omega, indexing="ij")
    return solution.product * nonseparable_bracket(params, WP, W, floor)
