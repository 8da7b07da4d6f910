"""Photon couplings of the quantum dot and the derived rates.

Two coupling families feed the scattering map:

* :class:`GaussianCoupling`, an engineered two-photon coupling that depends
  only on the frequency difference and is flat along the frequency sum;
* :class:`PhysicalCoupling`, the adiabatically eliminated two-photon term
  built from a propagation-mode magnitude ``u`` and the two one-photon
  transition paths through the excitons.

Both are callables of ``(omega_sigma, omega_delta)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import DomainError, WindowWarning
from .spectral import ChannelLabel, PhysicalParams, from_collective

DEFAULT_POLE_FLOOR = 1e-9


def pole_floor(alpha: float, beta: float, factor: float = 1e-3) -> float:
    """Smallest admissible one-photon detuning, ``factor * max(alpha, beta)``."""
    return factor * max(alpha, beta)


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """Sampled propagation-mode magnitude ``u(omega) >= 0``."""

    omega: np.ndarray
    u: np.ndarray
    kind: str = "linear"
    _spline: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.omega, dtype=float)
        u = np.array(self.u, dtype=float)
        if w.ndim != 1 or w.shape != u.shape or len(w) < 2:
            raise DomainError("mode samples must be two equal-length 1-D arrays")
        if np.any(np.diff(w) <= 0):
            raise DomainError("mode abscissae must be strictly increasing")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise DomainError("mode magnitude must be finite and non-negative")
        if self.kind not in ("linear", "cubic"):
            raise DomainError(f"unknown interpolation kind {self.kind!r}")
        w.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "u", u)
        if self.kind == "cubic":
            object.__setattr__(self, "_spline", CubicSpline(w, u))

    def __call__(self, omega):
        x = np.asarray(omega, dtype=float)
        span = self.omega[-1] - self.omega[0]
        tol = 1e-12 * span
        if np.any(x < self.omega[0] - tol) or np.any(x > self.omega[-1] + tol):
            raise DomainError("mode profile evaluated outside its sample range")
        x = np.clip(x, self.omega[0], self.omega[-1])
        if self.kind == "linear":
            return np.interp(x, self.omega, self.u)
        # the spline can dip below zero between small samples; u is a magnitude
        return np.maximum(self._spline(x), 0.0)

    @classmethod
    def gaussian(cls, center: float, width: float, omega_min: float, omega_max: float,
                 n: int = 2001, kind: str = "cubic") -> "ModeProfile":
        w = np.linspace(omega_min, omega_max, n)
        return cls(w, GaussianMode(center, width)(w), kind)

    def save(self, path) -> Path:
        from .io import write_csv
        return write_csv(path, ["omega", "u"], [self.omega, self.u])

    @classmethod
    def load(cls, path, kind: str = "linear") -> "ModeProfile":
        from .io import read_csv
        cols = read_csv(path)
        return cls(cols["omega"], cols["u"], kind)


@dataclass(frozen=True)
class GaussianMode:
    """Analytic mode magnitude with ``|u|^2`` of standard deviation ``width``."""

    center: float
    width: float

    def __call__(self, omega):
        x = np.asarray(omega, dtype=float) - self.center
        return np.exp(-x * x / (4.0 * self.width ** 2))


@dataclass(frozen=True)
class GaussianCoupling:
    """Engineered coupling ``g(omega_delta)`` of width ``beta`` and rate ``gamma``."""

    beta: float
    gamma: float
    center: float

    def __post_init__(self):
        if not (self.beta > 0 and self.gamma > 0):
            raise DomainError("Gaussian coupling needs beta > 0 and gamma > 0")

    @classmethod
    def isotropic(cls, beta: float, params: PhysicalParams) -> "GaussianCoupling":
        """Equal rates ``Gamma/4`` on the four channels, centred on ``omega_e - omega_b``."""
        return cls(beta, params.Gamma / 4.0, params.omega_e - params.omega_b)

    def __call__(self, omega_sigma, omega_delta):
        g = gaussian_coupling(self, omega_delta)
        return np.broadcast_to(g, np.broadcast(omega_sigma, omega_delta).shape)


def gaussian_coupling(spec: GaussianCoupling, omega_delta):
    """``sqrt(gamma/pi) * ((2 pi beta^2)^-1 exp(-(d - c)^2 / beta^2))^(1/4)``."""
    x = np.asarray(omega_delta, dtype=float) - spec.center
    b2 = spec.beta ** 2
    return math.sqrt(spec.gamma / math.pi) * (2 * math.pi * b2) ** -0.25 * np.exp(-x * x / (4 * b2))


def _check_detuning(values, floor: float, what: str):
    if floor > 0 and np.any(np.abs(values) < floor):
        raise DomainError(f"{what} detuning below the pole floor {floor:.3g}")


def branch_coupling(params: PhysicalParams, one_photon_g_exc: Callable, one_photon_g_biexc: Callable,
                    omega_prime, omega, floor: float = DEFAULT_POLE_FLOOR):
    """Two-photon term of one exciton branch.

    ``g_biexc(omega') g_exc(omega) [1/(omega - omega_X) - 1/(omega' - (omega_2X - omega_X))]``
    """
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    de = w - params.omega_X
    db = wp - (params.omega_2X - params.omega_X)
    _check_detuning(de, floor, "excitonic")
    _check_detuning(db, floor, "biexcitonic")
    return one_photon_g_biexc(wp) * one_photon_g_exc(w) * (1.0 / de - 1.0 / db)


def two_photon_bracket(params: PhysicalParams, omega_prime, omega,
                       floor: float = DEFAULT_POLE_FLOOR):
    """Four-term bracket combining both transition paths; zero when ``delta_X = 0``."""
    w = np.asarray(omega, dtype=float)
    wp = np.asarray(omega_prime, dtype=float)
    wb = params.omega_X - params.delta_X
    de, dep = w - params.omega_X, wp - params.omega_X
    db, dbp = w - wb, wp - wb
    for d, name in ((de, "excitonic"), (dep, "excitonic"), (db, "biexcitonic"), (dbp, "biexcitonic")):
        _check_detuning(d, floor, name)
    # pair the terms so that the delta_X -> 0 cancellation happens term by term
    return (1.0 / de - 1.0 / db) + (1.0 / dep - 1.0 / dbp)


def combined_coupling(params: PhysicalParams, mode: Callable, omega_prime, omega,
                      floor: float = DEFAULT_POLE_FLOOR):
    """``D u(omega') u(omega)`` times :func:`two_photon_bracket`."""
    bracket = two_photon_bracket(params, omega_prime, omega, floor)
    return params.D * mode(np.asarray(omega_prime)) * mode(np.asarray(omega)) * bracket


@dataclass(frozen=True)
class PhysicalCoupling:
    """Adiabatically eliminated coupling for a given propagation mode."""

    params: PhysicalParams
    mode: Callable
    floor: float = DEFAULT_POLE_FLOOR

    def __call__(self, omega_sigma, omega_delta):
        w, wp = from_collective(np.asarray(omega_sigma, dtype=float), np.asarray(omega_delta, dtype=float))
        return combined_coupling(self.params, self.mode, wp, w, self.floor)


CouplingSpec = Union[GaussianCoupling, PhysicalCoupling]


def channel_couplings(spec) -> dict[ChannelLabel, Callable]:
    """Expand a single coupling to all four channels, or validate a per-channel mapping."""
    if isinstance(spec, Mapping):
        out = {}
        for k, v in spec.items():
            out[k if isinstance(k, ChannelLabel) else ChannelLabel.parse(k)] = v
        return out
    return {c: spec for c in ChannelLabel}


def spectral_function(spec, omega_sigma, omega_delta) -> np.ndarray:
    """``J(omega_sigma) = pi * sum over channels of integral |g|^2 d(omega_delta)``.

    ``omega_delta`` is the uniform quadrature window. A warning is raised when
    the integrand at the window edges suggests a tail mass above 1e-6.
    """
    sig = np.atleast_1d(np.asarray(omega_sigma, dtype=float))
    d = np.asarray(omega_delta, dtype=float)
    total = np.zeros(sig.shape)
    edge = np.zeros(sig.shape)
    for g in channel_couplings(spec).values():
        vals = np.abs(g(sig[:, None], d[None, :])) ** 2
        total += trapezoid(vals, d, axis=1)
        edge += vals[:, 0] + vals[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(total > 0, edge * (d[-1] - d[0]) / total, 0.0)
    if np.any(tail > 1e-6):
        warnings.warn("coupling window truncates the spectral-function integrand", WindowWarning,
                      stacklevel=2)
    J = math.pi * total
    return J if np.ndim(omega_sigma) else float(J[0])


def decay_rate(spec, omega_delta, params: PhysicalParams) -> float:
    """Biexciton decay rate ``Gamma = J(omega_2X)``."""
    return float(spectral_function(spec, params.omega_2X, omega_delta))


def _folded_pv(values: np.ndarray, h: float, k0: int) -> tuple[float, int]:
    n = len(values)
    K = min(k0, n - 1 - k0)
    if K < 1:
        raise DomainError("the pole must have grid points on both sides")
    k = np.arange(1, K + 1)
    fold = np.empty(K + 1)
    fold[1:] = (values[k0 - k] - values[k0 + k]) / (k * h)
    fold[0] = -(values[k0 + 1] - values[k0 - 1]) / h  # limit -2 J'(pole)
    sym = trapezoid(fold, dx=h)
    # leftover one-sided part of the window has no singularity
    if k0 - K > 0:
        rest = trapezoid(values[: k0 - K + 1] / (h * (k0 - np.arange(k0 - K + 1))), dx=h)
    elif k0 + K < n - 1:
        idx = np.arange(k0 + K, n)
        rest = trapezoid(values[idx] / (-h * (idx - k0)), dx=h)
    else:
        rest = 0.0
    return float(sym + rest), K


def principal_value(values, x, pole: float, return_error: bool = False):
    """Cauchy principal value of ``integral values(x) / (pole - x) dx``.

    The grid must be uniform with the pole on a node. Points are paired
    symmetrically about the pole so the singular parts cancel exactly; the
    error estimate compares against the same rule on every other node.
    """
    f = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    h = (x[-1] - x[0]) / (len(x) - 1)
    if np.max(np.abs(np.diff(x) - h)) > 1e-9 * abs(h):
        raise DomainError("principal value needs a uniform grid")
    k0 = int(round((pole - x[0]) / h))
    if not 0 <= k0 < len(x) or abs(x[0] + k0 * h - pole) > 1e-6 * h:
        raise DomainError("the pole must sit on a grid node")
    value, _ = _folded_pv(f, h, k0)
    if not return_error:
        return value
    sub = np.arange(k0 % 2, len(x), 2)
    coarse, _ = _folded_pv(f[sub], 2 * h, int(np.searchsorted(sub, k0)))
    return value, abs(value - coarse) / 3.0


def lamb_shift(spec, params: PhysicalParams, omega_delta, half_width: float,
               n: int = 2001) -> float:
    """Frequency shift ``PV integral J(s) / (omega_2X - s) ds`` around ``omega_2X``."""
    if n % 2 == 0:
        n += 1
    s = np.linspace(params.omega_2X - half_width, params.omega_2X + half_width, n)
    J = spectral_function(spec, s, omega_delta)
    value, err = principal_value(J, s, params.omega_2X, return_error=True)
    if err > 1e-3 * max(abs(value), np.max(np.abs(J)) * 1e-12):
        warnings.warn(f"principal value not converged (error estimate {err:.3g})", WindowWarning,
                      stacklevel=2)
    return value


def l2_norm(g: Callable, omega) -> float:
    """``||g||_2`` on a uniform frequency window (trapezoid)."""
    w = np.asarray(omega, dtype=float)
    return math.sqrt(trapezoid(np.abs(g(w)) ** 2, w))


@dataclass(frozen=True)
class RegimeReport:
    """Bounds on the averaged fast-oscillating terms and the time-scale checks.

    ``margins`` maps each condition to the ratio by which it holds: the
    averaging condition ``T*delta_e``, the linewidth condition
    ``1/(T*bandwidth)`` and the two-photon detuning condition
    ``1/(T*|omega_2X - omega_e - omega_b|)``.
    """

    B1: float
    B2: float
    B3: float
    margins: dict
    factor: float
    fss_ratio: float

    @property
    def passes(self) -> dict:
        return {k: bool(v >= self.factor) for k, v in self.margins.items()}

    @property
    def all_pass(self) -> bool:
        return all(self.passes.values())

    def to_dict(self) -> dict:
        return {"B1": self.B1, "B2": self.B2, "B3": self.B3,
                "margins": {k: (v if math.isfinite(v) else "inf") for k, v in self.margins.items()},
                "passes": self.passes, "all_pass": self.all_pass, "factor": self.factor,
                "fss_over_coupling": self.fss_ratio}


def regime_check(params: PhysicalParams, T: float, coupling_l2_norms: Sequence[float],
                 bandwidths: tuple[float, float], detuning_floor: float,
                 partner_l2_norms: Sequence[float] | None = None,
                 factor: float = 10.0) -> RegimeReport:
    """Evaluate the adiabatic-elimination conditions for an interaction time ``T``.

    ``coupling_l2_norms`` are the norms of the ground-to-exciton couplings
    summed over channels; ``partner_l2_norms`` those of the exciton-to-
    biexciton couplings (defaults to the same list).
    """
    g = np.asarray(coupling_l2_norms, dtype=float)
    gp = g if partner_l2_norms is None else np.asarray(partner_l2_norms, dtype=float)
    if T <= 0 or detuning_floor <= 0 or min(bandwidths) <= 0 or np.any(g < 0) or np.any(gp < 0):
        raise DomainError("regime check needs positive T, bandwidths, detuning floor and norms")
    de = detuning_floor
    r2 = math.sqrt(2.0)
    B1 = 2 * r2 * g.sum() / (T * de)
    B2 = 2 * r2 * g.sum() * gp.sum() / (T * de ** 2)
    B3 = r2 * float(np.sum(2 * params.S * g / (de ** 2 * T) + params.S * g / de))
    two = abs(params.omega_2X - (params.omega_e + params.omega_b))
    margins = {
        "one_photon_averaging": T * de,
        "photon_linewidth": 1.0 / (T * max(bandwidths)),
        "two_photon_detuning": math.inf if two == 0 else 1.0 / (T * two),
    }
    gmin = float(np.min(np.concatenate([g, gp])))
    fss = params.S / gmin if gmin > 0 else math.inf
    return RegimeReport(float(B1), float(B2), float(B3), margins, factor, fss)
