"""Spontaneous decay of the biexciton into a discretized waveguide continuum.

The state lives in the at-most-two-photon sector with one polarization per
transition branch::

    c                 amplitude of |2X; vac>
    x[s, l]           amplitude of |X_s; omega_l>,   s in (+, -)
    phi[k, l]         symmetric two-photon amplitude, the state being
                      (1/sqrt 2) sum_kl phi[k, l] a_k^+ a_l^+ |0>

so that ``P_0 = sum |phi|^2``. Couplings carry the quadrature weight
``sqrt(d omega)`` so results converge as the grid is refined. Energies are
taken relative to ``omega_2X``; this is a global phase and leaves every
population unchanged.
"""

from __future__ import annotations

import dataclasses
import math
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coupling import ModeProfile
from .errors import ConfigError, ConvergenceError, DomainError
from .spectral import PhysicalParams

RK4_STABILITY = 2.5
DRIFT_ABORT = 1e-5


@dataclass(frozen=True)
class DecayCoupling:
    """``g(omega) = g0 sqrt(omega) u(omega)`` shared by every transition.

    ``u`` is a Gaussian ``exp(-(omega - center)^2 / (4 bandwidth^2))`` unless
    a sampled ``profile`` is given.
    """

    g0: float
    center: float
    bandwidth: float
    profile: ModeProfile | None = None

    def __post_init__(self):
        if self.g0 < 0 or not math.isfinite(self.g0):
            raise ConfigError("g0 must be finite and non-negative")
        if not self.bandwidth > 0:
            raise ConfigError("mode bandwidth must be positive")

    def mode(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        if self.profile is not None:
            return self.profile(w)
        return np.exp(-(w - self.center) ** 2 / (4 * self.bandwidth ** 2))

    def __call__(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        return self.g0 * np.sqrt(w) * self.mode(w)


@dataclass(frozen=True)
class DecayConfig:
    params: PhysicalParams
    coupling: DecayCoupling
    n_freq: int = 400
    freq_window: tuple[float, float] | None = None
    t_max: float = 3e5
    step: float = 25.0
    record_every: int = 1
    window_widths: float = 7.0

    def __post_init__(self):
        if self.n_freq < 50:
            raise ConfigError("n_freq must be at least 50")
        if not (self.step > 0 and self.t_max > 0):
            raise ConfigError("step and t_max must be positive")
        if self.record_every < 1:
            raise ConfigError("record_every must be at least 1")
        lo, hi = self.window
        if not hi > lo:
            raise ConfigError("frequency window must have hi > lo")
        c, bw = self.coupling.center, self.coupling.bandwidth
        if c - 3 * bw < lo or c + 3 * bw > hi:
            raise ConfigError("frequency window does not contain the emission bandwidth")

    @property
    def window(self) -> tuple[float, float]:
        if self.freq_window is not None:
            return tuple(self.freq_window)
        mid = self.params.omega_2X / 2
        half = self.window_widths * self.coupling.bandwidth
        return (mid - half, mid + half)

    @property
    def omega(self) -> np.ndarray:
        lo, hi = self.window
        return np.linspace(lo, hi, self.n_freq)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.step))

    @property
    def state_dimension(self) -> int:
        """Independent amplitudes: ``1 + 2N + N(N+1)/2``."""
        n = self.n_freq
        return 1 + 2 * n + n * (n + 1) // 2

    def replace(self, **changes) -> "DecayConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        lo, hi = self.window
        return {"params": self.params.to_dict(), "g0": self.coupling.g0,
                "mode_center": self.coupling.center, "bandwidth": self.coupling.bandwidth,
                "n_freq": self.n_freq, "freq_window": [lo, hi], "t_max": self.t_max,
                "step": self.step, "record_every": self.record_every}


# g0 fitted jointly to the reported decay rate, peak and plateau of P_X
# (log least squares using Gamma ~ g0^4, P_X ~ g0^2 from an N=400 reference run).
ADIABATIC_G0 = 0.011446
RESONANT_G0 = 4e-4


def preset(name: str, n_freq: int = 400) -> DecayConfig:
    """Bundled regimes: ``"adiabatic"`` and ``"resonant"``."""
    if name == "adiabatic":
        params = PhysicalParams.from_binding(0.005, S=1e-5)
        coupling = DecayCoupling(ADIABATIC_G0, params.omega_X - params.delta_X / 2, 2.5e-4)
        return DecayConfig(params, coupling, n_freq=n_freq, t_max=3e5, step=25.0, record_every=4)
    if name == "resonant":
        # binding shrunk so both one-photon lines fall inside the mode; centring the mode
        # between them equalizes the two rates and caps P_X at 1/e, so the centre leans
        # toward the biexciton line by delta_X / 8
        params = PhysicalParams.from_binding(5e-5, S=1e-5)
        center = params.omega_X - params.delta_X / 2 - params.delta_X / 8
        coupling = DecayCoupling(RESONANT_G0, center, 2.5e-5)
        return DecayConfig(params, coupling, n_freq=n_freq, t_max=6e6, step=2000.0,
                           record_every=5, window_widths=4.0)
    raise ConfigError(f"unknown decay preset {name!r}")


PRESETS = ("adiabatic", "resonant")


def sector_hamiltonian(params: PhysicalParams, coupling, omega_i: float, omega_j: float,
                       convention: str = "first") -> np.ndarray:
    """6x6 Hamiltonian of one frequency sector in the lab frame.

    Basis: ``|0; w_i, w_j>, |X+; w_i>, |X-; w_i>, |X+; w_j>, |X-; w_j>, |2X>``.
    ``coupling`` is one callable for every transition or a mapping with keys
    ``"0X+", "0X-", "X+2X", "X-2X"``.

    ``convention="first"`` couples ``|0; w_i, w_j>`` to ``|X; w_i>`` through
    ``g(w_i)``; ``"emitted"`` uses the frequency of the photon actually
    emitted, ``g(w_j)``, which is the form the time evolution uses.
    """
    if convention not in ("first", "emitted"):
        raise DomainError(f"unknown convention {convention!r}")
    if callable(coupling):
        g = {k: coupling for k in ("0X+", "0X-", "X+2X", "X-2X")}
    else:
        g = dict(coupling)
    p = params
    H = np.zeros((6, 6), dtype=complex)
    H[0, 0] = omega_i + omega_j
    H[1, 1] = H[2, 2] = omega_i + p.omega_X
    H[3, 3] = H[4, 4] = omega_j + p.omega_X
    H[5, 5] = 2 * p.omega_X - p.delta_X
    a, b = (omega_i, omega_j) if convention == "first" else (omega_j, omega_i)
    H[0, 1], H[0, 2] = g["0X+"](a), g["0X-"](a)
    H[0, 3], H[0, 4] = g["0X+"](b), g["0X-"](b)
    H[1, 2] = H[3, 4] = p.S
    H[1, 5], H[2, 5] = g["X+2X"](omega_i), g["X-2X"](omega_i)
    H[3, 5], H[4, 5] = g["X+2X"](omega_j), g["X-2X"](omega_j)
    iu = np.triu_indices(6, 1)
    H[(iu[1], iu[0])] = np.conj(H[iu])
    return H


class _Generator:
    """``d/dt state = -i H state`` for the discretized model."""

    def __init__(self, config: DecayConfig):
        p = config.params
        w = config.omega
        dw = w[1] - w[0]
        self.omega = w
        self.G = config.coupling(w) * math.sqrt(dw)
        self.F = self.G
        self.Ex = p.omega_X + w - p.omega_2X
        self.E0 = w[:, None] + w[None, :] - p.omega_2X
        self.S = p.S
        self.mE0 = -1j * self.E0
        self.r2 = math.sqrt(2.0)
        n = len(w)
        self._A = np.empty((n, n), dtype=complex)

    def spectral_radius(self) -> float:
        gn = float(np.linalg.norm(self.G))
        return float(np.max(np.abs(self.E0))) + abs(self.S) + 4 * gn

    def __call__(self, c, X, P, dX, dP) -> complex:
        xs = X[0] + X[1]
        PG = P @ self.G
        dc = -1j * (self.F @ xs)
        np.multiply(self.F, c, out=dX[0])
        dX[0] += self.r2 * PG
        dX[1] = dX[0]
        dX[0] += self.Ex * X[0] + self.S * X[1]
        dX[1] += self.Ex * X[1] + self.S * X[0]
        dX *= -1j
        np.multiply.outer(self.G, xs, out=self._A)
        np.add(self._A, self._A.T, out=dP)
        dP *= -1j / self.r2
        dP += self.mE0 * P
        return dc

    def energy(self, c, X, P) -> float:
        """``<psi|H|psi>`` in the rotating frame."""
        dX = np.empty_like(X)
        dP = np.empty_like(P)
        dc = self(c, X, P, dX, dP)
        return float((np.conj(c) * 1j * dc + np.vdot(X, 1j * dX) + np.vdot(P, 1j * dP)).real)


@dataclass(eq=False)
class DecayTrajectory:
    times: np.ndarray
    p0: np.ndarray
    px: np.ndarray
    p2x: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    config: DecayConfig | None = None
    runtime: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def max_px(self) -> float:
        return float(np.max(self.px))

    def plateau_px(self, fraction: float = 0.1) -> float:
        """Mean ``P_X`` over the last ``fraction`` of the run."""
        n = max(1, int(len(self.px) * fraction))
        return float(np.mean(self.px[-n:]))

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    def fit(self) -> "DecayFit":
        return fit_decay_rate(self)

    def summary(self) -> dict:
        out = {"max_px": self.max_px, "plateau_px": self.plateau_px(),
               "norm_drift": self.norm_drift, "runtime_s": self.runtime,
               "p2x_final": float(self.p2x[-1])}
        try:
            f = self.fit()
            out.update({"gamma_fit": f.gamma, "fit_residual": f.residual,
                        "fit_monotone": f.monotone})
        except DomainError as exc:
            out.update({"gamma_fit": math.nan, "fit_error": str(exc)})
        if self.config is not None:
            out["config"] = self.config.to_dict()
        return out

    def save_csv(self, path) -> Path:
        from .io import write_csv
        return write_csv(path, ["t", "p0", "px", "p2x", "norm"],
                         [self.times, self.p0, self.px, self.p2x, self.norm])


def evolve(config: DecayConfig, check_every: int = 100) -> DecayTrajectory:
    """Integrate from ``|2X; vac>`` with fixed-step RK4."""
    gen = _Generator(config)
    h = config.step
    rho = gen.spectral_radius()
    if h * rho > RK4_STABILITY:
        raise ConfigError(f"step {h:g} exceeds the RK4 stability bound {RK4_STABILITY / rho:.4g}")
    n = config.n_freq
    c = 1.0 + 0j
    X = np.zeros((2, n), dtype=complex)
    P = np.zeros((n, n), dtype=complex)
    kX = [np.empty((2, n), dtype=complex) for _ in range(4)]
    kP = [np.empty((n, n), dtype=complex) for _ in range(4)]
    tX = np.empty((2, n), dtype=complex)
    tP = np.empty((n, n), dtype=complex)
    rec = []
    steps = config.n_steps
    t0 = _time.perf_counter()

    def record(k):
        p2 = abs(c) ** 2
        px = float(np.vdot(X, X).real)
        p0 = float(np.vdot(P, P).real)
        rec.append((k * h, p0, px, p2, p0 + px + p2, gen.energy(c, X, P)))

    for k in range(steps + 1):
        if k % config.record_every == 0 or k == steps:
            record(k)
        if k % check_every == 0:
            drift = abs(abs(c) ** 2 + np.vdot(X, X).real + np.vdot(P, P).real - 1.0)
            if drift > DRIFT_ABORT:
                raise ConvergenceError(
                    f"norm drift {drift:.2e} at t={k * h:g}; reduce the step below {h:g}")
        if k == steps:
            break
        k1 = gen(c, X, P, kX[0], kP[0])
        np.multiply(kX[0], h / 2, out=tX); tX += X
        np.multiply(kP[0], h / 2, out=tP); tP += P
        k2 = gen(c + h / 2 * k1, tX, tP, kX[1], kP[1])
        np.multiply(kX[1], h / 2, out=tX); tX += X
        np.multiply(kP[1], h / 2, out=tP); tP += P
        k3 = gen(c + h / 2 * k2, tX, tP, kX[2], kP[2])
        np.multiply(kX[2], h, out=tX); tX += X
        np.multiply(kP[2], h, out=tP); tP += P
        k4 = gen(c + h * k3, tX, tP, kX[3], kP[3])
        c = c + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        kX[1] += kX[2]
        kX[1] *= 2
        kX[1] += kX[0]
        kX[1] += kX[3]
        X += h / 6 * kX[1]
        kP[1] += kP[2]
        kP[1] *= 2
        kP[1] += kP[0]
        kP[1] += kP[3]
        kP[1] *= h / 6
        P += kP[1]
    arr = np.array(rec).T
    traj = DecayTrajectory(*arr, config=config, runtime=_time.perf_counter() - t0)
    if traj.norm_drift > DRIFT_ABORT:
        raise ConvergenceError(f"norm drift {traj.norm_drift:.2e}; reduce the step below {h:g}")
    return traj


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    residual: float
    monotone: bool
    n_points: int


def fit_decay_rate(trajectory, p2x=None, lo: float = 0.1, hi: float = 0.9) -> DecayFit:
    """Least-squares slope of ``-ln P_2X`` where ``lo <= P_2X <= hi``.

    Accepts a :class:`DecayTrajectory` or ``(times, p2x)`` arrays.
    """
    if p2x is None:
        t, p = np.asarray(trajectory.times), np.asarray(trajectory.p2x)
    else:
        t, p = np.asarray(trajectory, dtype=float), np.asarray(p2x, dtype=float)
    m = (p >= lo) & (p <= hi)
    if m.sum() < 3:
        raise DomainError("fewer than three samples with 0.1 <= P_2X <= 0.9")
    tt, yy = t[m], np.log(p[m])
    monotone = bool(np.all(np.diff(p[m]) < 0))
    A = np.vstack([tt, np.ones_like(tt)]).T
    coef, *_ = np.linalg.lstsq(A, yy, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - yy) ** 2)))
    return DecayFit(float(-coef[0]), resid, monotone, int(m.sum()))


def calibrate_g0(reference: DecayTrajectory, target_gamma: float = 1e-5,
                 target_max_px: float | None = None,
                 target_plateau_px: float | None = None) -> float:
    """Rescale the reference run's ``g0`` to hit the given targets.

    Uses ``Gamma ~ g0^4`` and ``P_X ~ g0^2``; with several targets the
    squared log errors are minimized jointly.
    """
    if reference.config is None:
        raise DomainError("reference trajectory carries no config")
    g_ref = reference.config.coupling.g0
    terms = [(2.0, math.log(fit_decay_rate(reference).gamma / target_gamma))]
    if target_max_px is not None:
        terms.append((1.0, math.log(reference.max_px / target_max_px)))
    if target_plateau_px is not None:
        terms.append((1.0, math.log(reference.plateau_px() / target_plateau_px)))
    x = -sum(a * b for a, b in terms) / sum(a * a for a, _ in terms)
    return g_ref * math.exp(x / 2)


def px_bound(config: DecayConfig) -> float:
    """Order-of-magnitude ceiling ``2 (||g|| / delta_e)^2`` on the time-averaged ``P_X``.

    ``delta_e`` is the distance from the mode centre to the nearest one-photon line.
    """
    gen = _Generator(config)
    p = config.params
    c = config.coupling.center
    delta_e = min(abs(c - p.omega_X), abs(c - (p.omega_2X - p.omega_X)))
    if delta_e == 0:
        return math.inf
    return 2.0 * float(np.sum(gen.G ** 2)) / delta_e ** 2
