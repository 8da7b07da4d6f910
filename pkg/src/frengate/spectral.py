"""Value types and quadrature shared by every other module.

Frequencies are dimensionless multiples of the biexciton frequency
``omega_2X``; a physical scale is applied only when writing reports.

Array convention: a field on a :class:`FrequencyGrid` is stored as
``values[i, j]`` with ``i`` indexing the photon frequency ``omega`` and
``j`` indexing its partner ``omega_prime``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError, WindowWarning

# Default physical scale: omega_2X = 2*pi*378 THz.
OMEGA_2X_HZ = 378e12


@dataclass(frozen=True)
class PhysicalParams:
    """Emitter and waveguide constants in units of ``omega_2X``.

    ``delta_X`` is the biexciton binding frequency, so that
    ``omega_2X = 2*omega_X - delta_X``. ``D`` is the dipole product (with
    hbar absorbed) and ``tau`` the interaction duration ``t1 - t0``.
    """

    omega_X: float = 0.5025
    delta_X: float = 0.005
    omega_2X: float = 1.0
    S: float = 0.0
    Gamma: float = 1e-5
    D: float = 1.0
    omega_e: float = 0.5026
    omega_b: float = 0.4974
    tau: float = 0.0

    def __post_init__(self):
        for name in ("omega_X", "delta_X", "omega_2X", "S", "Gamma", "D",
                     "omega_e", "omega_b", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.Gamma <= 0:
            raise DomainError("Gamma must be positive")
        if self.delta_X < 0:
            raise DomainError("delta_X must be non-negative")
        expected = 2.0 * self.omega_X - self.delta_X
        if abs(expected - self.omega_2X) > 1e-12 * abs(self.omega_2X):
            raise DomainError(
                f"omega_2X={self.omega_2X!r} differs from 2*omega_X - delta_X={expected!r}")

    @classmethod
    def from_binding(cls, delta_X: float, **kwargs) -> "PhysicalParams":
        """Place the exciton so that ``omega_2X`` stays at its given value (default 1)."""
        omega_2X = kwargs.pop("omega_2X", 1.0)
        return cls(omega_X=(omega_2X + delta_X) / 2.0, delta_X=delta_X,
                   omega_2X=omega_2X, **kwargs)

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform sampling of the ``(omega, omega_prime)`` rectangle."""

    omega_min: float
    omega_max: float
    n_omega: int
    omega_prime_min: float
    omega_prime_max: float
    n_omega_prime: int

    def __post_init__(self):
        if self.n_omega < 2 or self.n_omega_prime < 2:
            raise DomainError("a grid needs at least two points per axis")
        if not (self.omega_max > self.omega_min and self.omega_prime_max > self.omega_prime_min):
            raise DomainError("grid bounds must satisfy max > min on both axes")

    @classmethod
    def centered(cls, omega_c: float, omega_prime_c: float, half_width: float, n: int,
                 half_width_prime: float | None = None,
                 n_prime: int | None = None) -> "FrequencyGrid":
        hp = half_width if half_width_prime is None else half_width_prime
        return cls(omega_c - half_width, omega_c + half_width, int(n),
                   omega_prime_c - hp, omega_prime_c + hp,
                   int(n if n_prime is None else n_prime))

    @cached_property
    def omega(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_omega)

    @cached_property
    def omega_prime(self) -> np.ndarray:
        return np.linspace(self.omega_prime_min, self.omega_prime_max, self.n_omega_prime)

    @property
    def d_omega(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_omega - 1)

    @property
    def d_omega_prime(self) -> float:
        return (self.omega_prime_max - self.omega_prime_min) / (self.n_omega_prime - 1)

    @property
    def cell_area(self) -> float:
        return self.d_omega * self.d_omega_prime

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_omega, self.n_omega_prime)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(omega, omega_prime)`` arrays of shape :attr:`shape`."""
        return np.meshgrid(self.omega, self.omega_prime, indexing="ij")

    def collective(self) -> tuple[np.ndarray, np.ndarray]:
        """``(omega_sigma, omega_delta)`` at every grid cell."""
        w, wp = self.mesh()
        return to_collective(w, wp)

    def has_square_cells(self, rtol: float = 1e-9) -> bool:
        return abs(self.d_omega - self.d_omega_prime) <= rtol * self.d_omega

    def refined(self) -> "FrequencyGrid":
        """The same rectangle with the spacing halved on both axes."""
        return dataclasses.replace(self, n_omega=2 * self.n_omega - 1,
                                   n_omega_prime=2 * self.n_omega_prime - 1)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def default_grid(params: PhysicalParams, alpha: float, beta: float,
                 n: int = 512) -> FrequencyGrid:
    """Square grid around ``(omega_e, omega_b)`` with half-width ``6*max(alpha, beta, Gamma/2)``."""
    half = 6.0 * max(alpha, beta, params.Gamma / 2.0)
    grid = FrequencyGrid.centered(params.omega_e, params.omega_b, half, n)
    finest = min(alpha, beta)
    if grid.d_omega > finest / 2.0:
        warnings.warn(
            f"grid spacing {grid.d_omega:.3g} coarse against the narrowest width {finest:.3g}",
            WindowWarning, stacklevel=2)
    return grid


class ChannelLabel(enum.Enum):
    """Propagation directions ``(mu_prime, mu)`` and the polarizations they imply."""

    PP = ("+", "+", "L", "R")
    MM = ("-", "-", "R", "L")
    MP = ("-", "+", "R", "R")
    PM = ("+", "-", "L", "L")

    @property
    def mu_prime(self) -> str:
        return self.value[0]

    @property
    def mu(self) -> str:
        return self.value[1]

    @property
    def sigma_prime(self) -> str:
        return self.value[2]

    @property
    def sigma(self) -> str:
        return self.value[3]

    @property
    def key(self) -> str:
        return self.mu_prime + self.mu

    @classmethod
    def parse(cls, text: str) -> "ChannelLabel":
        for c in cls:
            if c.key == text or c.name == text:
                return c
        raise DomainError(f"unknown channel {text!r}")


INPUT_CHANNEL = ChannelLabel.PP


@dataclass(frozen=True, eq=False)
class BiphotonField:
    """Joint spectral amplitude sampled on a grid, tagged with its channel."""

    grid: FrequencyGrid
    values: np.ndarray
    channel: ChannelLabel = INPUT_CHANNEL
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise DomainError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field contains NaN or Inf")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.normalized:
            norm = integrate2d(self)
            if abs(norm - 1.0) > 1e-8:
                raise DomainError(f"field flagged normalized but has norm {norm!r}")

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return integrate2d(self)

    def normalize(self) -> "BiphotonField":
        n = self.norm()
        if n <= 0:
            raise DomainError("cannot normalize a zero field")
        return self.with_values(self.values / math.sqrt(n), normalized=True)

    def with_values(self, values, channel: ChannelLabel | None = None,
                    normalized: bool = False) -> "BiphotonField":
        return BiphotonField(self.grid, values, channel or self.channel, normalized, dict(self.meta))


def to_collective(omega, omega_prime):
    """Return ``(omega + omega_prime, omega - omega_prime)``."""
    return omega + omega_prime, omega - omega_prime


def from_collective(omega_sigma, omega_delta):
    """Inverse of :func:`to_collective`."""
    return (omega_sigma + omega_delta) / 2, (omega_sigma - omega_delta) / 2


def trapezoid2d(values: np.ndarray, grid: FrequencyGrid) -> float:
    """Trapezoidal integral of a real array over the grid rectangle."""
    inner = trapezoid(values, dx=grid.d_omega_prime, axis=1)
    return float(trapezoid(inner, dx=grid.d_omega))


def integrate2d(field: BiphotonField) -> float:
    """Trapezoidal ``integral of |C|^2 d(omega) d(omega_prime)``."""
    return trapezoid2d(field.intensity, field.grid)


def lorentzian_emission(omega_sigma, params: PhysicalParams):
    """Re-emission profile ``Gamma / (Gamma/2 + i(omega_2X - omega_sigma))``."""
    G = params.Gamma
    return G / (G / 2 + 1j * (params.omega_2X - np.asarray(omega_sigma)))
