"""Two-photon inputs and the Markovian scattering map.

The map acts row by row in the frequency sum: every output channel picks up
``-pi g_c^*(S, D) / (Gamma/2 + i(omega_2X - S)) * A(S)`` where
``A(S) = integral g_in(S, D') C_in(S, D') dD'``, and the input channel keeps
its incoming amplitude on top of that.

On a grid with square cells the lines of constant ``omega_sigma`` are the
anti-diagonals ``i + j = k``, along which ``omega_delta`` steps by ``2h``.
The ``D'`` integral is therefore a weighted anti-diagonal sum, which
keeps the whole map at O(N^2).

Amplitude normalization: the closed forms are normalized in the
collective measure ``dS dD``; fields here are normalized in ``d(omega)
d(omega')``, which is half of it, so closed-form amplitudes carry an extra
factor ``sqrt(2)`` (:data:`COLLECTIVE_TO_PLANE`). Probability ratios are
unaffected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.special import erf

from .coupling import GaussianCoupling, PhysicalCoupling, channel_couplings
from .errors import DomainError, TruncationWarning, WindowWarning
from .spectral import (INPUT_CHANNEL, BiphotonField, ChannelLabel, FrequencyGrid,
                       PhysicalParams, lorentzian_emission)

COLLECTIVE_TO_PLANE = math.sqrt(2.0)


@dataclass(frozen=True)
class GaussianInput:
    """Separable, isotropic Gaussian photon pair of width ``alpha``."""

    alpha: float
    omega_e: float
    omega_b: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    @classmethod
    def from_params(cls, alpha: float, params: PhysicalParams) -> "GaussianInput":
        return cls(alpha, params.omega_e, params.omega_b)

    @property
    def channel(self) -> ChannelLabel:
        return INPUT_CHANNEL


def _gaussian_collective(spec: GaussianInput, S, D):
    a2 = spec.alpha ** 2
    s = spec.omega_e + spec.omega_b
    d = spec.omega_e - spec.omega_b
    return (2 * math.pi * a2) ** -0.5 * np.exp(-(S - s) ** 2 / (4 * a2)) * np.exp(-(D - d) ** 2 / (4 * a2))


def gaussian_window_mass(spec: GaussianInput, grid: FrequencyGrid) -> float:
    """Fraction of the input's ``|C|^2`` that lies inside the grid rectangle."""
    a = spec.alpha

    def inside(lo, hi, c):
        return 0.5 * (erf((hi - c) / a) - erf((lo - c) / a))

    return inside(grid.omega_min, grid.omega_max, spec.omega_e) * \
        inside(grid.omega_prime_min, grid.omega_prime_max, spec.omega_b)


def gaussian_input(spec: GaussianInput, grid: FrequencyGrid) -> BiphotonField:
    """Sample the Gaussian pair and renormalize it on the grid."""
    tail = 1.0 - gaussian_window_mass(spec, grid)
    if tail > 1e-9:
        warnings.warn(f"grid window misses {tail:.2e} of the input probability", WindowWarning,
                      stacklevel=2)
    S, D = grid.collective()
    field = BiphotonField(grid, COLLECTIVE_TO_PLANE * _gaussian_collective(spec, S, D), INPUT_CHANNEL)
    return field.normalize()


@dataclass(frozen=True)
class CombFilter:
    """Cavity transmission approximated by Gaussian peaks of width ``peak_width``.

    ``n_range`` is the number of peaks kept on each side of the one nearest
    the window centre; ``None`` picks ``ceil(half_width / fsr) + 3``.
    """

    fsr: float
    peak_width: float
    n_range: int | None = None
    shift_to_centers: bool = True

    def __post_init__(self):
        if not (self.fsr > 0 and self.peak_width > 0):
            raise DomainError("comb filter needs positive fsr and peak width")
        if self.fsr < 5 * self.peak_width:
            warnings.warn("comb filter outside the high-finesse regime (fsr < 5 peak widths)",
                          UserWarning, stacklevel=2)

    def resolved_range(self, half_width: float) -> int:
        if self.n_range is not None:
            return int(self.n_range)
        return int(math.ceil(half_width / self.fsr)) + 3

    def indices(self, center: float, window_center: float, half_width: float) -> np.ndarray:
        n0 = int(round((window_center - center) / self.fsr))
        R = self.resolved_range(half_width)
        return np.arange(n0 - R, n0 + R + 1)

    def profile(self, omega, center: float, window_center: float, half_width: float) -> np.ndarray:
        """``f(omega) = sum_n exp(-(omega - center - n fsr)^2 / (2 peak_width^2))``."""
        w = np.asarray(omega, dtype=float)
        n = self.indices(center, window_center, half_width)
        x = (w[..., None] - center) - n * self.fsr
        return np.exp(-x * x / (2 * self.peak_width ** 2)).sum(axis=-1)


def _filter_centers(filt: CombFilter, centers: tuple[float, float]) -> tuple[float, float]:
    return centers if filt.shift_to_centers else (0.0, 0.0)


def apply_comb_filter(field: BiphotonField, filt: CombFilter,
                      centers: tuple[float, float] | None = None) -> BiphotonField:
    """Multiply by ``f(omega) f(omega')``; the result is left unnormalized.

    ``centers`` are the comb offsets used by the shifted variant; they
    default to the middle of each grid axis.
    """
    g = field.grid
    mid = ((g.omega_min + g.omega_max) / 2, (g.omega_prime_min + g.omega_prime_max) / 2)
    c1, c2 = _filter_centers(filt, centers or mid)
    f1 = filt.profile(g.omega, c1, mid[0], (g.omega_max - g.omega_min) / 2)
    f2 = filt.profile(g.omega_prime, c2, mid[1], (g.omega_prime_max - g.omega_prime_min) / 2)
    out = field.with_values(field.values * f1[:, None] * f2[None, :])
    out.meta.update({"comb_fsr": filt.fsr, "comb_peak_width": filt.peak_width,
                     "comb_centers": [c1, c2]})
    return out


@dataclass(frozen=True, eq=False)
class ScatterResult:
    """Output amplitudes on the four channels for one input."""

    outputs: Mapping[ChannelLabel, BiphotonField]
    input: BiphotonField
    params: PhysicalParams
    meta: dict = field(default_factory=dict)

    def __getitem__(self, channel) -> BiphotonField:
        if not isinstance(channel, ChannelLabel):
            channel = ChannelLabel.parse(channel)
        return self.outputs[channel]

    def probabilities(self) -> dict[ChannelLabel, float]:
        n_in = self.input.norm()
        if n_in <= 0:
            raise DomainError("input field has zero norm")
        return {c: f.norm() / n_in for c, f in self.outputs.items()}

    def save(self, directory, extra: Mapping | None = None) -> list[Path]:
        from .io import save_field, write_json
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        probs = self.probabilities()
        for c in ChannelLabel:
            if c in self.outputs:
                written.extend(save_field(self.outputs[c], directory / f"output_{c.name}.csv"))
        summary = {"probabilities": {c.key: p for c, p in probs.items()},
                   "p_success": sum(p for c, p in probs.items() if c is not self.input.channel),
                   "params": self.params.to_dict(), "grid": self.input.grid.to_dict()}
        summary.update({k: v for k, v in self.meta.items() if not callable(v)})
        if extra:
            summary.update(extra)
        written.append(write_json(directory / "scatter.json", summary))
        return written


def _antidiagonal_weights(n1: int, n2: int) -> np.ndarray:
    # trapezoid along every anti-diagonal: the two end cells lie on the boundary
    w = np.ones((n1, n2))
    w[0, :] = w[-1, :] = 0.5
    w[:, 0] = w[:, -1] = 0.5
    return w


def sum_index(grid: FrequencyGrid) -> np.ndarray:
    """Anti-diagonal index ``k = i + j`` of every cell."""
    return np.add.outer(np.arange(grid.n_omega), np.arange(grid.n_omega_prime))


def sigma_rows(grid: FrequencyGrid) -> np.ndarray:
    """``omega_sigma`` value of each anti-diagonal."""
    return grid.omega_min + grid.omega_prime_min + grid.d_omega * np.arange(grid.n_omega + grid.n_omega_prime - 1)


def line_integral(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """``integral values d(omega_delta)`` along each constant-``omega_sigma`` line."""
    k = sum_index(grid).ravel()
    w = (values * _antidiagonal_weights(*grid.shape)).ravel()
    nrows = grid.n_omega + grid.n_omega_prime - 1
    re = np.bincount(k, weights=w.real, minlength=nrows)
    if np.iscomplexobj(w):
        re = re + 1j * np.bincount(k, weights=w.imag, minlength=nrows)
    return 2.0 * grid.d_omega * re


def scatter(input: BiphotonField, coupling, params: PhysicalParams,
            grid: FrequencyGrid | None = None) -> ScatterResult:
    """Apply the scattering map to a pair entering on ``input.channel``.

    ``coupling`` is one coupling for all four channels or a mapping from
    channel to coupling.
    """
    grid = grid or input.grid
    if grid != input.grid:
        raise DomainError("input field is not sampled on the requested grid")
    if not grid.has_square_cells():
        raise DomainError("the scattering map needs equal spacing on both frequency axes")
    S, D = grid.collective()
    couplings = channel_couplings(coupling)
    cache: dict[int, np.ndarray] = {}
    g = {}
    for c, spec in couplings.items():
        if id(spec) not in cache:
            cache[id(spec)] = np.asarray(spec(S, D), dtype=complex) * np.ones(grid.shape)
        g[c] = cache[id(spec)]
    gin = g.get(input.channel)
    rows = sigma_rows(grid)
    k = sum_index(grid)
    A = line_integral(gin * input.values, grid) if gin is not None else np.zeros(len(rows), complex)
    LA = (math.pi / (params.Gamma / 2 + 1j * (params.omega_2X - rows)) * A)[k]
    phase = np.exp(-1j * S * params.tau) if params.tau else 1.0
    outputs = {}
    for c in ChannelLabel:
        vals = -np.conj(g[c]) * LA if c in g else np.zeros(grid.shape, complex)
        if c is input.channel:
            vals = vals + input.values
        outputs[c] = BiphotonField(grid, phase * vals, c)
    meta = {"tau": params.tau}
    physical = [s for s in couplings.values() if isinstance(s, PhysicalCoupling)]
    if physical:
        meta["markovianity_variation"] = max(markovianity_variation(s, grid) for s in physical)
    for c, spec in couplings.items():
        if isinstance(spec, GaussianCoupling):
            meta.setdefault("coupling", {"beta": spec.beta, "gamma": spec.gamma, "center": spec.center})
    return ScatterResult(outputs, input, params, meta)


def markovianity_variation(coupling, grid: FrequencyGrid, n: int = 65) -> float:
    """Largest relative spread of ``|g|^2`` along ``omega_sigma`` at fixed ``omega_delta``.

    Sampled on the collective square that the grid covers completely.
    """
    s0 = grid.omega_min + grid.omega_max + grid.omega_prime_min + grid.omega_prime_max
    d0 = grid.omega_min + grid.omega_max - grid.omega_prime_min - grid.omega_prime_max
    half = min(grid.omega_max - grid.omega_min, grid.omega_prime_max - grid.omega_prime_min) / 2
    S = s0 / 2 + np.linspace(-half, half, n)
    D = d0 / 2 + np.linspace(-half, half, n)
    g2 = np.abs(np.asarray(coupling(S[:, None], D[None, :]))) ** 2
    top = g2.max(axis=0)
    ok = top > 0
    if not ok.any():
        return 0.0
    return float(np.max((top[ok] - g2.min(axis=0)[ok]) / top[ok]))


def analytic_gaussian_outputs(spec: GaussianInput, beta: float, params: PhysicalParams,
                              grid: FrequencyGrid) -> ScatterResult:
    """Closed-form outputs for the Gaussian pair and isotropic Gaussian coupling."""
    S, D = grid.collective()
    a2, b2 = spec.alpha ** 2, beta ** 2
    s = spec.omega_e + spec.omega_b
    d = spec.omega_e - spec.omega_b
    amp = COLLECTIVE_TO_PLANE * math.sqrt(1.0 / (16 * math.pi * (a2 + b2)))
    scattered = amp * lorentzian_emission(S, params) * np.exp(-(S - s) ** 2 / (4 * a2)) \
        * np.exp(-(D - d) ** 2 / (4 * b2))
    phase = np.exp(-1j * S * params.tau)
    c_in = COLLECTIVE_TO_PLANE * _gaussian_collective(spec, S, D)
    inp = BiphotonField(grid, c_in, INPUT_CHANNEL)
    outputs = {c: BiphotonField(grid, phase * (c_in - scattered if c is INPUT_CHANNEL else -scattered), c)
               for c in ChannelLabel}
    return ScatterResult(outputs, inp, params, {"tau": params.tau, "analytic": True})


def limit_jsi(spec: GaussianInput, beta: float, grid: FrequencyGrid) -> np.ndarray:
    """Scattered-channel intensity for ``Gamma >> alpha``, in the plane normalization."""
    S, D = grid.collective()
    a2, b2 = spec.alpha ** 2, beta ** 2
    s = spec.omega_e + spec.omega_b
    d = spec.omega_e - spec.omega_b
    return 2.0 / (4 * math.pi * (a2 + b2)) * np.exp(-(D - d) ** 2 / (2 * b2)) \
        * np.exp(-(S - s) ** 2 / (2 * a2))


def qudit_exponent(spec: GaussianInput, filt: CombFilter, beta: float, k) -> np.ndarray:
    """Weight exponent ``D_nm`` as a function of ``k = n - m``."""
    a2, b2, w2 = spec.alpha ** 2, beta ** 2, filt.peak_width ** 2
    c_delta = 0.0 if filt.shift_to_centers else spec.omega_e - spec.omega_b
    Q = a2 * b2 + w2 * (a2 + b2)
    return -0.25 * (a2 + b2) * (c_delta - filt.fsr * np.asarray(k, dtype=float)) ** 2 / Q


def analytic_qudit_output(spec: GaussianInput, filt: CombFilter, beta: float,
                          params: PhysicalParams, grid: FrequencyGrid) -> BiphotonField:
    """Closed-form scattered amplitude for a comb-filtered Gaussian pair.

    The double sum over peak pairs runs over the same peak indices that
    :func:`apply_comb_filter` keeps on this grid, grouped by ``n + m``.
    """
    a2, b2, w2 = spec.alpha ** 2, beta ** 2, filt.peak_width ** 2
    Q = a2 * b2 + w2 * (a2 + b2)
    s = spec.omega_e + spec.omega_b
    d = spec.omega_e - spec.omega_b
    mid = ((grid.omega_min + grid.omega_max) / 2, (grid.omega_prime_min + grid.omega_prime_max) / 2)
    c1, c2 = _filter_centers(filt, (spec.omega_e, spec.omega_b))
    n = filt.indices(c1, mid[0], (grid.omega_max - grid.omega_min) / 2)
    m = filt.indices(c2, mid[1], (grid.omega_prime_max - grid.omega_prime_min) / 2)
    c_sigma = c1 + c2
    nn, mm = np.meshgrid(n, m, indexing="ij")
    expo = qudit_exponent(spec, filt, beta, nn - mm) if filt.shift_to_centers else \
        -0.25 * (a2 + b2) * (d - filt.fsr * (nn - mm)) ** 2 / Q
    p = (nn + mm).ravel()
    p0 = p.min()
    weights = np.bincount(p - p0, weights=np.exp(expo).ravel())
    boundary = ((nn == n[0]) | (nn == n[-1]) | (mm == m[0]) | (mm == m[-1])).ravel()
    wb = np.bincount(p - p0, weights=(np.exp(expo).ravel() * boundary), minlength=len(weights))
    rows = sigma_rows(grid)
    peaks = np.exp(-(rows[:, None] - c_sigma - filt.fsr * (p0 + np.arange(len(weights)))) ** 2 / (4 * w2))
    comb = peaks @ weights
    comb_edge = peaks @ wb
    env = np.exp(-(rows - s) ** 2 / (4 * a2))
    if np.max(np.abs(comb_edge * env)) > 1e-10 * np.max(np.abs(comb * env)):
        warnings.warn("qudit peak sum truncated too early for this grid", TruncationWarning,
                      stacklevel=2)
    S, D = grid.collective()
    k = sum_index(grid)
    amp = COLLECTIVE_TO_PLANE * math.sqrt(w2 / (16 * math.pi * Q))
    values = -np.exp(-1j * S * params.tau) * amp * np.exp(-(D - d) ** 2 / (4 * b2)) \
        * (lorentzian_emission(rows, params) * env * comb)[k]
    return BiphotonField(grid, values, ChannelLabel.MM)


def comb_filtered_input(spec: GaussianInput, filt: CombFilter, grid: FrequencyGrid) -> BiphotonField:
    """Normalized Gaussian pair passed through the comb filter (not renormalized)."""
    return apply_comb_filter(gaussian_input(spec, grid), filt, (spec.omega_e, spec.omega_b))
