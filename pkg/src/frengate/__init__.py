"""Frequency-entangling two-photon gate: scattering, entanglement and decay dynamics."""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "PhysicalParams": "spectral", "FrequencyGrid": "spectral", "BiphotonField": "spectral",
    "ChannelLabel": "spectral",
    "GaussianCoupling": "coupling", "PhysicalCoupling": "coupling", "ModeProfile": "coupling",
    "regime_check": "coupling",
    "GaussianInput": "scattering", "CombFilter": "scattering", "scatter": "scattering",
    "gaussian_input": "scattering",
    "schmidt_from_field": "entanglement", "tradeoff_sweep": "entanglement",
    "qudit_sweep": "entanglement",
    "DecayConfig": "dynamics", "DecayCoupling": "dynamics", "evolve": "dynamics",
    "preset": "dynamics",
    "build_target": "modeopt", "refine": "modeopt",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    if name in _EXPORTS:
        return getattr(import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
