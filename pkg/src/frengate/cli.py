"""``frengate`` command-line driver.

Every command reads one TOML/JSON config, writes data files into ``--out``
and finishes with ``manifest.json`` listing the resolved config and a
SHA-256 per file. Outputs carry no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

from .errors import ConfigError, FrengateError

COMMANDS = ("scatter", "schmidt", "tradeoff", "qudit", "decay", "optimize-mode", "regime")
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _cap_threads():
    n = os.environ.get("FRENGATE_THREADS")
    if not n:
        return
    if not n.isdigit() or int(n) < 1:
        raise ConfigError("FRENGATE_THREADS must be a positive integer")
    for var in THREAD_VARS:
        os.environ[var] = n


class Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, out: Path, fmt: str, scale_hz: float):
        self.out = out
        self.fmt = fmt
        self.scale_hz = scale_hz
        self.files: list[Path] = []
        out.mkdir(parents=True, exist_ok=True)

    def add(self, *paths):
        for p in paths:
            if isinstance(p, (list, tuple)):
                self.add(*p)
            else:
                self.files.append(Path(p))

    def table(self, stem: str, header, columns):
        from .io import write_csv, write_json
        if self.fmt == "json":
            self.add(write_json(self.out / f"{stem}.json",
                                {h: [float(x) for x in c] for h, c in zip(header, columns)}))
        else:
            self.add(write_csv(self.out / f"{stem}.csv", header, columns))

    def json(self, name: str, obj):
        from .io import write_json
        self.add(write_json(self.out / name, obj))


def _grid(cfg, params, widths):
    from .spectral import FrequencyGrid
    half = cfg.get("half_width") or 6.0 * max(widths)
    return FrequencyGrid.centered(params.omega_e, params.omega_b, float(half), int(cfg["n"]))


def _comb(cfg):
    from .scattering import CombFilter
    c = cfg["comb"]
    return CombFilter(float(c["fsr"]), float(c["peak_width"]),
                      None if c["n_range"] is None else int(c["n_range"]),
                      bool(c["shift_to_centers"]))


def _scatter_setup(cfg):
    from .config import build_params
    from .coupling import GaussianCoupling, GaussianMode, PhysicalCoupling
    from .scattering import GaussianInput, comb_filtered_input, gaussian_input
    params = build_params(cfg["params"])
    alpha, beta = float(cfg["alpha"]), float(cfg["beta"])
    grid = _grid(cfg, params, (alpha, beta))
    spec = GaussianInput.from_params(alpha, params)
    inp = comb_filtered_input(spec, _comb(cfg), grid) if cfg.get("comb") else gaussian_input(spec, grid)
    kind = cfg.get("coupling", "gaussian")
    if kind == "gaussian":
        coupling = GaussianCoupling.isotropic(beta, params)
    elif kind == "zero":
        coupling = GaussianCoupling(beta, 0.0, params.omega_e - params.omega_b)
    elif kind == "physical":
        center = params.omega_X - params.delta_X / 2
        coupling = PhysicalCoupling(params, GaussianMode(center, float(cfg["mode_width"])))
    else:
        raise ConfigError(f"unknown coupling {kind!r}")
    return params, alpha, beta, inp, coupling


def cmd_scatter(cfg, run: Run) -> dict:
    from .entanglement import success_probability_analytic, success_probability_numeric
    from .scattering import scatter
    params, alpha, beta, inp, coupling = _scatter_setup(cfg)
    res = scatter(inp, coupling, params)
    probs = success_probability_numeric(res)
    extra = {"p_pp": probs["++"], "alpha": alpha, "beta": beta,
             "p_success_limit": success_probability_analytic(beta / alpha)
             if cfg["coupling"] == "gaussian" else None}
    if cfg["save_fields"]:
        run.add(res.save(run.out, extra))
        return json.loads((run.out / "scatter.json").read_text())
    summary = {"probabilities": {k: v for k, v in probs.items() if k != "p_success"},
               "p_success": probs["p_success"], **extra}
    run.json("scatter.json", summary)
    return summary


def cmd_schmidt(cfg, run: Run) -> dict:
    from .entanglement import distribution_stats, schmidt_from_field
    from .io import load_field
    from .scattering import scatter
    from .spectral import ChannelLabel
    if cfg["field"]:
        field = load_field(cfg["field"])
    else:
        c2 = dict(cfg, coupling="gaussian", comb=None, mode_width=None, save_fields=False)
        params, alpha, beta, inp, coupling = _scatter_setup(c2)
        if cfg["source"] == "input":
            field = inp
        elif cfg["source"] == "output":
            field = scatter(inp, coupling, params)[ChannelLabel.MM]
        else:
            raise ConfigError("source must be 'input' or 'output' (or give field=path)")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spec = schmidt_from_field(field, int(cfg["count"]))
    modes = [int(k) for k in cfg["modes"]]
    if any(k < 1 or k > len(spec.lambdas) for k in modes):
        raise ConfigError("mode indices are 1-based and must not exceed the basis count")
    from .io import write_csv
    g = field.grid
    for axis, (x, m) in enumerate(((g.omega, spec.modes1), (g.omega_prime, spec.modes2)), start=1):
        header = ["omega" if axis == 1 else "omega_prime"]
        cols = [x]
        for k in modes:
            header += [f"mode{k}_re", f"mode{k}_im"]
            cols += [m[k - 1].real, m[k - 1].imag]
        run.add(write_csv(run.out / f"schmidt_modes{axis}.csv", header, cols))
    summary = spec.to_dict(n_lambdas=20)
    summary["warnings"] = [str(w.message) for w in caught]
    try:
        summary["distribution"] = distribution_stats(field)
    except FrengateError as exc:
        summary["distribution"] = {"error": str(exc)}
    run.json("schmidt.json", summary)
    return summary


def _sweep_out(table, run: Run, stem: str) -> dict:
    from .entanglement import SWEEP_COLUMNS
    if run.fmt == "json":
        run.json(f"{stem}.json", {"rows": table.rows, "diagnostics": table.diagnostics})
    else:
        run.add(table.save(run.out / f"{stem}.csv"))
    summary = {"diagnostics": table.diagnostics, "points": len(table.rows),
               "columns": list(SWEEP_COLUMNS + table.extra_columns)}
    run.json(f"{stem}_summary.json", summary)
    return summary


def cmd_tradeoff(cfg, run: Run) -> dict:
    from .config import build_params
    from .entanglement import tradeoff_sweep
    params = build_params(cfg["params"])
    table = tradeoff_sweep([float(r) for r in cfg["ratios"]], params, float(cfg["alpha"]),
                           int(cfg["n"]), int(cfg["count"]))
    return _sweep_out(table, run, "tradeoff")


def cmd_qudit(cfg, run: Run) -> dict:
    from .config import build_params
    from .entanglement import qudit_sweep
    params = build_params(cfg["params"])
    table = qudit_sweep([float(r) for r in cfg["ratios"]], params, float(cfg["alpha"]),
                        _comb(cfg), int(cfg["n"]), int(cfg["count"]))
    return _sweep_out(table, run, "qudit")


def decay_config(cfg):
    """DecayConfig from a preset plus overrides."""
    from .config import build_params
    from .dynamics import DecayCoupling, preset
    base = preset(cfg["preset"])
    params = base.params
    if cfg["params"]:
        merged = {k: v for k, v in params.to_dict().items()}
        merged.update(cfg["params"])
        if "delta_X" in cfg["params"] and "omega_X" not in cfg["params"]:
            merged.pop("omega_X")
        params = build_params(merged)
    c = base.coupling
    coupling = DecayCoupling(
        c.g0 if cfg["g0"] is None else float(cfg["g0"]),
        (params.omega_X - params.delta_X / 2) if cfg["mode_center"] is None else float(cfg["mode_center"]),
        c.bandwidth if cfg["bandwidth"] is None else float(cfg["bandwidth"]))
    changes = {"params": params, "coupling": coupling}
    for key in ("n_freq", "t_max", "step", "record_every"):
        if cfg[key] is not None:
            changes[key] = type(getattr(base, key))(cfg[key])
    if cfg["freq_window"] is not None:
        changes["freq_window"] = tuple(float(x) for x in cfg["freq_window"])
    return base.replace(**changes)


def cmd_decay(cfg, run: Run) -> dict:
    from .dynamics import evolve
    tr = evolve(decay_config(cfg))
    run.table("trajectory", ["t", "p0", "px", "p2x", "norm"], [tr.times, tr.p0, tr.px, tr.p2x, tr.norm])
    summary = tr.summary()
    summary.pop("runtime_s", None)
    if summary.get("gamma_fit") is not None and math.isfinite(summary["gamma_fit"]):
        summary["gamma_fit_hz"] = summary["gamma_fit"] * run.scale_hz
    run.json("decay.json", summary)
    return summary


def cmd_optimize_mode(cfg, run: Run) -> dict:
    import numpy as np
    from .config import build_params
    from .coupling import GaussianCoupling
    from .modeopt import (build_target, default_windows, interpolate_profile,
                          reconstructed_coupling, refine)
    params = build_params(cfg["params"])
    windows = default_windows(params, float(cfg["alpha"]), float(cfg["window_widths"]))
    if cfg["target"] == "gaussian":
        g = GaussianCoupling.isotropic(float(cfg["beta"]), params)
    elif cfg["target"] == "rank1":
        # synthetic separable target: exactly representable, checks the solver
        def g(S, D):
            from .spectral import from_collective
            from .modeopt import nonseparable_bracket
            w, wp = from_collective(S, D)
            return np.exp(-(w - params.omega_e) ** 2 / 1e-10) * \
                np.exp(-(wp - params.omega_b) ** 2 / 1e-10) * nonseparable_bracket(params, wp, w)
    else:
        raise ConfigError("target must be 'gaussian' or 'rank1'")
    target = build_target(params, g, windows, int(cfg["n"]))
    sol = refine(target, max_iter=int(cfg["max_iter"]))
    run.add(sol.save(run.out))
    prof = interpolate_profile(sol, cfg["kind"])
    fine = [np.linspace(a, b, 4 * int(cfg["n"]) - 3) for a, b in sorted(windows, key=lambda w: w[0])]
    xs = np.concatenate(fine)
    run.table("mode_profile", ["omega", "u"], [xs, prof(xs)])
    rec = reconstructed_coupling(params, sol)
    rms = float(np.sqrt(np.mean((rec - target.g) ** 2)) / np.sqrt(np.mean(target.g ** 2)))
    summary = sol.metrics()
    summary["coupling_relative_rms"] = rms
    run.json("optimize_mode.json", summary)
    return summary


def cmd_regime(cfg, run: Run) -> dict:
    import numpy as np
    from .config import build_params
    from .coupling import l2_norm, regime_check
    from .dynamics import ADIABATIC_G0, DecayCoupling
    params = build_params(cfg["params"])
    de = float(cfg["detuning_floor"]) if cfg["detuning_floor"] is not None else params.delta_X / 2
    T = float(cfg["T"]) if cfg["T"] is not None else 100.0 / de
    bws = tuple(float(b) for b in (cfg["bandwidths"] or (1e-6, 1e-6)))
    if cfg["coupling_l2_norms"] is None:
        center = params.omega_X - params.delta_X / 2
        mode = DecayCoupling(ADIABATIC_G0, center, 2.5e-4)
        w = np.linspace(center - 10 * 2.5e-4, center + 10 * 2.5e-4, 4001)
        norms = [l2_norm(mode, w)] * 2
    else:
        norms = [float(x) for x in cfg["coupling_l2_norms"]]
    partner = None if cfg["partner_l2_norms"] is None else [float(x) for x in cfg["partner_l2_norms"]]
    rep = regime_check(params, T, norms, bws, de, partner, float(cfg["factor"]))
    summary = rep.to_dict()
    summary["inputs"] = {"T": T, "detuning_floor": de, "bandwidths": list(bws),
                         "coupling_l2_norms": norms}
    run.json("regime.json", summary)
    return summary


HANDLERS = {"scatter": cmd_scatter, "schmidt": cmd_schmidt, "tradeoff": cmd_tradeoff,
            "qudit": cmd_qudit, "decay": cmd_decay, "optimize-mode": cmd_optimize_mode,
            "regime": cmd_regime}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frengate",
                                description="Two-photon frequency-entangling gate simulations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML or JSON config (defaults used when omitted)")
    p.add_argument("--out", default=None, help="output directory (default: ./frengate-<command>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of tabular outputs")
    p.add_argument("--omega2x-hz", type=float, default=None,
                   help="physical value of omega_2X / 2pi in Hz for reported rates")
    return p


def run_command(command: str, config: dict | None, out, fmt: str = "csv",
                omega2x_hz: float | None = None) -> dict:
    """Execute one command and write its manifest; returns the summary."""
    from . import __version__
    from .config import resolve
    from .io import sha256, write_json
    from .spectral import OMEGA_2X_HZ
    scale = OMEGA_2X_HZ if omega2x_hz is None else float(omega2x_hz)
    if not (scale > 0 and math.isfinite(scale)):
        raise ConfigError("--omega2x-hz must be a positive number")
    cfg = resolve(command, config)
    run = Run(Path(out), fmt, scale)
    summary = HANDLERS[command](cfg, run)
    files = {p.name: sha256(p) for p in sorted(run.files, key=lambda q: q.name)}
    manifest = {"command": command, "config": cfg, "version": __version__,
                "omega2x_hz": scale, "format": fmt, "files": files}
    write_json(run.out / "manifest.json", manifest)
    return summary


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _cap_threads()
        from .config import load_file
        config = load_file(args.config) if args.config else {}
        out = args.out or f"frengate-{args.command}"
        summary = run_command(args.command, config, out, args.format, args.omega2x_hz)
    except FrengateError as exc:
        print(f"frengate {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    headline = {k: v for k, v in summary.items() if isinstance(v, (int, float, str, bool))}
    for k in sorted(headline):
        print(f"{k}: {headline[k]}")
    print(f"wrote {out}/manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
