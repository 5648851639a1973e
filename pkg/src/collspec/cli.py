"""Command-line entry point: ``collspec <command> CONFIG [--section.key VALUE ...]``.

Commands: validate, groundstate, spectrum, kernel, dynamics, oracle-compare.
Exit status is 0 on success; otherwise the exception's ``exit_code`` and a
JSON error record on stderr.
"""

import argparse
import json
import os
import sys

import numpy as np

from .config import KEYS, load_config
from .dynamics import (
    GLEProblem,
    dominant_frequency,
    equilibrium_bath_init,
    resolution_limit,
    solve_full_classical,
    solve_gle,
    spectrum_from_trajectory,
)
from .errors import CollspecError, ConfigError, ResourceError, ValidationFailed
from .groundstate import ground_state_stats, validity_ratio, validity_report
from .model import validate
from .oracle import fock_diagonalize, harmonic_correlator, internal_modes, normal_modes
from .output import write_json, write_series
from .renormalize import renormalize
from .spectral import (
    bath_modes,
    collective_spectrum,
    default_epsilon,
    gamma_t_series,
    gamma_tilde_series,
    peak_positions,
    sigma_series,
)

COMMANDS = ("validate", "groundstate", "spectrum", "kernel", "dynamics", "oracle-compare")
OUTPUT_ENV = "COLLSPEC_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "collspec-out"
# per-mode Fock cutoff by number of internal modes
FOCK_CUTOFFS = {1: 40, 2: 20, 3: 12}


class Run:
    """Resolved configuration plus the derived objects every command needs."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.model = cfg.model
        self._system = None

    def renormalized(self):
        if self._system is None:
            self.stats, self._system = renormalize(self.model, self.cfg.alpha_method, self.cfg.regime)
            self.modes = bath_modes(self._system)
            cfg = self.cfg
            omega0 = self._system.omega0_renorm
            if cfg.omega_max is None:
                freqs, _ = normal_modes(self._system.full_potential, self.model.mass)
                cfg = cfg.resolved(omega_max=1.5 * float(freqs.max()))
            if cfg.epsilon is None:
                cfg = cfg.resolved(epsilon=default_epsilon(omega0, cfg.omega_grid(cfg.omega_max)))
            if cfg.t_max is None:
                cfg = cfg.resolved(t_max=5 * 2 * np.pi / omega0)
            if cfg.dt is None:
                cfg = cfg.resolved(dt=resolution_limit(omega0, self.modes) / 50)
            self.cfg = cfg
        return self._system

    def meta(self, **extra):
        out = {
            "config_sha256": self.cfg.config_hash(),
            "model_sha256": self.cfg.model_hash(),
        }
        out.update(extra)
        return out

    def path(self, name):
        return os.path.join(self.cfg.output_dir, name)


def _require_valid(run):
    report = validate(run.model)
    if not report.overall:
        raise ValidationFailed(
            "model failed validation: " + ", ".join(report.failed()), report=report
        )
    return report


def cmd_validate(run):
    report = validate(run.model)
    written = [write_json(run.path("validation.json"), report.to_dict(), run.meta())]
    if not report.overall:
        raise ValidationFailed("model failed validation: " + ", ".join(report.failed()), report=report)
    return written


def cmd_groundstate(run):
    _require_valid(run)
    stats = ground_state_stats(run.model, run.cfg.alpha_method, run.cfg.regime)
    ratio, omega_min = validity_ratio(run.model, stats)
    report = validity_report(run.model, stats)
    payload = stats.to_dict()
    payload["validity"] = {"omega_min": omega_min, "ratio": ratio, **report.to_dict()}
    return [write_json(run.path("groundstate.json"), payload, run.meta())]


def cmd_spectrum(run):
    _require_valid(run)
    system = run.renormalized()
    cfg, modes = run.cfg, run.modes
    grid = cfg.omega_grid(cfg.omega_max)
    s = collective_spectrum(system.omega0_renorm, modes, grid, cfg.epsilon,
                            run.model.mass, run.model.hbar, jobs=cfg.jobs)
    sig = sigma_series(modes, grid, cfg.epsilon, jobs=cfg.jobs)
    written = [
        write_series(cfg.output_dir, "sigma", [sig.grid, sig.values], ["grid", "value"],
                     run.meta(kind="sigma", epsilon=repr(cfg.epsilon)), cfg.format),
        write_series(cfg.output_dir, "s_tilde", [s.grid, s.values], ["grid", "value"],
                     run.meta(kind="s_tilde", epsilon=repr(cfg.epsilon)), cfg.format),
    ]
    summary = {
        "omega0_renorm": system.omega0_renorm,
        "gamma0": system.gamma0,
        "ktilde_11": float(system.ktilde[0, 0]),
        "epsilon": cfg.epsilon,
        "bath_frequencies": modes.frequencies,
        "bath_weights": modes.weights,
        "peaks": peak_positions(s),
    }
    written.append(write_json(run.path("spectrum_summary.json"), summary, run.meta()))
    return written


def cmd_kernel(run):
    _require_valid(run)
    run.renormalized()
    cfg, modes = run.cfg, run.modes
    steps = int(round(cfg.t_max / cfg.dt))
    g_t = gamma_t_series(modes, cfg.dt * np.arange(steps + 1))
    re, im = gamma_tilde_series(modes, cfg.omega_grid(cfg.omega_max), cfg.epsilon)
    eps = repr(cfg.epsilon)
    return [
        write_series(cfg.output_dir, "gamma_t", [g_t.grid, g_t.values], ["grid", "value"],
                     run.meta(kind="gamma_t", epsilon="0.0"), cfg.format),
        write_series(cfg.output_dir, "gamma_tilde_re", [re.grid, re.values], ["grid", "value"],
                     run.meta(kind="gamma_tilde_re", epsilon=eps), cfg.format),
        write_series(cfg.output_dir, "gamma_tilde_im", [im.grid, im.values], ["grid", "value"],
                     run.meta(kind="gamma_tilde_im", epsilon=eps), cfg.format),
    ]


def cmd_dynamics(run):
    _require_valid(run)
    system = run.renormalized()
    cfg = run.cfg
    prob = GLEProblem(system.omega0_renorm, run.modes, cfg.x0, 0.0, cfg.t_max, cfg.dt)
    gle = solve_gle(prob)
    full = solve_full_classical(system, equilibrium_bath_init(system, cfg.x0), gle.times)
    norm = float(np.linalg.norm(full.x))
    dev = float(np.linalg.norm(gle.x - full.x)) / norm if norm > 0 else 0.0
    written = [
        write_series(cfg.output_dir, "trajectory_gle", [gle.times, gle.x, gle.v], ["t", "x", "v"],
                     run.meta(kind="trajectory_gle"), cfg.format),
        write_series(cfg.output_dir, "trajectory_full", [full.times, full.x, full.v], ["t", "x", "v"],
                     run.meta(kind="trajectory_full"), cfg.format),
    ]
    summary = {
        "omega0_renorm": system.omega0_renorm,
        "dt": cfg.dt,
        "steps": len(gle.times) - 1,
        "relative_l2_deviation": dev,
        "dominant_frequency_gle": dominant_frequency(spectrum_from_trajectory(gle)),
    }
    written.append(write_json(run.path("dynamics_summary.json"), summary, run.meta()))
    return written


def cmd_oracle_compare(run):
    _require_valid(run)
    system = run.renormalized()
    cfg, model = run.cfg, run.model
    mc = harmonic_correlator(system.full_potential, model.mass, model.hbar)
    grid = cfg.omega_grid(cfg.omega_max)
    s = collective_spectrum(system.omega0_renorm, run.modes, grid, cfg.epsilon,
                            model.mass, model.hbar, jobs=cfg.jobs)
    sticks = mc.broadened(grid, cfg.epsilon)
    rel = np.abs(s.values - sticks) / np.abs(sticks)
    report = {
        "omega0_renorm": system.omega0_renorm,
        "epsilon": cfg.epsilon,
        "max_pointwise_relative_error": float(rel.max()),
        "spectrum_integral": float(np.trapezoid(s.values, grid)),
        "stick_weight_sum": float(mc.weights.sum()),
        "fock": None,
    }
    n_modes = len(internal_modes(model).freqs)
    if n_modes in FOCK_CUTOFFS:
        n_max = cfg.n_max or FOCK_CUTOFFS[n_modes]
        try:
            res = fock_diagonalize(model, n_max, cfg.n_states)
        except ResourceError as exc:
            report["fock"] = {"skipped": str(exc)}
        else:
            k = int(np.argmax(mc.weights))
            gap = res.collective_gap
            pred = model.hbar * system.omega0_renorm
            report["fock"] = {
                "n_max": n_max,
                "dim": res.dim,
                "converged": res.converged,
                "lambda": model.lam,
                "fock_collective_gap": gap,
                "hbar_omega0_renorm": pred,
                "relative_deviation": abs(gap - pred) / pred,
                "hbar_dominant_normal_mode": model.hbar * float(mc.mode_freqs[k]),
                "energies": res.energies,
                "transition_strengths": res.transition_strengths,
            }
    written = [
        write_series(cfg.output_dir, "sticks", [mc.mode_freqs, mc.weights], ["omega", "weight"],
                     run.meta(kind="sticks"), cfg.format),
        write_json(run.path("oracle_compare.json"), report, run.meta()),
    ]
    return written


HANDLERS = {
    "validate": cmd_validate,
    "groundstate": cmd_groundstate,
    "spectrum": cmd_spectrum,
    "kernel": cmd_kernel,
    "dynamics": cmd_dynamics,
    "oracle-compare": cmd_oracle_compare,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="collspec",
        description="Collective spectra of two coupled anharmonic chains.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="section.key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="reserved; nothing is random")
    for key in KEYS:
        parser.add_argument(f"--{key}", dest=key, metavar="VALUE", default=None)
    return parser


def _error_record(exc):
    rec = {"error": exc.kind, "exit_code": exc.exit_code, "message": str(exc)}
    if isinstance(exc, ConfigError):
        rec["line"] = exc.line
        rec["key"] = exc.key
    if isinstance(exc, ValidationFailed) and exc.report is not None:
        rec["failed_checks"] = exc.report.failed()
    return rec


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k in KEYS and v is not None}
    try:
        cfg = load_config(args.config, overrides,
                          default_output_dir=os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT_DIR))
        written = HANDLERS[args.command](Run(cfg))
    except CollspecError as exc:
        print(json.dumps(_error_record(exc), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": "io", "exit_code": 7, "message": str(exc)}), file=sys.stderr)
        return 7
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
