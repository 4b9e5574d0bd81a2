"""Command-line front end: ``clickhomodyne <stats|sweep|sample|mismatch|thermal-lo|figure> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .clicks import ExactMoments, joint_click_statistics
from .imperfections import (
    ThermalMoments,
    mismatched_arm,
    mode_mismatch_parameters,
    thermal_lo_expectation,
    thermal_lo_expectation_numeric,
    thermal_variance_criterion,
)
from .io import (
    ConfigError,
    Table,
    detector_from_dict,
    histogram_from_table,
    histogram_table,
    load_json,
    metadata,
    read_table,
    scheme_from_dict,
    spectral_from_dict,
    state_from_dict,
)
from .presets import FIGURES, criterion_statistic, grid_values, run_figure, run_stats, run_sweep
from .sampler import estimate_criterion, estimate_moments, sample
from .witnesses import variance_criterion

__all__ = ["main", "build_parser"]


def _config(args, default=None) -> dict:
    if args.config:
        return load_json(args.config)
    if default is None:
        raise ConfigError(f"'{args.command}' needs --config <path>")
    return json.loads(json.dumps(default))


def _emit(table: Table, args):
    text = table.render(args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "plot", None):
        from .plotting import plot_table

        plot_table(table, args.plot, title=str(table.meta.get("figure", args.command)))


def cmd_stats(args):
    _emit(run_stats(_config(args, {k: v for k, v in FIGURES[2].items() if k != "kind"})), args)


def cmd_sweep(args):
    _emit(run_sweep(_config(args), args.jobs), args)


def cmd_figure(args):
    overrides = load_json(args.config) if args.config else None
    _emit(run_figure(args.number, overrides, args.jobs), args)


def _scheme_at(cfg):
    scheme = scheme_from_dict(cfg["scheme"])
    if "phi" in cfg:
        scheme = scheme.at_phase(float(cfg["phi"]))
    for mode, key in enumerate(("phi1", "phi2")):
        if key in cfg:
            scheme = scheme.at_phase(float(cfg[key]), mode=mode)
    return scheme


SAMPLE_DEFAULT = {
    "state": {"cat": {"alpha": 1.0, "parity": "even"}},
    "scheme": {"scheme": "unbalanced4", "t": 0.8, "r": 0.6, "beta": 4.0,
               "detector": {"N": 8, "eta": 0.5, "nu": 0.0}},
    "phi": math.pi / 2,
    "shots": 100000,
    "criteria": ["variance"],
    "n_boot": 200,
}


def cmd_sample(args):
    """Sample (or ingest) a click histogram and report empirical criteria against exact values."""
    cfg = {**SAMPLE_DEFAULT, **_config(args, SAMPLE_DEFAULT)}
    if args.seed is not None:
        cfg["seed"] = args.seed
    seed = int(cfg.get("seed", 0))
    state = state_from_dict(cfg["state"])
    scheme = _scheme_at(cfg)
    sizes = tuple(a.N for a in scheme.arms)
    if args.histogram:
        hist = histogram_from_table(read_table(args.histogram), sizes)
    else:
        hist = sample(joint_click_statistics(state, scheme.arms), int(cfg["shots"]), seed)
        if args.histogram_out:
            Path(args.histogram_out).write_text(histogram_table(hist, metadata(cfg, seed=seed)).to_csv())
    exact = ExactMoments(state, scheme.arms)
    rows = []
    for a, arm in enumerate(scheme.arms):
        powers = [0] * len(sizes)
        powers[a] = 1
        est, se = estimate_moments(hist, powers, int(cfg["n_boot"]), seed)
        rows.append([f"mean_clicks_{arm.tag or a}", exact(powers), est, se])
    for name in cfg["criteria"]:
        stat = criterion_statistic(name, scheme)
        est, se = estimate_criterion(hist, stat, int(cfg["n_boot"]), seed)
        rows.append([name, stat(exact), est, se])
    rows = [r + [(r[2] - r[1]) / r[3] if r[3] > 0 else math.nan] for r in rows]
    meta = metadata(cfg, seed=seed, shots=hist.shots)
    _emit(Table(["quantity", "exact", "estimate", "std_error", "z"], rows, meta), args)


MISMATCH_DEFAULT = {
    "spectral": {"omega": {"start": -8.0, "stop": 8.0, "num": 1601}, "G": 1.0,
                 "f_si": {"gaussian": {"width": 1.0}}, "f_lo": {"gaussian": {"center": 0.5, "width": 1.2}},
                 "t": 0.8, "r": 0.6, "beta": 4.0},
    "detector": {"N": 8, "eta": 1.0, "nu": 0.0},
    "beta_abs": [1.0, 2.0, 4.0, 8.0],
    "state": {"cat": {"alpha": 1.0, "parity": "even"}},
    "phi": math.pi / 2,
}


def cmd_mismatch(args):
    """Effective efficiency, displacement and mismatch noise for a spectral setup, per LO amplitude."""
    cfg = {**MISMATCH_DEFAULT, **_config(args, MISMATCH_DEFAULT)}
    setup = spectral_from_dict(cfg["spectral"])
    det = detector_from_dict(cfg["detector"])
    state = state_from_dict(cfg["state"]) if cfg.get("state") else None
    phase = np.exp(1j * np.angle(setup.beta)) if setup.beta else 1.0
    rows = []
    for b in grid_values(cfg["beta_abs"]):
        s = setup.with_beta(b * phase)
        p = mode_mismatch_parameters(s)
        row = [float(b), p.eta_t, p.gamma.real, p.gamma.imag, p.nu_tilde]
        if state is not None:
            row.append(variance_criterion(state, mismatched_arm(s, det), float(cfg["phi"])).value)
        rows.append(row)
    cols = ["beta_abs", "eta_t", "gamma_re", "gamma_im", "nu_tilde"] + (["variance"] if state is not None else [])
    _emit(Table(cols, rows, metadata(cfg)), args)


THERMAL_DEFAULT = {
    "state": {"cat": {"alpha": 1.0, "parity": "even"}},
    "scheme": {"scheme": "unbalanced4", "t": 0.8, "r": 0.6, "beta": 4.0, "detector": {"N": 8, "eta": 1.0, "nu": 0.0}},
    "nbar": [round(0.05 * i, 2) for i in range(11)],
    "phi": [math.pi / 2],
}


def cmd_thermal_lo(args):
    """Variance criterion with a thermal LO plus the closed-form vs quadrature residual."""
    cfg = {**THERMAL_DEFAULT, **_config(args, THERMAL_DEFAULT)}
    state = state_from_dict(cfg["state"])
    scheme = scheme_from_dict(cfg["scheme"])
    if scheme.kind != "unbalanced4":
        raise ConfigError("thermal-lo supports the unbalanced four-port scheme only")
    rows = []
    for nbar in grid_values(cfg["nbar"]):
        for phi in grid_values(cfg["phi"]):
            arm = scheme.at_phase(float(phi)).arms[0]
            value = thermal_variance_criterion(state, arm, float(nbar)).value
            resid = max(
                abs(thermal_lo_expectation(state, j * arm.lam, arm.gamma, nbar)
                    - thermal_lo_expectation_numeric(state, j * arm.lam, arm.gamma, nbar))
                for j in (1, 2)
            )
            mean = ThermalMoments(state, arm, float(nbar))([1])
            rows.append([float(nbar), float(phi), mean, value, resid])
    _emit(Table(["nbar", "phi", "mean_clicks", "variance", "quadrature_residual"], rows, metadata(cfg)), args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clickhomodyne", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (for 'figure': overrides of the preset)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="RNG seed (sampling)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--plot", metavar="PNG", help="also render the table (needs matplotlib)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stats", parents=[common], help="click vs photoelectric statistics").set_defaults(fn=cmd_stats)
    sub.add_parser("sweep", parents=[common], help="criteria over a parameter grid").set_defaults(fn=cmd_sweep)
    p = sub.add_parser("sample", parents=[common], help="sampled histogram and empirical criteria")
    p.add_argument("--histogram", help="analyse this k1,...,count CSV instead of sampling")
    p.add_argument("--histogram-out", help="write the sampled histogram here")
    p.set_defaults(fn=cmd_sample)
    sub.add_parser("mismatch", parents=[common], help="spectral mode-mismatch parameters").set_defaults(fn=cmd_mismatch)
    sub.add_parser("thermal-lo", parents=[common], help="thermal LO noise").set_defaults(fn=cmd_thermal_lo)
    p = sub.add_parser("figure", parents=[common], help="data of a figure preset")
    p.add_argument("number", type=int, choices=sorted(FIGURES))
    p.set_defaults(fn=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.fn(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
