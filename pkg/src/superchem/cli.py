"""Command-line entry point: ``superchem <subcommand> ...``."""

from __future__ import annotations

import argparse
import secrets
import shlex
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from .cpt import PulseVanished, cpt_steady_state, optimal_ratio
from .ensemble import EnsembleFailure, derive_seed, run_ensemble
from .feasibility import assess, density_from_cm3
from .integrator import IntegrationError, integrate
from .model import IDX, initial_state, reactant_fractions
from .noise import (NoiseModel, PairStatistics, cauchy_schwarz_excess, mandel_q,
                    pair_correlation, pair_population, sample_seed)
from .output import emit_csv, emit_plot

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INTEGRATION = 3
EXIT_ENSEMBLE = 4
EXIT_IO = 5
EXIT_DOMAIN = 6

EPILOG = """\
exit codes:
  0  success
  1  unexpected error
  2  usage or configuration error (missing, unknown or out-of-range key)
  3  integration failure (step-size underflow or non-finite state)
  4  ensemble failure (more than 1% of trajectories failed)
  5  file read/write failure
  6  invalid analytic input (e.g. vanished pulse, t <= 0 for Cauchy-Schwarz)

worker threads default to $SUPERCHEM_WORKERS, else the CPU count.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _add_config_flags(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--preset", choices=sorted(config_mod.PRESETS))
    g.add_argument("--config", metavar="FILE", help="key = value file")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="generic override, repeatable")
    for key, (_, (_, constraint), text) in config_mod.KEYS.items():
        g.add_argument("--" + key.replace("_", "-"), dest="key_" + key, metavar="X",
                       help=f"{text} [{constraint}]")


def _flags(args):
    flags = {}
    for item in args.set:
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        flags[k.strip()] = v.strip()
    for key in config_mod.KEYS:
        value = getattr(args, "key_" + key, None)
        if value is not None:
            flags[key] = value
    return flags


def _load(args):
    flags = _flags(args)
    return config_mod.parse_config(args.config, flags, preset=args.preset), flags


def _replay_line(cmd, args, flags, seed):
    parts = ["superchem", cmd]
    if args.preset:
        parts += ["--preset", args.preset]
    if args.config:
        parts += ["--config", args.config]
    for k, v in flags.items():
        if k != "master_seed":
            parts += ["--set", f"{k}={v}"]
    parts += ["--master-seed", str(seed)]
    return "# replay: " + shlex.join(parts)


def _resolve_seed(cfg):
    seed = cfg.get("master_seed")
    return secrets.randbits(63) if seed is None else int(seed)


def build_parser():
    parser = _Parser(prog="superchem", epilog=EPILOG,
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     description="Noise-seeded mean-field simulator for the "
                                 "abstraction reaction A + B2 -> AB + B.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", help="integrate a single seeded trajectory",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_config_flags(p)
    p.add_argument("--trajectory", type=int, default=0, help="trajectory index for seeding")
    p.add_argument("--no-seed", action="store_true", help="start with empty product modes")
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("ensemble", help="run a trajectory ensemble",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_config_flags(p)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--plot", metavar="PATH", help="SVG output")

    p = sub.add_parser("noise", help="linearized pair statistics table")
    p.add_argument("--gain", type=float, required=True, help="effective gain, units of lambda")
    p.add_argument("--t", type=float, nargs="+", default=None, metavar="T")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--statistics", choices=[s.value for s in PairStatistics], default="boson")
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("cpt", help="dark-state steady-state table")
    p.add_argument("--R", type=float, nargs="+", default=[0.5])
    p.add_argument("--omega-over-lambda", type=float, nargs="+", default=[0.0])
    p.add_argument("--optimize", action="store_true", help="also report the optimal ratio")
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("feasibility", help="noise-dominated window vs collision rate")
    _add_config_flags(p)
    p.add_argument("--f-a", type=float, default=None, help="default: from R")
    p.add_argument("--f-b2", type=float, default=None, help="default: from R")
    p.add_argument("--density-cm3", type=float, default=1e14)
    p.add_argument("--rate-coeff", type=float, default=1e-17, help="m^3/s")

    p = sub.add_parser("presets", help="list presets or print one as a config file")
    p.add_argument("name", nargs="?", choices=sorted(config_mod.PRESETS))
    return parser


def _print_table(cols, out):
    names = list(cols)
    out.write("  ".join(f"{n:>14}" for n in names) + "\n")
    for row in zip(*cols.values()):
        out.write("  ".join(f"{x:>14.6g}" for x in row) + "\n")


def cmd_run(args, out):
    cfg, flags = _load(args)
    seed = _resolve_seed(cfg)
    out.write(_replay_line("run", args, flags, seed) + "\n")
    ens = cfg.ensemble(master_seed=seed)
    if args.no_seed:
        state = initial_state(ens.R)
    else:
        s = sample_seed(ens.variance, derive_seed(seed, args.trajectory))
        state = initial_state(ens.R, s.seed_ab, s.seed_b)
    result = integrate(state, ens.params, ens.integrator)
    if args.csv:
        emit_csv(result, args.csv)
    final = result.populations[:, -1]
    out.write("final populations: " + "  ".join(
        f"N_{k}={final[i]:.6g}" for k, i in IDX.items()) + "\n")
    out.write(f"max N_t = {result.populations[IDX['t']].max():.6g}; "
              f"steps accepted={result.n_accepted} rejected={result.n_rejected}\n")
    return EXIT_OK


def cmd_ensemble(args, out, workers=None):
    cfg, flags = _load(args)
    seed = _resolve_seed(cfg)
    out.write(_replay_line("ensemble", args, flags, seed) + "\n")
    workers = cfg.get("workers", workers)
    deltas = cfg.get("deltas") or (None,)
    for delta in deltas:
        ens = cfg.ensemble(master_seed=seed) if delta is None else cfg.ensemble(
            master_seed=seed, delta=delta)
        stats = run_ensemble(ens, workers=workers)
        label = "" if delta is None else f"_delta{delta:+g}"
        if args.csv:
            emit_csv(stats, _suffixed(args.csv, label))
        if args.plot:
            title = None if delta is None else f"delta = {delta:+g}"
            emit_plot(stats, _suffixed(args.plot, label), R=ens.R, title=title)
        ab = stats.mean[IDX["ab"]]
        head = f"delta={ens.params.delta:+g}: " if delta is not None else ""
        out.write(f"{head}n_traj={stats.n_traj} failed={stats.n_failed} "
                  f"N_ab(t_end)={ab[-1]:.6g} N_b(t_end)={stats.mean[IDX['b'], -1]:.6g} "
                  f"max N_t={stats.mean[IDX['t']].max():.6g} "
                  f"max std_ab={stats.std[IDX['ab']].max():.6g}\n")
    return EXIT_OK


def _suffixed(path, label):
    if not label:
        return path
    p = Path(path)
    return p.with_name(p.stem + label + p.suffix)


def cmd_noise(args, out):
    model = NoiseModel.from_gain(args.gain, args.statistics)
    if args.t is not None:
        t = np.array(args.t, dtype=float)
    else:
        t_max = args.t_max if args.t_max is not None else 1.0 / max(args.gain, 1e-300)
        t = np.linspace(0.0, t_max, args.points)
    cols = {"t": t, "gain_t": model.gain * t, "population": pair_population(model, t),
            "correlation": pair_correlation(model, t), "mandel_q": mandel_q(model, t)}
    if model.statistics is PairStatistics.BOSONIC:
        cs = np.full_like(t, np.nan)
        pos = t > 0
        if model.gain > 0 and pos.any():
            cs[pos] = cauchy_schwarz_excess(model, t[pos])
        cols["cs_excess"] = cs
    _print_table(cols, out)
    if args.csv:
        emit_csv(cols, args.csv)
    return EXIT_OK


def cmd_cpt(args, out):
    R, x = np.meshgrid(np.array(args.R, float), np.array(args.omega_over_lambda, float),
                       indexing="ij")
    cols = {"R": R.ravel(), "omega_over_lambda": x.ravel(),
            "n_s": np.atleast_1d(cpt_steady_state(R.ravel(), x.ravel()))}
    _print_table(cols, out)
    if args.optimize:
        for xv in args.omega_over_lambda:
            r_star, value = optimal_ratio(xv)
            out.write(f"optimal R at omega/lambda={xv:g}: R*={r_star:.9g}, n_s={value:.9g}\n")
    if args.csv:
        emit_csv(cols, args.csv)
    return EXIT_OK


def cmd_feasibility(args, out):
    cfg, _ = _load(args)
    params = cfg.model
    f_a, f_b2 = reactant_fractions(cfg.get("R"))
    f_a = f_a if args.f_a is None else args.f_a
    f_b2 = f_b2 if args.f_b2 is None else args.f_b2
    report = assess(params, f_a, f_b2, density_from_cm3(args.density_cm3), args.rate_coeff)
    out.write(f"gain (s^-1)                  {report.gain_physical:.6g}\n"
              f"max permissible rate (s^-1)  {report.max_permissible_rate:.6g}\n"
              f"inelastic rate (s^-1)        {report.inelastic_rate:.6g}\n"
              f"dominated by fluctuations    {report.dominated_by_fluctuations}\n")
    return EXIT_OK


def cmd_presets(args, out):
    if args.name is None:
        for name in sorted(config_mod.PRESETS):
            out.write(f"{name:8s} {config_mod.PRESET_NOTES[name]}\n")
        return EXIT_OK
    out.write(f"# preset {args.name}: {config_mod.PRESET_NOTES[args.name]}\n")
    out.write(config_mod.RunConfig(dict(config_mod.PRESETS[args.name])).to_text())
    return EXIT_OK


COMMANDS = {"run": cmd_run, "ensemble": cmd_ensemble, "noise": cmd_noise, "cpt": cmd_cpt,
            "feasibility": cmd_feasibility, "presets": cmd_presets}


def run_cli(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(err)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except config_mod.ConfigError as exc:
        err.write(f"configuration error: {exc}\n")
        return EXIT_USAGE
    except EnsembleFailure as exc:
        err.write(f"ensemble failed: {exc}\n")
        return EXIT_ENSEMBLE
    except IntegrationError as exc:
        err.write(f"integration failed: {exc}\n")
        return EXIT_INTEGRATION
    except OSError as exc:
        err.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except (PulseVanished, ValueError) as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_DOMAIN


def main():
    sys.exit(run_cli())
