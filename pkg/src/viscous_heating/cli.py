"""``viscous-heating`` command line front end.

Every run writes ``<out>/<subcommand>-<timestamp>/`` holding ``config.txt``
(the canonical configuration), the CSV outputs, ``plots/`` and a
``manifest.txt`` written last and atomically.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 non-convergence.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bgk_solver import (GridCoverageError, NumericalBlowupError, StepSizeError, read_checkpoint,
                         run as run_bgk, write_checkpoint, write_snapshots)
from .config import ConfigError, parse_config, render_config
from .diagnostics import (SlopeDomainError, loglog_slope, read_series_csv, slope_table,
                          windowed_average, write_slope_csv)
from .dsmc_solver import DsmcRunError, run_ensemble
from .gauss_moments import (EXP_WEIGHT, R2_WEIGHT, UNIT_WEIGHT, format_reports, reports_csv,
                            verify_appendix)
from .kinetic_core import DegenerateStateError, ParameterError, SupportError
from .plots import PlotError, emit_plots
from .reduced_cns import StepError, run_cns
from .steady_ns import InconsistencyError, nsf_theta, solve_steady, write_coefficients_csv

__all__ = ["main", "RunManifest", "sha256_file", "make_run_dir", "EXIT_OK", "EXIT_CONFIG",
           "EXIT_NUMERICAL", "EXIT_NONCONVERGENCE"]

log = logging.getLogger("viscous_heating")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NONCONVERGENCE = 4

WEIGHTS = {w.label: w for w in (UNIT_WEIGHT, R2_WEIGHT, EXP_WEIGHT)}
NUMERICAL_ERRORS = (NumericalBlowupError, GridCoverageError, StepSizeError, DegenerateStateError,
                    SupportError, StepError, DsmcRunError, FloatingPointError)


class NonConvergence(Exception):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _stamp(t: float) -> str:
    return datetime.fromtimestamp(t, timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass
class RunManifest:
    subcommand: str
    config_text: str
    run_dir: Path
    version: str = __version__
    start: float = field(default_factory=time.time)
    end: float | None = None
    status: str = "ok"
    extra: list = field(default_factory=list)

    def outputs(self) -> list[Path]:
        return sorted(p for p in self.run_dir.rglob("*")
                      if p.is_file() and p.name != "manifest.txt" and not p.name.startswith("."))

    def text(self) -> str:
        lines = [f"subcommand = {self.subcommand}",
                 f"version = {self.version}",
                 f"start = {_stamp(self.start)}",
                 f"end = {_stamp(self.end if self.end is not None else time.time())}",
                 f"status = {self.status}",
                 f"config_sha256 = {hashlib.sha256(self.config_text.encode()).hexdigest()}"]
        lines += [str(e) for e in self.extra]
        for p in self.outputs():
            lines.append(f"output = {p.relative_to(self.run_dir).as_posix()} {sha256_file(p)}")
        lines.append("[config]")
        lines.append(self.config_text.rstrip("\n"))
        return "\n".join(lines) + "\n"

    def write(self) -> Path:
        """Write ``manifest.txt`` through a temporary file and an atomic rename."""
        self.end = time.time()
        target = self.run_dir / "manifest.txt"
        fd, tmp = tempfile.mkstemp(dir=self.run_dir, prefix=".manifest-")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(self.text())
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target


def read_manifest_outputs(path) -> dict:
    """Map of output name to digest, as recorded in a manifest."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("[config]"):
            break
        if line.startswith("output = "):
            name, digest = line[len("output = "):].rsplit(" ", 1)
            out[name] = digest
    return out


def make_run_dir(out, subcommand: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = Path(out) / f"{subcommand}-{stamp}"
    path, k = base, 1
    while path.exists():
        k += 1
        path = Path(f"{base}-{k}")
    path.mkdir(parents=True)
    return path


def _plots(run_dir: Path):
    try:
        emit_plots(run_dir)
    except PlotError as exc:
        log.warning("plot scripts not written: %s", exc)


# ------------------------------------------------------------ subcommands

def cmd_moments_verify(args) -> int:
    reports = verify_appendix(WEIGHTS[args.weights_alpha], WEIGHTS[args.weights_beta])
    text = (f"weights_alpha = {args.weights_alpha}\nweights_beta = {args.weights_beta}\n")
    run_dir = make_run_dir(args.out, "moments-verify")
    man = RunManifest("moments-verify", text, run_dir, start=args.start)
    (run_dir / "config.txt").write_text(text)
    (run_dir / "lemmas.csv").write_text(reports_csv(reports))
    print(format_reports(reports))
    ok = all(r.passed for r in reports)
    man.status = "ok" if ok else "identity check failed"
    man.write()
    print(f"run directory: {run_dir}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_bgk_run(args) -> int:
    cfg = parse_config(args.config, "bgk")
    state = None
    if args.resume:
        try:
            state, grid = read_checkpoint(args.resume)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot resume from {args.resume}: {exc}") from None
        if grid.n_cells != cfg.grid.n_cells or state.vgrid.n_v1 != cfg.vgrid.n_v1 \
                or state.vgrid.n_v2 != cfg.vgrid.n_v2:
            raise ConfigError(f"checkpoint {args.resume} does not match the configured grids")
    text = render_config(cfg)
    run_dir = make_run_dir(args.out, "bgk-run")
    (run_dir / "config.txt").write_text(text)
    man = RunManifest("bgk run", text, run_dir, start=args.start)
    if args.resume:
        man.extra.append(f"resumed_from = {args.resume} (t={state.time:.12g})")
    try:
        series = run_bgk(cfg, state)
    except NumericalBlowupError as exc:
        dump = {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
                for k, v in (exc.dump or {}).items()}
        (run_dir / "blowup_dump.json").write_text(json.dumps(dump, indent=1))
        man.status = f"numerical failure: {exc}"
        man.write()
        raise
    series.write_csv(run_dir / "series.csv")
    write_snapshots(run_dir, series, cfg.grid)
    st = series.final_state
    write_checkpoint(run_dir / "checkpoint.bin", st, cfg.grid)
    man.extra += [f"final_time = {st.time:.12g}", f"steps = {st.step_count}",
                  f"final_scale = {st.vgrid.scale:.12g}", f"clipped_values = {st.clip_count}",
                  f"remap_count = {len(st.remap_events)}"]
    man.extra += [f"remap t={e['time']:.10g} scale {e['old_scale']:.8g} -> {e['new_scale']:.8g} "
                  f"defect={e['defect']:.3e}" for e in st.remap_events]
    _plots(run_dir)
    man.write()
    print(f"t = {st.time:.6g}  theta_av = {series.theta_av[-1]:.6g}  "
          f"|u2|_av = {series.u2_av[-1]:.6g}  steps = {st.step_count}")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_dsmc_run(args) -> int:
    cfg = parse_config(args.config, "dsmc")
    text = render_config(cfg)
    run_dir = make_run_dir(args.out, "dsmc-run")
    (run_dir / "config.txt").write_text(text)
    man = RunManifest("dsmc run", text, run_dir, start=args.start)
    avg = run_ensemble(cfg, args.workers)
    runs_dir = run_dir / "runs"
    runs_dir.mkdir()
    for i, r in enumerate(avg.runs):
        r.write_csv(runs_dir / f"run_{i:03d}_seed_{r.seed}.csv")
    avg.write_csv(run_dir / "aggregate.csv")
    man.extra.append("seeds = " + ", ".join(str(s) for s in avg.seeds))
    man.extra.append(f"collisions = {sum(r.collisions for r in avg.runs)}")
    _plots(run_dir)
    man.write()
    print(f"t = {avg.times[-1]:.6g}  theta_av = {avg.theta_av_mean[-1]:.6g} "
          f"+- {avg.theta_av_se[-1]:.3g}  ({len(avg.runs)} runs)")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_cns_run(args) -> int:
    cfg = parse_config(args.config, "cns")
    text = render_config(cfg)
    run_dir = make_run_dir(args.out, "cns-run")
    (run_dir / "config.txt").write_text(text)
    man = RunManifest("cns run", text, run_dir, start=args.start)
    series = run_cns(cfg)
    series.write_csv(run_dir / "series.csv")
    rel = np.abs(np.asarray(series.theta_av) / np.asarray(series.closed_form) - 1.0)
    man.extra.append(f"max_rel_diff_closed_form = {rel.max():.6e}")
    _plots(run_dir)
    man.write()
    print(f"t = {series.times[-1]:.6g}  theta_av = {series.theta_av[-1]:.6g}  "
          f"closed form = {series.closed_form[-1]:.6g}")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_steady_ns(args) -> int:
    cfg = parse_config(args.config, "steady-ns")
    text = render_config(cfg)
    run_dir = make_run_dir(args.out, "steady-ns-solve")
    (run_dir / "config.txt").write_text(text)
    man = RunManifest("steady-ns solve", text, run_dir, start=args.start)
    res = solve_steady(cfg)
    write_coefficients_csv(run_dir / "coefficients.csv", res.u)
    np.savetxt(run_dir / "iterations.csv",
               np.column_stack([np.arange(len(res.residuals)), res.residuals,
                                np.concatenate([[np.nan], res.increments])]),
               delimiter=",", header="iteration,residual,increment", comments="", fmt="%.12e")
    cert = res.certificate_text()
    if res.converged:
        try:
            nsf_theta(res.u, cfg.kappa)
            cert += "nsf_theta = 0 (sweeps reached zero)\n"
        except InconsistencyError as exc:
            cert += f"nsf_theta = failed ({exc})\n"
    (run_dir / "certificate.txt").write_text(cert)
    man.status = "ok" if res.converged else "not converged"
    man.write()
    print(cert, end="")
    print(f"run directory: {run_dir}")
    if not res.converged:
        raise NonConvergence(f"Picard iteration did not converge in {res.iterations} iterations "
                             f"(residual {res.residual:.3e})")
    return EXIT_OK


def _column_alias(data: dict, name: str):
    if name in data:
        return
    if f"{name}_mean" in data:  # DSMC aggregates
        data[name] = data[f"{name}_mean"]


def cmd_fit_slope(args) -> int:
    try:
        data = read_series_csv(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from None
    if "times" not in data:
        raise ConfigError(f"{args.input} has no 't' column")
    for name in ("theta_av", "u2_av"):
        _column_alias(data, name)
    need = ["theta_av", "u2_av"] if args.field == "both" else [args.field]
    for name in need:
        if name not in data:
            raise ConfigError(f"{args.input} has no {name!r} column")
    text = (f"input = {Path(args.input).resolve()}\nfield = {args.field}\nwindow = {args.window!r}\n"
            f"beta_window = {args.beta_window!r}\nt_min = {args.t_min!r}\n")
    if args.field == "both":
        s = slope_table(data, args.window, args.beta_window, args.t_min)
    else:
        s = loglog_slope(data, args.field, args.window, args.t_min)
        if args.field == "u2_av" and args.beta_window:
            s = windowed_average(s, "beta", args.beta_window)
    run_dir = make_run_dir(args.out, "fit-slope")
    (run_dir / "config.txt").write_text(text)
    man = RunManifest("fit slope", text, run_dir, start=args.start,
                      extra=[f"note = {n}" for n in s.notes])
    write_slope_csv(run_dir / "slopes.csv", s)
    _plots(run_dir)
    man.write()
    last = {k: getattr(s, k)[-1] for k in ("alpha", "beta", "beta_bar") if getattr(s, k) is not None}
    print(f"t = {s.times[-1]:.6g}  " + "  ".join(f"{k} = {v:.4f}" for k, v in last.items()))
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_emit_plots(args) -> int:
    written = emit_plots(args.run_dir)
    for p in written:
        print(p)
    return EXIT_OK


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="viscous-heating", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_out(sp):
        sp.add_argument("--out", default="runs", help="parent directory for run output")
        return sp

    mv = with_out(sub.add_parser("moments-verify", help="check the Gaussian bracket identities"))
    mv.add_argument("--weights-alpha", choices=sorted(WEIGHTS), default="1")
    mv.add_argument("--weights-beta", choices=sorted(WEIGHTS), default="1")
    mv.set_defaults(func=cmd_moments_verify)

    bgk = sub.add_parser("bgk", help="BGK kinetic solver").add_subparsers(dest="action",
                                                                            required=True)
    br = with_out(bgk.add_parser("run", help="run the BGK solver"))
    br.add_argument("--config", required=True)
    br.add_argument("--resume", help="checkpoint file to continue from")
    br.set_defaults(func=cmd_bgk_run)

    dsmc = sub.add_parser("dsmc", help="DSMC particle solver").add_subparsers(dest="action",
                                                                               required=True)
    dr = with_out(dsmc.add_parser("run", help="run a DSMC ensemble"))
    dr.add_argument("--config", required=True)
    dr.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: VISCOUS_HEATING_WORKERS or 1)")
    dr.set_defaults(func=cmd_dsmc_run)

    cns = sub.add_parser("cns", help="reduced Navier-Stokes model").add_subparsers(dest="action",
                                                                                    required=True)
    cr = with_out(cns.add_parser("run", help="run the reduced model"))
    cr.add_argument("--config", required=True)
    cr.set_defaults(func=cmd_cns_run)

    ns = sub.add_parser("steady-ns", help="steady incompressible NS on the torus")
    nss = with_out(ns.add_subparsers(dest="action", required=True).add_parser(
        "solve", help="Picard solve for a given force"))
    nss.add_argument("--config", required=True)
    nss.set_defaults(func=cmd_steady_ns)

    fit = sub.add_parser("fit", help="growth exponent fits")
    fs = with_out(fit.add_subparsers(dest="action", required=True).add_parser(
        "slope", help="log-log slopes of a series CSV"))
    fs.add_argument("--input", required=True)
    fs.add_argument("--field", choices=("theta_av", "u2_av", "both"), default="both")
    fs.add_argument("--window", type=float, default=0.25, help="fit window in decades of t")
    fs.add_argument("--beta-window", type=float, default=None,
                    help="trailing time-average window for beta")
    fs.add_argument("--t-min", type=float, default=0.0)
    fs.set_defaults(func=cmd_fit_slope)

    ep = sub.add_parser("emit-plots", help="write matplotlib scripts for a run directory")
    ep.add_argument("run_dir")
    ep.set_defaults(func=cmd_emit_plots)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.start = time.time()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterError, PlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SlopeDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NonConvergence as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
