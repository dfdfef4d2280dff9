"""Command line entry points: simulate | verify | sweep | export-plotdata.

Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 blowup
detected (informational for pure-Euler runs), 5 verify failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_BLOWUP = 4
EXIT_VERIFY = 5

_SWEEP_CELL_LIMIT = 64


def _out_root(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get("PLASMAWAVE_OUT")
    return Path(env) if env else Path("output")


def _write_run_artifacts(outdir: Path, cfg, sim, resumed_from=None):
    import io

    from .config import format_config
    from .diagnostics import rate_fit, records_to_csv
    from .harness import write_checkpoint
    from .scattering import scattering_analysis

    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "diagnostics.csv", "w") as fh:
        records_to_csv(sim.records, fh, comment=f"label={cfg.label} seed={cfg.seed}")
    (outdir / "config_echo.cfg").write_text(format_config(cfg))
    write_checkpoint(outdir / "checkpoint_final.epkg", sim.result.final_state)

    lines = [f"status = {sim.result.status}",
             f"valid_horizon = %.17g" % sim.result.valid_horizon]
    if sim.result.detector_time is not None:
        lines.append(f"detector_time = %.17g" % sim.result.detector_time)
    ts = np.array([r.t for r in sim.records])
    sup = np.array([r.sup_abs_h for r in sim.records])
    lo, hi = 20.0, cfg.run.t_final
    if (ts >= lo).sum() >= 8 and sim.result.status == "clean" and sup.max() > 0:
        fit = rate_fit(ts, sup, (lo, hi))
        lines.append(f"decay_slope = %.17g" % fit.slope)
        lines.append(f"decay_band = %.17g" % fit.band)
        lines.append(f"decay_window = %.17g %.17g" % fit.window)
    if resumed_from is not None:
        lines.append(f"resumed_from = {resumed_from}")
    (outdir / "report.txt").write_text("\n".join(lines) + "\n")

    if sim.scat_times and len(sim.scat_times) >= 20:
        grid = cfg.run.grid()
        try:
            rep = scattering_analysis(grid, sim.scat_times, sim.scat_profiles,
                                      sim.scat_thetas, cfg.run.n1_sob + 10,
                                      cfg.run.carrier)
        except ValueError:
            rep = None      # horizon too short for a meaningful fit
        if rep is not None:
            with open(outdir / "scattering_report.txt", "w") as fh:
                rep.save_text(fh)


def cmd_simulate(args) -> int:
    from .config import ConfigError, load_config
    from .harness import read_checkpoint, simulate_with_diagnostics

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _out_root(args) / cfg.label
    state = None
    if args.resume:
        try:
            state = read_checkpoint(args.resume)
        except (OSError, ValueError) as exc:
            print(f"config error: cannot resume: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        sim = simulate_with_diagnostics(cfg.run, scattering=cfg.scattering
                                        and cfg.run.electric_field_on,
                                        state=state)
    except Exception as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_run_artifacts(outdir, cfg, sim, resumed_from=args.resume)
    status = sim.result.status
    print(f"{cfg.label}: {status}"
          + (f" at t={sim.result.detector_time:g}" if sim.result.detector_time else "")
          + f" ({len(sim.records)} records) -> {outdir}")
    if status == "nan":
        return EXIT_NUMERIC
    if status in ("steepening", "resolution_loss"):
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    try:
        rows = run_suite(args.suite, seed=args.seed)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n_fail = 0
    for name, ok, detail in rows:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
        n_fail += 0 if ok else 1
    print(f"summary: {len(rows) - n_fail}/{len(rows)} passed, suite={args.suite}")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


def _sweep_cell(payload):
    import io

    from .config import parse_config
    from .diagnostics import rate_fit
    from .harness import simulate_with_diagnostics

    text, label, amplitude, carrier, width, outdir = payload
    cfg = parse_config(text)
    cfg.label = label
    cfg.run = replace(cfg.run, amplitude=amplitude, carrier=carrier,
                      packet_width=width)
    try:
        cfg.validate()
        sim = simulate_with_diagnostics(cfg.run, scattering=False)
    except Exception as exc:
        return (label, amplitude, carrier, width, "error", "", str(exc))
    res = sim.result
    slope = ""
    ts = np.array([r.t for r in sim.records])
    sup = np.array([r.sup_abs_h for r in sim.records])
    if res.status == "clean" and (ts >= 20.0).sum() >= 8 and sup.max() > 0:
        slope = "%.6g" % rate_fit(ts, sup, (20.0, cfg.run.t_final)).slope
    det = "%.6g" % res.detector_time if res.detector_time is not None else ""
    root = Path(outdir) / label
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "diagnostics.csv", "w") as fh:
        from .diagnostics import records_to_csv
        records_to_csv(sim.records, fh, comment=f"label={label}")
    return (label, amplitude, carrier, width, res.status, det, slope)


def cmd_sweep(args) -> int:
    from .config import ConfigError, load_config

    try:
        base = load_config(args.config)
        amplitudes = [float(s) for s in args.amplitudes.split(",")] \
            if args.amplitudes else [base.run.amplitude]
        carriers = [float(s) for s in args.carriers.split(",")] \
            if args.carriers else [base.run.carrier]
        widths = [float(s) for s in args.widths.split(",")] \
            if args.widths else [base.run.packet_width]
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cells = [(a, k, w) for a in amplitudes for k in carriers for w in widths]
    if len(cells) > _SWEEP_CELL_LIMIT:
        print(f"config error: sweep of {len(cells)} cells exceeds limit "
              f"{_SWEEP_CELL_LIMIT}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _out_root(args) / f"{base.label}_sweep"
    outdir.mkdir(parents=True, exist_ok=True)
    text = Path(args.config).read_text()
    payloads = [(text, f"{base.label}_a{a:g}_k{k:g}_s{w:g}", a, k, w, str(outdir))
                for (a, k, w) in cells]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_cell, payloads))
    else:
        results = [_sweep_cell(p) for p in payloads]
    table = outdir / "sweep_results.csv"
    with open(table, "w") as fh:
        fh.write("label,amplitude,carrier,packet_width,status,detector_time,decay_slope\n")
        for row in results:
            fh.write(",".join(str(c) for c in row) + "\n")
    for row in results:
        print(" ".join(str(c) for c in row))
    print(f"sweep table -> {table}")
    return EXIT_OK


_DECAY_HEADER = "t,sup_abs_h,max_grad_n"
_SPECTRUM_HEADER = "xi,abs_spectrum"
_CONVERGENCE_HEADER = "t,d_corrected,d_control,band_corrected,band_control"


def cmd_export_plotdata(args) -> int:
    from .diagnostics import records_from_csv
    from .grid import forward_transform
    from .harness import read_checkpoint

    rundir = Path(args.run)
    diag = rundir / "diagnostics.csv"
    if not diag.exists():
        print(f"config error: no diagnostics.csv under {rundir}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else rundir / "plotdata"
    out.mkdir(parents=True, exist_ok=True)

    with open(diag) as fh:
        records = records_from_csv(fh)
    with open(out / "decay_curve.csv", "w") as fh:
        fh.write(_DECAY_HEADER + "\n")
        for r in records:
            fh.write("%.17g,%.17g,%.17g\n" % (r.t, r.sup_abs_h, r.max_grad_n))

    ck = rundir / "checkpoint_final.epkg"
    if ck.exists():
        state = read_checkpoint(ck)
        from . import dynamics as dyn
        grid = state.grid
        if isinstance(state, dyn.ComplexState):
            spec = np.abs(forward_transform(grid, state.h))
        else:
            nv = dyn.convert(state, "nv")
            spec = np.abs(forward_transform(grid, nv.n - 1.0))
        with open(out / "spectrum_snapshot.csv", "w") as fh:
            fh.write(_SPECTRUM_HEADER + "\n")
            for xi, a in zip(grid.xi, spec):
                fh.write("%.17g,%.17g\n" % (xi, a))

    scat = rundir / "scattering_report.txt"
    if scat.exists():
        lines = scat.read_text().splitlines()
        try:
            i = lines.index("t,d_corrected,d_control,band_corrected,band_control")
        except ValueError:
            print("config error: scattering report lacks convergence table",
                  file=sys.stderr)
            return EXIT_CONFIG
        with open(out / "scattering_convergence.csv", "w") as fh:
            fh.write(_CONVERGENCE_HEADER + "\n")
            for line in lines[i + 1:]:
                if line.strip():
                    fh.write(line.strip() + "\n")

    ann = ["source = " + str(rundir.resolve())]
    rep = rundir / "report.txt"
    if rep.exists():
        ann.extend(l for l in rep.read_text().splitlines() if l.strip())
    if scat.exists():
        from .scattering import ScatteringReport
        with open(scat) as fh:
            scalars = ScatteringReport.load_scalars(fh)
        for key in ("delta", "delta_band", "weight_exponent", "carrier",
                    "band_corrected_final", "band_control_final"):
            if key in scalars:
                ann.append(f"{key} = {scalars[key]}")
    (out / "annotations.txt").write_text("\n".join(ann) + "\n")
    print(f"plot bundle -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plasmawave",
                                description="1D electron plasma wave toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run one configuration")
    ps.add_argument("--config", required=True)
    ps.add_argument("--out", default=None, help="output root (default $PLASMAWAVE_OUT or ./output)")
    ps.add_argument("--resume", default=None, help="checkpoint file to resume from")
    ps.set_defaults(func=cmd_simulate)

    pv = sub.add_parser("verify", help="run invariant suites")
    pv.add_argument("--suite", default="all",
                    choices=["symbols", "identities", "scattering", "appendix", "all"])
    pv.add_argument("--seed", type=int, default=1234)
    pv.set_defaults(func=cmd_verify)

    pw = sub.add_parser("sweep", help="grid of (amplitude, carrier, width) cells")
    pw.add_argument("--config", required=True)
    pw.add_argument("--amplitudes", default=None)
    pw.add_argument("--carriers", default=None)
    pw.add_argument("--widths", default=None)
    pw.add_argument("--jobs", type=int, default=1)
    pw.add_argument("--out", default=None)
    pw.set_defaults(func=cmd_sweep)

    pe = sub.add_parser("export-plotdata", help="normalize run artifacts for plotting")
    pe.add_argument("--run", required=True, help="run directory")
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=cmd_export_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
