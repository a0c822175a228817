"""Command-line front door: run, compare, sweep, classify.

Exit codes: 0 on success, 1 for configuration or usage errors, 2 when a
simulation or the filesystem fails underway.  All data files are written
through the deterministic writers in `output`, so a rerun of an identical
configuration leaves byte-identical files.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import output
from .config import (
    ConfigError,
    RunSettings,
    Value,
    build_run_config,
    config_echo,
    load_config,
)
from .core import DomainSpec, ModelParams, SourceSpec, build_grid
from .regime import (
    RegimeVerdict,
    TraceConstantEstimate,
    classify_tau0,
    classify_tau1,
    estimate_trace_constant,
)
from .solver import Trajectory, advance, reconstruct_2d

__all__ = ["main"]

WORKERS_ENV = "CHEMOFLUX_WORKERS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so main() owns exit codes."""

    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="chemoflux",
                     description="Radial chemotaxis solver with Robin "
                                 "signal loss and inward total flux")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("run", "integrate one configuration"),
                       ("compare", "run boundary-condition variants side by side"),
                       ("sweep", "run a Cartesian parameter grid")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="path to a key = value config file")
        p.add_argument("--out", help="output directory "
                                     "(default ./out_<run_id>)")

    p = sub.add_parser("classify",
                       help="evaluate the boundedness conditions")
    p.add_argument("--tau", type=int, required=True, choices=(0, 1))
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--a", type=float, default=0.0,
                   help="linear growth rate (default 0)")
    p.add_argument("--trace-c", type=float, default=None,
                   help="boundary trace constant; estimated numerically "
                        "when omitted")
    p.add_argument("--dim", type=int, default=2,
                   help="dimension for the numerical estimate (default 2)")
    p.add_argument("--radius", type=float, default=1.0,
                   help="radius for the numerical estimate (default 1)")
    p.add_argument("--cells", type=int, default=256,
                   help="grid cells for the numerical estimate (default 256)")
    return parser


# -- shared helpers -------------------------------------------------------------


def _prepare_out_dir(settings: RunSettings, explicit: str | None) -> str:
    out_dir = explicit if explicit else f"out_{settings.run_id}"
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _emit_series(trajectory: Trajectory, out_dir: str, suffix: str = "") -> list[str]:
    times = trajectory.times
    names = []
    for stem, field in (("plotMass", "mass_u"), ("plotMax", "linf_u")):
        name = f"{stem}{suffix}.dat"
        series = list(zip(times, trajectory.series(field)))
        output.write_timeseries_dat(series, os.path.join(out_dir, name))
        names.append(name)
    return names


def _emit_snapshots(trajectory: Trajectory, settings: RunSettings,
                    out_dir: str) -> list[str]:
    names = []
    grid = settings.run_config.grid
    radius = grid.radius
    times = trajectory.times
    for t_want in settings.snapshot_times:
        index = int(np.argmin(np.abs(times - t_want)))
        state = trajectory.samples[index].state
        pixels = reconstruct_2d(state, grid, settings.snapshot_resolution)
        name = f"snapshot_t{output.format_number(t_want)}.csv"
        output.write_snapshot_csv(pixels, os.path.join(out_dir, name),
                                  -radius, radius, -radius, radius)
        names.append(name)
    return names


def _summary_line(tag: str, trajectory: Trajectory) -> str:
    record = trajectory.samples[-1].record
    status = trajectory.status
    parts = [f"{tag}: {status.kind}",
             f"t_final={output.format_number(status.t_final)}",
             f"mass={record.mass_u:.6g}",
             f"max={record.linf_u:.6g}"]
    if status.estimated_blowup_time is not None:
        parts.append(f"t_blowup~{output.format_number(status.estimated_blowup_time)}")
    return "  ".join(parts)


# -- run -------------------------------------------------------------------------


def cmd_run(config_path: str, out: str | None = None) -> int:
    settings = build_run_config(load_config(config_path))
    if settings.snapshot_times and settings.run_config.grid.dim != 2:
        raise ConfigError("snapshots need a two-dimensional domain")
    out_dir = _prepare_out_dir(settings, out)
    trajectory = advance(settings.run_config)
    names = _emit_series(trajectory, out_dir)
    names += _emit_snapshots(trajectory, settings, out_dir)
    manifest = output.OutputManifest(
        run_id=settings.run_id,
        paths=output.relative_paths(out_dir, names),
        config_echo=config_echo(settings),
        status=output.status_summary(trajectory.status),
    )
    output.write_manifest(manifest, out_dir)
    print(_summary_line("run", trajectory))
    print(f"wrote {len(names) + 1} files to {out_dir}")
    return 0


# -- compare ---------------------------------------------------------------------


def _variant_entries(settings: RunSettings) -> list[tuple[str, dict[str, Value]]]:
    variants: list[tuple[str, dict[str, Value]]] = []
    if settings.neumann_baseline:
        entries = dict(settings.entries)
        entries["params.h"] = 0.0
        variants.append(("neumann", entries))
    for alpha in settings.compare_alphas:
        entries = dict(settings.entries)
        entries["params.alpha"] = alpha
        variants.append((f"alpha{output.format_number(alpha)}", entries))
    return variants


def cmd_compare(config_path: str, out: str | None = None) -> int:
    settings = build_run_config(load_config(config_path))
    variants = _variant_entries(settings)
    if not variants:
        raise ConfigError("compare needs compare.alphas and/or "
                          "compare.neumann_baseline = true")
    out_dir = _prepare_out_dir(settings, out)

    names: list[str] = []
    runs: list[tuple[str, Trajectory]] = []
    for tag, entries in variants:
        for key in ("compare.alphas", "compare.neumann_baseline"):
            entries.pop(key, None)
        variant = build_run_config(entries)
        trajectory = advance(variant.run_config)
        runs.append((tag, trajectory))
        names += _emit_series(trajectory, out_dir, suffix=f"_{tag}")
        print(_summary_line(tag, trajectory))

    # joined table at sample times every run reached
    rounded = [dict((round(t, 12), i) for i, t in enumerate(tr.times))
               for _, tr in runs]
    common = sorted(set(rounded[0]).intersection(*rounded[1:]))
    lines = ["# t " + " ".join(f"mass_{tag} max_{tag}" for tag, _ in runs)]
    for t in common:
        row = [output.format_number(t)]
        for (tag, trajectory), index in zip(runs, rounded):
            record = trajectory.samples[index[t]].record
            row.append(output.format_number(record.mass_u))
            row.append(output.format_number(record.linf_u))
        lines.append(" ".join(row))
    table_name = "comparison.dat"
    with open(os.path.join(out_dir, table_name), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    names.append(table_name)

    manifest = output.OutputManifest(
        run_id=settings.run_id,
        paths=output.relative_paths(out_dir, names),
        config_echo=config_echo(settings),
        status={tag: output.status_summary(tr.status) for tag, tr in runs},
    )
    output.write_manifest(manifest, out_dir)
    print(f"wrote {len(names) + 1} files to {out_dir}")
    return 0


# -- sweep -----------------------------------------------------------------------


def _classify_entries(entries: dict[str, Value],
                      trace_c: TraceConstantEstimate) -> RegimeVerdict:
    params = ModelParams(chi=float(entries["params.chi"]),
                         h=float(entries["params.h"]),
                         alpha=float(entries["params.alpha"]),
                         tau=int(entries["params.tau"]))
    source = SourceSpec(a=float(entries["source.a"]),
                        b=float(entries["source.b"]),
                        c=float(entries["source.c"]))
    classify = classify_tau0 if params.tau == 0 else classify_tau1
    return classify(params, source, trace_c)


def _sweep_cell(task: tuple) -> dict[str, str]:
    values, entries, classifier_only, trace_value, trace_kind = task
    row = {"values": values}
    try:
        trace_c = TraceConstantEstimate(p=2, value=trace_value, kind=trace_kind)
        verdict = _classify_entries(entries, trace_c)
        row["verdict"] = "bounded" if verdict.bounded else "unbounded"
        row["conditions"] = "+".join(
            c.value for c in verdict.satisfied_conditions) or "none"
        if classifier_only:
            row["status"] = "skipped"
            row["t_final"] = "-"
        else:
            settings = build_run_config(entries)
            trajectory = advance(settings.run_config)
            row["status"] = trajectory.status.kind
            row["t_final"] = output.format_number(trajectory.status.t_final)
    except Exception as exc:  # per-cell failures must not kill the sweep
        row.setdefault("verdict", "error")
        row.setdefault("conditions", "none")
        row["status"] = "error"
        row["t_final"] = "-"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        try:
            count = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
        if count < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {count}")
        return count
    return os.cpu_count() or 1


def cmd_sweep(config_path: str, out: str | None = None) -> int:
    raw = load_config(config_path)
    vary: dict[str, tuple] = {}
    classifier_only = False
    trace_supplied: float | None = None
    base: dict[str, Value] = {}
    for key, value in raw.items():
        if key.startswith("sweep.vary."):
            target = key[len("sweep.vary."):]
            if not isinstance(value, tuple) or not value:
                raise ConfigError(f"{key} must be a nonempty list")
            vary[target] = value
        elif key == "sweep.classifier_only":
            if not isinstance(value, bool):
                raise ConfigError("sweep.classifier_only must be true or false")
            classifier_only = value
        elif key == "sweep.trace_c":
            trace_supplied = float(value)
        else:
            base[key] = value
    if not vary:
        raise ConfigError("sweep needs at least one sweep.vary.<key> list")

    settings = build_run_config(base)  # validates the base configuration
    out_dir = _prepare_out_dir(settings, out)

    if trace_supplied is not None:
        trace_c = TraceConstantEstimate(p=2, value=trace_supplied,
                                        kind="user-supplied")
    else:
        trace_c = estimate_trace_constant(settings.run_config.grid, p=2)
        print(f"note: trace constant estimated numerically as "
              f"{trace_c.value:g} (lower bound); set sweep.trace_c to "
              f"override", file=sys.stderr)

    keys = sorted(vary)
    cells = sorted(itertools.product(*(vary[k] for k in keys)))
    tasks = []
    for values in cells:
        entries = dict(settings.entries)  # defaults resolved once, up front
        entries.update(zip(keys, values))
        tasks.append((" ".join(output.format_number(v) for v in values),
                      entries, classifier_only, trace_c.value, trace_c.kind))

    if classifier_only or len(tasks) == 1:
        rows = [_sweep_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(_worker_count(),
                                                 len(tasks))) as pool:
            rows = list(pool.map(_sweep_cell, tasks))

    lines = ["# " + " ".join(keys) + " verdict conditions status t_final"]
    failures = []
    for row in rows:
        lines.append(" ".join((row["values"], row["verdict"],
                               row["conditions"], row["status"],
                               row["t_final"])))
        if "error" in row:
            failures.append((row["values"], row["error"]))
    table_name = "sweep.dat"
    with open(os.path.join(out_dir, table_name), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    manifest = output.OutputManifest(
        run_id=settings.run_id,
        paths=output.relative_paths(out_dir, [table_name]),
        config_echo=config_echo(settings),
        status={
            "cells": len(rows),
            "failures": [f"{v}: {e}" for v, e in failures],
            "trace_constant": trace_c.value,
            "trace_kind": trace_c.kind,
        },
    )
    output.write_manifest(manifest, out_dir)
    for values, error in failures:
        print(f"cell {values}: {error}", file=sys.stderr)
    print(f"swept {len(rows)} cells "
          f"({sum(1 for r in rows if 'error' in r)} failed); "
          f"wrote {out_dir}/{table_name}")
    return 0


# -- classify --------------------------------------------------------------------


def cmd_classify(args: argparse.Namespace) -> int:
    params = ModelParams(chi=args.chi, h=args.h, alpha=args.alpha, tau=args.tau)
    source = SourceSpec(a=args.a, b=args.b, c=args.c)
    if args.trace_c is not None:
        trace_c = TraceConstantEstimate(p=2, value=args.trace_c,
                                        kind="user-supplied")
    else:
        grid = build_grid(DomainSpec(dim=args.dim, radius=args.radius),
                          args.cells)
        trace_c = estimate_trace_constant(grid, p=2)
        print("warning: trace constant estimated numerically (a lower "
              "bound); the sufficiency argument needs an upper bound, so "
              "treat 'bounded' verdicts that rely on it as indicative",
              file=sys.stderr)
    classify = classify_tau0 if params.tau == 0 else classify_tau1
    verdict = classify(params, source, trace_c)
    print(f"verdict: {'bounded' if verdict.bounded else 'not bounded by the implemented conditions'}")
    conditions = ", ".join(c.value for c in verdict.satisfied_conditions)
    print(f"conditions: {conditions or 'none'}")
    if verdict.witness is not None:
        print(f"witness: eps1={output.format_number(verdict.witness.eps1)} "
              f"eps2={output.format_number(verdict.witness.eps2)}")
    print(f"trace constant: {output.format_number(trace_c.value)} ({trace_c.kind})")
    return 0


# -- entry point -----------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out)
        if args.command == "compare":
            return cmd_compare(args.config, args.out)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.out)
        return cmd_classify(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
