"""Experiment runner CLI: single runs, delay sweeps, report re-printing.

Exit codes: 0 success, 1 configuration error, 2 a halt/disconnect occurred
(so sweep scripts can probe for the halt boundary).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, dump_config, resolve_config
from .metrics import (
    DEFAULT_ROW_INDICES,
    RUN_CSV_HEADER,
    fmt_ms,
    read_summary_csv,
    summarize,
    summary_csv_text,
)
from .simulation import run_simulation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HALT = 2

OUT_DIR_ENV = "EOVSIM_OUT_DIR"


def _out_path(explicit: str | None, default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / default_name


def _trace_printer(time_us: int, seq: int, payload) -> None:
    print(f"[{fmt_ms(time_us):>12} ms] #{seq} {payload!r}")


def cmd_run(args) -> int:
    config = resolve_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.delay_ms is not None:
        config = config.with_injected_delay_ms(args.delay_ms)
    if args.dump_config:
        Path(args.dump_config).write_text(dump_config(config))

    result = run_simulation(config, trace=_trace_printer if args.trace else None)

    out = _out_path(args.out, "run.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write(RUN_CSV_HEADER + "\n")
        for row in result.csv_rows(run_id=0):
            fh.write(row + "\n")

    print(f"blocks produced: {result.blocks_produced}")
    print(f"transactions submitted: {result.submitted}, rejected: {result.rejected}")
    for peer in result.commit_log.peers():
        height = result.ledgers[peer].height
        mark = " [halted]" if peer in result.halted_peers else ""
        print(f"  {peer}: committed {height} blocks{mark}")
    for halt in result.halts:
        print(f"halt: {halt.peer_id} at {fmt_ms(halt.time_us)} ms ({halt.reason}, height {halt.committed_height})")
    series = result.offsets()
    shown = [(i, v) for i, v in series.offsets if i in DEFAULT_ROW_INDICES]
    if shown:
        print(f"offsets {series.target_peer} vs {series.reference_peer} (ms):")
        print("  " + "  ".join(f"{i}:{fmt_ms(v)}" for i, v in shown))
    print(f"csv: {out}")
    return EXIT_HALT if result.halted else EXIT_OK


def _run_sweep(config: RunConfig, delays: list[str], reps: int):
    """Runs ordered by (delay, repetition); seed = base seed + run ordinal."""
    per_delay = []
    per_run_rows = []
    any_halt = False
    ordinal = 0
    results = []
    for delay in delays:
        series_list = []
        for _rep in range(reps):
            cfg = config.with_injected_delay_ms(delay).with_seed(config.seed + ordinal)
            result = run_simulation(cfg)
            any_halt = any_halt or result.halted
            series_list.append(result.offsets())
            per_run_rows.extend(result.csv_rows(run_id=ordinal, delay_label=delay))
            results.append((delay, result))
            ordinal += 1
        per_delay.append((delay, summarize(series_list)))
    return per_delay, per_run_rows, any_halt, results


def print_summary_table(rows: list[dict], out=None) -> None:
    """Console table in the summary CSV's row/column layout, cells verbatim."""
    if out is None:
        out = sys.stdout
    delays = []
    for r in rows:
        if r["delay_ms"] not in delays:
            delays.append(r["delay_ms"])
    indices = sorted({r["block_index"] for r in rows})
    cell = {(r["delay_ms"], r["block_index"]): r["mean_offset_ms"] for r in rows}
    header = ["block"] + [f"{d}ms" for d in delays]
    widths = [max(len(header[0]), 5)] + [
        max(len(h), *(len(cell.get((d, i), "")) for i in indices)) for h, d in zip(header[1:], delays)
    ]
    out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
    for i in indices:
        row = [str(i)] + [cell.get((d, i), "-") for d in delays]
        out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")


def cmd_sweep(args) -> int:
    config = resolve_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    delays = [d.strip() for d in args.delays.split(",") if d.strip()]
    if not delays:
        raise ConfigError("--delays must list at least one delay")
    if args.reps < 1:
        raise ConfigError("--reps must be at least 1")

    per_delay, per_run_rows, any_halt, _ = _run_sweep(config, delays, args.reps)

    out = _out_path(args.out, "summary.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_text = summary_csv_text(per_delay)
    out.write_text(csv_text)
    if args.per_run:
        per_run_path = Path(args.per_run)
        per_run_path.parent.mkdir(parents=True, exist_ok=True)
        with open(per_run_path, "w", newline="") as fh:
            fh.write(RUN_CSV_HEADER + "\n")
            for row in per_run_rows:
                fh.write(row + "\n")

    rows = [
        {"delay_ms": d, "block_index": idx, "mean_offset_ms": fmt_ms(mean_us), "runs": n}
        for d, summary in per_delay
        for idx, mean_us, n in summary
    ]
    print_summary_table(rows)
    print(f"summary csv: {out}")
    return EXIT_HALT if any_halt else EXIT_OK


def cmd_report(args) -> int:
    rows = read_summary_csv(args.input)
    print_summary_table(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eovsim",
        description="Discrete-event simulator of a delay-injected execute-order-validate pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one simulation")
    run.add_argument("--config", required=True, help="config file path or bundled name")
    run.add_argument("--out", help="per-block CSV path (default $EOVSIM_OUT_DIR/run.csv)")
    run.add_argument("--seed", type=int, help="override the configured seed")
    run.add_argument("--delay-ms", help="override net.delay_ms")
    run.add_argument("--trace", action="store_true", help="print one line per event")
    run.add_argument("--dump-config", help="write the effective config to this path")
    run.set_defaults(fn=cmd_run)

    sweep = sub.add_parser("sweep", help="run a delay sweep and summarize")
    sweep.add_argument("--config", required=True, help="config file path or bundled name")
    sweep.add_argument("--delays", required=True, help="comma-separated injected delays in ms")
    sweep.add_argument("--reps", type=int, required=True, help="repetitions per delay")
    sweep.add_argument("--out", help="summary CSV path (default $EOVSIM_OUT_DIR/summary.csv)")
    sweep.add_argument("--per-run", help="also write every run's per-block rows to this CSV")
    sweep.add_argument("--seed", type=int, help="override the base seed")
    sweep.set_defaults(fn=cmd_sweep)

    report = sub.add_parser("report", help="re-print the table from a summary CSV")
    report.add_argument("--in", dest="input", required=True, help="summary CSV path")
    report.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
