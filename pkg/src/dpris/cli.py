"""Command-line front end.

Subcommands: ber-sweep, oracle-check, file-loopback, export-waveform.
Exit codes: 0 success, 2 configuration error, 3 oracle failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .campaign import (
    export_waveform,
    run_ber_sweep,
    run_file_loopback,
    run_oracle_check,
    write_ber_csv,
)
from .config import ConfigError, config_hash, load_config
from .receiver import SingularChannelError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_IO = 4


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="PATH", default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the campaign seed")
    parser.add_argument("--out", metavar="PATH", default=None, help="output file path")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    parser.add_argument("--force", action="store_true", help="allow overwriting outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpris",
        description="Link-level simulator for a dual-polarized reflective-surface MIMO-QAM transmitter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber-sweep", help="Monte Carlo BER sweep over the Eb/N0 grid")
    _add_common(p)

    p = sub.add_parser("oracle-check", help="run the analytic self-check suites")
    _add_common(p)

    p = sub.add_parser("file-loopback", help="transmit a file through the fidelity-B link")
    p.add_argument("input", metavar="INPUT", help="file to transmit")
    _add_common(p)

    p = sub.add_parser("export-waveform", help="export one modulation waveform as CSV")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed} if args.seed is not None else {}
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "ber-sweep":
            return _cmd_ber_sweep(args, config)
        if args.command == "oracle-check":
            return _cmd_oracle_check(args, config)
        if args.command == "file-loopback":
            return _cmd_file_loopback(args, config)
        if args.command == "export-waveform":
            return _cmd_export_waveform(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularChannelError as exc:
        print(f"config error: configured channel cannot be equalized: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FileExistsError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    raise AssertionError(f"unhandled command {args.command}")


def _cmd_ber_sweep(args, config) -> int:
    if args.out is None:
        print("config error: ber-sweep needs --out PATH for the CSV", file=sys.stderr)
        return EXIT_CONFIG
    result = run_ber_sweep(config, threads=max(1, args.threads))
    write_ber_csv(result, config, args.out, force=args.force)
    print(
        f"ber-sweep: {len(result.records)} points, config_hash={result.config_hash}, "
        f"throughput {result.throughput_bps / 1e6:g} Mbps, wall {result.wall_time_s:.2f} s"
    )
    for record, theory in zip(result.records, result.theoretical):
        print(
            f"  Eb/N0 {record.ebn0_db:6.2f} dB: ber {record.ber:.3e} "
            f"(+-{record.wilson_interval_halfwidth:.1e}), theory {theory:.3e}, "
            f"{record.bit_errors}/{record.bits_sent} bits"
        )
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_oracle_check(args, config) -> int:
    report = run_oracle_check(config)
    for suite in report.suites:
        status = "PASS" if suite.passed else "FAIL"
        print(f"{status} {suite.name} ({suite.cases} cases): {suite.detail}")
    if not report.ok:
        return EXIT_ORACLE
    return EXIT_OK


def _cmd_file_loopback(args, config) -> int:
    if args.out is None:
        print("config error: file-loopback needs --out PATH", file=sys.stderr)
        return EXIT_CONFIG
    result = run_file_loopback(
        args.input, args.out, config, threads=max(1, args.threads), force=args.force
    )
    print(f"file-loopback: {result.bytes_in} bytes in, {result.bytes_out} bytes out")
    if result.record is None:
        print("empty input, nothing transmitted")
    else:
        rec = result.record
        print(
            f"  Eb/N0 {rec.ebn0_db:g} dB: {rec.bit_errors} bit errors / {rec.bits_sent} bits "
            f"(ber {rec.ber:.3e} +-{rec.wilson_interval_halfwidth:.1e}), config_hash={config_hash(config)}"
        )
    return EXIT_OK


def _cmd_export_waveform(args, config) -> int:
    if args.out is None:
        print("config error: export-waveform needs --out PATH", file=sys.stderr)
        return EXIT_CONFIG
    export = export_waveform(config, args.out, force=args.force)
    print(
        f"export-waveform: delta_phi {export.params.delta_phi:.6f} rad, "
        f"t_shift {export.params.t_shift_s:.3e} s, {export.samples.size} samples -> {args.out}"
    )
    print("order  amplitude      phase_rad")
    for order, coeff in zip(export.orders, export.coefficients):
        print(f"{int(order):5d}  {abs(coeff):.9f}  {np.angle(coeff):+.9f}")
    print(f"closed-form order -1: {export.closed_form_minus1:.9f}")
    print(f"window energy (<= 1): {export.window_energy:.9f}")
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
