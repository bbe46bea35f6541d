"""Command-line front end.

Subcommands:
  run        one scenario -> CSV row (plus Monte Carlo goodput if enabled)
  sweep      Cartesian parameter sweep -> CSV dataset
  timeline   one cycle as a channel-by-subframe grid (text/SVG) or as the
             per-SF export format (csv)
  calibrate  fit the unpublished grant/processing parameters to the
             protocol's reference throughput gain and store them

Exit status: 0 success, 2 infeasible link, 3 configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bler import default_table, load_bler_table
from .errors import ConfigError, InfeasibleLinkError, InvalidInputError
from .metrics import SchedulingMode
from .scenario import (
    ScenarioConfig,
    calibrate,
    load_config,
    parse_config_text,
    results_to_csv,
    run_scenario,
    select_tbphc,
    sweep,
    update_config_file,
    build_cycle_params,
)
from .scheduler import (
    Activity,
    ConflictReport,
    SubframeTimeline,
    bs_view,
    build_legacy_cycle,
    build_proposed_cycle,
    export_timeline,
)
from .geometry import round_trip_time, slant_range
from .linkbudget import snr_db
from .bler import select_repetitions

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3

_CHANNEL_ROWS = (
    ("PDCCH", Activity.RX_PDCCH),
    ("PDSCH", Activity.RX_PDSCH),
    ("PUCCH", Activity.TX_PUCCH),
    ("PUSCH", Activity.TX_PUSCH),
    ("switch", Activity.SWITCH),
)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_table(path: str | None):
    return load_bler_table(path) if path else default_table()


# ---------------------------------------------------------------------------
# timeline rendering


def render_timeline_text(timeline: SubframeTimeline, conflicts: ConflictReport | None = None) -> str:
    """One row per channel, one column per subframe; cells show the TB
    index (or ``#`` for untagged activity)."""
    width = 3
    n = len(timeline.slots)
    header = "sf".ljust(8) + "".join(
        str(timeline.origin + i).rjust(width) for i in range(n)
    )
    rows = []
    for label, activity in _CHANNEL_ROWS:
        cells = []
        for uses in timeline.slots:
            mark = ""
            for use in uses:
                if use.activity is activity:
                    mark = "#" if use.tb_index is None else str(use.tb_index)
            cells.append(mark.rjust(width))
        rows.append(label.ljust(8) + "".join(cells))
    lines = [header, *rows]
    if conflicts:
        for c in conflicts.conflicts:
            tbs = ",".join("-" if t is None else str(t) for t in c.tb_indices)
            lines.append(
                f"! {c.kind} at SF {c.sf_index}: {' / '.join(c.activities)} (tb {tbs})"
            )
    return "\n".join(lines) + "\n"


def render_timeline_svg(timeline: SubframeTimeline, conflicts: ConflictReport | None = None) -> str:
    cell_w, cell_h, left, top = 18, 22, 70, 24
    n = len(timeline.slots)
    width = left + n * cell_w + 10
    height = top + len(_CHANNEL_ROWS) * cell_h + 40
    fills = {
        Activity.RX_PDCCH: "#4c78a8",
        Activity.RX_PDSCH: "#72b7b2",
        Activity.TX_PUCCH: "#f58518",
        Activity.TX_PUSCH: "#e45756",
        Activity.SWITCH: "#b0b0b0",
    }
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="10">'
    ]
    for row, (label, _) in enumerate(_CHANNEL_ROWS):
        y = top + row * cell_h
        parts.append(f'<text x="4" y="{y + 14}">{label}</text>')
    for i in range(n):
        x = left + i * cell_w
        parts.append(f'<text x="{x + 3}" y="{top - 8}">{timeline.origin + i}</text>')
        for row, (_, activity) in enumerate(_CHANNEL_ROWS):
            y = top + row * cell_h
            for use in timeline.slots[i]:
                if use.activity is activity:
                    tb = "" if use.tb_index is None else str(use.tb_index)
                    parts.append(
                        f'<rect x="{x}" y="{y}" width="{cell_w - 1}" height="{cell_h - 1}" '
                        f'fill="{fills[activity]}"/>'
                    )
                    if tb:
                        parts.append(f'<text x="{x + 5}" y="{y + 14}" fill="white">{tb}</text>')
    if conflicts:
        y = top + len(_CHANNEL_ROWS) * cell_h + 16
        for c in conflicts.conflicts:
            parts.append(
                f'<text x="4" y="{y}" fill="#c00">{c.kind} at SF {c.sf_index}: '
                f'{" / ".join(c.activities)}</text>'
            )
            y += 14
    parts.append("</svg>")
    return "".join(parts) + "\n"


def render_timeline(
    config: ScenarioConfig,
    perspective: str = "ue",
    fmt: str = "text",
    table=None,
) -> tuple[str, int]:
    """Build the configured cycle and render it; legacy conflicts render
    the attempted layout with annotations."""
    table = table if table is not None else default_table()
    rtt_ms = round_trip_time(config.geometry)
    distance_m = slant_range(config.geometry.altitude_km, config.geometry.service_elevation_deg) * 1000.0
    snr = snr_db(config.link, distance_m)
    n_rep = select_repetitions(table, config.tbs_bits, snr, config.target_bler)
    if config.mode is SchedulingMode.LEGACY_FIXED:
        n_tbphc = config.n_tbphc or 1
    else:
        n_tbphc = select_tbphc(config, n_rep, rtt_ms)
    params = build_cycle_params(config, n_rep, n_tbphc)
    conflicts = None
    if config.mode is SchedulingMode.LEGACY_FIXED:
        built = build_legacy_cycle(params, config.direction)
        if isinstance(built, ConflictReport):
            conflicts = built
            timeline = built.attempt
        else:
            timeline = built
    else:
        timeline = build_proposed_cycle(params, config.direction)
    if perspective == "bs":
        timeline = bs_view(timeline, rtt_ms)
    if fmt == "svg":
        return render_timeline_svg(timeline, conflicts), EXIT_OK
    if fmt == "csv":
        return export_timeline(timeline), EXIT_OK
    return render_timeline_text(timeline, conflicts), EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    table = _load_table(args.bler_table)
    result = run_scenario(config, table)
    text = results_to_csv([result])
    if result.goodput is not None:
        text += (
            f"# monte_carlo goodput_bps={result.goodput.goodput_bps:.6g} "
            f"retransmission_rate={result.goodput.retransmission_rate:.6g}\n"
        )
    _emit(text, args.out)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    raw = parse_config_text(Path(args.config).read_text())
    axes = []
    for spec in args.axis or []:
        if "=" not in spec:
            raise ConfigError(f"--axis expects key=v1,v2,..., got {spec!r}")
        key, values = spec.split("=", 1)
        axes.append((key.strip(), [v.strip() for v in values.split(",") if v.strip()]))
    table = _load_table(args.bler_table)
    results = sweep(raw, axes, table)
    _emit(results_to_csv(results), args.out)
    return EXIT_OK


def _cmd_timeline(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    table = _load_table(args.bler_table)
    text, status = render_timeline(config, args.perspective, args.format, table)
    _emit(text, args.out)
    return status


def _cmd_calibrate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    table = _load_table(args.bler_table)
    result = calibrate(config, table)
    lines = [
        f"rep_pdcch={result.rep_pdcch} n_a2g={result.n_a2g}",
        f"gain_pct={result.gain_pct:.6g} target={result.target_gain_pct:.6g}",
    ]
    if result.degraded:
        lines.append(
            "DEGRADED: no candidate landed within tolerance; closest achieved gain reported"
        )
    print("\n".join(lines))
    if not args.dry_run:
        update_config_file(
            args.config,
            {
                "cycle.rep_pdcch": str(result.rep_pdcch),
                "cycle.n_a2g": str(result.n_a2g),
            },
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntn-harq",
        description="HARQ scheduling and throughput analysis for IoT links over LEO satellites",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and emit a CSV row")
    run_p.add_argument("config")
    run_p.add_argument("--bler-table", default=None)
    run_p.add_argument("--out", default=None)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep and emit CSV")
    sweep_p.add_argument("config")
    sweep_p.add_argument("--axis", action="append", metavar="KEY=V1,V2,...")
    sweep_p.add_argument("--bler-table", default=None)
    sweep_p.add_argument("--out", default=None)
    sweep_p.set_defaults(func=_cmd_sweep)

    tl_p = sub.add_parser("timeline", help="render one cycle as text or SVG")
    tl_p.add_argument("config")
    tl_p.add_argument("--perspective", choices=("ue", "bs"), default="ue")
    tl_p.add_argument("--format", choices=("text", "svg", "csv"), default="text")
    tl_p.add_argument("--bler-table", default=None)
    tl_p.add_argument("--out", default=None)
    tl_p.set_defaults(func=_cmd_timeline)

    cal_p = sub.add_parser(
        "calibrate",
        help="fit rep_pdcch and n_a2g to the protocol's reference gain and store them",
    )
    cal_p.add_argument("config")
    cal_p.add_argument("--bler-table", default=None)
    cal_p.add_argument("--dry-run", action="store_true", help="print the pair without rewriting the config")
    cal_p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleLinkError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, InvalidInputError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
