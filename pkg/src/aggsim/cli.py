"""``aggsim`` command line: run a configured sweep and write CSV.

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

from .config import SCHEMA, RunConfig, format_value, default_document, parse_config
from .error_model import GENERATOR_NAME
from .errors import AggsimError, ConfigError
from .simulator import SimResult, TxMetrics, simulate

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def columns(config: RunConfig) -> list[str]:
    """CSV header: swept keys, seed, generator, metrics, then every other parameter."""
    swept = [k for k, _ in config.sweep]
    rest = [k for k in SCHEMA if k not in swept and k != "run.seeds"]
    return swept + ["seed", "generator"] + TxMetrics.field_names() + rest


def _metric_text(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _one(args: tuple[dict[str, Any], dict[str, Any], int, bool]) -> SimResult:
    values, point, seed, trace = args
    cfg = RunConfig(values)
    return simulate(cfg.scenario(point, seed), trace=trace)


def execute(config: RunConfig, parallel: int = 1, trace: bool = False) -> list[tuple[dict[str, Any], int, SimResult]]:
    """Run every (sweep point, seed) pair; results come back in plan order."""
    plan = config.plan()
    jobs = [(config.values, point, seed, trace) for point, seed in plan]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]
    return [(p, s, r) for (p, s), r in zip(plan, results)]


def rows_for(config: RunConfig, results: Sequence[tuple[dict[str, Any], int, SimResult]]) -> list[list[str]]:
    header = columns(config)
    rows = [header]
    for point, seed, res in results:
        resolved = config.resolve(point)
        metrics = {name: _metric_text(getattr(res.metrics, name)) for name in TxMetrics.field_names()}
        row = []
        for col in header:
            if col == "seed":
                row.append(str(seed))
            elif col == "generator":
                row.append(GENERATOR_NAME)
            elif col in metrics:
                row.append(metrics[col])
            else:
                row.append(format_value(resolved[col]))
        rows.append(row)
    return rows


def run_sweep(config: RunConfig, parallel: int = 1) -> list[list[str]]:
    """CSV rows (header first) for every sweep point and seed."""
    return rows_for(config, execute(config, parallel))


def to_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def metadata(config: RunConfig) -> dict[str, Any]:
    return {
        "generator": GENERATOR_NAME,
        "columns": columns(config),
        "sweep": [[k, [format_value(v) for v in vals]] for k, vals in config.sweep],
        "seeds": list(config.seeds),
        "runs": len(config.plan()),
        "parameters": config.echo(),
        "notes": {
            "warmup": "saturated runs measure goodput, efficiency and delay from the first "
            "exchange starting after run.warmup_fraction of run.duration_us",
            "counts": "msdus_* counters, ppdu_count and retransmitted_bytes cover the whole run",
        },
    }


def gnuplot_stub(config: RunConfig, csv_path: str) -> str:
    x = config.sweep[0][0] if config.sweep else "seed"
    cols = columns(config)
    xi, yi = cols.index(x) + 1, cols.index("efficiency") + 1
    return (
        "# generated by aggsim; edit freely\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set xlabel '{x}'\n"
        "set ylabel 'channel efficiency'\n"
        "set yrange [0:1]\n"
        f"plot '{csv_path}' using {xi}:{yi} with linespoints\n"
    )


def _trace_text(results: Sequence[tuple[dict[str, Any], int, SimResult]]) -> str:
    lines = ["# time_us\tevent_kind\ttid\tseq_no\tsize_bytes\toutcome"]
    for i, (point, seed, res) in enumerate(results):
        desc = " ".join(f"{k}={format_value(v)}" for k, v in point.items())
        lines.append(f"# run={i} seed={seed} {desc}".rstrip())
        lines.extend(ev.format() for ev in res.trace)
    return "\n".join(lines) + "\n"


def _ensure_writable(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a"):
        pass


def cmd_run(args: argparse.Namespace) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"aggsim: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text)
        if args.seeds is not None:
            config = config.with_seeds(args.seeds)
        if args.allow_large_sweep:
            config.values["run.allow_large_sweep"] = True
        config.check_size()
    except ConfigError as exc:
        print(f"aggsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out or config.output)
    try:
        _ensure_writable(out)
        if args.trace:
            _ensure_writable(Path(args.trace))
        results = execute(config, max(1, args.parallel), trace=bool(args.trace))
        out.write_text(to_csv(rows_for(config, results)))
        Path(str(out) + ".meta.json").write_text(json.dumps(metadata(config), indent=2) + "\n")
        Path(str(out) + ".gp").write_text(gnuplot_stub(config, out.name))
        if args.trace:
            Path(args.trace).write_text(_trace_text(results))
    except (OSError, AggsimError) as exc:
        print(f"aggsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"aggsim: {len(results)} runs -> {out}", file=sys.stderr)
    return EXIT_OK


def cmd_defaults(args: argparse.Namespace) -> int:
    sys.stdout.write(default_document())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aggsim", description="802.11 two-layer aggregation link simulator")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenarios described by a config file")
    r.add_argument("--config", required=True, help="key = value (or JSON) config file")
    r.add_argument("--out", help="CSV output path (default: run.output)")
    r.add_argument("--seeds", type=int, help="use N consecutive seeds starting at the first configured seed")
    r.add_argument("--parallel", type=int, default=1, help="worker processes")
    r.add_argument("--trace", help="write a tab-separated event trace here")
    r.add_argument("--allow-large-sweep", action="store_true", help="lift the run count bound")
    r.set_defaults(func=cmd_run)
    d = sub.add_parser("defaults", help="print every config key with its default")
    d.set_defaults(func=cmd_defaults)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
