"""Command-line entry point.

    pade3d generate   deployment CSVs per (distribution, repeat)
    pade3d run        the experiment grid, summary and plot data
    pade3d tables     per-anchor hop-band bound and expectation dumps
    pade3d report     re-aggregate an existing results CSV

Exit codes: 0 success, 1 usage or configuration error, 2 every run failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiment as ex
from . import hops, pade
from .config import RunConfig, load_config, write_manifest
from .errors import ParameterError
from .moga import PARETO_PICKS
from .network import read_deployment_csv, write_deployment_csv

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    p.add_argument("--na", type=int, nargs="+", help="anchor counts")
    p.add_argument("--radius", type=float, nargs="+", help="communication radii")
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--dist", choices=["uniform", "multimodal", "both"])
    p.add_argument("--method", choices=["classic", "moga", "both"])
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--nodes", type=int, help="total node count")
    p.add_argument("--pop-size", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--pareto-pick", choices=PARETO_PICKS)
    p.add_argument("--unnormalized", action="store_true",
                   help="use the raw (defective) band expectations")
    p.add_argument("--timings", action="store_true", help="record wall times")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pade3d", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write deployment CSVs")
    _common(g)

    r = sub.add_parser("run", help="run the experiment grid")
    _common(r)

    t = sub.add_parser("tables", help="dump hop-band tables for one network")
    _common(t)
    t.add_argument("--repeat-index", type=int, default=0)
    t.add_argument("--deployment", type=Path, help="read this deployment CSV instead of generating")

    rep = sub.add_parser("report", help="summarize an existing results CSV")
    rep.add_argument("results", type=Path, nargs="?", help="results CSV (default: <out>/results.csv)")
    rep.add_argument("--out", type=Path, default=Path("results"))
    return parser


def resolve_config(args) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    dists = None
    if args.dist:
        dists = ("uniform", "multimodal") if args.dist == "both" else (args.dist,)
    methods = None
    if args.method:
        methods = ("classic", "moga") if args.method == "both" else (args.method,)
    return config.replace(
        anchor_counts=args.na,
        radii=args.radius,
        repeats=args.repeats,
        seed=args.seed,
        distributions=dists,
        methods=methods,
        workers=args.workers,
        out=str(args.out) if args.out else None,
        total_nodes=args.nodes,
        pop_size=args.pop_size,
        max_iter=args.max_iter,
        pareto_pick=args.pareto_pick,
        normalize_expectation=False if args.unnormalized else None,
        record_timings=True if args.timings else None,
    )


# ---------------------------------------------------------------------------
# commands

def cmd_generate(config: RunConfig) -> list[Path]:
    """One file per (distribution, repeat); anchors flagged for the first N_a."""
    out = Path(config.out) / "deployments"
    out.mkdir(parents=True, exist_ok=True)
    na = config.anchor_counts[0]
    written = []
    for dist in config.distributions:
        for rep in range(config.repeats):
            net = ex.deployment_for(config, dist, na, config.radii[0], rep)
            path = out / f"{dist}_{rep:03d}.csv"
            write_deployment_csv(net, path)
            written.append(path)
    print(f"wrote {len(written)} deployments to {out}")
    return written


def print_summary(summary, stream=None) -> None:
    stream = stream or sys.stdout
    print(f"{'dist':<11}{'method':<9}{'ALE%':>9}{'ALA%':>9}{'ALE lo':>9}{'ALE hi':>9}{'APG':>9}",
          file=stream)
    for s in summary:
        print(f"{s.dist:<11}{s.method:<9}{s.mean_ale:9.2f}{s.ala:9.2f}{s.ci_low:9.2f}"
              f"{s.ci_high:9.2f}{s.apg_vs_baseline:9.2f}", file=stream)


def cmd_run(config: RunConfig) -> int:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    n_tasks = len(ex.grid_tasks(config))

    def progress(i, n):
        if i == n or i % max(1, n // 20) == 0:
            print(f"  {i}/{n} runs", file=sys.stderr, flush=True)

    records = ex.run_grid(config, progress=progress)
    paths = ex.write_outputs(records, config, out)
    write_manifest(config, out / "manifest.json", tasks=n_tasks)
    failed = sum(not r.ok for r in records)
    if failed:
        print(f"{failed} of {len(records)} records failed", file=sys.stderr)
    if failed == len(records):
        return EXIT_FAILED
    print_summary(ex.summarize(records))
    print(f"results: {paths['results']}")
    return EXIT_OK


def cmd_tables(config: RunConfig, repeat: int = 0, deployment: Path | None = None) -> list[Path]:
    radius = config.radii[0]
    if deployment is not None:
        net = read_deployment_csv(deployment, radius, config.side_length)
    else:
        dist = config.distributions[0]
        net = ex.deployment_for(config, dist, config.anchor_counts[0], radius, repeat)
    hm = hops.flood_hops(net)
    table = pade.build_pade_table(hm, hops.hop_census(hm), radius, config.normalize_expectation)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "pmde.csv", out / "pade.csv"]
    pade.write_pmde_csv(table, paths[0])
    pade.write_pade_csv(table, paths[1])
    print(f"wrote {sum(1 for _ in table.rows())} bands to {paths[1]}")
    return paths


def cmd_report(results: Path, out: Path) -> int:
    records = ex.read_results_csv(results)
    if not records:
        print("no records", file=sys.stderr)
        return EXIT_FAILED
    cells = ex.cell_stats(records)
    summary = ex.summarize(records)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_summary_csv(summary, out / "summary.csv")
    ex.write_cells_csv(cells, out / "cells.csv")
    ex.write_plot_data(cells, out)
    print_summary(summary)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            results = args.results or args.out / "results.csv"
            if not results.exists():
                raise UsageError(f"no results file at {results}")
            return cmd_report(results, args.out)
        config = resolve_config(args)
        if args.command == "generate":
            cmd_generate(config)
            return EXIT_OK
        if args.command == "run":
            return cmd_run(config)
        cmd_tables(config, args.repeat_index, args.deployment)
        return EXIT_OK
    except (ParameterError, UsageError, ValueError, FileNotFoundError) as exc:
        print(f"pade3d: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pade3d: error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
