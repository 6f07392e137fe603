"""Experiment grid: localize, score and aggregate.

A run is one (distribution, N_a, R, repeat) cell instance.  The node cloud
depends only on (distribution, repeat), and the anchors are a prefix of a
fixed permutation, so every N_a and R in a repeat sees the same sensors.
Every node's genetic search draws from its own stream keyed by the full run
coordinates, which makes results independent of worker count and order.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dvhop, hops, moga, pade
from .config import RunConfig
from .metrics import ala, ale, confidence_interval
from .network import DeploymentSpec, Distribution, Network, generate_deployment

log = logging.getLogger(__name__)

DIST_ORDER = {d.value: i for i, d in enumerate(Distribution)}
METHOD_ORDER = {"classic": 0, "moga": 1}
BASELINE = "classic"


@dataclass(frozen=True)
class ResultRecord:
    dist: str
    na: int
    radius: float
    repeat: int
    method: str
    ale_pct: float
    unlocatable: int
    seconds: float = math.nan
    error: str | None = None

    @property
    def key(self):
        return (DIST_ORDER[self.dist], self.na, self.radius, self.repeat, METHOD_ORDER[self.method])

    @property
    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.ale_pct)


@dataclass(frozen=True)
class CellStats:
    dist: str
    method: str
    na: int
    radius: float
    n: int
    mean_ale: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class SummaryStats:
    dist: str
    method: str
    mean_ale: float
    ala: float
    ci_low: float
    ci_high: float
    apg_vs_baseline: float


# ---------------------------------------------------------------------------
# seeding

def _radius_key(radius: float) -> int:
    return int(round(radius * 1000))


def deployment_seed(master: int, dist: str, repeat: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(1, DIST_ORDER[dist], repeat))
    return int(ss.generate_state(1, np.uint64)[0])


def node_rng(master: int, dist: str, na: int, radius: float, repeat: int, node: int) -> np.random.Generator:
    key = (2, DIST_ORDER[dist], na, _radius_key(radius), repeat, int(node))
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=key))


def deployment_for(config: RunConfig, dist: str, na: int, radius: float, repeat: int) -> Network:
    spec = DeploymentSpec(
        total_nodes=config.total_nodes,
        anchor_count=na,
        side_length=config.side_length,
        radius=radius,
        distribution=dist,
        seed=deployment_seed(config.seed, dist, repeat),
    )
    return generate_deployment(spec)


# ---------------------------------------------------------------------------
# one network

def node_contexts(network, distance_table, pade_table, lsq_pred, nodes) -> list[moga.NodeContext]:
    """Build the per-node search problems.

    Anchors without a hop-size distance are masked out.  A missing band
    expectation falls back to the hop-size distance for that pair.
    """
    anchors = network.anchor_positions
    out = []
    for j, k in enumerate(nodes):
        d = distance_table.dis[:, k]
        e = pade_table.e_dis_pair[:, k]
        e = np.where(np.isfinite(e), e, d)
        mask = np.isfinite(d).astype(float)
        out.append(moga.NodeContext(
            anchors, np.nan_to_num(d), np.nan_to_num(e), network.side_length,
            init=lsq_pred[j], mask=mask,
        ))
    return out


def localize(network: Network, config: RunConfig, methods=None, rng_for=None) -> dict:
    """Predicted positions of the unknown nodes for each method.

    ``rng_for(node_id)`` supplies the genetic search stream of one node.
    Returns ``{method: (pred, seconds)}``; NaN rows are unlocatable.
    """
    methods = tuple(methods or config.methods)
    t0 = time.perf_counter()
    hm = hops.flood_hops(network)
    hs = dvhop.avg_hop_distance(network, hm)
    dt = dvhop.estimate_distances(hs, hm)
    unknown = network.unknown_ids
    lsq_pred, status = dvhop.lsq_locate(dt, hm, network, unknown)
    t_classic = time.perf_counter() - t0
    out = {}
    if "classic" in methods:
        out["classic"] = (lsq_pred, t_classic)
    if "moga" in methods:
        t1 = time.perf_counter()
        census = hops.hop_census(hm)
        table = pade.build_pade_table(hm, census, network.radius, config.normalize_expectation)
        located = status != dvhop.LocateStatus.UNLOCATABLE
        nodes = unknown[located]
        ctxs = node_contexts(network, dt, table, lsq_pred[located], nodes)
        if rng_for is None:
            rng_for = lambda k: np.random.default_rng([config.seed, int(k)])  # noqa: E731
        rngs = [rng_for(k) for k in nodes]
        pred = np.full((len(unknown), 3), np.nan)
        pred[located] = moga.evolve_batch(ctxs, config.ga_config(), rngs)
        out["moga"] = (pred, t_classic + time.perf_counter() - t1)
    return out


def run_single(config: RunConfig, dist: str, na: int, radius: float, repeat: int) -> list[ResultRecord]:
    """All methods on one (distribution, N_a, R, repeat) instance."""
    try:
        net = deployment_for(config, dist, na, radius, repeat)
        found = localize(
            net, config,
            rng_for=lambda k: node_rng(config.seed, dist, na, radius, repeat, k),
        )
    except Exception as exc:  # recorded, the grid carries on
        log.warning("run %s/%d/%g/%d failed: %s", dist, na, radius, repeat, exc)
        return [ResultRecord(dist, na, radius, repeat, m, math.nan, 0, math.nan, repr(exc))
                for m in config.methods]
    gt = net.positions[net.unknown_ids]
    records = []
    for method in config.methods:
        pred, seconds = found[method]
        pct, bad = ale(pred, gt, radius)
        err = None if math.isfinite(pct) else "no located nodes"
        records.append(ResultRecord(dist, na, radius, repeat, method, pct, bad, seconds, err))
    return records


# ---------------------------------------------------------------------------
# grid

def grid_tasks(config: RunConfig) -> list[tuple]:
    return [
        (dist, na, r, rep)
        for dist in config.distributions
        for na in config.anchor_counts
        for r in config.radii
        for rep in range(config.repeats)
    ]


def _run_task(args):
    config, task = args
    return run_single(config, *task)


def run_grid(config: RunConfig, progress=None) -> list[ResultRecord]:
    """Run every task; records come back sorted by (cell, repeat, method)."""
    tasks = grid_tasks(config)
    records: list[ResultRecord] = []
    if config.workers == 1:
        for i, task in enumerate(tasks):
            records.extend(run_single(config, *task))
            if progress:
                progress(i + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            jobs = pool.map(_run_task, [(config, t) for t in tasks], chunksize=1)
            for i, recs in enumerate(jobs):
                records.extend(recs)
                if progress:
                    progress(i + 1, len(tasks))
    return sorted(records, key=lambda r: r.key)


# ---------------------------------------------------------------------------
# aggregation

def _ci(values) -> tuple[float, float]:
    if len(values) < 2:
        return math.nan, math.nan
    return confidence_interval(values)


def cell_stats(records) -> list[CellStats]:
    groups = defaultdict(list)
    for r in records:
        if r.ok:
            groups[(r.dist, r.method, r.na, r.radius)].append(r.ale_pct)
    out = []
    for (dist, method, na, radius), vals in groups.items():
        lo, hi = _ci(vals)
        out.append(CellStats(dist, method, na, radius, len(vals), float(np.mean(vals)), lo, hi))
    return sorted(out, key=lambda c: (DIST_ORDER[c.dist], METHOD_ORDER[c.method], c.na, c.radius))


def summarize(records) -> list[SummaryStats]:
    """Per (distribution, method) grid summaries.

    The grid ALE is the unweighted mean of the cell means.  The interval
    is taken over repeats, each repeat contributing its own grid-mean ALE.
    APG is against the baseline on the cells both methods completed.
    """
    cells = cell_stats(records)
    by_dm = defaultdict(dict)
    for c in cells:
        by_dm[(c.dist, c.method)][(c.na, c.radius)] = c.mean_ale
    per_repeat = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.ok:
            per_repeat[(r.dist, r.method)][r.repeat].append(r.ale_pct)
    out = []
    for (dist, method), grid in sorted(by_dm.items(), key=lambda kv: (DIST_ORDER[kv[0][0]], METHOD_ORDER[kv[0][1]])):
        mean = float(np.mean(list(grid.values())))
        reps = [float(np.mean(v)) for _, v in sorted(per_repeat[(dist, method)].items())]
        lo, hi = _ci(reps)
        base = by_dm.get((dist, BASELINE))
        gain = math.nan
        if base is not None:
            shared = sorted(set(base) & set(grid))
            if shared:
                gain = float(np.mean([base[k] - grid[k] for k in shared]))
        out.append(SummaryStats(dist, method, mean, ala([mean]), lo, hi, gain))
    return out


# ---------------------------------------------------------------------------
# output

def _num(x: float) -> str:
    return "" if x is None or not math.isfinite(x) else f"{x:.6f}"


def _r(x: float) -> str:
    return f"{x:g}"


def write_results_csv(records, path, timings: bool = False) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "Na", "R", "repeat", "method", "ale_pct", "unlocatable", "seconds"])
        for r in records:
            w.writerow([r.dist, r.na, _r(r.radius), r.repeat, r.method,
                        _num(r.ale_pct), r.unlocatable, _num(r.seconds) if timings else ""])


def read_results_csv(path) -> list[ResultRecord]:
    with Path(path).open(newline="") as fh:
        return [
            ResultRecord(
                row["dist"], int(row["Na"]), float(row["R"]), int(row["repeat"]), row["method"],
                float(row["ale_pct"]) if row["ale_pct"] else math.nan,
                int(row["unlocatable"]),
                float(row["seconds"]) if row["seconds"] else math.nan,
                None if row["ale_pct"] else "missing",
            )
            for row in csv.DictReader(fh)
        ]


def write_timings_csv(records, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "Na", "R", "repeat", "method", "seconds"])
        for r in records:
            w.writerow([r.dist, r.na, _r(r.radius), r.repeat, r.method, _num(r.seconds)])


def write_summary_csv(summary, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "method", "ala_pct", "ci_low", "ci_high", "apg_vs_baseline"])
        for s in summary:
            w.writerow([s.dist, s.method, _num(s.ala), _num(s.ci_low), _num(s.ci_high),
                        _num(s.apg_vs_baseline)])


def write_cells_csv(cells, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "method", "Na", "R", "n", "mean_ale", "ci_low", "ci_high"])
        for c in cells:
            w.writerow([c.dist, c.method, c.na, _r(c.radius), c.n,
                        _num(c.mean_ale), _num(c.ci_low), _num(c.ci_high)])


def write_plot_data(cells, out_dir) -> list[Path]:
    """Mean ALE against N_a (one series per R) and against R (one per N_a)."""
    out_dir = Path(out_dir)
    vs_na = out_dir / "plot_ale_vs_na.csv"
    vs_r = out_dir / "plot_ale_vs_r.csv"
    with vs_na.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "method", "R", "Na", "mean_ale"])
        for c in sorted(cells, key=lambda c: (DIST_ORDER[c.dist], METHOD_ORDER[c.method], c.radius, c.na)):
            w.writerow([c.dist, c.method, _r(c.radius), c.na, _num(c.mean_ale)])
    with vs_r.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist", "method", "Na", "R", "mean_ale"])
        for c in cells:
            w.writerow([c.dist, c.method, c.na, _r(c.radius), _num(c.mean_ale)])
    return [vs_na, vs_r]


def write_outputs(records, config: RunConfig, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = cell_stats(records)
    summary = summarize(records)
    paths = {
        "results": out_dir / "results.csv",
        "summary": out_dir / "summary.csv",
        "cells": out_dir / "cells.csv",
    }
    write_results_csv(records, paths["results"], config.record_timings)
    write_summary_csv(summary, paths["summary"])
    write_cells_csv(cells, paths["cells"])
    paths["plot_na"], paths["plot_r"] = write_plot_data(cells, out_dir)
    if config.record_timings:
        paths["timings"] = out_dir / "timings.csv"
        write_timings_csv(records, paths["timings"])
    return paths
