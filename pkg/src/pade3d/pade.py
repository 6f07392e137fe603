"""Expected distance of a node an anchor detects at hop m.

Within hop band m the node is spread uniformly in volume over the shell
[LB, UB], i.e. its CDF is (r^3 - LB^3) / (UB^3 - LB^3), and it is weighted
by the same relay-presence probability as the outermost-node model.  The
lower bound chains through the bands: 0 for m = 1, UB_1 for m = 2 and the
previous band's expected distance beyond that.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BandError, DomainError
from .hops import HopCensus, HopMatrix
from .pmde import band_epsilon, relay_weight, upper_bounds
from .quadrature import weighted_radius_moments


@dataclass(frozen=True, eq=False)
class PadeTable:
    """Per-anchor band tables indexed ``[anchor_row, m]`` plus the pair lookup."""

    anchor_ids: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    e_dis: np.ndarray
    e_dis_pair: np.ndarray

    def rows(self):
        """Yield ``(anchor_id, m, lb, e_dis, ub)`` for every defined band."""
        for a, anchor in enumerate(self.anchor_ids):
            for m in range(1, self.ub.shape[1]):
                if np.isfinite(self.ub[a, m]):
                    yield int(anchor), m, self.lb[a, m], self.e_dis[a, m], self.ub[a, m]


def node_probability(r_k, lb: float, ub: float):
    if not lb < ub:
        raise BandError(f"empty band: lb={lb} >= ub={ub}")
    r = np.asarray(r_k, dtype=float)
    if np.any((r < lb) | (r > ub)):
        raise DomainError(f"r_k must lie in [{lb}, {ub}]")
    out = (r**3 - lb**3) / (ub**3 - lb**3)
    return out if out.ndim else float(out)


def band_expectation(census_row, ub_row, R: float, m: int, lb: float, normalize: bool = True) -> float:
    """Expected distance in band m for an explicit lower bound."""
    ub = float(ub_row[m])
    if not lb < ub:
        raise BandError(f"hop {m}: empty band lb={lb} >= ub={ub}")
    if m == 1:
        m0, m1 = weighted_radius_moments(None, lb, ub, 1.0)
        return m1 / m0 if normalize else m1
    eps = band_epsilon(census_row, m)
    weight, kinks = relay_weight(R, float(ub_row[m - 1]), eps)
    m0, m1 = weighted_radius_moments(weight, lb, ub, 1.0, kinks)
    if normalize:
        if m0 <= 0:
            raise BandError(f"hop {m}: no relay support inside [{lb}, {ub}]")
        return m1 / m0
    # the defective expectation can undershoot the band; keep it inside
    return min(max(m1, lb), ub)


def expected_distances(census_row, ub_row, R: float, normalize: bool = True):
    """Chain the bands; returns ``(lb, e_dis)`` arrays aligned with ``ub_row``."""
    ub_row = np.asarray(ub_row, dtype=float)
    lb = np.full(len(ub_row), np.nan)
    e = np.full(len(ub_row), np.nan)
    for m in range(1, len(ub_row)):
        if not np.isfinite(ub_row[m]):
            break
        if m == 1:
            lo = 0.0
        elif m == 2:
            lo = float(ub_row[1])
        else:
            lo = float(e[m - 1])
        try:
            val = band_expectation(census_row, ub_row, R, m, lo, normalize)
        except BandError:
            break
        lb[m] = lo
        e[m] = val
    return lb, e


def expected_distance(census_row, pmde_row, R: float, m: int, normalize: bool = True) -> float:
    """E_dis for band m; raises BandError if the chain breaks at or before m."""
    lb, e = expected_distances(census_row, pmde_row, R, normalize)
    if m >= len(e) or not np.isfinite(e[m]):
        raise BandError(f"hop {m}: band undefined")
    return float(e[m])


def build_pade_table(
    hop_matrix: HopMatrix,
    census: HopCensus,
    R: float,
    normalize: bool = True,
) -> PadeTable:
    n_anchor, width = census.n.shape
    lb = np.full((n_anchor, width), np.nan)
    ub = np.full((n_anchor, width), np.nan)
    e = np.full((n_anchor, width), np.nan)
    for a in range(n_anchor):
        row = census.n[a]
        ub[a] = upper_bounds(row, R, normalize)
        lb[a], e[a] = expected_distances(row, ub[a], R, normalize)
    hops = hop_matrix.hops
    pair = np.full(hops.shape, np.nan)
    for a in range(n_anchor):
        h = hops[a]
        ok = h >= 1
        pair[a, ok] = e[a, h[ok]]
        pair[a, h == 0] = 0.0
    return PadeTable(census.anchor_ids.copy(), lb, ub, e, pair)


def write_pade_csv(table: PadeTable, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["anchor_id", "m", "lb", "e_dis", "ub"])
        for anchor, m, lo, ed, hi in table.rows():
            w.writerow([anchor, m, _fmt(lo), _fmt(ed), _fmt(hi)])


def write_pmde_csv(table: PadeTable, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["anchor_id", "m", "ub_m"])
        for anchor, m, _, _, hi in table.rows():
            w.writerow([anchor, m, _fmt(hi)])


def read_pade_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [
            {"anchor_id": int(r["anchor_id"]), "m": int(r["m"]),
             "lb": float(r["lb"]), "e_dis": float(r["e_dis"]), "ub": float(r["ub"])}
            for r in csv.DictReader(fh)
        ]


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.6f}"
