"""Anchor flooding: minimum hop counts and cumulative detection counts."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import Network

UNREACHABLE = -1


@dataclass(frozen=True, eq=False)
class HopMatrix:
    """``hops[a, k]``: hop count from the a-th anchor to node k, or UNREACHABLE."""

    anchor_ids: np.ndarray
    hops: np.ndarray

    @property
    def reachable(self) -> np.ndarray:
        return self.hops != UNREACHABLE

    def row(self, anchor_id: int) -> np.ndarray:
        return self.hops[int(np.searchsorted(self.anchor_ids, anchor_id))]


@dataclass(frozen=True, eq=False)
class HopCensus:
    """``n[a, m]``: nodes other than anchor a within m hops; ``n[a, 0] == 0``."""

    anchor_ids: np.ndarray
    n: np.ndarray

    @property
    def max_hop(self) -> int:
        return self.n.shape[1] - 1


def bfs_hops(adjacency, source: int) -> np.ndarray:
    hops = np.full(len(adjacency), UNREACHABLE, dtype=np.int64)
    hops[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        nxt = hops[u] + 1
        for v in adjacency[u]:
            if hops[v] == UNREACHABLE:
                hops[v] = nxt
                queue.append(v)
    return hops


def flood_hops(network: Network) -> HopMatrix:
    if network.adjacency is None:
        raise ValueError("network has no adjacency; call build_connectivity first")
    rows = [bfs_hops(network.adjacency, int(a)) for a in network.anchor_ids]
    hops = np.array(rows, dtype=np.int64).reshape(len(rows), network.n_nodes)
    return HopMatrix(network.anchor_ids.copy(), hops)


def hop_census(hop_matrix: HopMatrix) -> HopCensus:
    hops = hop_matrix.hops
    max_hop = int(hops.max()) if hops.size else 0
    counts = np.zeros((hops.shape[0], max_hop + 1), dtype=np.int64)
    for m in range(1, max_hop + 1):
        # the anchor itself sits at hop 0 and is excluded
        counts[:, m] = np.sum((hops >= 1) & (hops <= m), axis=1)
    return HopCensus(hop_matrix.anchor_ids.copy(), counts)


def write_hops_csv(hop_matrix: HopMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["anchor_id", "node_id", "hops"])
        for a, row in zip(hop_matrix.anchor_ids, hop_matrix.hops):
            for k, h in enumerate(row):
                w.writerow([int(a), k, int(h)])


def read_hops_csv(path) -> HopMatrix:
    entries: dict[int, dict[int, int]] = {}
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            entries.setdefault(int(rec["anchor_id"]), {})[int(rec["node_id"])] = int(rec["hops"])
    anchors = np.array(sorted(entries), dtype=np.int64)
    n_nodes = max((max(r) + 1 for r in entries.values()), default=0)
    hops = np.full((len(anchors), n_nodes), UNREACHABLE, dtype=np.int64)
    for i, a in enumerate(anchors):
        for k, h in entries[int(a)].items():
            hops[i, k] = h
    return HopMatrix(anchors, hops)
