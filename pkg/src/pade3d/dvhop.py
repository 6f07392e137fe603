"""Classic 3D DV-Hop: per-anchor hop size, hop distances, linearized LSQ."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hops import UNREACHABLE, HopMatrix
from .network import Network


class LocateStatus(enum.IntEnum):
    OK = 0
    DEGENERATE = 1
    UNLOCATABLE = 2


@dataclass(frozen=True, eq=False)
class AnchorHopSize:
    """Meters per hop for each anchor; NaN where the anchor reaches no other anchor."""

    anchor_ids: np.ndarray
    a_dis: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.a_dis)


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """``dis[a, k]`` in meters; NaN for unreachable pairs or undefined anchors."""

    anchor_ids: np.ndarray
    dis: np.ndarray


def avg_hop_distance(network: Network, hop_matrix: HopMatrix) -> AnchorHopSize:
    anchors = hop_matrix.anchor_ids
    pos = network.positions[anchors]
    # hops between anchors: column j of row i is the hop count from anchor i to anchor j
    h = hop_matrix.hops[:, anchors].astype(float)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    ok = (h != UNREACHABLE) & (h > 0)
    hop_sum = np.where(ok, h, 0.0).sum(axis=1)
    dist_sum = np.where(ok, dist, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        a_dis = np.where(hop_sum > 0, dist_sum / hop_sum, np.nan)
    return AnchorHopSize(anchors.copy(), a_dis)


def estimate_distances(hop_sizes: AnchorHopSize, hop_matrix: HopMatrix) -> DistanceTable:
    h = hop_matrix.hops
    dis = hop_sizes.a_dis[:, None] * h
    dis = np.where(h == UNREACHABLE, np.nan, dis)
    return DistanceTable(hop_matrix.anchor_ids.copy(), dis)


def solve_linearized(anchor_pos: np.ndarray, dists: np.ndarray, ref: int):
    """Least-squares solution of the sphere equations differenced against ``ref``.

    Returns ``(x, A, b, rank)`` for the system ``A x = b``.
    """
    others = np.arange(len(anchor_pos)) != ref
    p_r = anchor_pos[ref]
    p = anchor_pos[others]
    A = 2.0 * (p - p_r)
    b = (np.sum(p**2, axis=1) - p_r @ p_r) - dists[others] ** 2 + dists[ref] ** 2
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    rank = int(np.linalg.matrix_rank(A))
    return x, A, b, rank


def lsq_locate(
    distance_table: DistanceTable,
    hop_matrix: HopMatrix,
    network: Network,
    nodes=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Locate nodes from DV-Hop distances.

    Returns predicted positions (NaN rows for unlocatable nodes) and a
    ``LocateStatus`` per node, both indexed like ``nodes`` (default: the
    unknown nodes of ``network``).
    """
    if nodes is None:
        nodes = network.unknown_ids
    nodes = np.asarray(nodes, dtype=np.int64)
    anchor_pos = network.positions[distance_table.anchor_ids]
    side = network.side_length
    pred = np.full((len(nodes), 3), np.nan)
    status = np.full(len(nodes), LocateStatus.UNLOCATABLE, dtype=np.int64)
    for out, k in enumerate(nodes):
        d = distance_table.dis[:, k]
        usable = np.flatnonzero(np.isfinite(d))
        if len(usable) < 4:
            continue
        h = hop_matrix.hops[usable, k]
        # reference: farthest usable anchor in hops, lowest index on ties
        ref = int(np.flatnonzero(h == h.max())[0])
        x, _, _, rank = solve_linearized(anchor_pos[usable], d[usable], ref)
        if rank < 3:
            x = anchor_pos[usable].mean(axis=0)
            status[out] = LocateStatus.DEGENERATE
        else:
            status[out] = LocateStatus.OK
        pred[out] = np.clip(x, 0.0, side)
    return pred, status
